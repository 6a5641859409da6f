//! n78 / 30 kHz numerology: frame timing, cyclic prefixes and the GSCN raster.
//!
//! All sample counts are at 122.88 Msps (4096 × 30 kHz).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCS_HZ: u64 = 30_000;
pub const N_FFT: usize = 4096;
pub const SAMPLE_RATE_HZ: u64 = N_FFT as u64 * SCS_HZ;
pub const N_SUBCARRIERS_MAX: usize = 3276;
pub const N_RB_MAX: usize = 273;
pub const SUBCARRIERS_PER_RB: usize = 12;

pub const SYMBOLS_PER_SLOT: usize = 14;
pub const SLOTS_PER_SUBFRAME: usize = 2;
pub const SUBFRAMES_PER_FRAME: usize = 10;
pub const SYMBOLS_PER_FRAME: usize = SYMBOLS_PER_SLOT * SLOTS_PER_SUBFRAME * SUBFRAMES_PER_FRAME;

pub const LONG_CP: usize = 352;
pub const SHORT_CP: usize = 288;
/// Samples in a short-CP symbol (CP + useful part).
pub const SHORT_SYMBOL_LEN: usize = SHORT_CP + N_FFT;
pub const SAMPLES_PER_SLOT: usize =
    LONG_CP + (SYMBOLS_PER_SLOT - 1) * SHORT_CP + SYMBOLS_PER_SLOT * N_FFT;
pub const SAMPLES_PER_SUBFRAME: usize = SAMPLES_PER_SLOT * SLOTS_PER_SUBFRAME;
pub const SAMPLES_PER_FRAME: usize = SAMPLES_PER_SUBFRAME * SUBFRAMES_PER_FRAME;

pub const GSCN_MIN: u16 = 7711;
pub const GSCN_MAX: u16 = 8051;
pub const GSCN_BASE_HZ: u64 = 3_305_280_000;
pub const GSCN_STEP_HZ: u64 = 1_440_000;

/// SSB width in subcarriers (20 RBs).
pub const SSB_SUBCARRIERS: usize = 240;
pub const SSB_SYMBOLS: usize = 4;
pub const SSB_PER_BURST: usize = 8;
const SSB_START_SYMBOLS: [usize; SSB_PER_BURST] = [4, 8, 16, 20, 32, 36, 44, 48];

/// Carrier-level configuration. Everything except the carrier center is
/// fixed by the numerology and exposed through associated constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarrierConfig {
    pub carrier_center_hz: u64,
}

impl Default for CarrierConfig {
    fn default() -> Self {
        Self {
            carrier_center_hz: GSCN_BASE_HZ,
        }
    }
}

impl CarrierConfig {
    pub const SCS_HZ: u64 = SCS_HZ;
    pub const N_FFT: usize = N_FFT;
    pub const SAMPLE_RATE_HZ: u64 = SAMPLE_RATE_HZ;
    pub const N_SUBCARRIERS_MAX: usize = N_SUBCARRIERS_MAX;
    pub const N_RB_MAX: usize = N_RB_MAX;
    pub const SYMBOLS_PER_SLOT: usize = SYMBOLS_PER_SLOT;
    pub const SLOTS_PER_SUBFRAME: usize = SLOTS_PER_SUBFRAME;
    pub const SUBFRAMES_PER_FRAME: usize = SUBFRAMES_PER_FRAME;
    pub const SYMBOLS_PER_FRAME: usize = SYMBOLS_PER_FRAME;
    pub const SAMPLES_PER_FRAME: usize = SAMPLES_PER_FRAME;

    pub fn new(carrier_center_hz: u64) -> Self {
        Self { carrier_center_hz }
    }

    /// Baseband frequency offset of a GSCN relative to the carrier center, in Hz.
    pub fn gscn_offset_hz(&self, g: Gscn) -> f64 {
        gscn_to_frequency(g) as f64 - self.carrier_center_hz as f64
    }
}

/// Global synchronization channel number, restricted to the n78 range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct Gscn(u16);

impl Gscn {
    pub fn new(value: u16) -> Result<Self> {
        if (GSCN_MIN..=GSCN_MAX).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::range(
                "gscn",
                value as i64,
                GSCN_MIN as i64,
                GSCN_MAX as i64,
            ))
        }
    }

    pub fn value(self) -> u16 {
        self.0
    }

    /// Inclusive range of GSCNs, ascending.
    pub fn range(min: u16, max: u16) -> Result<Vec<Gscn>> {
        let lo = Gscn::new(min)?;
        let hi = Gscn::new(max)?;
        if lo > hi {
            return Err(Error::Config(format!("gscn range {min}..={max} is empty")));
        }
        Ok((lo.0..=hi.0).map(Gscn).collect())
    }
}

impl TryFrom<u16> for Gscn {
    type Error = Error;
    fn try_from(v: u16) -> Result<Self> {
        Gscn::new(v)
    }
}

impl From<Gscn> for u16 {
    fn from(g: Gscn) -> u16 {
        g.0
    }
}

impl std::fmt::Display for Gscn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// SSB center frequency of a GSCN in Hz.
pub fn gscn_to_frequency(g: Gscn) -> u64 {
    GSCN_BASE_HZ + (g.0 - GSCN_MIN) as u64 * GSCN_STEP_HZ
}

/// Signed subcarrier offset of the SSB center from the carrier center.
///
/// The offset must be an integer number of subcarriers and the SSB's 240
/// subcarriers must fit inside the 3276 active subcarriers.
pub fn gscn_to_subcarrier_offset(g: Gscn, cfg: &CarrierConfig) -> Result<i32> {
    let delta = gscn_to_frequency(g) as i64 - cfg.carrier_center_hz as i64;
    if delta % SCS_HZ as i64 != 0 {
        return Err(Error::Placement(format!(
            "GSCN {g} lies {delta} Hz from the carrier center, not a multiple of {SCS_HZ} Hz"
        )));
    }
    let offset = delta / SCS_HZ as i64;
    check_ssb_fits(offset)?;
    Ok(offset as i32)
}

/// Checks that an SSB centered `offset` subcarriers from DC stays inside the active band.
pub(crate) fn check_ssb_fits(offset: i64) -> Result<()> {
    let half_active = (N_SUBCARRIERS_MAX / 2) as i64;
    let half_ssb = (SSB_SUBCARRIERS / 2) as i64;
    if offset - half_ssb < -half_active || offset + half_ssb > half_active {
        return Err(Error::Placement(format!(
            "SSB at subcarrier offset {offset} exceeds the {N_SUBCARRIERS_MAX} active subcarriers"
        )));
    }
    Ok(())
}

/// CP lengths and useful-part length in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CpProfile {
    pub long_cp_samples: usize,
    pub short_cp_samples: usize,
    pub useful_samples: usize,
}

impl CpProfile {
    pub const NR_30KHZ: CpProfile = CpProfile {
        long_cp_samples: LONG_CP,
        short_cp_samples: SHORT_CP,
        useful_samples: N_FFT,
    };

    /// CP length of symbol `l` (index in frame, or any index; only `l mod 14` matters).
    pub fn cp_len(&self, l: usize) -> usize {
        if l.is_multiple_of(SYMBOLS_PER_SLOT) {
            self.long_cp_samples
        } else {
            self.short_cp_samples
        }
    }
}

pub fn cp_length(l: usize) -> usize {
    CpProfile::NR_30KHZ.cp_len(l)
}

/// Sample offset of the CP start of symbol `l` within its frame.
pub fn symbol_start_sample(l: usize) -> Result<usize> {
    if l >= SYMBOLS_PER_FRAME {
        return Err(Error::range(
            "symbol index",
            l as i64,
            0,
            SYMBOLS_PER_FRAME as i64 - 1,
        ));
    }
    let slot = l / SYMBOLS_PER_SLOT;
    let in_slot = l % SYMBOLS_PER_SLOT;
    let within = if in_slot == 0 {
        0
    } else {
        LONG_CP + N_FFT + (in_slot - 1) * SHORT_SYMBOL_LEN
    };
    Ok(slot * SAMPLES_PER_SLOT + within)
}

/// First symbol (in frame) of SSB `i` of the burst.
pub fn ssb_start_symbol(i: usize) -> Result<usize> {
    SSB_START_SYMBOLS
        .get(i)
        .copied()
        .ok_or_else(|| Error::range("ssb index", i as i64, 0, SSB_PER_BURST as i64 - 1))
}
