//! Downlink transmitter: frame scheduler, resource mapper and OFDM modulator.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerology::{
    check_ssb_fits, cp_length, gscn_to_subcarrier_offset, symbol_start_sample, CarrierConfig, Gscn,
    N_FFT, SAMPLES_PER_FRAME, SHORT_CP, SLOTS_PER_SUBFRAME, SSB_SUBCARRIERS, SSB_SYMBOLS,
    SUBFRAMES_PER_FRAME, SYMBOLS_PER_SLOT,
};
use crate::ofdm::grid_to_time;
use crate::sequences::{Pci, SsbIndex};
use crate::ssb_grid::{assemble_ssb, PbchPayload, SsbGrid};
use crate::stream::IqStream;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TxConfig {
    pub pci: Pci,
    pub gscn: Gscn,
    #[serde(default)]
    pub carrier: CarrierConfig,
    #[serde(default)]
    pub pbch_seed: u64,
    pub n_frames: usize,
    /// Raised-cosine edge taper length in samples; `None` disables windowing.
    #[serde(default)]
    pub window: Option<usize>,
}

impl TxConfig {
    pub fn new(pci: Pci, gscn: Gscn, n_frames: usize) -> Self {
        Self {
            pci,
            gscn,
            carrier: CarrierConfig::default(),
            pbch_seed: 0,
            n_frames,
            window: None,
        }
    }

    pub fn subcarrier_offset(&self) -> Result<i32> {
        gscn_to_subcarrier_offset(self.gscn, &self.carrier)
    }
}

/// Nested frame-timing counters (sample, symbol, slot, subframe, frame).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameClock {
    pub sample_in_symbol: usize,
    pub symbol_in_slot: usize,
    pub slot_in_subframe: usize,
    pub subframe: usize,
    pub frame: usize,
}

impl FrameClock {
    pub const FRAME_MODULUS: usize = 1024;

    fn symbol_len(&self) -> usize {
        cp_length(self.symbol_in_slot) + N_FFT
    }

    pub fn tick(&mut self) {
        self.sample_in_symbol += 1;
        if self.sample_in_symbol < self.symbol_len() {
            return;
        }
        self.sample_in_symbol = 0;
        self.symbol_in_slot += 1;
        if self.symbol_in_slot < SYMBOLS_PER_SLOT {
            return;
        }
        self.symbol_in_slot = 0;
        self.slot_in_subframe += 1;
        if self.slot_in_subframe < SLOTS_PER_SUBFRAME {
            return;
        }
        self.slot_in_subframe = 0;
        self.subframe += 1;
        if self.subframe < SUBFRAMES_PER_FRAME {
            return;
        }
        self.subframe = 0;
        self.frame = (self.frame + 1) % Self::FRAME_MODULUS;
    }

    pub fn advance(&mut self, samples: usize) {
        for _ in 0..samples {
            self.tick();
        }
    }

    /// Symbol index within the frame (0..280).
    pub fn symbol_in_frame(&self) -> usize {
        (self.subframe * SLOTS_PER_SUBFRAME + self.slot_in_subframe) * SYMBOLS_PER_SLOT
            + self.symbol_in_slot
    }
}

/// OFDM-modulates one symbol of the 4096-subcarrier grid and prepends its CP.
pub fn ofdm_modulate(freq: &[Complex64], l: usize) -> Result<Vec<Complex64>> {
    ofdm_modulate_windowed(freq, l, None)
}

pub fn ofdm_modulate_windowed(
    freq: &[Complex64],
    l: usize,
    window: Option<usize>,
) -> Result<Vec<Complex64>> {
    if freq.len() != N_FFT {
        return Err(Error::Length {
            expected: N_FFT,
            actual: freq.len(),
        });
    }
    let useful = grid_to_time(freq);
    let cp = cp_length(l);
    let mut out = Vec::with_capacity(cp + N_FFT);
    out.extend_from_slice(&useful[N_FFT - cp..]);
    out.extend_from_slice(&useful);
    if let Some(w) = window.filter(|&w| w > 0) {
        apply_taper(&mut out, w)?;
    }
    Ok(out)
}

fn apply_taper(symbol: &mut [Complex64], w: usize) -> Result<()> {
    if 2 * w > symbol.len() {
        return Err(Error::Config(format!(
            "window {w} too long for a {}-sample symbol",
            symbol.len()
        )));
    }
    let n = symbol.len();
    for i in 0..w {
        let g = 0.5 * (1.0 - (std::f64::consts::PI * (i as f64 + 0.5) / w as f64).cos());
        symbol[i] *= g;
        symbol[n - 1 - i] *= g;
    }
    Ok(())
}

/// Places an SSB on four 4096-subcarrier symbols, centered `sc_offset` subcarriers from DC.
pub fn map_ssb_to_grid(ssb: &SsbGrid, sc_offset: i32) -> Result<Vec<Vec<Complex64>>> {
    check_ssb_fits(sc_offset as i64)?;
    let first = ssb_first_bin(sc_offset);
    Ok(ssb
        .cells
        .iter()
        .map(|row| {
            let mut sym = vec![Complex64::new(0.0, 0.0); N_FFT];
            sym[first..first + SSB_SUBCARRIERS].copy_from_slice(row);
            sym
        })
        .collect())
}

/// Grid index of SSB subcarrier 0.
pub fn ssb_first_bin(sc_offset: i32) -> usize {
    (N_FFT as i64 / 2 + sc_offset as i64 - SSB_SUBCARRIERS as i64 / 2) as usize
}

/// Full-rate index (within its frame) of the useful part of SSB `i`'s PSS symbol.
pub fn pss_useful_offset(i: SsbIndex) -> usize {
    let l = i.start_symbol();
    symbol_start_sample(l).expect("ssb symbols are in range") + SHORT_CP
}

/// Generates `n_frames` frames. Even frames carry a full 8-SSB burst; odd frames are silent.
pub fn schedule_frames(cfg: &TxConfig) -> Result<IqStream> {
    schedule(cfg, cfg.n_frames * SAMPLES_PER_FRAME)
}

/// The first `n_samples` of [`schedule_frames`], without synthesizing the rest.
///
/// Only SSBs lying entirely inside the prefix are kept in `occupied`.
pub fn schedule_prefix(cfg: &TxConfig, n_samples: usize) -> Result<IqStream> {
    schedule(cfg, n_samples.min(cfg.n_frames * SAMPLES_PER_FRAME))
}

fn schedule(cfg: &TxConfig, limit: usize) -> Result<IqStream> {
    let sc_offset = cfg.subcarrier_offset()?;
    let mut samples = vec![Complex64::new(0.0, 0.0); limit];
    let mut occupied = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.pbch_seed);
    for frame in (0..cfg.n_frames).step_by(2) {
        let frame_base = frame * SAMPLES_PER_FRAME;
        for i in SsbIndex::all() {
            // drawn even when skipped so payloads do not depend on `limit`
            let payload = PbchPayload::random(&mut rng);
            let l0 = i.start_symbol();
            let span_start = frame_base + symbol_start_sample(l0)?;
            if span_start >= limit {
                continue;
            }
            let ssb = assemble_ssb(cfg.pci, i, &payload);
            let rows = map_ssb_to_grid(&ssb, sc_offset)?;
            let mut pos = span_start;
            for (m, row) in rows.iter().enumerate() {
                let sym = ofdm_modulate_windowed(row, l0 + m, cfg.window)?;
                let end = (pos + sym.len()).min(limit);
                if pos < end {
                    samples[pos..end].copy_from_slice(&sym[..end - pos]);
                }
                pos += sym.len();
            }
            debug_assert_eq!(pos - span_start, SSB_SYMBOLS * (SHORT_CP + N_FFT));
            if pos <= limit {
                occupied.push(span_start..pos);
            }
        }
    }
    let mut stream = IqStream::new(samples, cfg.carrier);
    stream.occupied = occupied;
    Ok(stream)
}
