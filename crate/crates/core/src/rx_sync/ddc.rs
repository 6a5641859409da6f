//! Digital down-converter: complex mixer, linear-phase FIR low-pass, decimator.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerology::{N_FFT, SAMPLE_RATE_HZ, SCS_HZ};
use crate::quantize::NumericMode;

pub const DEFAULT_FIR_TAPS: usize = 63;
pub const DEFAULT_CUTOFF_HZ: f64 = 3.8e6;
/// Half the SSB bandwidth (120 subcarriers × 30 kHz).
pub const SSB_HALF_BANDWIDTH_HZ: f64 = 3.6e6;
/// Largest decimation keeping `fs / (2 d)` at or above the SSB half-bandwidth.
pub const MAX_DECIMATION: usize = 16;

/// Hamming-windowed sinc low-pass with unity DC gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Lowpass {
    taps: Vec<f64>,
}

impl Lowpass {
    pub fn design(n_taps: usize, cutoff_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        if n_taps == 0 {
            return Err(Error::Config("FIR needs at least one tap".into()));
        }
        if !(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0) {
            return Err(Error::Config(format!(
                "cutoff {cutoff_hz} Hz outside (0, fs/2)"
            )));
        }
        let fc = cutoff_hz / sample_rate_hz;
        let mid = (n_taps - 1) as f64 / 2.0;
        let mut taps: Vec<f64> = (0..n_taps)
            .map(|t| {
                let x = t as f64 - mid;
                let sinc = if x == 0.0 {
                    2.0 * fc
                } else {
                    (2.0 * PI * fc * x).sin() / (PI * x)
                };
                let w = if n_taps == 1 {
                    1.0
                } else {
                    0.54 - 0.46 * (2.0 * PI * t as f64 / (n_taps - 1) as f64).cos()
                };
                sinc * w
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|h| *h /= sum);
        Ok(Self { taps })
    }

    pub fn standard(n_taps: usize) -> Result<Self> {
        Self::design(n_taps, DEFAULT_CUTOFF_HZ, SAMPLE_RATE_HZ as f64)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Group delay in full-rate samples, `(taps - 1) / 2`.
    pub fn group_delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    pub fn quantized(&self, mode: NumericMode) -> Lowpass {
        Lowpass {
            taps: self.taps.iter().map(|&h| mode.q(h)).collect(),
        }
    }

    /// Frequency response magnitude at `f_hz`.
    pub fn response(&self, f_hz: f64, sample_rate_hz: f64) -> f64 {
        let w = 2.0 * PI * f_hz / sample_rate_hz;
        self.taps
            .iter()
            .enumerate()
            .map(|(t, &h)| Complex64::from_polar(h, -w * t as f64))
            .sum::<Complex64>()
            .norm()
    }
}

/// Rejects decimations that alias the SSB band; warns in the marginal 14..=16 region.
pub fn validate_decimation(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Config("decimation must be at least 1".into()));
    }
    if d > MAX_DECIMATION {
        return Err(Error::Config(format!(
            "decimation {d} aliases the SSB: fs/(2d) = {:.3} MHz < 3.6 MHz",
            SAMPLE_RATE_HZ as f64 / (2.0 * d as f64) / 1e6
        )));
    }
    if d >= 14 {
        log::warn!("decimation {d}: PSS search is expected to degrade at low SNR");
    }
    Ok(())
}

/// Per-sample mixer `exp(-j 2 pi f k / fs)`, exact when `f` is a multiple of the SCS.
pub(crate) struct Mixer {
    f_offset_hz: f64,
    table: Option<(Vec<Complex64>, u64)>,
}

impl Mixer {
    pub(crate) fn new(f_offset_hz: f64) -> Self {
        let bins = f_offset_hz / SCS_HZ as f64;
        let table = if bins.fract() == 0.0 && bins.abs() < N_FFT as f64 {
            let step = bins.rem_euclid(N_FFT as f64) as u64;
            let t = (0..N_FFT)
                .map(|n| Complex64::from_polar(1.0, -2.0 * PI * n as f64 / N_FFT as f64))
                .collect();
            Some((t, step))
        } else {
            None
        };
        Self { f_offset_hz, table }
    }

    #[inline]
    pub(crate) fn phasor(&self, k: usize) -> Complex64 {
        match &self.table {
            Some((t, step)) => t[((k as u64 * step) % N_FFT as u64) as usize],
            None => {
                let cycles = (self.f_offset_hz / SAMPLE_RATE_HZ as f64 * k as f64).fract();
                Complex64::from_polar(1.0, -2.0 * PI * cycles)
            }
        }
    }

    pub(crate) fn is_identity(&self) -> bool {
        self.f_offset_hz == 0.0
    }
}

/// Output of a down-conversion.
#[derive(Debug, Clone)]
pub struct DdcOutput {
    /// `samples[m]` is the filter output at full-rate index `(first + m) * decimation`.
    pub samples: Vec<Complex64>,
    pub decimation: usize,
    pub first: usize,
    /// Filter group delay in full-rate samples (0 when the filter is bypassed).
    pub group_delay: usize,
    pub macs: u64,
}

/// Down-converts a whole slice; output `m` corresponds to full-rate index `m * d`.
pub fn ddc(
    samples: &[Complex64],
    f_offset_hz: f64,
    d: usize,
    filter: Option<&Lowpass>,
    mode: NumericMode,
) -> Result<DdcOutput> {
    validate_decimation(d)?;
    if f_offset_hz.abs() >= SAMPLE_RATE_HZ as f64 / 2.0 {
        return Err(Error::Config(format!(
            "mixing frequency {f_offset_hz} Hz beyond fs/2"
        )));
    }
    let n_out = samples.len().div_ceil(d);
    Ok(ddc_range(
        samples,
        &Mixer::new(f_offset_hz),
        d,
        filter,
        mode,
        0..n_out,
    ))
}

/// Computes decimated outputs `out_range` (in decimated units) of the DDC chain.
///
/// Samples before index 0 are taken as zero. Filter taps are expected to be
/// already quantized to `mode`.
pub(crate) fn ddc_range(
    samples: &[Complex64],
    mixer: &Mixer,
    d: usize,
    filter: Option<&Lowpass>,
    mode: NumericMode,
    out_range: Range<usize>,
) -> DdcOutput {
    let first = out_range.start;
    let n_out = out_range.len();
    let n_taps = filter.map_or(1, |f| f.len());
    if n_out == 0 {
        return DdcOutput {
            samples: Vec::new(),
            decimation: d,
            first,
            group_delay: filter.map_or(0, |f| f.group_delay()),
            macs: 0,
        };
    }
    // mixed input span [lo, hi)
    let last_k = (out_range.end - 1) * d;
    let hi = (last_k + 1).min(samples.len());
    let lo = (first * d).saturating_sub(n_taps - 1);
    let mixed: Vec<Complex64> = (lo..hi)
        .map(|k| {
            let x = mode.qc(samples[k]);
            if mixer.is_identity() {
                x
            } else {
                mode.qc(x * mixer.phasor(k))
            }
        })
        .collect();
    let at = |k: usize| -> Complex64 {
        if k < lo || k >= hi {
            Complex64::new(0.0, 0.0)
        } else {
            mixed[k - lo]
        }
    };
    let mut out = Vec::with_capacity(n_out);
    let mut macs = 0u64;
    match filter {
        None => {
            for m in out_range {
                out.push(at(m * d));
            }
        }
        Some(f) => {
            let taps = f.taps();
            for m in out_range {
                let k = m * d;
                let mut acc = Complex64::new(0.0, 0.0);
                if k + 1 >= n_taps && k < hi {
                    // fast path: whole tap span inside `mixed`
                    let base = k + 1 - n_taps;
                    if base >= lo {
                        let win = &mixed[base - lo..=k - lo];
                        for (h, x) in taps.iter().rev().zip(win) {
                            acc += x * *h;
                        }
                    } else {
                        for (t, h) in taps.iter().enumerate() {
                            acc += at(k - t) * *h;
                        }
                    }
                } else {
                    for (t, h) in taps.iter().enumerate() {
                        if t <= k {
                            acc += at(k - t) * *h;
                        }
                    }
                }
                macs += n_taps as u64;
                out.push(mode.qc(acc));
            }
        }
    }
    DdcOutput {
        samples: out,
        decimation: d,
        first,
        group_delay: filter.map_or(0, |f| f.group_delay()),
        macs,
    }
}
