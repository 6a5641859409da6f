//! PSS references and the normalized sliding correlator.

use std::ops::Range;

use num_complex::Complex64;

use super::ddc::{validate_decimation, Lowpass};
use crate::error::{Error, Result};
use crate::numerology::N_FFT;
use crate::ofdm::grid_to_time;
use crate::quantize::NumericMode;
use crate::sequences::{pss_sequence, N_PCI2};
use crate::ssb_grid::SYNC_FIRST_SC;
use crate::tx_phy::ssb_first_bin;

/// One decimated PSS template.
#[derive(Debug, Clone)]
pub struct PssReference {
    pub pci2: u8,
    pub decimation: usize,
    /// LPF + decimated template, quantized to the search mode.
    pub samples: Vec<Complex64>,
    /// Unfiltered useful part at full rate, used for fine alignment.
    pub full_rate: Vec<Complex64>,
}

impl PssReference {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Useful part (no CP) of a DC-centered PSS symbol.
pub fn pss_time_reference(pci2: u8) -> Result<Vec<Complex64>> {
    let pss = pss_sequence(pci2)?;
    let mut freq = vec![Complex64::new(0.0, 0.0); N_FFT];
    let first = ssb_first_bin(0) + SYNC_FIRST_SC;
    for (n, v) in pss.iter_f64().enumerate() {
        freq[first + n] = Complex64::new(v, 0.0);
    }
    Ok(grid_to_time(&freq))
}

/// Builds the template the receiver correlates against for `pci2` at decimation `d`.
///
/// The PSS is filtered with the same low-pass as the receive chain, starting
/// from its cyclic prefix so the filter is in steady state at the useful-part
/// start, and keeping the trailing transient. Output 0 lines up with the
/// useful-part start and the template is sampled at phase 0.
/// `fir_taps == 0` bypasses the filter and is only valid for `d == 1`.
pub fn make_pss_reference(
    pci2: u8,
    d: usize,
    fir_taps: usize,
    mode: NumericMode,
) -> Result<PssReference> {
    let filter = build_filter(d, fir_taps, mode)?;
    reference_with(pci2, d, filter.as_ref(), mode)
}

pub(crate) fn build_filter(
    d: usize,
    fir_taps: usize,
    mode: NumericMode,
) -> Result<Option<Lowpass>> {
    validate_decimation(d)?;
    if fir_taps == 0 {
        if d > 1 {
            return Err(Error::Config(
                "the anti-alias filter can only be bypassed at d = 1".into(),
            ));
        }
        return Ok(None);
    }
    Ok(Some(Lowpass::standard(fir_taps)?.quantized(mode)))
}

pub(crate) fn reference_with(
    pci2: u8,
    d: usize,
    filter: Option<&Lowpass>,
    mode: NumericMode,
) -> Result<PssReference> {
    let full_rate = pss_time_reference(pci2)?;
    let filtered: Vec<Complex64> = match filter {
        None => mode.quantize_slice(&full_rate),
        Some(f) => {
            let h = f.taps();
            let hist = h.len() - 1;
            // cyclic history ahead of the useful part, then the useful part
            let x: Vec<Complex64> = full_rate[N_FFT - hist..]
                .iter()
                .chain(&full_rate)
                .map(|&v| mode.qc(v))
                .collect();
            (hist..x.len() + hist)
                .map(|k| {
                    let lo = k.saturating_sub(hist);
                    let hi = k.min(x.len() - 1);
                    (lo..=hi).map(|j| x[j] * h[k - j]).sum::<Complex64>()
                })
                .collect()
        }
    };
    let samples = filtered.iter().step_by(d).map(|&v| mode.qc(v)).collect();
    Ok(PssReference {
        pci2,
        decimation: d,
        samples,
        full_rate,
    })
}

/// Best correlation peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PssPeak {
    pub pci2: u8,
    pub lag: usize,
    pub metric: f64,
}

/// Scalar type of a correlation kernel lane.
pub(crate) trait Lane: Copy {
    fn from_f64(x: f64) -> Self;
}

impl Lane for f32 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }
}

impl Lane for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
}

/// Split real/imaginary storage so the inner product vectorizes.
#[derive(Debug, Clone, Default)]
pub(crate) struct Soa<T> {
    re: Vec<T>,
    im: Vec<T>,
}

impl<T: Lane> Soa<T> {
    fn from_complex(xs: &[Complex64]) -> Self {
        Self {
            re: xs.iter().map(|c| T::from_f64(c.re)).collect(),
            im: xs.iter().map(|c| T::from_f64(c.im)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.re.len()
    }
}

const LANES: usize = 16;

/// Correlation kernel over a lane type.
pub(crate) trait Kernel: Lane {
    /// `sum_n r(off + n) * conj(s(n))`.
    fn xcorr(r: &Soa<Self>, off: usize, s: &Soa<Self>) -> (f64, f64);
}

// Written per concrete type as plain real dot products: the generic and the
// fused complex forms do not vectorize well.
macro_rules! xcorr_kernel {
    ($t:ty, $dot:ident) => {
        #[inline]
        fn $dot(a: &[$t], b: &[$t]) -> $t {
            let mut acc = [0.0 as $t; LANES];
            let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
            let tail: $t = ca
                .remainder()
                .iter()
                .zip(cb.remainder())
                .map(|(x, y)| x * y)
                .sum();
            for (x, y) in ca.zip(cb) {
                for j in 0..LANES {
                    acc[j] += x[j] * y[j];
                }
            }
            acc.iter().sum::<$t>() + tail
        }

        impl Kernel for $t {
            #[inline]
            fn xcorr(r: &Soa<$t>, off: usize, s: &Soa<$t>) -> (f64, f64) {
                let n = s.len();
                let (rr, ri) = (&r.re[off..off + n], &r.im[off..off + n]);
                let re = $dot(rr, &s.re) + $dot(ri, &s.im);
                let im = $dot(ri, &s.re) - $dot(rr, &s.im);
                (re as f64, im as f64)
            }
        }
    };
}

xcorr_kernel!(f32, dot_f32);
xcorr_kernel!(f64, dot_f64);

#[derive(Debug, Clone)]
enum Templates {
    Single(Vec<Soa<f32>>),
    Double(Vec<Soa<f64>>),
}

/// The three templates, prepared for one numeric mode.
#[derive(Debug, Clone)]
pub struct PssCorrelator {
    refs: Vec<PssReference>,
    templates: Templates,
    /// Per-template mean energy, quantized.
    mean_energy: Vec<f64>,
    mode: NumericMode,
}

impl PssCorrelator {
    pub fn new(refs: Vec<PssReference>, mode: NumericMode) -> Result<Self> {
        if refs.is_empty()
            || refs
                .iter()
                .any(|r| r.len() != refs[0].len() || r.is_empty())
        {
            return Err(Error::Config(
                "references must be non-empty and of equal length".into(),
            ));
        }
        let templates = match mode {
            NumericMode::Fixed(_) => {
                Templates::Double(refs.iter().map(|r| Soa::from_complex(&r.samples)).collect())
            }
            _ => Templates::Single(refs.iter().map(|r| Soa::from_complex(&r.samples)).collect()),
        };
        let l = refs[0].len() as f64;
        let mean_energy = refs.iter().map(|r| mode.q(r.energy() / l)).collect();
        Ok(Self {
            refs,
            templates,
            mean_energy,
            mode,
        })
    }

    /// Templates for all three `pci2` values.
    pub fn standard(d: usize, fir_taps: usize, mode: NumericMode) -> Result<Self> {
        let filter = build_filter(d, fir_taps, mode)?;
        Self::from_filter(d, filter.as_ref(), mode)
    }

    pub(crate) fn from_filter(
        d: usize,
        filter: Option<&Lowpass>,
        mode: NumericMode,
    ) -> Result<Self> {
        let refs = (0..N_PCI2)
            .map(|c| reference_with(c, d, filter, mode))
            .collect::<Result<Vec<_>>>()?;
        Self::new(refs, mode)
    }

    pub fn references(&self) -> &[PssReference] {
        &self.refs
    }

    pub fn ref_len(&self) -> usize {
        self.refs[0].len()
    }

    pub fn mode(&self) -> NumericMode {
        self.mode
    }

    /// Number of lags available in a stream of `n` samples.
    pub fn n_lags(&self, n: usize) -> usize {
        (n + 1).saturating_sub(self.ref_len())
    }

    /// Updates `best[c]` with the strictly-greater peaks over `lags` of `stream`.
    ///
    /// `stream` must already be quantized to the correlator's mode, and
    /// `stream_offset` is the lag of `stream[0]`. Returns the MAC count.
    pub(crate) fn scan(
        &self,
        stream: &[Complex64],
        stream_offset: usize,
        lags: Range<usize>,
        best: &mut [Option<PssPeak>],
    ) -> u64 {
        let l = self.ref_len();
        let local = lags.start - stream_offset..lags.end - stream_offset;
        if local.is_empty() {
            return 0;
        }
        assert!(
            local.end - 1 + l <= stream.len(),
            "correlation window past stream end"
        );
        let mut prefix = Vec::with_capacity(stream.len() + 1);
        prefix.push(0.0f64);
        let mut acc = 0.0;
        for c in stream {
            acc += c.norm_sqr();
            prefix.push(acc);
        }
        let mode = self.mode;
        let inv_l = 1.0 / l as f64;
        let metric = |num: (f64, f64), lag: usize, c: usize| -> f64 {
            let er = mode.q((prefix[lag + l] - prefix[lag]) * inv_l);
            let es = self.mean_energy[c];
            let denom = er * es;
            if denom <= 0.0 {
                return 0.0;
            }
            let re = mode.q(num.0 * inv_l);
            let im = mode.q(num.1 * inv_l);
            mode.q((re * re + im * im) / denom)
        };
        match &self.templates {
            Templates::Single(t) => {
                let r = Soa::<f32>::from_complex(stream);
                scan_with(&r, t, local.clone(), stream_offset, &metric, best);
            }
            Templates::Double(t) => {
                let r = Soa::<f64>::from_complex(stream);
                scan_with(&r, t, local.clone(), stream_offset, &metric, best);
            }
        }
        let n_lags = local.len() as u64;
        self.refs.len() as u64 * n_lags * l as u64 + stream.len() as u64
    }
}

fn scan_with<T: Kernel>(
    r: &Soa<T>,
    templates: &[Soa<T>],
    lags: Range<usize>,
    offset: usize,
    metric: &dyn Fn((f64, f64), usize, usize) -> f64,
    best: &mut [Option<PssPeak>],
) {
    for (c, s) in templates.iter().enumerate() {
        for lag in lags.clone() {
            let m = metric(T::xcorr(r, lag, s), lag, c);
            if best[c].is_none_or(|b| m > b.metric) {
                best[c] = Some(PssPeak {
                    pci2: c as u8,
                    lag: lag + offset,
                    metric: m,
                });
            }
        }
    }
}

/// Picks the strongest candidate; ties go to the lowest `pci2`.
pub(crate) fn pick_best(best: &[Option<PssPeak>]) -> Option<PssPeak> {
    let mut out: Option<PssPeak> = None;
    for p in best.iter().flatten() {
        if out.is_none_or(|o| p.metric > o.metric) {
            out = Some(*p);
        }
    }
    out
}

/// Global argmax over candidates and lags, reported when it reaches `threshold`.
pub fn pss_correlate(
    decimated: &[Complex64],
    correlator: &PssCorrelator,
    threshold: f64,
) -> Option<PssPeak> {
    let n_lags = correlator.n_lags(decimated.len());
    if n_lags == 0 {
        return None;
    }
    let stream = correlator.mode.quantize_slice(decimated);
    let mut best = vec![None; correlator.refs.len()];
    correlator.scan(&stream, 0, 0..n_lags, &mut best);
    pick_best(&best).filter(|p| p.metric >= threshold)
}
