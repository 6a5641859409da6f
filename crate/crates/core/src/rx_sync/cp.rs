//! Cyclic-prefix detection by lag-4096 autocorrelation.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerology::{LONG_CP, N_FFT, SHORT_CP};

/// Confidence at or above which the CP estimate narrows the PSS search.
pub const CP_CONFIDENCE_THRESHOLD: f64 = 0.5;
/// Minimum distance between two reported CP candidates.
pub const CP_SUPPRESSION_RADIUS: usize = 2048;
/// Windows with less energy than this are treated as empty.
const ENERGY_FLOOR: f64 = 1e-12;
/// Running sums are recomputed exactly at this period to bound drift.
const REFRESH: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpEstimate {
    /// Offset of the CP start within the window.
    pub offset: usize,
    /// Normalized autocorrelation in [0, 1].
    pub confidence: f64,
}

/// Streams the normalized CP metric for every offset, calling `f(offset, metric)`.
fn cp_metric_track(x: &[Complex64], mut f: impl FnMut(usize, f64)) {
    let span = SHORT_CP + N_FFT;
    if x.len() < span {
        return;
    }
    let n_off = x.len() - span + 1;
    let exact = |d: usize| {
        let mut a = Complex64::new(0.0, 0.0);
        let (mut e1, mut e2) = (0.0, 0.0);
        for k in d..d + SHORT_CP {
            a += x[k] * x[k + N_FFT].conj();
            e1 += x[k].norm_sqr();
            e2 += x[k + N_FFT].norm_sqr();
        }
        (a, e1, e2)
    };
    let (mut a, mut e1, mut e2) = exact(0);
    for d in 0..n_off {
        if d > 0 {
            if d % REFRESH == 0 {
                (a, e1, e2) = exact(d);
            } else {
                let (o, n) = (d - 1, d - 1 + SHORT_CP);
                a += x[n] * x[n + N_FFT].conj() - x[o] * x[o + N_FFT].conj();
                e1 += x[n].norm_sqr() - x[o].norm_sqr();
                e2 += x[n + N_FFT].norm_sqr() - x[o + N_FFT].norm_sqr();
            }
        }
        let m = if e1 > ENERGY_FLOOR && e2 > ENERGY_FLOOR {
            (a.norm() / (e1 * e2).sqrt()).min(1.0)
        } else {
            0.0
        };
        f(d, m);
    }
}

/// Offset maximizing the CP autocorrelation in a window of at least two long symbols.
///
/// Ties go to the earliest offset. A confidence below
/// [`CP_CONFIDENCE_THRESHOLD`] means the estimate should not be trusted.
pub fn detect_cp(window: &[Complex64]) -> Result<CpEstimate> {
    let needed = 2 * (LONG_CP + N_FFT);
    if window.len() < needed {
        return Err(Error::Length {
            expected: needed,
            actual: window.len(),
        });
    }
    let mut best = CpEstimate {
        offset: 0,
        confidence: -1.0,
    };
    cp_metric_track(window, |d, m| {
        if m > best.confidence {
            best = CpEstimate {
                offset: d,
                confidence: m,
            };
        }
    });
    Ok(best)
}

/// Confident CP starts across a whole stream, strongest first, thinned so no two
/// lie within [`CP_SUPPRESSION_RADIUS`] samples of each other.
pub fn cp_candidates(x: &[Complex64], threshold: f64) -> Vec<CpEstimate> {
    let mut above = Vec::new();
    cp_metric_track(x, |d, m| {
        if m >= threshold {
            above.push(CpEstimate {
                offset: d,
                confidence: m,
            });
        }
    });
    above.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.offset.cmp(&b.offset))
    });
    let mut kept: Vec<CpEstimate> = Vec::new();
    for c in above {
        if kept
            .iter()
            .all(|k| k.offset.abs_diff(c.offset) > CP_SUPPRESSION_RADIUS)
        {
            kept.push(c);
        }
    }
    kept
}
