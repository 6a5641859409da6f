//! PSS acquisition: CP detection, down-conversion, decimated correlation and the GSCN scan.

mod correlate;
mod cp;
mod ddc;

pub use correlate::{
    make_pss_reference, pss_correlate, pss_time_reference, PssCorrelator, PssPeak, PssReference,
};
pub use cp::{
    cp_candidates, detect_cp, CpEstimate, CP_CONFIDENCE_THRESHOLD, CP_SUPPRESSION_RADIUS,
};
pub use ddc::{
    ddc, validate_decimation, DdcOutput, Lowpass, DEFAULT_CUTOFF_HZ, DEFAULT_FIR_TAPS,
    MAX_DECIMATION, SSB_HALF_BANDWIDTH_HZ,
};

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerology::{CarrierConfig, Gscn, SHORT_CP, SHORT_SYMBOL_LEN};
use crate::quantize::NumericMode;
use crate::stream::IqStream;
use correlate::pick_best;
use ddc::{ddc_range, Mixer};

/// A confident CP may belong to any of the four SSB symbols, so the PSS lies
/// at most this many symbols away from it.
const CP_SYMBOL_REACH: i64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PssSearchConfig {
    /// Scanned in order until the first detection.
    pub gscn_candidates: Vec<Gscn>,
    pub d_pss: usize,
    pub threshold: f64,
    pub numeric_mode: NumericMode,
    pub fir_taps: usize,
    pub fine_align: bool,
    /// Restrict lags around confident CP detections before falling back to a full scan.
    pub cp_assist: bool,
}

impl Default for PssSearchConfig {
    fn default() -> Self {
        Self {
            gscn_candidates: vec![Gscn::new(crate::numerology::GSCN_MIN).expect("valid")],
            d_pss: 1,
            threshold: 0.5,
            numeric_mode: NumericMode::Float32,
            fir_taps: DEFAULT_FIR_TAPS,
            fine_align: true,
            cp_assist: false,
        }
    }
}

impl PssSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gscn_candidates.is_empty() {
            return Err(Error::Config("no GSCN candidates".into()));
        }
        if !self.threshold.is_finite() || self.threshold < 0.0 {
            return Err(Error::Config(format!(
                "threshold {} must be a non-negative number",
                self.threshold
            )));
        }
        validate_decimation(self.d_pss)?;
        if self.fir_taps == 0 && self.d_pss > 1 {
            return Err(Error::Config(
                "the anti-alias filter can only be bypassed at d = 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PssDetection {
    pub pci2: u8,
    pub gscn: Gscn,
    /// Full-rate index of the PSS symbol's useful part.
    pub start_sample: usize,
    /// Start before fine alignment.
    pub coarse_start: usize,
    pub metric: f64,
}

/// Everything a search produced, including work counters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PssSearchOutcome {
    pub detection: Option<PssDetection>,
    /// Largest metric seen over all scanned GSCNs.
    pub best_metric: f64,
    /// Multiply-accumulates spent in down-conversion and correlation.
    pub macs: u64,
    pub fine_macs: u64,
    pub gscn_scans: usize,
    pub cp_narrowed: bool,
}

struct Scan {
    peak: Option<PssPeak>,
    macs: u64,
}

/// A configured PSS searcher; templates and filter are built once and reused.
#[derive(Debug, Clone)]
pub struct PssSearcher {
    cfg: PssSearchConfig,
    filter: Option<Lowpass>,
    correlator: PssCorrelator,
}

impl PssSearcher {
    pub fn new(cfg: PssSearchConfig) -> Result<Self> {
        cfg.validate()?;
        let filter = correlate::build_filter(cfg.d_pss, cfg.fir_taps, cfg.numeric_mode)?;
        let correlator = PssCorrelator::from_filter(cfg.d_pss, filter.as_ref(), cfg.numeric_mode)?;
        Ok(Self {
            cfg,
            filter,
            correlator,
        })
    }

    pub fn config(&self) -> &PssSearchConfig {
        &self.cfg
    }

    pub fn correlator(&self) -> &PssCorrelator {
        &self.correlator
    }

    /// Scans the configured GSCNs over `samples` and stops at the first detection.
    pub fn search(
        &self,
        samples: &[Complex64],
        carrier: &CarrierConfig,
    ) -> Result<PssSearchOutcome> {
        for g in &self.cfg.gscn_candidates {
            let off = carrier.gscn_offset_hz(*g);
            if off.abs() >= crate::numerology::SAMPLE_RATE_HZ as f64 / 2.0 {
                return Err(Error::Config(format!(
                    "GSCN {g} lies outside the sampled band"
                )));
            }
        }
        let d = self.cfg.d_pss;
        let mut outcome = PssSearchOutcome {
            detection: None,
            best_metric: 0.0,
            macs: 0,
            fine_macs: 0,
            gscn_scans: 0,
            cp_narrowed: false,
        };
        let n_lags = self.correlator.n_lags(samples.len().div_ceil(d));
        if n_lags == 0 {
            return Ok(outcome);
        }
        let full: Vec<Range<usize>> = std::iter::once(0..n_lags).collect();
        let mut passes = Vec::new();
        if self.cfg.cp_assist {
            let narrowed = self.cp_lag_ranges(samples, n_lags);
            if !narrowed.is_empty() {
                passes.push((narrowed, true));
            }
        }
        passes.push((full, false));
        for (ranges, narrowed) in passes {
            for &g in &self.cfg.gscn_candidates {
                let mixer = Mixer::new(carrier.gscn_offset_hz(g));
                let scan = self.scan(samples, &mixer, &ranges);
                outcome.macs += scan.macs;
                outcome.gscn_scans += 1;
                let Some(peak) = scan.peak else { continue };
                outcome.best_metric = outcome.best_metric.max(peak.metric);
                if peak.metric >= self.cfg.threshold {
                    let coarse = peak.lag * d;
                    let start = if self.cfg.fine_align {
                        let (s, macs) = self.fine_align(samples, &mixer, peak.pci2, coarse);
                        outcome.fine_macs += macs;
                        s
                    } else {
                        coarse
                    };
                    outcome.detection = Some(PssDetection {
                        pci2: peak.pci2,
                        gscn: g,
                        start_sample: start,
                        coarse_start: coarse,
                        metric: peak.metric,
                    });
                    outcome.cp_narrowed = narrowed;
                    return Ok(outcome);
                }
            }
        }
        Ok(outcome)
    }

    /// Decimated-lag ranges around the PSS positions implied by confident CPs.
    fn cp_lag_ranges(&self, samples: &[Complex64], n_lags: usize) -> Vec<Range<usize>> {
        let d = self.cfg.d_pss as i64;
        let margin = 2 * d + 4;
        let mut ranges: Vec<Range<usize>> = Vec::new();
        for c in cp_candidates(samples, CP_CONFIDENCE_THRESHOLD) {
            for j in -CP_SYMBOL_REACH..=CP_SYMBOL_REACH {
                let u = c.offset as i64 + SHORT_CP as i64 + j * SHORT_SYMBOL_LEN as i64;
                let lo = ((u - margin).max(0) / d) as usize;
                let hi = (((u + margin) / d + 1).max(0) as usize).min(n_lags);
                if lo < hi {
                    ranges.push(lo..hi);
                }
            }
        }
        merge_ranges(ranges)
    }

    fn scan(&self, samples: &[Complex64], mixer: &Mixer, lag_ranges: &[Range<usize>]) -> Scan {
        let d = self.cfg.d_pss;
        let l = self.correlator.ref_len();
        let n_out = samples.len().div_ceil(d);
        let mode = self.cfg.numeric_mode;
        // group lag ranges whose down-converted spans overlap
        let spans = merge_ranges(
            lag_ranges
                .iter()
                .map(|r| r.start..(r.end + l - 1).min(n_out))
                .collect(),
        );
        let mut best = vec![None; 3];
        let mut macs = 0;
        for span in spans {
            let y = ddc_range(samples, mixer, d, self.filter.as_ref(), mode, span.clone());
            macs += y.macs;
            for r in lag_ranges
                .iter()
                .filter(|r| r.start >= span.start && r.end <= span.end)
            {
                macs += self
                    .correlator
                    .scan(&y.samples, span.start, r.clone(), &mut best);
            }
        }
        Scan {
            peak: pick_best(&best),
            macs,
        }
    }

    /// Full-rate matched filter around the coarse start, using the unfiltered reference.
    fn fine_align(
        &self,
        samples: &[Complex64],
        mixer: &Mixer,
        pci2: u8,
        coarse: usize,
    ) -> (usize, u64) {
        let s = &self.correlator.references()[pci2 as usize].full_rate;
        let d = self.cfg.d_pss;
        if samples.len() < s.len() {
            return (coarse, 0);
        }
        let last = samples.len() - s.len();
        let lo = coarse.saturating_sub(d).min(last);
        let hi = (coarse + d).min(last);
        let mut best = (coarse.min(last), -1.0);
        let mut macs = 0u64;
        for t in lo..=hi {
            let acc: Complex64 = samples[t..t + s.len()]
                .iter()
                .zip(s)
                .enumerate()
                .map(|(n, (x, r))| x * mixer.phasor(t + n) * r.conj())
                .sum();
            macs += s.len() as u64;
            let m = acc.norm_sqr();
            if m > best.1 {
                best = (t, m);
            }
        }
        (best.0, macs)
    }
}

fn merge_ranges(mut v: Vec<Range<usize>>) -> Vec<Range<usize>> {
    v.sort_by_key(|r| (r.start, r.end));
    let mut out: Vec<Range<usize>> = Vec::new();
    for r in v.into_iter().filter(|r| !r.is_empty()) {
        match out.last_mut() {
            Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
            _ => out.push(r),
        }
    }
    out
}

/// Blind PSS search over a stream; fails with [`Error::NotFound`] when no GSCN detects.
pub fn pss_search(iq: &IqStream, cfg: &PssSearchConfig) -> Result<PssDetection> {
    let searcher = PssSearcher::new(cfg.clone())?;
    let outcome = searcher.search(&iq.samples, &iq.carrier())?;
    outcome.detection.ok_or(Error::NotFound(outcome.gscn_scans))
}
