//! Noise-only threshold calibration for the PSS detector.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::seeding::calibration_seed;
use super::trial::CAPTURE_LEN;
use crate::channel::add_noise;
use crate::error::{Error, Result};
use crate::numerology::{CarrierConfig, Gscn, N_FFT, SSB_SYMBOLS};
use crate::quantize::NumericMode;
use crate::rx_sync::{PssSearchConfig, PssSearcher};
use crate::sequences::{DMRS_LEN, SEQ_LEN};
use crate::ssb_grid::PBCH_LEN;

pub const MIN_CALIBRATION_TRIALS: usize = 100;
pub const DEFAULT_TARGET_FALSE_ALARM: f64 = 0.01;

/// Mean per-sample power of SSB symbols: 830 unit-power REs over four 4096-sample symbols.
pub fn ssb_mean_power() -> f64 {
    (2 * SEQ_LEN + DMRS_LEN + PBCH_LEN) as f64 / (SSB_SYMBOLS * N_FFT) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSetup {
    pub d_pss: usize,
    pub mode: NumericMode,
    pub gscn_candidates: Vec<Gscn>,
    pub fir_taps: usize,
    pub trials: usize,
    pub target_false_alarm: f64,
    pub master_seed: u64,
    pub carrier: CarrierConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub threshold: f64,
    pub trials: usize,
    pub target_false_alarm: f64,
    /// Noise-only trials whose best metric reaches the threshold.
    pub false_alarms: usize,
    /// Largest metric of each noise-only trial, descending.
    #[serde(skip)]
    pub maxima: Vec<f64>,
}

/// Smallest threshold with at most `floor(target * n)` of `maxima` at or above it.
pub fn threshold_from_maxima(maxima: &[f64], target: f64) -> Result<f64> {
    if maxima.is_empty() {
        return Err(Error::Calibration("no noise-only trials".into()));
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Calibration(format!(
            "target false-alarm rate {target} outside [0, 1]"
        )));
    }
    let mut sorted = maxima.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let allowed = (target * sorted.len() as f64).floor() as usize;
    if allowed >= sorted.len() {
        return Ok(0.0);
    }
    let tau = sorted[allowed].next_up();
    if tau > 1.0 {
        return Err(Error::Calibration(format!(
            "target {target} needs a threshold above 1 (noise metric reached {})",
            sorted[allowed]
        )));
    }
    Ok(tau)
}

/// Best PSS metric over all candidates for one noise-only capture.
fn noise_trial_maximum(searcher: &PssSearcher, carrier: &CarrierConfig, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![Complex64::new(0.0, 0.0); CAPTURE_LEN];
    add_noise(&mut x, ssb_mean_power(), &mut rng);
    Ok(searcher.search(&x, carrier)?.best_metric)
}

/// Calibrates the detection threshold on noise-only captures.
///
/// Captures have the trial geometry and noise at the 0 dB level, and every
/// candidate GSCN is scanned. Trial seeds depend on the master seed and `d`.
pub fn calibrate_threshold(setup: &CalibrationSetup) -> Result<Calibration> {
    if setup.trials < MIN_CALIBRATION_TRIALS {
        return Err(Error::Calibration(format!(
            "{} noise trials given, at least {MIN_CALIBRATION_TRIALS} needed",
            setup.trials
        )));
    }
    let searcher = PssSearcher::new(PssSearchConfig {
        gscn_candidates: setup.gscn_candidates.clone(),
        d_pss: setup.d_pss,
        // above any reachable metric, so every candidate is scanned
        threshold: 2.0,
        numeric_mode: setup.mode,
        fir_taps: setup.fir_taps,
        fine_align: false,
        cp_assist: false,
    })?;
    let maxima = (0..setup.trials as u64)
        .into_par_iter()
        .map(|t| {
            noise_trial_maximum(
                &searcher,
                &setup.carrier,
                calibration_seed(setup.master_seed, setup.d_pss, t),
            )
        })
        .collect::<Result<Vec<f64>>>()?;
    let threshold = threshold_from_maxima(&maxima, setup.target_false_alarm)?;
    let mut sorted = maxima;
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(Calibration {
        threshold,
        trials: setup.trials,
        target_false_alarm: setup.target_false_alarm,
        false_alarms: sorted.iter().filter(|&&m| m >= threshold).count(),
        maxima: sorted,
    })
}
