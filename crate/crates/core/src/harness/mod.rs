//! Monte Carlo trials, sweeps, threshold calibration and IQ file I/O.

mod calibrate;
mod iqfile;
mod seeding;
mod stats;
mod sweep;
mod trial;

pub use calibrate::{
    calibrate_threshold, ssb_mean_power, threshold_from_maxima, Calibration, CalibrationSetup,
    DEFAULT_TARGET_FALSE_ALARM, MIN_CALIBRATION_TRIALS,
};
pub use iqfile::{
    read_iq, search_from_file, sidecar_path, tx_to_file, write_iq, Sidecar, FORMAT_CF32_LE,
};
pub use seeding::{calibration_seed, derive_seed, trial_seed};
pub use stats::{rates_compatible, wilson_interval, Z95};
pub use sweep::{
    read_csv, run_sweep, run_sweep_with_threads, write_csv, SweepConfig, SweepRecord, SweepReport,
    ThresholdEntry, CSV_HEADER,
};
pub use trial::{
    run_trial, ModeSet, Scenario, TrialOutcome, TrialReceiver, TrialSetup, CAPTURE_LEN,
    DECODE_SPAN, MAX_TRIAL_DELAY, TIMING_TOLERANCE, TRIAL_FRAMES,
};
