//! Monte Carlo sweeps over SNR, decimation and numeric mode.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calibrate::{calibrate_threshold, CalibrationSetup, DEFAULT_TARGET_FALSE_ALARM};
use super::seeding::trial_seed;
use super::trial::{failed_outcome, ModeSet, Scenario, TrialOutcome, TrialReceiver, TrialSetup};
use crate::error::{Error, Result};
use crate::numerology::{CarrierConfig, Gscn};
use crate::quantize::NumericMode;
use crate::rx_sync::{validate_decimation, DEFAULT_FIR_TAPS};
use crate::sequences::Pci;

pub const CSV_HEADER: &str =
    "snr_db,d_pss,mode,trials,pss_detections,pci_correct,ssb_index_correct,p_d_pss,p_d_sss,p_d_dmrs,mac_ops";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub snr_db_list: Vec<f64>,
    pub d_pss_list: Vec<usize>,
    pub numeric_modes: Vec<ModeSet>,
    pub trials: usize,
    pub master_seed: u64,
    pub gscn_min: u16,
    pub gscn_max: u16,
    /// Fixed PCI for every trial; random when absent.
    pub pci: Option<u16>,
    /// Detection threshold; calibrated per (d, PSS mode) when absent.
    pub threshold: Option<f64>,
    pub target_false_alarm: f64,
    pub calibration_trials: usize,
    pub fir_taps: usize,
    pub fine_align: bool,
    pub carrier_center_hz: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            snr_db_list: vec![-16.0, -12.0, -8.0, -4.0, 0.0, 4.0, 8.0],
            d_pss_list: vec![1, 6, 10, 12, 14],
            numeric_modes: vec![ModeSet::uniform(NumericMode::Float32)],
            trials: 200,
            master_seed: 1,
            gscn_min: 7711,
            gscn_max: 7712,
            pci: None,
            threshold: None,
            target_false_alarm: DEFAULT_TARGET_FALSE_ALARM,
            calibration_trials: 1000,
            fir_taps: DEFAULT_FIR_TAPS,
            fine_align: true,
            carrier_center_hz: CarrierConfig::default().carrier_center_hz,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.snr_db_list.is_empty()
            || self.d_pss_list.is_empty()
            || self.numeric_modes.is_empty()
        {
            return Err(Error::Config(
                "snr_db_list, d_pss_list and numeric_modes must be non-empty".into(),
            ));
        }
        if self.snr_db_list.iter().any(|s| s.is_nan()) {
            return Err(Error::Config("SNR values must be numbers".into()));
        }
        for &d in &self.d_pss_list {
            validate_decimation(d)?;
        }
        if let Some(t) = self.threshold {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::Config(format!(
                    "threshold {t} must be a non-negative number"
                )));
            }
        }
        if let Some(p) = self.pci {
            Pci::new(p)?;
        }
        Gscn::range(self.gscn_min, self.gscn_max)?;
        Ok(())
    }

    fn gscn_candidates(&self) -> Result<Vec<Gscn>> {
        Gscn::range(self.gscn_min, self.gscn_max)
    }

    pub fn carrier(&self) -> CarrierConfig {
        CarrierConfig::new(self.carrier_center_hz)
    }
}

/// One aggregated `(snr, d, mode)` point; serializes to the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub d_pss: usize,
    pub mode: String,
    pub trials: usize,
    pub pss_detections: usize,
    pub pci_correct: usize,
    pub ssb_index_correct: usize,
    pub p_d_pss: f64,
    pub p_d_sss: f64,
    pub p_d_dmrs: f64,
    /// Mean multiply-accumulates per GSCN scan of the PSS search.
    pub mac_ops: u64,
}

impl SweepRecord {
    pub fn aggregate(snr_db: f64, d_pss: usize, mode: &str, outcomes: &[TrialOutcome]) -> Self {
        let n = outcomes.len();
        let count = |f: fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count();
        let pss = count(|o| o.pss_correct);
        let pci = count(|o| o.pci_correct);
        let idx = count(|o| o.ssb_index_correct);
        let macs: u64 = outcomes.iter().map(|o| o.pss_macs).sum();
        let scans: u64 = outcomes.iter().map(|o| o.gscn_scans as u64).sum();
        let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        Self {
            snr_db,
            d_pss,
            mode: mode.to_string(),
            trials: n,
            pss_detections: pss,
            pci_correct: pci,
            ssb_index_correct: idx,
            p_d_pss: rate(pss),
            p_d_sss: rate(pci),
            p_d_dmrs: rate(idx),
            mac_ops: macs.checked_div(scans).unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEntry {
    pub d_pss: usize,
    pub mode: NumericMode,
    pub threshold: f64,
    pub calibrated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub records: Vec<SweepRecord>,
    pub thresholds: Vec<ThresholdEntry>,
    /// Trials that ended in a module error, as `(snr, d, mode, seed, message)`.
    pub trial_errors: Vec<(f64, usize, String, u64, String)>,
}

impl SweepReport {
    pub fn record(&self, snr_db: f64, d_pss: usize, mode: &str) -> Option<&SweepRecord> {
        self.records
            .iter()
            .find(|r| r.snr_db == snr_db && r.d_pss == d_pss && r.mode == mode)
    }
}

fn thresholds(cfg: &SweepConfig) -> Result<Vec<ThresholdEntry>> {
    let mut out = Vec::new();
    let mut seen = BTreeMap::new();
    for &d in &cfg.d_pss_list {
        for set in &cfg.numeric_modes {
            let key = (d, set.pss.to_string());
            if seen.contains_key(&key) {
                continue;
            }
            let entry = match cfg.threshold {
                Some(t) => ThresholdEntry {
                    d_pss: d,
                    mode: set.pss,
                    threshold: t,
                    calibrated: false,
                },
                None => {
                    let cal = calibrate_threshold(&CalibrationSetup {
                        d_pss: d,
                        mode: set.pss,
                        gscn_candidates: cfg.gscn_candidates()?,
                        fir_taps: cfg.fir_taps,
                        trials: cfg.calibration_trials,
                        target_false_alarm: cfg.target_false_alarm,
                        master_seed: cfg.master_seed,
                        carrier: cfg.carrier(),
                    })?;
                    log::info!("calibrated d={d} {}: tau = {}", set.pss, cal.threshold);
                    ThresholdEntry {
                        d_pss: d,
                        mode: set.pss,
                        threshold: cal.threshold,
                        calibrated: true,
                    }
                }
            };
            seen.insert(key, entry.threshold);
            out.push(entry);
        }
    }
    Ok(out)
}

/// Runs the sweep on the current rayon pool.
///
/// Records come out in `(snr, d, mode)` list order. Trial seeds depend only on
/// the master seed, the `(snr, d)` point and the trial index, so every mode
/// set sees the same realizations and results do not depend on thread count.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let thresholds = thresholds(cfg)?;
    let tau = |d: usize, m: NumericMode| {
        thresholds
            .iter()
            .find(|t| t.d_pss == d && t.mode == m)
            .map(|t| t.threshold)
            .expect("threshold computed for every (d, mode)")
    };
    let pci = cfg.pci.map(Pci::new).transpose()?;
    let mut records = Vec::new();
    let mut trial_errors = Vec::new();
    for &snr in &cfg.snr_db_list {
        for &d in &cfg.d_pss_list {
            let base = TrialSetup {
                snr_db: snr,
                d_pss: d,
                threshold: 0.0,
                gscn_candidates: cfg.gscn_candidates()?,
                pci,
                fir_taps: cfg.fir_taps,
                fine_align: cfg.fine_align,
                carrier: cfg.carrier(),
            };
            let receivers = cfg
                .numeric_modes
                .iter()
                .map(|set| {
                    let setup = TrialSetup {
                        threshold: tau(d, set.pss),
                        ..base.clone()
                    };
                    TrialReceiver::new(&setup, set.clone())
                })
                .collect::<Result<Vec<_>>>()?;
            // per trial: one scenario, evaluated by every mode set
            let per_trial: Vec<Vec<TrialOutcome>> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let seed = trial_seed(cfg.master_seed, snr, d, t);
                    match Scenario::generate(seed, &base) {
                        Ok(sc) => receivers.iter().map(|rx| rx.evaluate(seed, &sc)).collect(),
                        Err(e) => receivers.iter().map(|_| failed_outcome(seed, &e)).collect(),
                    }
                })
                .collect();
            for (m, rx) in receivers.iter().enumerate() {
                let outcomes: Vec<TrialOutcome> = per_trial.iter().map(|v| v[m].clone()).collect();
                for o in &outcomes {
                    if let Some(e) = &o.error {
                        trial_errors.push((snr, d, rx.modes.label.clone(), o.seed, e.clone()));
                    }
                }
                records.push(SweepRecord::aggregate(snr, d, &rx.modes.label, &outcomes));
            }
        }
    }
    Ok(SweepReport {
        records,
        thresholds,
        trial_errors,
    })
}

/// Runs the sweep on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(cfg: &SweepConfig, threads: usize) -> Result<SweepReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| run_sweep(cfg))
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Config(format!(
            "unexpected CSV header '{}'",
            header.join(",")
        )));
    }
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}
