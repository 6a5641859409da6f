//! One Monte Carlo trial: random cell, two frames, AWGN, full receive chain.
//!
//! The PSS search looks at a capture window of two long symbols placed at a
//! random lead before the true PSS, so every trial contains exactly one PSS
//! and the search cost is the same for every trial. SSS and DMRS are then read
//! from the received stream at the detected position.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::compute_boundaries;
use crate::channel::{apply_channel_span, ChannelConfig};
use crate::error::{Error, Result};
use crate::numerology::{
    gscn_to_subcarrier_offset, CarrierConfig, Gscn, LONG_CP, N_FFT, SHORT_SYMBOL_LEN, SSB_SYMBOLS,
};
use crate::quantize::NumericMode;
use crate::rx_decode::{decode_ssb, observe_ssb};
use crate::rx_sync::{PssSearchConfig, PssSearcher};
use crate::sequences::{Pci, SsbIndex, N_PCI};
use crate::tx_phy::{pss_useful_offset, schedule_prefix, TxConfig};

/// Samples handed to the PSS search in each trial.
pub const CAPTURE_LEN: usize = 2 * (LONG_CP + N_FFT);
/// Samples from a PSS useful-part start to the end of its SSB.
pub const DECODE_SPAN: usize = (SSB_SYMBOLS - 1) * SHORT_SYMBOL_LEN + N_FFT;
/// A PSS hit counts as correct within this many full-rate samples of the truth.
pub const TIMING_TOLERANCE: usize = 32;
/// Channel delays are drawn from `0..MAX_TRIAL_DELAY`.
pub const MAX_TRIAL_DELAY: usize = 10_000;
pub const TRIAL_FRAMES: usize = 2;

/// Numeric modes of the three receiver datapaths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ModeSet {
    pub label: String,
    pub pss: NumericMode,
    pub sss: NumericMode,
    pub dmrs: NumericMode,
}

impl ModeSet {
    pub fn uniform(mode: NumericMode) -> Self {
        Self::new(mode, mode, mode)
    }

    /// Label is the shared mode, or `pss+sss+dmrs` when they differ.
    pub fn new(pss: NumericMode, sss: NumericMode, dmrs: NumericMode) -> Self {
        let label = if pss == sss && sss == dmrs {
            pss.to_string()
        } else {
            format!("{pss}+{sss}+{dmrs}")
        };
        Self {
            label,
            pss,
            sss,
            dmrs,
        }
    }
}

impl fmt::Display for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Accepts either a single mode string or `{pss, sss, dmrs[, label]}`.
impl<'de> Deserialize<'de> for ModeSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            One(NumericMode),
            Split {
                label: Option<String>,
                pss: NumericMode,
                sss: NumericMode,
                dmrs: NumericMode,
            },
        }
        Ok(match Repr::deserialize(d)? {
            Repr::One(m) => ModeSet::uniform(m),
            Repr::Split {
                label,
                pss,
                sss,
                dmrs,
            } => {
                let mut set = ModeSet::new(pss, sss, dmrs);
                if let Some(l) = label {
                    set.label = l;
                }
                set
            }
        })
    }
}

/// Everything fixed across the trials of one sweep point.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub snr_db: f64,
    pub d_pss: usize,
    pub threshold: f64,
    /// Scanned in order; the true GSCN is drawn uniformly from this list.
    pub gscn_candidates: Vec<Gscn>,
    /// Fixed cell, or `None` for a uniformly random PCI per trial.
    pub pci: Option<Pci>,
    pub fir_taps: usize,
    pub fine_align: bool,
    pub carrier: CarrierConfig,
}

impl TrialSetup {
    pub fn search_config(&self, mode: NumericMode) -> PssSearchConfig {
        PssSearchConfig {
            gscn_candidates: self.gscn_candidates.clone(),
            d_pss: self.d_pss,
            threshold: self.threshold,
            numeric_mode: mode,
            fir_taps: self.fir_taps,
            fine_align: self.fine_align,
            cp_assist: false,
        }
    }
}

/// Ground truth and received samples of one trial.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub pci: Pci,
    pub gscn: Gscn,
    pub ssb_index: SsbIndex,
    pub delay: usize,
    /// Received samples from `region_start`: the capture window, then room to decode.
    pub region: Vec<Complex64>,
    pub region_start: usize,
    /// True PSS useful-part start inside the capture window.
    pub pss_in_capture: usize,
}

impl Scenario {
    pub fn generate(seed: u64, setup: &TrialSetup) -> Result<Self> {
        if setup.gscn_candidates.is_empty() {
            return Err(Error::Config("no GSCN candidates".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let drawn_pci = Pci::new(rng.random_range(0..N_PCI))?;
        let pci = setup.pci.unwrap_or(drawn_pci);
        let gscn = setup.gscn_candidates[rng.random_range(0..setup.gscn_candidates.len())];
        let ssb_index = SsbIndex::new(rng.random_range(0..8))?;
        let delay = rng.random_range(0..MAX_TRIAL_DELAY);
        let lead = rng.random_range(0..SHORT_SYMBOL_LEN);
        let pbch_seed: u64 = rng.random();
        let noise_seed: u64 = rng.random();

        let tx_cfg = TxConfig {
            pbch_seed,
            carrier: setup.carrier,
            ..TxConfig::new(pci, gscn, TRIAL_FRAMES)
        };
        let pss_tx = pss_useful_offset(ssb_index);
        let region_start = delay + pss_tx - lead;
        let region_len = CAPTURE_LEN + DECODE_SPAN;
        // keep the whole burst so the SNR reference matches the two-frame stream
        let last = pss_useful_offset(SsbIndex::new(7)?) + DECODE_SPAN;
        let tx = schedule_prefix(&tx_cfg, (pss_tx - lead + region_len).max(last))?;
        let ch = ChannelConfig {
            snr_db: setup.snr_db,
            delay_samples: delay,
            noise_seed,
            ..ChannelConfig::default()
        };
        let region = apply_channel_span(&tx, &ch, region_start..region_start + region_len)?.samples;
        Ok(Self {
            pci,
            gscn,
            ssb_index,
            delay,
            region,
            region_start,
            pss_in_capture: lead,
        })
    }

    pub fn capture(&self) -> &[Complex64] {
        &self.region[..CAPTURE_LEN]
    }
}

/// Per-trial result for one mode set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub pci: Pci,
    pub gscn: Gscn,
    pub ssb_index: SsbIndex,
    pub delay: usize,
    pub detected: bool,
    pub pss_correct: bool,
    pub pci_correct: bool,
    pub ssb_index_correct: bool,
    /// Detected minus true PSS start, when anything was detected.
    pub timing_error: Option<i64>,
    /// Estimated minus true frame start, when decoding ran.
    pub frame_start_error: Option<i64>,
    pub pss_metric: f64,
    pub pss_macs: u64,
    pub gscn_scans: usize,
    /// Module error that ended the trial early.
    pub error: Option<String>,
}

/// A receiver built once for a mode set and reused across trials.
#[derive(Debug, Clone)]
pub struct TrialReceiver {
    pub modes: ModeSet,
    searcher: PssSearcher,
    carrier: CarrierConfig,
}

impl TrialReceiver {
    pub fn new(setup: &TrialSetup, modes: ModeSet) -> Result<Self> {
        let searcher = PssSearcher::new(setup.search_config(modes.pss))?;
        Ok(Self {
            modes,
            searcher,
            carrier: setup.carrier,
        })
    }

    pub fn evaluate(&self, seed: u64, sc: &Scenario) -> TrialOutcome {
        let mut out = TrialOutcome {
            seed,
            pci: sc.pci,
            gscn: sc.gscn,
            ssb_index: sc.ssb_index,
            delay: sc.delay,
            detected: false,
            pss_correct: false,
            pci_correct: false,
            ssb_index_correct: false,
            timing_error: None,
            frame_start_error: None,
            pss_metric: 0.0,
            pss_macs: 0,
            gscn_scans: 0,
            error: None,
        };
        if let Err(e) = self.evaluate_into(sc, &mut out) {
            out.error = Some(format!("{}: {e}", e.kind()));
        }
        out
    }

    fn evaluate_into(&self, sc: &Scenario, out: &mut TrialOutcome) -> Result<()> {
        let res = self.searcher.search(sc.capture(), &self.carrier)?;
        out.pss_macs = res.macs;
        out.gscn_scans = res.gscn_scans;
        out.pss_metric = res.best_metric;
        let Some(det) = res.detection else {
            return Ok(());
        };
        out.detected = true;
        let err = det.start_sample as i64 - sc.pss_in_capture as i64;
        out.timing_error = Some(err);
        out.pss_correct = det.pci2 == sc.pci.pci2()
            && det.gscn == sc.gscn
            && err.unsigned_abs() as usize <= TIMING_TOLERANCE;

        let sc_offset = gscn_to_subcarrier_offset(det.gscn, &self.carrier)?;
        let obs = observe_ssb(&sc.region, det.start_sample, sc_offset)?;
        let dec = decode_ssb(&obs, det.pci2, self.modes.sss, self.modes.dmrs)?;
        out.pci_correct = out.pss_correct && dec.pci == sc.pci;
        out.ssb_index_correct = out.pci_correct && dec.ssb_index == sc.ssb_index;
        let b = compute_boundaries(dec.ssb_index, sc.region_start + det.start_sample)?;
        out.frame_start_error = Some(b.frame_start_sample as i64 - sc.delay as i64);
        Ok(())
    }
}

/// Generates and evaluates one trial for a single mode set.
pub fn run_trial(seed: u64, setup: &TrialSetup, modes: &ModeSet) -> Result<TrialOutcome> {
    let rx = TrialReceiver::new(setup, modes.clone())?;
    Ok(match Scenario::generate(seed, setup) {
        Ok(sc) => rx.evaluate(seed, &sc),
        Err(e) => failed_outcome(seed, &e),
    })
}

pub(crate) fn failed_outcome(seed: u64, e: &Error) -> TrialOutcome {
    TrialOutcome {
        seed,
        pci: Pci::new(0).expect("valid"),
        gscn: Gscn::new(crate::numerology::GSCN_MIN).expect("valid"),
        ssb_index: SsbIndex::new(0).expect("valid"),
        delay: 0,
        detected: false,
        pss_correct: false,
        pci_correct: false,
        ssb_index_correct: false,
        timing_error: None,
        frame_start_error: None,
        pss_metric: 0.0,
        pss_macs: 0,
        gscn_scans: 0,
        error: Some(format!("{}: {e}", e.kind())),
    }
}
