//! The full receive chain: PSS search, SSS, DMRS and boundary recovery.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::{compute_boundaries, BoundaryResult};
use crate::error::{Error, Result};
use crate::numerology::{gscn_to_subcarrier_offset, CarrierConfig, Gscn};
use crate::quantize::NumericMode;
use crate::rx_decode::{decode_ssb, observe_ssb};
use crate::rx_sync::{PssSearchConfig, PssSearcher};
use crate::sequences::{Pci, SsbIndex};
use crate::stream::IqStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSearchConfig {
    pub pss: PssSearchConfig,
    pub sss_mode: NumericMode,
    pub dmrs_mode: NumericMode,
}

impl CellSearchConfig {
    pub fn uniform(pss: PssSearchConfig) -> Self {
        let mode = pss.numeric_mode;
        Self {
            pss,
            sss_mode: mode,
            dmrs_mode: mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSearchResult {
    pub pci2: u8,
    pub gscn: Gscn,
    pub pci: Pci,
    pub ssb_index: SsbIndex,
    pub pss_start_sample: usize,
    pub pss_metric: f64,
    pub sss_metric: f64,
    pub dmrs_metric: f64,
    pub boundaries: BoundaryResult,
}

/// Decodes SSS, DMRS and boundaries for a PSS found at `pss_start` on `gscn`.
#[allow(clippy::too_many_arguments)]
pub fn decode_after_pss(
    samples: &[Complex64],
    carrier: &CarrierConfig,
    gscn: Gscn,
    pci2: u8,
    pss_start: usize,
    pss_metric: f64,
    sss_mode: NumericMode,
    dmrs_mode: NumericMode,
) -> Result<CellSearchResult> {
    let sc_offset = gscn_to_subcarrier_offset(gscn, carrier)?;
    let obs = observe_ssb(samples, pss_start, sc_offset)?;
    let dec = decode_ssb(&obs, pci2, sss_mode, dmrs_mode)?;
    let boundaries = compute_boundaries(dec.ssb_index, pss_start)?;
    Ok(CellSearchResult {
        pci2,
        gscn,
        pci: dec.pci,
        ssb_index: dec.ssb_index,
        pss_start_sample: pss_start,
        pss_metric,
        sss_metric: dec.sss_metric,
        dmrs_metric: dec.dmrs_metric,
        boundaries,
    })
}

/// Runs the whole chain on a stream.
pub fn cell_search(iq: &IqStream, cfg: &CellSearchConfig) -> Result<CellSearchResult> {
    let carrier = iq.carrier();
    let searcher = PssSearcher::new(cfg.pss.clone())?;
    let outcome = searcher.search(&iq.samples, &carrier)?;
    let det = outcome
        .detection
        .ok_or(Error::NotFound(outcome.gscn_scans))?;
    decode_after_pss(
        &iq.samples,
        &carrier,
        det.gscn,
        det.pci2,
        det.start_sample,
        det.metric,
        cfg.sss_mode,
        cfg.dmrs_mode,
    )
}
