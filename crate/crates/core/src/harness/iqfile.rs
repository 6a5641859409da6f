//! Interleaved little-endian `cf32` IQ files with a JSON sidecar.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerology::SAMPLE_RATE_HZ;
use crate::receiver::{cell_search, CellSearchConfig, CellSearchResult};
use crate::stream::IqStream;
use crate::tx_phy::{schedule_frames, TxConfig};

pub const FORMAT_CF32_LE: &str = "cf32_le";
const BYTES_PER_SAMPLE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub sample_rate_hz: u64,
    pub carrier_center_hz: f64,
}

/// `capture.cf32` → `capture.cf32.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes samples rounded to `f32`, plus the sidecar.
pub fn write_iq(path: &Path, iq: &IqStream) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for c in &iq.samples {
        w.write_all(&(c.re as f32).to_le_bytes())?;
        w.write_all(&(c.im as f32).to_le_bytes())?;
    }
    w.flush()?;
    let meta = Sidecar {
        format: FORMAT_CF32_LE.to_string(),
        sample_rate_hz: iq.sample_rate_hz,
        carrier_center_hz: iq.carrier_center_hz as f64,
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_iq(path: &Path) -> Result<IqStream> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side)
        .map_err(|e| Error::IqFile(format!("cannot read sidecar {}: {e}", side.display())))?;
    let meta: Sidecar = serde_json::from_str(&text)?;
    if meta.format != FORMAT_CF32_LE {
        return Err(Error::IqFile(format!(
            "unsupported sample format '{}'",
            meta.format
        )));
    }
    if meta.sample_rate_hz != SAMPLE_RATE_HZ {
        return Err(Error::IqFile(format!(
            "sample rate {} Hz, expected {SAMPLE_RATE_HZ} Hz",
            meta.sample_rate_hz
        )));
    }
    if !(meta.carrier_center_hz.is_finite()
        && meta.carrier_center_hz > 0.0
        && meta.carrier_center_hz.fract() == 0.0)
    {
        return Err(Error::IqFile(format!(
            "carrier center {} Hz must be a positive whole number",
            meta.carrier_center_hz
        )));
    }
    let bytes = fs::read(path)?;
    if bytes.len() % BYTES_PER_SAMPLE != 0 {
        return Err(Error::IqFile(format!(
            "{} bytes is not a whole number of cf32 samples",
            bytes.len()
        )));
    }
    let f = |b: &[u8]| f32::from_le_bytes(b.try_into().expect("4-byte chunk")) as f64;
    let samples = bytes
        .chunks_exact(BYTES_PER_SAMPLE)
        .map(|b| Complex64::new(f(&b[..4]), f(&b[4..])))
        .collect();
    Ok(IqStream {
        samples,
        sample_rate_hz: meta.sample_rate_hz,
        carrier_center_hz: meta.carrier_center_hz as u64,
        occupied: Vec::new(),
    })
}

pub fn tx_to_file(cfg: &TxConfig, path: &Path) -> Result<IqStream> {
    let iq = schedule_frames(cfg)?;
    write_iq(path, &iq)?;
    Ok(iq)
}

pub fn search_from_file(path: &Path, cfg: &CellSearchConfig) -> Result<CellSearchResult> {
    cell_search(&read_iq(path)?, cfg)
}
