//! SSB extraction, OFDM demodulation, SSS and DMRS identification.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerology::{N_FFT, SHORT_SYMBOL_LEN, SSB_SUBCARRIERS, SSB_SYMBOLS};
use crate::ofdm::time_to_grid;
use crate::quantize::NumericMode;
use crate::sequences::{dmrs_sequence, sss_sequence, Pci, SsbIndex, DMRS_LEN, N_PCI1, SEQ_LEN};
use crate::ssb_grid::{extract_dmrs, extract_sss, SsbCells};
use crate::tx_phy::ssb_first_bin;

/// The four demodulated SSB symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SsbObservation {
    /// `SSB_SYMBOLS` rows of `N_FFT` bins, DC at bin 2048.
    pub freq_grid: Vec<Vec<Complex64>>,
    pub sc_offset: i32,
    pub pss_start_sample: usize,
}

impl SsbObservation {
    /// The 240-subcarrier SSB block cut out of the full grid.
    pub fn ssb_cells(&self) -> SsbCells {
        let first = ssb_first_bin(self.sc_offset);
        let mut cells = [[Complex64::new(0.0, 0.0); SSB_SUBCARRIERS]; SSB_SYMBOLS];
        for (row, sym) in cells.iter_mut().zip(&self.freq_grid) {
            row.copy_from_slice(&sym[first..first + SSB_SUBCARRIERS]);
        }
        cells
    }
}

/// Cuts the useful parts of the four SSB symbols; every SSB symbol carries a short CP.
pub fn extract_ssb_symbols(iq: &[Complex64], pss_start: usize) -> Result<Vec<Vec<Complex64>>> {
    let needed = (SSB_SYMBOLS - 1) * SHORT_SYMBOL_LEN + N_FFT;
    if iq.len() < pss_start.saturating_add(needed) {
        return Err(Error::InsufficientSamples {
            needed,
            from: pss_start,
            available: iq.len().saturating_sub(pss_start),
        });
    }
    Ok((0..SSB_SYMBOLS)
        .map(|m| {
            let s = pss_start + m * SHORT_SYMBOL_LEN;
            iq[s..s + N_FFT].to_vec()
        })
        .collect())
}

pub fn ofdm_demodulate(time_symbol: &[Complex64]) -> Result<Vec<Complex64>> {
    if time_symbol.len() != N_FFT {
        return Err(Error::Length {
            expected: N_FFT,
            actual: time_symbol.len(),
        });
    }
    Ok(time_to_grid(time_symbol))
}

pub fn observe_ssb(iq: &[Complex64], pss_start: usize, sc_offset: i32) -> Result<SsbObservation> {
    crate::numerology::check_ssb_fits(sc_offset as i64)?;
    let freq_grid = extract_ssb_symbols(iq, pss_start)?
        .iter()
        .map(|s| ofdm_demodulate(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SsbObservation {
        freq_grid,
        sc_offset,
        pss_start_sample: pss_start,
    })
}

/// `q(|q(sum / n)|^2 / q(energy / n))`: energy-normalized score against a unit-power sequence.
fn normalized_score(num: Complex64, energy_mean: f64, n: usize, mode: NumericMode) -> f64 {
    if energy_mean <= 0.0 {
        return 0.0;
    }
    let m = mode.qc(num / n as f64);
    mode.q(m.norm_sqr() / energy_mean)
}

/// Identifies `pci1` among the 336 SSS candidates consistent with `pci2`.
pub fn sss_search(sss_received: &[Complex64], pci2: u8, mode: NumericMode) -> Result<(u16, f64)> {
    if sss_received.len() != SEQ_LEN {
        return Err(Error::Length {
            expected: SEQ_LEN,
            actual: sss_received.len(),
        });
    }
    let r = mode.quantize_slice(sss_received);
    let energy = mode.q(r.iter().map(|c| c.norm_sqr()).sum::<f64>() / SEQ_LEN as f64);
    let mut best = (0u16, -1.0);
    for k in 0..N_PCI1 {
        let seq = sss_sequence(Pci::from_parts(k, pci2)?);
        let num: Complex64 = r
            .iter()
            .zip(seq.as_slice())
            .map(|(x, &s)| x * s as f64)
            .sum();
        let score = normalized_score(num, energy, SEQ_LEN, mode);
        if score > best.1 {
            best = (k, score);
        }
    }
    Ok((best.0, best.1.max(0.0)))
}

/// Identifies the SSB index among the 8 DMRS candidates of `pci`.
pub fn dmrs_search(
    dmrs_received: &[Complex64],
    pci: Pci,
    mode: NumericMode,
) -> Result<(SsbIndex, f64)> {
    if dmrs_received.len() != DMRS_LEN {
        return Err(Error::Length {
            expected: DMRS_LEN,
            actual: dmrs_received.len(),
        });
    }
    let r = mode.quantize_slice(dmrs_received);
    let energy = mode.q(r.iter().map(|c| c.norm_sqr()).sum::<f64>() / DMRS_LEN as f64);
    let mut best = (SsbIndex::all().next().expect("eight indices"), -1.0);
    for i in SsbIndex::all() {
        let seq = dmrs_sequence(pci, i);
        let num: Complex64 = r
            .iter()
            .zip(seq.as_slice())
            .map(|(x, s)| x * mode.qc(*s).conj())
            .sum();
        let score = normalized_score(num, energy, DMRS_LEN, mode);
        if score > best.1 {
            best = (i, score);
        }
    }
    Ok((best.0, best.1.max(0.0)))
}

/// SSS then DMRS decisions on an observed SSB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsbDecode {
    pub pci: Pci,
    pub sss_metric: f64,
    pub ssb_index: SsbIndex,
    pub dmrs_metric: f64,
}

pub fn decode_ssb(
    obs: &SsbObservation,
    pci2: u8,
    sss_mode: NumericMode,
    dmrs_mode: NumericMode,
) -> Result<SsbDecode> {
    let cells = obs.ssb_cells();
    let (pci1, sss_metric) = sss_search(&extract_sss(&cells), pci2, sss_mode)?;
    let pci = Pci::from_parts(pci1, pci2)?;
    let (ssb_index, dmrs_metric) = dmrs_search(&extract_dmrs(&cells, pci), pci, dmrs_mode)?;
    Ok(SsbDecode {
        pci,
        sss_metric,
        ssb_index,
        dmrs_metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matched_sss() {
        for pci2 in 0..3u8 {
            let seq = sss_sequence(Pci::from_parts(17, pci2).unwrap()).to_complex();
            let (pci1, m) = sss_search(&seq, pci2, NumericMode::Float32).unwrap();
            assert_eq!(pci1, 17);
            assert!((m - 1.0).abs() < 1e-6);
        }
        assert!(sss_search(&[Complex64::new(0.0, 0.0); 5], 0, NumericMode::Float32).is_err());
    }

    #[test]
    fn matched_dmrs() {
        let pci = Pci::new(321).unwrap();
        let i = SsbIndex::new(5).unwrap();
        let r = dmrs_sequence(pci, i);
        let (got, m) = dmrs_search(r.as_slice(), pci, NumericMode::Float32).unwrap();
        assert_eq!(got, i);
        assert!((m - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_input_scores_zero() {
        let (k, m) = sss_search(
            &[Complex64::new(0.0, 0.0); SEQ_LEN],
            1,
            NumericMode::Float32,
        )
        .unwrap();
        assert_eq!((k, m), (0, 0.0));
    }

    #[test]
    fn short_stream_rejected() {
        let iq = vec![Complex64::new(0.0, 0.0); 4 * SHORT_SYMBOL_LEN - 1];
        assert!(extract_ssb_symbols(&iq, 300).is_err());
        assert!(extract_ssb_symbols(&iq, 0).is_ok());
        assert!(ofdm_demodulate(&iq[..100]).is_err());
    }
}
