//! The 4 × 240 SSB resource grid: PSS, SSS, PBCH and PBCH DMRS placement.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerology::{SSB_SUBCARRIERS, SSB_SYMBOLS};
use crate::sequences::{
    dmrs_sequence, pss_sequence, sss_sequence, Pci, SsbIndex, DMRS_LEN, SEQ_LEN,
};

pub const PBCH_LEN: usize = 432;
/// First subcarrier of the PSS/SSS block.
pub const SYNC_FIRST_SC: usize = 56;
/// PBCH occupies these subcarriers of symbol 2, on both sides of the SSS guards.
const PBCH_SYM2_LOW: std::ops::Range<usize> = 0..48;
const PBCH_SYM2_HIGH: std::ops::Range<usize> = 192..240;

pub type SsbCells = [[Complex64; SSB_SUBCARRIERS]; SSB_SYMBOLS];

/// One assembled SSB.
#[derive(Debug, Clone, PartialEq)]
pub struct SsbGrid {
    pub cells: Box<SsbCells>,
    pub pci: Pci,
    pub ssb_index: SsbIndex,
}

/// 432 QPSK symbols standing in for an encoded PBCH.
#[derive(Debug, Clone, PartialEq)]
pub struct PbchPayload(Vec<Complex64>);

impl PbchPayload {
    pub fn new(symbols: Vec<Complex64>) -> Result<Self> {
        if symbols.len() != PBCH_LEN {
            return Err(Error::Length {
                expected: PBCH_LEN,
                actual: symbols.len(),
            });
        }
        Ok(Self(symbols))
    }

    /// Pseudorandom unit-modulus QPSK payload.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let bits: Vec<u8> = (0..2 * PBCH_LEN)
            .map(|_| rng.random_range(0..2u8))
            .collect();
        Self(crate::sequences::qpsk_map(&bits))
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::random(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

fn in_pbch_region(sym: usize, sc: usize) -> bool {
    match sym {
        1 | 3 => sc < SSB_SUBCARRIERS,
        2 => PBCH_SYM2_LOW.contains(&sc) || PBCH_SYM2_HIGH.contains(&sc),
        _ => false,
    }
}

/// DMRS resource elements `(symbol, subcarrier)`, sorted, for the cell's shift `pci mod 4`.
pub fn dmrs_positions(pci: Pci) -> Vec<(usize, usize)> {
    let v = (pci.value() % 4) as usize;
    let mut out = Vec::with_capacity(DMRS_LEN);
    for sym in 1..=3 {
        for sc in (v..SSB_SUBCARRIERS).step_by(4) {
            if in_pbch_region(sym, sc) {
                out.push((sym, sc));
            }
        }
    }
    debug_assert_eq!(out.len(), DMRS_LEN);
    out
}

/// PBCH data resource elements in (symbol, subcarrier) order.
pub fn pbch_positions(pci: Pci) -> Vec<(usize, usize)> {
    let v = (pci.value() % 4) as usize;
    let mut out = Vec::with_capacity(PBCH_LEN);
    for sym in 1..=3 {
        for sc in 0..SSB_SUBCARRIERS {
            if in_pbch_region(sym, sc) && sc % 4 != v {
                out.push((sym, sc));
            }
        }
    }
    debug_assert_eq!(out.len(), PBCH_LEN);
    out
}

pub fn assemble_ssb(pci: Pci, i: SsbIndex, pbch: &PbchPayload) -> SsbGrid {
    let mut cells = Box::new([[Complex64::new(0.0, 0.0); SSB_SUBCARRIERS]; SSB_SYMBOLS]);
    let pss = pss_sequence(pci.pci2()).expect("pci2 < 3");
    let sss = sss_sequence(pci);
    for n in 0..SEQ_LEN {
        cells[0][SYNC_FIRST_SC + n] = Complex64::new(pss[n] as f64, 0.0);
        cells[2][SYNC_FIRST_SC + n] = Complex64::new(sss[n] as f64, 0.0);
    }
    let dmrs = dmrs_sequence(pci, i);
    for (&(s, k), &d) in dmrs_positions(pci).iter().zip(dmrs.as_slice()) {
        cells[s][k] = d;
    }
    for (&(s, k), &p) in pbch_positions(pci).iter().zip(pbch.as_slice()) {
        cells[s][k] = p;
    }
    SsbGrid {
        cells,
        pci,
        ssb_index: i,
    }
}

/// Fields pulled back out of a (received) SSB grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SsbFields {
    pub sss: Vec<Complex64>,
    pub dmrs: Vec<Complex64>,
    pub pbch: Vec<Complex64>,
}

pub fn extract_sss(grid: &SsbCells) -> Vec<Complex64> {
    grid[2][SYNC_FIRST_SC..SYNC_FIRST_SC + SEQ_LEN].to_vec()
}

pub fn extract_dmrs(grid: &SsbCells, pci: Pci) -> Vec<Complex64> {
    dmrs_positions(pci)
        .iter()
        .map(|&(s, k)| grid[s][k])
        .collect()
}

pub fn extract_ssb_fields(grid: &SsbCells, pci: Pci) -> SsbFields {
    SsbFields {
        sss: extract_sss(grid),
        dmrs: extract_dmrs(grid, pci),
        pbch: pbch_positions(pci)
            .iter()
            .map(|&(s, k)| grid[s][k])
            .collect(),
    }
}

/// Writes the grid as `sym,sc,re,im` CSV rows (with header).
pub fn write_grid_csv<W: Write>(grid: &SsbCells, mut out: W) -> std::io::Result<()> {
    writeln!(out, "sym,sc,re,im")?;
    for (s, row) in grid.iter().enumerate() {
        for (k, c) in row.iter().enumerate() {
            writeln!(out, "{s},{k},{:e},{:e}", c.re, c.im)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pci(v: u16) -> Pci {
        Pci::new(v).unwrap()
    }

    #[test]
    fn dmrs_position_layout() {
        for v in [0u16, 1, 2, 3, 500, 1007] {
            let pos = dmrs_positions(pci(v));
            assert_eq!(pos.len(), 144);
            let per_sym = |s| pos.iter().filter(|p| p.0 == s).count();
            assert_eq!((per_sym(1), per_sym(2), per_sym(3)), (60, 24, 60));
            assert!(pos.iter().all(|p| p.1 % 4 == (v % 4) as usize));
            let mut sorted = pos.clone();
            sorted.sort();
            assert_eq!(sorted, pos);
        }
        assert_eq!(dmrs_positions(pci(0))[0], (1, 0));
    }

    #[test]
    fn grid_layout() {
        let p = pci(701);
        let payload = PbchPayload::from_seed(9);
        let g = assemble_ssb(p, SsbIndex::new(2).unwrap(), &payload);
        let zero = Complex64::new(0.0, 0.0);
        let pss = pss_sequence(p.pci2()).unwrap();
        assert_eq!(g.cells[0][55], zero);
        assert_eq!(g.cells[0][56].re, pss[0] as f64);
        let nonzero_sym0 = g.cells[0].iter().filter(|c| **c != zero).count();
        assert_eq!(nonzero_sym0, 127);
        for k in (48..56).chain(183..192) {
            assert_eq!(g.cells[2][k], zero);
        }
        let nonzero: usize = g
            .cells
            .iter()
            .map(|r| r.iter().filter(|c| **c != zero).count())
            .sum();
        assert_eq!(nonzero, 127 + 127 + 144 + 432);
        let energy: f64 = g
            .cells
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.norm_sqr())
            .sum();
        assert!((energy - 830.0).abs() < 1e-9);
        assert_eq!(g, assemble_ssb(p, SsbIndex::new(2).unwrap(), &payload));
    }

    #[test]
    fn round_trip() {
        let p = pci(42);
        let i = SsbIndex::new(5).unwrap();
        let payload = PbchPayload::from_seed(1);
        let g = assemble_ssb(p, i, &payload);
        let f = extract_ssb_fields(&g.cells, p);
        assert_eq!(f.sss, sss_sequence(p).to_complex());
        assert_eq!(f.dmrs, dmrs_sequence(p, i).as_slice());
        assert_eq!(f.pbch, payload.as_slice());
    }

    #[test]
    fn payload_length_checked() {
        assert!(PbchPayload::new(vec![Complex64::new(1.0, 0.0); 431]).is_err());
    }

    #[test]
    fn csv_dump_shape() {
        let g = assemble_ssb(
            pci(0),
            SsbIndex::new(0).unwrap(),
            &PbchPayload::from_seed(0),
        );
        let mut buf = Vec::new();
        write_grid_csv(&g.cells, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * 240);
    }
}
