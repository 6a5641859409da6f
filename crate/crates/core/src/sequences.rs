//! PSS, SSS, length-31 Gold PRBS and PBCH DMRS generation.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerology::SSB_PER_BURST;

pub const SEQ_LEN: usize = 127;
pub const DMRS_LEN: usize = 144;
pub const N_PCI: u16 = 1008;
pub const N_PCI1: u16 = 336;
pub const N_PCI2: u8 = 3;
/// Gold sequence warm-up length.
pub const GOLD_SKIP: usize = 1600;

/// Physical cell identity, `3 * pci1 + pci2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct Pci(u16);

impl Pci {
    pub fn new(value: u16) -> Result<Self> {
        if value < N_PCI {
            Ok(Self(value))
        } else {
            Err(Error::range("pci", value as i64, 0, N_PCI as i64 - 1))
        }
    }

    pub fn from_parts(pci1: u16, pci2: u8) -> Result<Self> {
        if pci1 >= N_PCI1 {
            return Err(Error::range("pci1", pci1 as i64, 0, N_PCI1 as i64 - 1));
        }
        if pci2 >= N_PCI2 {
            return Err(Error::range("pci2", pci2 as i64, 0, N_PCI2 as i64 - 1));
        }
        Ok(Self(3 * pci1 + pci2 as u16))
    }

    pub fn value(self) -> u16 {
        self.0
    }

    pub fn pci1(self) -> u16 {
        self.0 / 3
    }

    pub fn pci2(self) -> u8 {
        (self.0 % 3) as u8
    }
}

impl TryFrom<u16> for Pci {
    type Error = Error;
    fn try_from(v: u16) -> Result<Self> {
        Pci::new(v)
    }
}

impl From<Pci> for u16 {
    fn from(p: Pci) -> u16 {
        p.0
    }
}

impl fmt::Display for Pci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Zero-based index of an SSB within its burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SsbIndex(u8);

impl SsbIndex {
    pub fn new(value: u8) -> Result<Self> {
        if (value as usize) < SSB_PER_BURST {
            Ok(Self(value))
        } else {
            Err(Error::range(
                "ssb index",
                value as i64,
                0,
                SSB_PER_BURST as i64 - 1,
            ))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = SsbIndex> {
        (0..SSB_PER_BURST as u8).map(SsbIndex)
    }

    /// First symbol (in frame) carrying this SSB.
    pub fn start_symbol(self) -> usize {
        crate::numerology::ssb_start_symbol(self.0 as usize)
            .expect("index validated at construction")
    }
}

impl TryFrom<u8> for SsbIndex {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        SsbIndex::new(v)
    }
}

impl From<SsbIndex> for u8 {
    fn from(i: SsbIndex) -> u8 {
        i.0
    }
}

impl fmt::Display for SsbIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Length-127 BPSK sequence with values in {+1, -1}.
#[derive(Clone, PartialEq, Eq)]
pub struct BpskSeq127([i8; SEQ_LEN]);

impl BpskSeq127 {
    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn iter_f64(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|&v| v as f64)
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.iter_f64().map(|v| Complex64::new(v, 0.0)).collect()
    }
}

impl std::ops::Index<usize> for BpskSeq127 {
    type Output = i8;
    fn index(&self, n: usize) -> &i8 {
        &self.0[n]
    }
}

impl fmt::Debug for BpskSeq127 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Length-144 unit-modulus QPSK sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct QpskSeq144(Vec<Complex64>);

impl QpskSeq144 {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

impl std::ops::Index<usize> for QpskSeq144 {
    type Output = Complex64;
    fn index(&self, n: usize) -> &Complex64 {
        &self.0[n]
    }
}

/// Runs the 7-stage recurrence `x(i+7) = (x(i+a) + x(i)) mod 2` over 127 outputs.
fn m_sequence(seed: [u8; 7], tap: usize) -> [u8; SEQ_LEN] {
    let mut x = [0u8; SEQ_LEN];
    x[..7].copy_from_slice(&seed);
    for i in 0..SEQ_LEN - 7 {
        x[i + 7] = (x[i + tap] + x[i]) % 2;
    }
    x
}

// Seeds listed as x(0), x(1), ..., x(6).
const PSS_SEED: [u8; 7] = [0, 1, 1, 0, 1, 1, 1];
const SSS_SEED: [u8; 7] = [1, 0, 0, 0, 0, 0, 0];

fn pss_base() -> [u8; SEQ_LEN] {
    m_sequence(PSS_SEED, 4)
}

fn sss_base0() -> [u8; SEQ_LEN] {
    m_sequence(SSS_SEED, 4)
}

fn sss_base1() -> [u8; SEQ_LEN] {
    m_sequence(SSS_SEED, 1)
}

/// PSS for the given `pci2` (0..=2).
pub fn pss_sequence(pci2: u8) -> Result<BpskSeq127> {
    if pci2 >= N_PCI2 {
        return Err(Error::range("pci2", pci2 as i64, 0, N_PCI2 as i64 - 1));
    }
    let x = pss_base();
    let shift = 43 * pci2 as usize;
    let mut out = [0i8; SEQ_LEN];
    for (n, v) in out.iter_mut().enumerate() {
        *v = 1 - 2 * x[(n + shift) % SEQ_LEN] as i8;
    }
    Ok(BpskSeq127(out))
}

/// SSS for a full PCI.
pub fn sss_sequence(pci: Pci) -> BpskSeq127 {
    let x0 = sss_base0();
    let x1 = sss_base1();
    let id = pci.value() as usize;
    let m0 = 15 * (id / 336) + 5 * (id % 3);
    let m1 = (id / 3) % 112;
    let mut out = [0i8; SEQ_LEN];
    for (n, v) in out.iter_mut().enumerate() {
        let a = 1 - 2 * x0[(n + m0) % SEQ_LEN] as i8;
        let b = 1 - 2 * x1[(n + m1) % SEQ_LEN] as i8;
        *v = a * b;
    }
    BpskSeq127(out)
}

/// Length-31 Gold sequence generator.
///
/// Bits are produced one at a time by [`GoldSequence::next_bit`] or 28 at a time
/// by [`GoldSequence::fill`]; both paths yield the same stream.
#[derive(Debug, Clone)]
pub struct GoldSequence {
    // bit k holds x(n + k) for k in 0..31
    x1: u32,
    x2: u32,
}

const MASK31: u32 = (1 << 31) - 1;
const BLOCK: usize = 28;

impl GoldSequence {
    /// Generator positioned at output index 0 (after the 1600-step warm-up).
    pub fn new(c_init: u32) -> Result<Self> {
        let mut g = Self::unskipped(c_init)?;
        g.advance(GOLD_SKIP);
        Ok(g)
    }

    /// Generator positioned at raw register index 0, without warm-up.
    pub fn unskipped(c_init: u32) -> Result<Self> {
        if c_init > MASK31 {
            return Err(Error::range("c_init", c_init as i64, 0, MASK31 as i64));
        }
        Ok(Self { x1: 1, x2: c_init })
    }

    #[inline]
    pub fn next_bit(&mut self) -> u8 {
        let out = ((self.x1 ^ self.x2) & 1) as u8;
        let n1 = (self.x1 ^ (self.x1 >> 3)) & 1;
        let n2 = (self.x2 ^ (self.x2 >> 1) ^ (self.x2 >> 2) ^ (self.x2 >> 3)) & 1;
        self.x1 = (self.x1 >> 1) | (n1 << 30);
        self.x2 = (self.x2 >> 1) | (n2 << 30);
        out
    }

    /// Advances up to 28 steps at once, returning the output bits packed LSB-first.
    #[inline]
    fn step_block(&mut self, k: usize) -> u32 {
        debug_assert!((1..=BLOCK).contains(&k));
        let mask = (1u32 << k) - 1;
        let out = (self.x1 ^ self.x2) & mask;
        let n1 = (self.x1 ^ (self.x1 >> 3)) & mask;
        let n2 = (self.x2 ^ (self.x2 >> 1) ^ (self.x2 >> 2) ^ (self.x2 >> 3)) & mask;
        self.x1 = ((self.x1 >> k) | (n1 << (31 - k))) & MASK31;
        self.x2 = ((self.x2 >> k) | (n2 << (31 - k))) & MASK31;
        out
    }

    pub fn advance(&mut self, mut steps: usize) {
        while steps > 0 {
            let k = steps.min(BLOCK);
            self.step_block(k);
            steps -= k;
        }
    }

    /// Fills `out` with the next bits (0/1), block-wise.
    pub fn fill(&mut self, out: &mut [u8]) {
        for chunk in out.chunks_mut(BLOCK) {
            let bits = self.step_block(chunk.len());
            for (j, b) in chunk.iter_mut().enumerate() {
                *b = ((bits >> j) & 1) as u8;
            }
        }
    }
}

/// First `length` Gold sequence bits for `c_init`, after the 1600-bit warm-up.
pub fn prbs_gold(c_init: u32, length: usize) -> Result<Vec<u8>> {
    let mut g = GoldSequence::new(c_init)?;
    let mut out = vec![0u8; length];
    g.fill(&mut out);
    Ok(out)
}

/// PBCH DMRS scrambling seed.
pub fn dmrs_c_init(pci: Pci, i: SsbIndex) -> u32 {
    let i1 = i.value() as u32 + 1;
    let id = pci.value() as u32;
    (1 << 11) * i1 * (id / 4 + 1) + (1 << 6) * i1 + id % 4
}

/// PBCH DMRS for a cell and SSB index.
pub fn dmrs_sequence(pci: Pci, i: SsbIndex) -> QpskSeq144 {
    let c = prbs_gold(dmrs_c_init(pci, i), 2 * DMRS_LEN).expect("seed below 2^31");
    QpskSeq144(qpsk_map(&c))
}

/// Maps bit pairs to `((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)`.
pub fn qpsk_map(bits: &[u8]) -> Vec<Complex64> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    bits.chunks_exact(2)
        .map(|p| Complex64::new(a * (1.0 - 2.0 * p[0] as f64), a * (1.0 - 2.0 * p[1] as f64)))
        .collect()
}

/// Golden-vector dump: one line per sequence, comma-separated values.
///
/// PSS/SSS lines are `+1`/`-1` lists; DMRS lines are `re,im` pairs.
pub fn golden_line_bpsk(seq: &BpskSeq127) -> String {
    seq.as_slice()
        .iter()
        .map(|v| if *v > 0 { "1" } else { "-1" })
        .collect::<Vec<_>>()
        .join(",")
}

pub fn golden_line_qpsk(seq: &QpskSeq144) -> String {
    seq.as_slice()
        .iter()
        .map(|c| format!("{:.17},{:.17}", c.re, c.im))
        .collect::<Vec<_>>()
        .join(",")
}
