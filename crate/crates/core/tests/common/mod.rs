//! Brute-force bit-level reference generators, written without the library.
#![allow(dead_code)]

use num_complex::Complex64;

/// 127-bit m-sequence from a 7-bit seed and feedback taps `(a, b)`:
/// `x(i + 7) = x(i + a) xor x(i + b)`.
fn m_sequence(seed: [u8; 7], a: usize, b: usize) -> Vec<u8> {
    let mut x = seed.to_vec();
    while x.len() < 127 {
        let i = x.len() - 7;
        x.push(x[i + a] ^ x[i + b]);
    }
    x
}

pub fn pss_oracle(pci2: u16) -> Vec<i8> {
    let x = m_sequence([0, 1, 1, 0, 1, 1, 1], 4, 0);
    (0..127)
        .map(|n| 1 - 2 * x[(n + 43 * pci2 as usize) % 127] as i8)
        .collect()
}

pub fn sss_oracle(pci: u16) -> Vec<i8> {
    let x0 = m_sequence([1, 0, 0, 0, 0, 0, 0], 4, 0);
    let x1 = m_sequence([1, 0, 0, 0, 0, 0, 0], 1, 0);
    let pci = pci as usize;
    let m0 = 15 * (pci / 336) + 5 * (pci % 3);
    let m1 = (pci / 3) % 112;
    (0..127)
        .map(|n| {
            let a = 1 - 2 * x0[(n + m0) % 127] as i8;
            let b = 1 - 2 * x1[(n + m1) % 127] as i8;
            a * b
        })
        .collect()
}

/// Both shift registers run out as full bit arrays, then combined past 1600.
pub fn gold_oracle(c_init: u32, len: usize) -> Vec<u8> {
    let total = 1600 + len;
    let mut x1 = vec![0u8; total + 31];
    let mut x2 = vec![0u8; total + 31];
    x1[0] = 1;
    for (i, bit) in x2.iter_mut().take(31).enumerate() {
        *bit = ((c_init >> i) & 1) as u8;
    }
    for n in 0..total {
        x1[n + 31] = (x1[n + 3] + x1[n]) % 2;
        x2[n + 31] = (x2[n + 3] + x2[n + 2] + x2[n + 1] + x2[n]) % 2;
    }
    (0..len)
        .map(|n| (x1[n + 1600] + x2[n + 1600]) % 2)
        .collect()
}

pub fn dmrs_oracle(pci: u16, ssb_index: u8) -> Vec<Complex64> {
    let i = ssb_index as u32 + 1;
    let pci = pci as u32;
    let c_init = (1 << 11) * i * (pci / 4 + 1) + (1 << 6) * i + pci % 4;
    let c = gold_oracle(c_init, 288);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..144)
        .map(|m| {
            Complex64::new(
                s * (1.0 - 2.0 * c[2 * m] as f64),
                s * (1.0 - 2.0 * c[2 * m + 1] as f64),
            )
        })
        .collect()
}

/// Deterministic pseudo-random `(pci, ssb_index)` pairs.
pub fn dmrs_pairs(n: usize, seed: u64) -> Vec<(u16, u8)> {
    let mut s = seed;
    let mut next = || {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        s >> 33
    };
    (0..n)
        .map(|_| ((next() % 1008) as u16, (next() % 8) as u8))
        .collect()
}

/// Mismatch counts of the library against the oracles: (PSS, SSS, DMRS).
pub fn sequence_mismatches(dmrs_pairs: &[(u16, u8)]) -> (usize, usize, usize) {
    use ssbscan::sequences::{dmrs_sequence, pss_sequence, sss_sequence};
    use ssbscan::{Pci, SsbIndex};
    let pss = (0..3u16)
        .filter(|&k| pss_sequence(k as u8).unwrap().as_slice() != pss_oracle(k).as_slice())
        .count();
    let sss = (0..1008u16)
        .filter(|&p| sss_sequence(Pci::new(p).unwrap()).as_slice() != sss_oracle(p).as_slice())
        .count();
    let dmrs = dmrs_pairs
        .iter()
        .filter(|&&(p, i)| {
            let got = dmrs_sequence(Pci::new(p).unwrap(), SsbIndex::new(i).unwrap());
            let want = dmrs_oracle(p, i);
            got.as_slice().len() != want.len()
                || got
                    .as_slice()
                    .iter()
                    .zip(&want)
                    .any(|(a, b)| (a - b).norm() > 1e-12)
        })
        .count();
    (pss, sss, dmrs)
}
