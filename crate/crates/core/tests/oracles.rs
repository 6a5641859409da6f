mod common;

use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssbscan::numerology::{
    cp_length, gscn_to_frequency, ssb_start_symbol, symbol_start_sample, N_FFT, N_RB_MAX,
    N_SUBCARRIERS_MAX, SAMPLES_PER_FRAME, SAMPLES_PER_SLOT, SAMPLE_RATE_HZ, SYMBOLS_PER_FRAME,
};
use ssbscan::quantize::{quantize_fixed, quantize_half};
use ssbscan::rx_decode::ofdm_demodulate;
use ssbscan::sequences::{dmrs_c_init, dmrs_sequence, prbs_gold, pss_sequence, sss_sequence};
use ssbscan::ssb_grid::{dmrs_positions, extract_dmrs, extract_sss, PBCH_LEN, SYNC_FIRST_SC};
use ssbscan::tx_phy::ofdm_modulate;
use ssbscan::{assemble_ssb, FixedPointFormat, Gscn, PbchPayload, Pci, SsbIndex};

#[test]
fn pss_matches_oracle() {
    for k in 0..3 {
        assert_eq!(
            pss_sequence(k as u8).unwrap().as_slice(),
            pss_oracle(k).as_slice()
        );
    }
    let p0 = pss_sequence(0).unwrap();
    assert_eq!(p0.as_slice()[0], 1);
    for k in 0..3u8 {
        let s: i32 = pss_sequence(k)
            .unwrap()
            .as_slice()
            .iter()
            .map(|&v| v as i32)
            .sum();
        assert_eq!(s, -1);
    }
}

#[test]
fn distinct_pss_have_low_cyclic_cross_correlation() {
    for a in 0..3u8 {
        for b in 0..3u8 {
            if a == b {
                continue;
            }
            let (x, y) = (pss_sequence(a).unwrap(), pss_sequence(b).unwrap());
            let (x, y) = (x.as_slice(), y.as_slice());
            // distinct PSS are cyclic shifts of one another, so one lag matches fully
            let peak = (0..127)
                .map(|lag| {
                    (0..127)
                        .map(|n| x[n] as i32 * y[(n + lag) % 127] as i32)
                        .sum::<i32>()
                        .abs()
                })
                .max()
                .unwrap();
            assert_eq!(peak, 127);
            let aligned: i32 = (0..127).map(|n| x[n] as i32 * y[n] as i32).sum();
            assert_eq!(aligned, -1);
        }
    }
}

#[test]
fn sss_matches_oracle_for_every_pci() {
    for p in 0..1008u16 {
        assert_eq!(
            sss_sequence(Pci::new(p).unwrap()).as_slice(),
            sss_oracle(p).as_slice(),
            "pci {p}"
        );
    }
}

#[test]
fn sss_candidates_are_distinct_per_pci2() {
    for pci2 in 0..3u16 {
        let mut seen: Vec<Vec<i8>> = (0..336).map(|k| sss_oracle(3 * k + pci2)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 336);
    }
}

#[test]
fn gold_matches_oracle() {
    assert_eq!(prbs_gold(2112, 288).unwrap(), gold_oracle(2112, 288));
    assert!(prbs_gold(0, 0).unwrap().is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let c = rng.random_range(0..1u32 << 31);
        let bits = prbs_gold(c, 1024).unwrap();
        assert!(bits.iter().all(|&b| b <= 1));
        assert_eq!(bits, gold_oracle(c, 1024));
    }
    assert!(prbs_gold(1 << 31, 4).is_err());
}

#[test]
fn dmrs_seed_values() {
    let pci = |v| Pci::new(v).unwrap();
    let idx = |v| SsbIndex::new(v).unwrap();
    assert_eq!(dmrs_c_init(pci(0), idx(0)), 2112);
    assert_eq!(dmrs_c_init(pci(3), idx(0)), 2115);
    assert_eq!(dmrs_c_init(pci(1007), idx(7)), 4_129_283);
}

#[test]
fn dmrs_matches_oracle() {
    let pairs = dmrs_pairs(64, 5);
    assert_eq!(sequence_mismatches(&pairs), (0, 0, 0));
    let d = dmrs_sequence(Pci::new(0).unwrap(), SsbIndex::new(0).unwrap());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for v in d.as_slice() {
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!((v.re.abs() - h).abs() < 1e-12 && (v.im.abs() - h).abs() < 1e-12);
    }
}

#[test]
fn distinct_dmrs_pairs_give_distinct_sequences() {
    let mut pairs = dmrs_pairs(50, 9);
    pairs.sort();
    pairs.dedup();
    let seqs: Vec<Vec<Complex64>> = pairs.iter().map(|&(p, i)| dmrs_oracle(p, i)).collect();
    for a in 0..seqs.len() {
        for b in a + 1..seqs.len() {
            assert_ne!(seqs[a], seqs[b]);
        }
    }
}

#[test]
fn numerology_values() {
    assert_eq!(SAMPLE_RATE_HZ, 122_880_000);
    assert_eq!(
        (N_SUBCARRIERS_MAX, N_RB_MAX, N_FFT, SYMBOLS_PER_FRAME),
        (3276, 273, 4096, 280)
    );
    // CP durations of 2.86 us and 2.34 us, symbol of 33.33 us
    let us = |n: usize| n as f64 / SAMPLE_RATE_HZ as f64 * 1e6;
    assert!((us(cp_length(0)) - 2.86).abs() < 0.01);
    assert!((us(cp_length(1)) - 2.34).abs() < 0.01);
    assert!((us(N_FFT) - 33.33).abs() < 0.01);
    assert_eq!(SAMPLES_PER_SLOT, 352 + 13 * 288 + 14 * 4096);
    assert_eq!(SAMPLES_PER_FRAME, 20 * SAMPLES_PER_SLOT);
    assert_eq!(SAMPLES_PER_FRAME as f64 / SAMPLE_RATE_HZ as f64, 0.01);
    assert_eq!(symbol_start_sample(14).unwrap(), SAMPLES_PER_SLOT);

    let f = |g| gscn_to_frequency(Gscn::new(g).unwrap());
    assert_eq!(f(7711), 3_305_280_000);
    assert_eq!(f(7712), 3_306_720_000);
    assert_eq!(f(8051), 3_794_880_000);
    assert!(Gscn::new(7710).is_err() && Gscn::new(8052).is_err());

    let starts: Vec<usize> = (0..8).map(|i| ssb_start_symbol(i).unwrap()).collect();
    assert_eq!(starts, [4, 8, 16, 20, 32, 36, 44, 48]);
    assert!(ssb_start_symbol(8).is_err());
}

#[test]
fn ssb_layout_counts() {
    let pci = Pci::new(17).unwrap();
    let ssb = assemble_ssb(pci, SsbIndex::new(2).unwrap(), &PbchPayload::from_seed(3));
    let cells = &ssb.cells;
    assert_eq!(cells.len() * cells[0].len(), 960);
    let zero_in_pss_row = cells[0].iter().filter(|c| c.norm() == 0.0).count();
    assert_eq!(zero_in_pss_row, 240 - 127);
    let pss = pss_sequence(pci.pci2()).unwrap();
    for (n, &v) in pss.as_slice().iter().enumerate() {
        assert_eq!(cells[0][SYNC_FIRST_SC + n], Complex64::new(v as f64, 0.0));
    }
    let sss: Vec<f64> = sss_sequence(pci)
        .as_slice()
        .iter()
        .map(|&v| v as f64)
        .collect();
    let got: Vec<f64> = extract_sss(cells).iter().map(|c| c.re).collect();
    assert_eq!(got, sss);
    let dmrs = dmrs_positions(pci);
    assert_eq!(dmrs.len(), 144);
    let per_symbol: Vec<usize> = (1..4)
        .map(|l| dmrs.iter().filter(|p| p.0 == l).count())
        .collect();
    assert_eq!(per_symbol, [60, 24, 60]);
    assert_eq!(extract_dmrs(cells, pci).len(), 144);
    assert_eq!(PBCH_LEN, 432);
}

#[test]
fn ofdm_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for l in [0, 1, 13, 14] {
        let freq: Vec<Complex64> = (0..N_FFT)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let sym = ofdm_modulate(&freq, l).unwrap();
        let cp = cp_length(l);
        assert_eq!(sym.len(), cp + N_FFT);
        assert_eq!(&sym[..cp], &sym[N_FFT..]);
        let back = ofdm_demodulate(&sym[cp..]).unwrap();
        let err: f64 = back
            .iter()
            .zip(&freq)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let norm: f64 = freq.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm < 1e-9, "l={l}: {}", err / norm);
    }
}

/// Worst per-component error over `n` in-range samples, and whether the
/// result always equals the round-half-away-then-saturate oracle.
fn fixed_error(fmt: FixedPointFormat, n: usize, seed: u64) -> (f64, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = (-(fmt.fractional_bits() as f64)).exp2();
    let (lo, hi) = (fmt.min_value(), fmt.max_value());
    let mut worst = 0.0f64;
    let mut exact = true;
    for _ in 0..n {
        let x = rng.random_range(lo..=hi);
        let q = quantize_fixed(x, fmt);
        worst = worst.max((q - x).abs());
        let k = (x / step).abs().floor();
        let frac = (x / step).abs() - k;
        let mag = if frac >= 0.5 { k + 1.0 } else { k };
        let want = (x.signum() * mag * step).clamp(lo, hi);
        exact &= q == want;
    }
    (worst, exact)
}

#[test]
fn fixed_point_error_bound() {
    for (w, i) in [(32, 2), (24, 2), (16, 2), (8, 2)] {
        let fmt = FixedPointFormat::new(w, i).unwrap();
        let (worst, exact) = fixed_error(fmt, 1_000_000, w as u64);
        assert!(worst <= (-((w - i - 1) as f64)).exp2(), "{w},{i}: {worst}");
        assert!(exact, "{w},{i}");
    }
    let f = FixedPointFormat::new(24, 2).unwrap();
    assert_eq!(quantize_fixed(0.0, f), 0.0);
    assert_eq!(quantize_fixed(5.0, f), 2.0 - (-22f64).exp2());
    assert_eq!(quantize_fixed(-5.0, f), -2.0);
}

#[test]
fn half_precision_values() {
    assert_eq!(quantize_half(1.0), 1.0);
    assert_eq!(quantize_half(1.0 + (-12f64).exp2()), 1.0);
    assert_eq!(quantize_half(70_000.0), 65504.0);
    assert_eq!(quantize_half(-70_000.0), -65504.0);
    // binary16 has 11 significant bits: relative error at most 2^-11
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100_000 {
        let x: f64 = rng.random_range(-1000.0..1000.0);
        if x.abs() > 1e-4 {
            assert!((quantize_half(x) - x).abs() <= x.abs() * (-11f64).exp2());
        }
    }
}
