use std::f64::consts::PI;

use num_complex::Complex64;
use ssbscan::boundary::{n_slot_edge, tick_stream, write_ticks_csv, TickKind};
use ssbscan::numerology::{CarrierConfig, SAMPLES_PER_FRAME, SAMPLES_PER_SLOT, SAMPLE_RATE_HZ};
use ssbscan::rx_sync::{
    ddc, detect_cp, validate_decimation, Lowpass, PssSearchConfig, PssSearcher,
};
use ssbscan::tx_phy::{pss_useful_offset, schedule_frames, TxConfig};
use ssbscan::{compute_boundaries, Error, Gscn, NumericMode, Pci, SsbIndex};

/// Sample index of the start of symbol `l` (CP included), summed symbol by symbol.
fn symbol_start_oracle(l: usize) -> usize {
    (0..l)
        .map(|k| if k % 14 == 0 { 352 } else { 288 } + 4096)
        .sum()
}

#[test]
fn boundaries_match_symbol_arithmetic() {
    let table: Vec<usize> = SsbIndex::all()
        .map(|i| compute_boundaries(i, 1_000_000).unwrap().n_slot_edge)
        .collect();
    assert_eq!(table, [10, 6, 12, 8, 10, 6, 12, 8]);
    for (i, l) in SsbIndex::all().zip([4, 8, 16, 20, 32, 36, 44, 48]) {
        assert_eq!(n_slot_edge(l), 14 - l % 14);
        let delay = 12_345;
        let pss = delay + symbol_start_oracle(l) + 288;
        assert_eq!(pss_useful_offset(i) + delay, pss);
        let b = compute_boundaries(i, pss).unwrap();
        assert_eq!(b.frame_start_sample, delay);
        assert_eq!(b.pss_symbol_in_frame, l);
        let next_slot_symbol = l + n_slot_edge(l);
        assert_eq!(
            b.slot_tick_sample,
            delay + symbol_start_oracle(next_slot_symbol)
        );
        assert_eq!(
            b.subframe_tick_sample,
            delay + symbol_start_oracle(next_slot_symbol.div_ceil(28) * 28)
        );
    }
    let early = pss_useful_offset(SsbIndex::new(3).unwrap()) - 1;
    assert!(matches!(
        compute_boundaries(SsbIndex::new(3).unwrap(), early),
        Err(Error::NegativeFrameStart(-1))
    ));
}

#[test]
fn tick_stream_counts_and_csv() {
    let b = compute_boundaries(
        SsbIndex::new(0).unwrap(),
        pss_useful_offset(SsbIndex::new(0).unwrap()) + 50,
    )
    .unwrap();
    let ticks = tick_stream(&b, SAMPLES_PER_FRAME);
    let count = |k: TickKind| ticks.iter().filter(|t| t.1 == k).count();
    assert_eq!(
        (
            count(TickKind::Slot),
            count(TickKind::Subframe),
            count(TickKind::Frame)
        ),
        (20, 10, 1)
    );
    assert_eq!(ticks[0], (50 + SAMPLES_PER_SLOT, TickKind::Slot));
    let frame = ticks.iter().find(|t| t.1 == TickKind::Frame).unwrap();
    assert_eq!(frame.0, 50 + SAMPLES_PER_FRAME);
    assert!(ticks.windows(2).all(|w| w[0].0 <= w[1].0));

    let mut buf = Vec::new();
    write_ticks_csv(&ticks, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), ticks.len() + 1);
    assert!(text.lines().nth(1).unwrap().ends_with(",slot"));
}

#[test]
fn cp_detection_on_ssb_symbols() {
    let tx = schedule_frames(&TxConfig::new(
        Pci::new(9).unwrap(),
        Gscn::new(7711).unwrap(),
        1,
    ))
    .unwrap();
    let cp_start = symbol_start_oracle(4);
    let window = &tx.samples[cp_start - 100..cp_start - 100 + 2 * (352 + 4096)];
    let est = detect_cp(window).unwrap();
    assert!(est.confidence > 0.99);
    assert!(
        est.offset >= 100 && (est.offset - 100).is_multiple_of(288 + 4096),
        "{est:?}"
    );
    assert!(detect_cp(&window[..1000]).is_err());
    let silence = vec![Complex64::new(0.0, 0.0); 2 * (352 + 4096)];
    assert_eq!(detect_cp(&silence).unwrap().confidence, 0.0);
}

#[test]
fn decimation_limits() {
    assert!(validate_decimation(0).is_err());
    for d in 1..=16 {
        assert!(validate_decimation(d).is_ok());
    }
    assert!(validate_decimation(17).is_err());
    let mut cfg = PssSearchConfig {
        d_pss: 4,
        fir_taps: 0,
        ..PssSearchConfig::default()
    };
    assert!(PssSearcher::new(cfg.clone()).is_err());
    cfg.d_pss = 1;
    assert!(PssSearcher::new(cfg).is_ok());
}

fn tone(f_hz: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * f_hz * k as f64 / SAMPLE_RATE_HZ as f64))
        .collect()
}

#[test]
fn ddc_passes_ssb_band_and_rejects_far_tones() {
    let lp = Lowpass::standard(63).unwrap();
    let fs = SAMPLE_RATE_HZ as f64;
    assert!((lp.response(0.0, fs) - 1.0).abs() < 1e-9);
    assert_eq!(lp.group_delay(), 31);
    let steady = |y: &[Complex64]| y[20..].iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    // windowed sinc: half amplitude at the cutoff
    assert!((lp.response(3.8e6, fs) - 0.5).abs() < 0.01);
    // a PSS-edge tone mixed down from a GSCN offset lands in the passband
    let offset = CarrierConfig::default().gscn_offset_hz(Gscn::new(7714).unwrap());
    let x = tone(offset + 1.9e6, 4000);
    let y = ddc(&x, offset, 8, Some(&lp), NumericMode::Float32).unwrap();
    assert_eq!(y.samples.len(), 500);
    let pass = steady(&y.samples);
    assert!((pass - lp.response(1.9e6, fs)).abs() < 1e-3, "{pass}");
    assert!(pass > 0.9);
    let far = ddc(&tone(20.0e6, 4000), 0.0, 8, Some(&lp), NumericMode::Float32).unwrap();
    assert!(steady(&far.samples) < 0.01);
    assert!(ddc(&x, 70e6, 8, Some(&lp), NumericMode::Float32).is_err());
}

#[test]
fn search_scans_every_candidate_without_a_signal() {
    let noise_free = vec![Complex64::new(0.0, 0.0); 20_000];
    let searcher = PssSearcher::new(PssSearchConfig {
        gscn_candidates: Gscn::range(7711, 7714).unwrap(),
        d_pss: 10,
        ..PssSearchConfig::default()
    })
    .unwrap();
    let out = searcher
        .search(&noise_free, &CarrierConfig::default())
        .unwrap();
    assert!(out.detection.is_none());
    assert_eq!(out.gscn_scans, 4);
    assert_eq!(out.best_metric, 0.0);
}
