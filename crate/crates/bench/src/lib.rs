//! Criterion benchmarks for the cell search hot paths.

use std::hint::black_box;
use std::time::Duration;

use criterion::{BenchmarkId, Criterion, Throughput};
use ssbscan::channel::{apply_channel, ChannelConfig};
use ssbscan::rx_sync::{ddc, pss_correlate, Lowpass, PssCorrelator, DEFAULT_FIR_TAPS};
use ssbscan::sequences::{dmrs_sequence, sss_sequence};
use ssbscan::{
    cell_search, schedule_frames, CellSearchConfig, Gscn, IqStream, NumericMode, Pci,
    PssSearchConfig, SsbIndex, TxConfig,
};

/// One half frame of SSB bursts at 0 dB SNR, carrier at the first GSCN.
fn capture() -> IqStream {
    let cfg = TxConfig::new(Pci::new(417).unwrap(), Gscn::new(7711).unwrap(), 1);
    let tx = schedule_frames(&cfg).unwrap();
    let ch = ChannelConfig {
        snr_db: 0.0,
        delay_samples: 3000,
        noise_seed: 1,
        ..ChannelConfig::default()
    };
    let mut iq = apply_channel(&tx, &ch).unwrap();
    iq.samples.truncate(200_000);
    iq
}

fn correlation(c: &mut Criterion, iq: &IqStream) {
    let lp = Lowpass::standard(DEFAULT_FIR_TAPS).unwrap();
    let mut g = c.benchmark_group("pss_correlate");
    for mode in [NumericMode::Float32, NumericMode::fixed(24, 2).unwrap()] {
        for d in [1, 6, 10, 14] {
            let x = ddc(&iq.samples[..60_000], 0.0, d, Some(&lp), mode)
                .unwrap()
                .samples;
            let corr = PssCorrelator::standard(d, DEFAULT_FIR_TAPS, mode).unwrap();
            let lags = corr.n_lags(x.len()) as u64;
            g.throughput(Throughput::Elements(lags * 3));
            g.bench_with_input(BenchmarkId::new(mode.to_string(), d), &x, |b, x| {
                b.iter(|| pss_correlate(black_box(x), &corr, 0.5))
            });
        }
    }
    g.finish();
}

fn downconversion(c: &mut Criterion, iq: &IqStream) {
    let lp = Lowpass::standard(DEFAULT_FIR_TAPS).unwrap();
    let x = &iq.samples[..60_000];
    let mut g = c.benchmark_group("ddc");
    g.throughput(Throughput::Elements(x.len() as u64));
    for d in [1, 10] {
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            b.iter(|| ddc(black_box(x), 1.44e6, d, Some(&lp), NumericMode::Float32).unwrap())
        });
    }
    g.finish();
}

fn sequences(c: &mut Criterion) {
    c.bench_function("sss_all_pci", |b| {
        b.iter(|| {
            (0..1008)
                .map(|p| sss_sequence(Pci::new(p).unwrap()))
                .collect::<Vec<_>>()
        })
    });
    c.bench_function("dmrs_all_index", |b| {
        let pci = Pci::new(417).unwrap();
        b.iter(|| {
            SsbIndex::all()
                .map(|i| dmrs_sequence(black_box(pci), i))
                .collect::<Vec<_>>()
        })
    });
}

fn full_search(c: &mut Criterion, iq: &IqStream) {
    let mut g = c.benchmark_group("cell_search");
    g.sample_size(10);
    for d in [6, 14] {
        let cfg = CellSearchConfig::uniform(PssSearchConfig {
            gscn_candidates: Gscn::range(7711, 7712).unwrap(),
            d_pss: d,
            ..PssSearchConfig::default()
        });
        g.bench_with_input(BenchmarkId::from_parameter(d), &cfg, |b, cfg| {
            b.iter(|| cell_search(black_box(iq), cfg).unwrap())
        });
    }
    g.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    let iq = capture();
    correlation(c, &iq);
    downconversion(c, &iq);
    sequences(c);
    full_search(c, &iq);
}

/// Shorter measurement windows than criterion's defaults; the full set still
/// takes a few minutes on one core.
pub fn config() -> Criterion {
    Criterion::default()
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(2))
}
