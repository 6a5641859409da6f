//! AWGN channel with integer delay and gain.

use std::ops::Range;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerology::SAMPLES_PER_FRAME;
use crate::stream::IqStream;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Signal-to-noise ratio in dB; `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub delay_samples: usize,
    pub gain_db: f64,
    pub noise_seed: u64,
    pub max_delay_samples: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            snr_db: f64::INFINITY,
            delay_samples: 0,
            gain_db: 0.0,
            noise_seed: 0,
            max_delay_samples: 2 * SAMPLES_PER_FRAME,
        }
    }
}

impl ChannelConfig {
    pub fn awgn(snr_db: f64, noise_seed: u64) -> Self {
        Self {
            snr_db,
            noise_seed,
            ..Self::default()
        }
    }

    pub fn with_delay(mut self, delay: usize) -> Self {
        self.delay_samples = delay;
        self
    }
}

/// Per-sample complex noise variance giving `snr_db` against `signal_power`.
pub fn noise_variance(signal_power: f64, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        signal_power / 10f64.powf(snr_db / 10.0)
    }
}

/// Adds circularly-symmetric complex Gaussian noise of total variance `variance`.
pub fn add_noise(samples: &mut [Complex64], variance: f64, rng: &mut ChaCha8Rng) {
    if variance <= 0.0 {
        return;
    }
    let sigma = (variance / 2.0).sqrt();
    for s in samples {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *s += Complex64::new(sigma * re, sigma * im);
    }
}

/// `gain * input`, delayed by `delay_samples` (noise-only lead-in), plus AWGN.
///
/// The SNR is referenced to the mean per-sample power of the SSB-occupied
/// spans of the (gain-scaled) input, with noise spread over the full sample rate.
pub fn apply_channel(iq: &IqStream, cfg: &ChannelConfig) -> Result<IqStream> {
    if iq.is_empty() {
        return Err(Error::EmptyInput);
    }
    if cfg.delay_samples > cfg.max_delay_samples {
        return Err(Error::range(
            "delay_samples",
            cfg.delay_samples as i64,
            0,
            cfg.max_delay_samples as i64,
        ));
    }
    if cfg.snr_db.is_nan() || !cfg.gain_db.is_finite() {
        return Err(Error::Config("snr_db and gain_db must be numbers".into()));
    }
    let gain = 10f64.powf(cfg.gain_db / 20.0);
    let mut samples = vec![Complex64::new(0.0, 0.0); iq.len() + cfg.delay_samples];
    for (o, i) in samples[cfg.delay_samples..].iter_mut().zip(&iq.samples) {
        *o = i * gain;
    }
    let power = iq.reference_power() * gain * gain;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
    add_noise(&mut samples, noise_variance(power, cfg.snr_db), &mut rng);
    Ok(IqStream {
        samples,
        sample_rate_hz: iq.sample_rate_hz,
        carrier_center_hz: iq.carrier_center_hz,
        occupied: iq
            .occupied
            .iter()
            .map(|r| r.start + cfg.delay_samples..r.end + cfg.delay_samples)
            .collect(),
    })
}

/// The samples `span` of what [`apply_channel`] would produce, without building the rest.
///
/// Gain, delay and SNR reference are identical; the noise sequence is drawn
/// only for the span, so it differs from the full-stream realization.
pub fn apply_channel_span(
    iq: &IqStream,
    cfg: &ChannelConfig,
    span: Range<usize>,
) -> Result<IqStream> {
    if iq.is_empty() {
        return Err(Error::EmptyInput);
    }
    let total = iq.len() + cfg.delay_samples;
    if span.end > total || span.start > span.end {
        return Err(Error::InsufficientSamples {
            needed: span.len(),
            from: span.start,
            available: total.saturating_sub(span.start),
        });
    }
    if cfg.delay_samples > cfg.max_delay_samples {
        return Err(Error::range(
            "delay_samples",
            cfg.delay_samples as i64,
            0,
            cfg.max_delay_samples as i64,
        ));
    }
    if cfg.snr_db.is_nan() || !cfg.gain_db.is_finite() {
        return Err(Error::Config("snr_db and gain_db must be numbers".into()));
    }
    let gain = 10f64.powf(cfg.gain_db / 20.0);
    let mut samples: Vec<Complex64> = span
        .clone()
        .map(|k| match k.checked_sub(cfg.delay_samples) {
            Some(j) => iq.samples[j] * gain,
            None => Complex64::new(0.0, 0.0),
        })
        .collect();
    let power = iq.reference_power() * gain * gain;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
    add_noise(&mut samples, noise_variance(power, cfg.snr_db), &mut rng);
    let shift = |r: &Range<usize>| {
        let s = (r.start + cfg.delay_samples).clamp(span.start, span.end) - span.start;
        let e = (r.end + cfg.delay_samples).clamp(span.start, span.end) - span.start;
        s..e
    };
    Ok(IqStream {
        samples,
        sample_rate_hz: iq.sample_rate_hz,
        carrier_center_hz: iq.carrier_center_hz,
        occupied: iq
            .occupied
            .iter()
            .map(shift)
            .filter(|r| !r.is_empty())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerology::CarrierConfig;

    fn tone(n: usize) -> IqStream {
        let s = (0..n)
            .map(|k| Complex64::from_polar(0.5, k as f64 * 0.01))
            .collect();
        IqStream::new(s, CarrierConfig::default())
    }

    #[test]
    fn identity_channel() {
        let x = tone(1000);
        let y = apply_channel(&x, &ChannelConfig::default()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn errors() {
        let empty = IqStream::new(vec![], CarrierConfig::default());
        assert!(matches!(
            apply_channel(&empty, &ChannelConfig::default()),
            Err(Error::EmptyInput)
        ));
        let cfg = ChannelConfig::default().with_delay(3 * SAMPLES_PER_FRAME);
        assert!(apply_channel(&tone(10), &cfg).is_err());
    }

    #[test]
    fn length_and_delay() {
        let x = tone(500);
        let cfg = ChannelConfig {
            gain_db: 6.0,
            ..ChannelConfig::default().with_delay(77)
        };
        let y = apply_channel(&x, &cfg).unwrap();
        assert_eq!(y.len(), 577);
        assert!(y.samples[..77].iter().all(|v| v.norm() == 0.0));
        let g = 10f64.powf(6.0 / 20.0);
        assert!((y.samples[77 + 10] - x.samples[10] * g).norm() < 1e-12);
    }

    #[test]
    fn empirical_snr() {
        let mut x = tone(1_000_000);
        x.occupied = std::iter::once(0..1_000_000).collect();
        let y = apply_channel(&x, &ChannelConfig::awgn(0.0, 5)).unwrap();
        let noise: f64 = y
            .samples
            .iter()
            .zip(&x.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / 1e6;
        let snr = 10.0 * (0.25 / noise).log10();
        assert!(snr.abs() < 0.3, "{snr}");
    }

    #[test]
    fn span_matches_noiseless_full() {
        let x = tone(1000);
        let cfg = ChannelConfig {
            gain_db: -3.0,
            ..ChannelConfig::default().with_delay(50)
        };
        let full = apply_channel(&x, &cfg).unwrap();
        let part = apply_channel_span(&x, &cfg, 20..300).unwrap();
        assert_eq!(part.samples, full.samples[20..300]);
        assert!(apply_channel_span(&x, &cfg, 900..1051).is_err());
    }

    #[test]
    fn seeds() {
        let x = IqStream::new(
            vec![Complex64::new(0.0, 0.0); 100_000],
            CarrierConfig::default(),
        );
        let mut x = x;
        x.samples[0] = Complex64::new(1.0, 0.0);
        let a = apply_channel(&x, &ChannelConfig::awgn(0.0, 1)).unwrap();
        let b = apply_channel(&x, &ChannelConfig::awgn(0.0, 1)).unwrap();
        let c = apply_channel(&x, &ChannelConfig::awgn(0.0, 2)).unwrap();
        assert_eq!(a, b);
        let dot: Complex64 = a.samples[1..]
            .iter()
            .zip(&c.samples[1..])
            .map(|(p, q)| p * q.conj())
            .sum();
        let ea: f64 = a.samples[1..].iter().map(|v| v.norm_sqr()).sum();
        let ec: f64 = c.samples[1..].iter().map(|v| v.norm_sqr()).sum();
        assert!(dot.norm() / (ea * ec).sqrt() < 0.01);
    }
}
