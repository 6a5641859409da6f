use std::ops::Range;

use num_complex::Complex64;

use crate::numerology::{CarrierConfig, SAMPLE_RATE_HZ};

/// Complex baseband samples with their sample rate and carrier center.
///
/// `occupied` lists sample spans known to carry SSB symbols. The transmitter
/// fills it and the channel shifts it; streams read from disk leave it empty.
#[derive(Debug, Clone, PartialEq)]
pub struct IqStream {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: u64,
    pub carrier_center_hz: u64,
    pub occupied: Vec<Range<usize>>,
}

impl IqStream {
    pub fn new(samples: Vec<Complex64>, carrier: CarrierConfig) -> Self {
        Self {
            samples,
            sample_rate_hz: SAMPLE_RATE_HZ,
            carrier_center_hz: carrier.carrier_center_hz,
            occupied: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn carrier(&self) -> CarrierConfig {
        CarrierConfig::new(self.carrier_center_hz)
    }

    /// Mean per-sample power over `occupied`, or over all samples when no spans are known.
    pub fn reference_power(&self) -> f64 {
        let power = |r: &[Complex64]| r.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if self.occupied.is_empty() {
            if self.samples.is_empty() {
                return 0.0;
            }
            return power(&self.samples) / self.samples.len() as f64;
        }
        let (mut e, mut n) = (0.0, 0usize);
        for r in &self.occupied {
            let r = r.start.min(self.len())..r.end.min(self.len());
            e += power(&self.samples[r.clone()]);
            n += r.len();
        }
        if n == 0 {
            0.0
        } else {
            e / n as f64
        }
    }
}
