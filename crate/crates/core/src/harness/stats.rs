//! Binomial confidence bands for detection-rate comparisons.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// True when the two rates' 95% Wilson intervals overlap.
pub fn rates_compatible(k1: usize, n1: usize, k2: usize, n2: usize) -> bool {
    let (lo1, hi1) = wilson_interval(k1, n1, Z95);
    let (lo2, hi2) = wilson_interval(k2, n2, Z95);
    lo1 <= hi2 && lo2 <= hi1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        let (lo, hi) = wilson_interval(0, 200, Z95);
        assert!(lo < 1e-12);
        assert!((hi - 0.01884).abs() < 1e-4);
        assert_eq!(wilson_interval(0, 0, Z95), (0.0, 1.0));
        assert!(rates_compatible(190, 200, 196, 200));
        assert!(!rates_compatible(100, 200, 196, 200));
    }
}
