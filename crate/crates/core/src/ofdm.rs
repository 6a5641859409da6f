//! Unitary 4096-point transforms shared by the modulator and demodulator.
//!
//! Frequency index `k` (0..4096) sits at baseband frequency `(k - 2048) * 30 kHz`.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::numerology::N_FFT;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans() -> &'static Plans {
    static PLANS: OnceLock<Plans> = OnceLock::new();
    PLANS.get_or_init(|| {
        let mut planner = FftPlanner::new();
        Plans {
            forward: planner.plan_fft_forward(N_FFT),
            inverse: planner.plan_fft_inverse(N_FFT),
        }
    })
}

const HALF: usize = N_FFT / 2;
fn scale() -> f64 {
    1.0 / (N_FFT as f64).sqrt()
}

/// Grid (DC at index 2048) to time samples, scaled by 1/sqrt(N).
pub(crate) fn grid_to_time(freq: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(freq.len(), N_FFT);
    let mut buf = vec![Complex64::new(0.0, 0.0); N_FFT];
    buf[..HALF].copy_from_slice(&freq[HALF..]);
    buf[HALF..].copy_from_slice(&freq[..HALF]);
    plans().inverse.process(&mut buf);
    let s = scale();
    buf.iter_mut().for_each(|v| *v *= s);
    buf
}

/// Time samples to grid (DC at index 2048), scaled by 1/sqrt(N).
pub(crate) fn time_to_grid(time: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(time.len(), N_FFT);
    let mut buf = time.to_vec();
    plans().forward.process(&mut buf);
    let s = scale();
    let mut out = vec![Complex64::new(0.0, 0.0); N_FFT];
    out[HALF..].copy_from_slice(&buf[..HALF]);
    out[..HALF].copy_from_slice(&buf[HALF..]);
    out.iter_mut().for_each(|v| *v *= s);
    out
}
