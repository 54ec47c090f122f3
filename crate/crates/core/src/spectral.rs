//! FFT helpers for samples on the equispaced boundary grid ζ_k = e^{2πik/M}.
//!
//! With this sign convention the inverse transform of the coefficient vector
//! gives the boundary values Σ a_m ζ_k^m, and the forward transform divided by
//! M recovers mode m at index m (negative modes at index M−m).

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::cvec::{c64, C64};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Forward and inverse plans of one length, cheap to clone.
#[derive(Clone)]
pub struct Plans {
    pub len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    pub fn new(len: usize) -> Self {
        PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            Plans { len, forward: p.plan_fft_forward(len), inverse: p.plan_fft_inverse(len) }
        })
    }

    /// In place: values ↦ Σ_k values_k e^{-2πijk/M} (unnormalized).
    pub fn forward(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.forward.process(buf);
    }

    /// In place: coefficients ↦ Σ_m c_m e^{2πimk/M} (unnormalized).
    pub fn inverse(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.inverse.process(buf);
    }

    /// Boundary values of Σ_{m≤N} a_m ζ^m on the grid.
    pub fn synthesize(&self, coeffs: &[C64], out: &mut [C64]) {
        assert!(coeffs.len() <= self.len);
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        out[..coeffs.len()].copy_from_slice(coeffs);
        self.inverse(out);
    }

    /// Fourier modes (divided by M) of boundary samples, in place.
    pub fn analyze(&self, buf: &mut [C64]) {
        self.forward(buf);
        let s = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }
}

/// The grid nodes e^{2πik/M}.
pub fn nodes(m: usize) -> Vec<C64> {
    (0..m).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)).collect()
}

/// Values of the real trigonometric polynomial λ(θ) = Σ_{m=1}^K 2 Re(λ_m e^{imθ}) on the grid.
pub fn real_trig_samples(plans: &Plans, lam: &[C64], out: &mut [f64], scratch: &mut [C64]) {
    scratch.iter_mut().for_each(|z| *z = c64(0.0, 0.0));
    scratch[1..=lam.len()].copy_from_slice(lam);
    plans.inverse(scratch);
    for (o, s) in out.iter_mut().zip(scratch.iter()) {
        *o = 2.0 * s.re;
    }
}

/// Trigonometric interpolation of real samples on the grid, evaluated at angle θ.
pub fn trig_interpolate(modes: &[C64], theta: f64) -> f64 {
    let m = modes.len();
    let mut acc = modes[0].re;
    let half = m / 2;
    for k in 1..half {
        acc += 2.0 * (modes[k] * C64::from_polar(1.0, k as f64 * theta)).re;
    }
    if m % 2 == 0 {
        acc += (modes[half] * C64::from_polar(1.0, half as f64 * theta)).re;
    }
    acc
}

/// Derivative in θ of the trigonometric interpolant of real samples.
pub fn trig_derivative(modes: &[C64], theta: f64) -> f64 {
    let m = modes.len();
    let half = m / 2;
    let mut acc = 0.0;
    for k in 1..half {
        let kk = k as f64;
        acc += 2.0 * (modes[k] * c64(0.0, kk) * C64::from_polar(1.0, kk * theta)).re;
    }
    acc
}

/// Modes of real samples (divided by M).
pub fn real_modes(plans: &Plans, samples: &[f64]) -> Vec<C64> {
    let mut buf: Vec<C64> = samples.iter().map(|&x| c64(x, 0.0)).collect();
    plans.analyze(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthesize_then_analyze_round_trips() {
        let p = Plans::new(16);
        let coeffs = vec![c64(1.0, 2.0), c64(-0.5, 0.25), c64(0.0, 3.0)];
        let mut buf = vec![c64(0.0, 0.0); 16];
        p.synthesize(&coeffs, &mut buf);
        let z = nodes(16);
        for k in 0..16 {
            let direct = coeffs[0] + coeffs[1] * z[k] + coeffs[2] * z[k] * z[k];
            assert!((direct - buf[k]).norm() < 1e-13);
        }
        p.analyze(&mut buf);
        for m in 0..3 {
            assert!((buf[m] - coeffs[m]).norm() < 1e-14);
        }
        for m in 3..16 {
            assert!(buf[m].norm() < 1e-14);
        }
    }

    #[test]
    fn real_trig_polynomial_and_derivative() {
        let p = Plans::new(32);
        let lam = vec![c64(0.3, -0.2), c64(0.1, 0.05)];
        let mut out = vec![0.0; 32];
        let mut scratch = vec![c64(0.0, 0.0); 32];
        real_trig_samples(&p, &lam, &mut out, &mut scratch);
        let th = 2.0 * PI * 3.0 / 32.0;
        let direct: f64 = lam
            .iter()
            .enumerate()
            .map(|(i, l)| 2.0 * (l * C64::from_polar(1.0, (i + 1) as f64 * th)).re)
            .sum();
        assert!((out[3] - direct).abs() < 1e-14);
        let modes = real_modes(&p, &out);
        assert!((trig_interpolate(&modes, 0.7) - {
            lam.iter()
                .enumerate()
                .map(|(i, l)| 2.0 * (l * C64::from_polar(1.0, (i + 1) as f64 * 0.7)).re)
                .sum::<f64>()
        })
        .abs()
            < 1e-13);
        // dλ/dθ(0) = −2 Σ m Im λ_m
        let d0 = trig_derivative(&modes, 0.0);
        assert!((d0 - (-2.0 * (1.0 * -0.2 + 2.0 * 0.05))).abs() < 1e-13);
    }
}
