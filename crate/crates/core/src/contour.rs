//! Discrete contour integration and winding numbers.

use std::f64::consts::PI;

use crate::cvec::C64;
use crate::error::{Error, Result};

/// Samples with modulus below this fraction of the largest sample are treated as zero.
pub const ZERO_SAMPLE_TOL: f64 = 1e-12;

/// Winding number about 0 of a closed loop given by its samples (last joins first).
pub fn winding_number(samples: &[C64]) -> Result<i64> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput("a loop needs at least three samples".into()));
    }
    let scale = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !scale.is_finite() {
        return Err(Error::NonFinite("contour samples"));
    }
    if samples.iter().any(|z| z.norm() <= ZERO_SAMPLE_TOL * scale) || scale == 0.0 {
        return Err(Error::SampleNearZero);
    }
    let n = samples.len();
    let total: f64 = (0..n).map(|k| (samples[(k + 1) % n] / samples[k]).arg()).sum();
    Ok((total / (2.0 * PI)).round() as i64)
}

/// (1/2πi)∮_{|ζ|=1} f(ζ) dζ by the trapezoid rule on equispaced nodes,
/// given samples f(ζ_k) and the nodes ζ_k.
pub fn circle_mean_weighted(nodes: &[C64], samples: &[C64]) -> C64 {
    let m = nodes.len() as f64;
    nodes.iter().zip(samples).map(|(z, f)| z * f).sum::<C64>() / m
}

/// The d-th derivative of a holomorphic function at `center` from a Cauchy integral
/// over a circle of the given radius with `k` nodes.
pub fn cauchy_derivative<F: Fn(C64) -> C64>(f: &F, center: C64, radius: f64, order: usize, k: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..k {
        let w = C64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64);
        acc += f(center + w * radius) * w.powu(order as u32).inv();
    }
    let fact: f64 = (1..=order).map(|i| i as f64).product();
    acc * fact / (k as f64 * radius.powi(order as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::nodes;

    #[test]
    fn winding_examples() {
        let z = nodes(64);
        assert_eq!(winding_number(&z).unwrap(), 1);
        let c: Vec<C64> = z.iter().map(|_| C64::new(0.3, -0.1)).collect();
        assert_eq!(winding_number(&c).unwrap(), 0);
        let sq: Vec<C64> = z.iter().map(|w| w * w).collect();
        assert_eq!(winding_number(&sq).unwrap(), 2);
        let mut zero = z.clone();
        zero[5] = C64::new(0.0, 0.0);
        assert_eq!(winding_number(&zero), Err(Error::SampleNearZero));
    }

    #[test]
    fn cauchy_derivative_of_polynomial() {
        let f = |z: C64| z * z * z;
        let d = cauchy_derivative(&f, C64::new(0.2, 0.1), 0.3, 3, 32);
        assert!((d - C64::new(6.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trapezoid_contour_integral() {
        // (1/2πi)∮ dζ/(ζ − a) = 1 for |a| < 1
        let z = nodes(64);
        let a = C64::new(0.3, 0.2);
        let s: Vec<C64> = z.iter().map(|w| (w - a).inv()).collect();
        assert!((circle_mean_weighted(&z, &s) - C64::new(1.0, 0.0)).norm() < 1e-14);
    }
}
