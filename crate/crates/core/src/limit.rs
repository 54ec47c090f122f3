//! Radial and angular limit estimation at the boundary point 1 by polynomial
//! Richardson extrapolation in the distance 1 − r.

use crate::contour::cauchy_derivative;
use crate::cvec::{c64, C64};
use crate::error::{Error, Result};
use crate::hardy::HardyMap;

#[derive(Clone, Copy, Debug)]
pub struct LimitOptions {
    /// Radii r_k = 1 − 2^{−k} for k in k_min..=k_max.
    pub k_min: u32,
    pub k_max: u32,
    /// Accept when the error estimate is below rel_tol · max(1, |value|).
    pub rel_tol: f64,
    /// Nodes of the Cauchy circles used for derivatives of closures.
    pub cauchy_nodes: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { k_min: 3, k_max: 12, rel_tol: 1e-6, cauchy_nodes: 48 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitEstimate {
    pub value: C64,
    /// Spread between neighbouring extrapolants, plus the Stolz-ray discrepancy when present.
    pub error: f64,
}

/// Extrapolates samples y(x_i) to x = 0 with a Neville table and returns the entry
/// whose neighbour in the same column agrees best.
pub fn richardson_to_zero(xs: &[f64], ys: &[C64]) -> LimitEstimate {
    let n = xs.len();
    assert!(n >= 2 && ys.len() == n);
    let mut t: Vec<Vec<C64>> = vec![Vec::new(); n];
    for i in 0..n {
        t[i].push(ys[i]);
        for j in 1..=i {
            let prev = t[i][j - 1];
            let diag = t[i - 1][j - 1];
            let v = prev + (prev - diag) / (xs[i - j] / xs[i] - 1.0);
            t[i].push(v);
        }
    }
    let mut best = LimitEstimate { value: ys[n - 1], error: (ys[n - 1] - ys[n - 2]).norm() };
    for j in 0..n {
        for i in (j + 1)..n {
            let err = (t[i][j] - t[i - 1][j]).norm();
            let floor = 4.0 * f64::EPSILON * t[i][j].norm();
            let err = err.max(floor);
            if err < best.error {
                best = LimitEstimate { value: t[i][j], error: err };
            }
        }
    }
    best
}

fn accept(est: LimitEstimate, opts: &LimitOptions) -> Result<LimitEstimate> {
    if !est.value.re.is_finite() || !est.value.im.is_finite() {
        return Err(Error::NonConvergent(f64::INFINITY));
    }
    if est.error > opts.rel_tol * est.value.norm().max(1.0) {
        return Err(Error::NonConvergent(est.error));
    }
    Ok(est)
}

/// Richardson limit of g(x) as x → 0⁺ sampled at x_k = 2^{−k}.
pub fn limit_at_zero<G: Fn(f64) -> Result<C64>>(g: G, opts: &LimitOptions) -> Result<LimitEstimate> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in opts.k_min..=opts.k_max {
        let x = 0.5f64.powi(k as i32);
        xs.push(x);
        ys.push(g(x)?);
    }
    accept(richardson_to_zero(&xs, &ys), opts)
}

/// Angular limit at 1 of the `order`-th derivative of a holomorphic function on Δ.
///
/// The radial estimate is cross-checked along a second ray inside the Stolz
/// region of aperture β; the discrepancy is folded into the error estimate.
pub fn angular_limit<F: Fn(C64) -> C64>(h: F, beta: f64, order: usize, opts: &LimitOptions) -> Result<LimitEstimate> {
    if !(beta > 1.0) {
        return Err(Error::InvalidInput(format!("aperture must exceed 1, got {beta}")));
    }
    let slope = 0.5 * (beta * beta - 1.0).sqrt().min(1.0);
    let eval = |z: C64| -> C64 {
        if order == 0 {
            h(z)
        } else {
            let rad = 0.5 * (1.0 - z.norm());
            cauchy_derivative(&h, z, rad, order, opts.cauchy_nodes)
        }
    };
    let radial = limit_at_zero(|x| Ok(eval(c64(1.0 - x, 0.0))), opts)?;
    let stolz = limit_at_zero(|x| Ok(eval(c64(1.0 - x, -slope * x))), opts)?;
    let gap = (radial.value - stolz.value).norm();
    accept(LimitEstimate { value: radial.value, error: radial.error.max(stolz.error).max(gap) }, opts)
}

/// Angular limit of the `order`-th derivative of coordinate `j` of a Hardy map,
/// using exact term-wise derivatives.
pub fn angular_limit_map(h: &HardyMap, j: usize, beta: f64, order: usize, opts: &LimitOptions) -> Result<LimitEstimate> {
    if j >= h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: j + 1 });
    }
    let row = h.coordinate(j).to_vec();
    let exact = LimitOptions { cauchy_nodes: opts.cauchy_nodes, ..*opts };
    let f = move |z: C64| crate::hardy::horner_derivative(&row, z, order);
    angular_limit(f, beta, 0, &exact)
}
