//! Damped Gauss–Newton for overdetermined real systems F(x) = 0.
//!
//! Steps solve the Jacobi-scaled normal equations by Cholesky, with a
//! Levenberg–Marquardt shift when the factorization fails. A factored
//! linearization can be kept and reused (chord iteration) while it still
//! contracts, which makes warm starts from nearby solutions cheap.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub trait LsqProblem: Sync {
    fn n_unknowns(&self) -> usize;
    fn n_residuals(&self) -> usize;
    fn residual(&self, x: &[f64], out: &mut [f64]);
    /// Jacobian columns; `f0` is the residual at `x`.
    fn jacobian(&self, x: &[f64], f0: &[f64], jac: &mut DMatrix<f64>);
}

#[derive(Clone, Copy, Debug)]
pub struct LsqOptions {
    /// Converged when ‖F‖_∞ falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest Armijo step tried before giving up on a direction.
    pub min_step: f64,
}

/// A factored linearization J at some point.
pub struct Linearization {
    jac: DMatrix<f64>,
    scale: Vec<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl Linearization {
    pub fn new(jac: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = jac.shape();
        let scale: Vec<f64> = (0..cols)
            .map(|j| {
                let c = jac.column(j).norm();
                if c > 0.0 {
                    1.0 / c
                } else {
                    1.0
                }
            })
            .collect();
        let data = jac.as_slice();
        let mut normal = DMatrix::<f64>::zeros(cols, cols);
        {
            use rayon::prelude::*;
            let entries: Vec<(usize, Vec<f64>)> = (0..cols)
                .into_par_iter()
                .map(|i| {
                    let ci = &data[i * rows..(i + 1) * rows];
                    let row: Vec<f64> = (0..=i)
                        .map(|j| {
                            let cj = &data[j * rows..(j + 1) * rows];
                            ci.iter().zip(cj).map(|(a, b)| a * b).sum::<f64>() * scale[i] * scale[j]
                        })
                        .collect();
                    (i, row)
                })
                .collect();
            for (i, row) in entries {
                for (j, v) in row.into_iter().enumerate() {
                    normal[(i, j)] = v;
                    normal[(j, i)] = v;
                }
            }
        }
        let mut shift = 0.0;
        loop {
            let mut m = normal.clone();
            if shift > 0.0 {
                for i in 0..cols {
                    m[(i, i)] += shift;
                }
            }
            if let Some(chol) = m.cholesky() {
                return Ok(Linearization { jac, scale, chol });
            }
            shift = if shift == 0.0 { 1e-13 } else { shift * 100.0 };
            if shift > 1.0 {
                return Err(Error::NewtonFailure("normal equations are singular".into()));
            }
        }
    }

    /// Gauss–Newton step −(JᵀJ)⁻¹Jᵀf.
    pub fn step(&self, f: &[f64]) -> Vec<f64> {
        let rows = self.jac.nrows();
        let data = self.jac.as_slice();
        let g = DVector::from_iterator(
            self.scale.len(),
            self.scale
                .iter()
                .enumerate()
                .map(|(j, s)| s * data[j * rows..(j + 1) * rows].iter().zip(f).map(|(a, b)| a * b).sum::<f64>()),
        );
        let y = self.chol.solve(&g);
        y.iter().zip(&self.scale).map(|(yi, s)| -yi * s).collect()
    }

    pub fn jacobian(&self) -> &DMatrix<f64> {
        &self.jac
    }
}

#[derive(Clone)]
pub struct LsqOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub jacobians: usize,
    pub linearization: Option<Arc<Linearization>>,
}

/// A factored Jacobian is kept while full steps contract the residual at least this
/// much; chord steps are two orders of magnitude cheaper than a new Jacobian.
pub const CHORD_RATIO: f64 = 0.7;

/// Budget of steps per allowed Jacobian evaluation.
pub const CHORD_ITERATIONS: usize = 4;

/// A fresh linearization that cannot decrease the residual any further is accepted
/// when the residual is within this factor of the tolerance; downstream certificates
/// judge the result.
pub const STALL_SLACK: f64 = 100.0;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub fn linearize<P: LsqProblem>(prob: &P, x: &[f64], f: &[f64]) -> Result<Linearization> {
    let mut jac = DMatrix::<f64>::zeros(prob.n_residuals(), prob.n_unknowns());
    prob.jacobian(x, f, &mut jac);
    if jac.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Jacobian"));
    }
    Linearization::new(jac)
}

/// Runs damped Gauss–Newton from `x0`, optionally reusing a factored linearization.
pub fn gauss_newton<P: LsqProblem>(
    prob: &P,
    x0: Vec<f64>,
    opts: &LsqOptions,
    warm: Option<Arc<Linearization>>,
) -> Result<LsqOutcome> {
    let mut x = x0;
    let m = prob.n_residuals();
    let mut f = vec![0.0; m];
    prob.residual(&x, &mut f);
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial residual"));
    }
    let mut lin = warm;
    let mut fresh = false;
    let mut iterations = 0;
    let mut jacobians = 0;
    let mut trial = vec![0.0; m];
    let mut xt = vec![0.0; x.len()];
    loop {
        let finf = inf_norm(&f);
        if finf < opts.tol {
            return Ok(LsqOutcome { x, residual: finf, iterations, jacobians, linearization: lin });
        }
        if jacobians >= opts.max_iter || iterations >= CHORD_ITERATIONS * opts.max_iter {
            return Err(Error::SolverStagnation { residual: finf, iterations });
        }
        if lin.is_none() {
            lin = Some(Arc::new(linearize(prob, &x, &f)?));
            jacobians += 1;
            fresh = true;
        }
        let dx = lin.as_ref().expect("linearization").step(&f);
        let f2 = sq_norm(&f);
        let mut s = 1.0;
        let mut accepted = None;
        while s >= opts.min_step {
            for ((t, xi), di) in xt.iter_mut().zip(&x).zip(&dx) {
                *t = xi + s * di;
            }
            prob.residual(&xt, &mut trial);
            let t2 = sq_norm(&trial);
            if t2.is_finite() && t2 <= (1.0 - 1e-4 * s) * f2 {
                accepted = Some(t2);
                break;
            }
            s *= 0.5;
        }
        match accepted {
            None if !fresh => {
                lin = None;
                continue;
            }
            None if finf < STALL_SLACK * opts.tol => {
                return Ok(LsqOutcome { x, residual: finf, iterations, jacobians, linearization: lin });
            }
            None => return Err(Error::SolverStagnation { residual: finf, iterations }),
            Some(t2) => {
                std::mem::swap(&mut x, &mut xt);
                std::mem::swap(&mut f, &mut trial);
                iterations += 1;
                let ratio = (t2 / f2).sqrt();
                if ratio > CHORD_RATIO || s < 1.0 {
                    lin = None;
                }
                fresh = false;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosen;

    impl LsqProblem for Rosen {
        fn n_unknowns(&self) -> usize {
            2
        }
        fn n_residuals(&self) -> usize {
            3
        }
        fn residual(&self, x: &[f64], out: &mut [f64]) {
            out[0] = 10.0 * (x[1] - x[0] * x[0]);
            out[1] = 1.0 - x[0];
            out[2] = 0.1 * (x[0] * x[1] - 1.0);
        }
        fn jacobian(&self, x: &[f64], _f0: &[f64], jac: &mut DMatrix<f64>) {
            jac[(0, 0)] = -20.0 * x[0];
            jac[(0, 1)] = 10.0;
            jac[(1, 0)] = -1.0;
            jac[(1, 1)] = 0.0;
            jac[(2, 0)] = 0.1 * x[1];
            jac[(2, 1)] = 0.1 * x[0];
        }
    }

    #[test]
    fn solves_consistent_overdetermined_system() {
        let opts = LsqOptions { tol: 1e-13, max_iter: 50, min_step: 1e-6 };
        let out = gauss_newton(&Rosen, vec![-1.2, 1.0], &opts, None).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-12 && (out.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_system_stagnates() {
        struct Bad;
        impl LsqProblem for Bad {
            fn n_unknowns(&self) -> usize {
                1
            }
            fn n_residuals(&self) -> usize {
                2
            }
            fn residual(&self, x: &[f64], out: &mut [f64]) {
                out[0] = x[0] - 1.0;
                out[1] = x[0] + 1.0;
            }
            fn jacobian(&self, _x: &[f64], _f0: &[f64], jac: &mut DMatrix<f64>) {
                jac[(0, 0)] = 1.0;
                jac[(1, 0)] = 1.0;
            }
        }
        let opts = LsqOptions { tol: 1e-10, max_iter: 20, min_step: 1e-4 };
        assert!(matches!(gauss_newton(&Bad, vec![3.0], &opts, None), Err(Error::SolverStagnation { .. })));
    }
}
