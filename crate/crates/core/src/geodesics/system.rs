//! The discretized stationarity system.
//!
//! Unknowns: [Re, Im] of the coefficients a_{j,m} (j < n, m ≤ N), then [Re, Im]
//! of λ_m (1 ≤ m ≤ K), then problem-specific extras. Residuals: r∘φ at the M
//! nodes, the negative modes −1..−N of ζ e^λ conj(ν∘φ), then side conditions.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cvec::{self, c64, C64};
use crate::domain::DomainSpec;
use crate::lsq::LsqProblem;
use crate::spectral::{nodes, real_trig_samples, Plans};

use super::SolverConfig;

/// Side conditions, in the solver's native gauge.
#[derive(Clone, Debug)]
pub(crate) enum Side {
    /// φ(1) = p, φ′(1) = u, preferred gauge.
    Boundary { p: Vec<C64>, u: Vec<C64> },
    /// φ(1) = p, φ(ζ*) = z, ⟨φ′(1),ν⟩ = |φ′(1)|², preferred gauge. Extras: ζ*.
    Rep { p: Vec<C64>, nu: Vec<C64>, z: Vec<C64> },
    /// φ(ζ₁) = z, φ(ζ₂) = w, λ₁ = 0, ζ₂ − ζ₁ > 0. Extras: ζ₁, ζ₂.
    Points { z: Vec<C64>, w: Vec<C64> },
    /// φ(ζ₁) = z, φ′(ζ₁) = s v, λ₁ = 0. Extras: ζ₁, s.
    Direction { z: Vec<C64>, v: Vec<C64> },
}

impl Side {
    pub fn extras(&self) -> usize {
        match self {
            Side::Boundary { .. } => 0,
            Side::Rep { .. } => 2,
            Side::Points { .. } => 4,
            Side::Direction { .. } => 3,
        }
    }

    fn rows(&self, n: usize) -> usize {
        match self {
            Side::Boundary { .. } => 4 * n + 1,
            Side::Rep { .. } => 4 * n + 3,
            Side::Points { .. } => 4 * n + 3,
            Side::Direction { .. } => 4 * n + 2,
        }
    }
}

pub(crate) struct System<'a> {
    pub domain: &'a DomainSpec,
    pub n: usize,
    pub deg: usize,
    pub m: usize,
    pub k: usize,
    pub side: Side,
    plans: Plans,
    nodes: Vec<C64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    fd_step: f64,
}

impl<'a> System<'a> {
    pub fn new(domain: &'a DomainSpec, side: Side, cfg: &SolverConfig) -> Self {
        let m = cfg.grid;
        let k = cfg.mu_degree;
        let z = nodes(m);
        let mut cos = vec![0.0; k * m];
        let mut sin = vec![0.0; k * m];
        for mm in 1..=k {
            for i in 0..m {
                let th = 2.0 * std::f64::consts::PI * ((mm * i) % m) as f64 / m as f64;
                cos[(mm - 1) * m + i] = th.cos();
                sin[(mm - 1) * m + i] = th.sin();
            }
        }
        System {
            domain,
            n: domain.dim(),
            deg: cfg.degree,
            m,
            k,
            side,
            plans: Plans::new(m),
            nodes: z,
            cos,
            sin,
            fd_step: cfg.fd_step,
        }
    }

    pub fn n_phi(&self) -> usize {
        2 * self.n * (self.deg + 1)
    }

    pub fn lam_base(&self) -> usize {
        self.n_phi()
    }

    pub fn extra_base(&self) -> usize {
        self.n_phi() + 2 * self.k
    }

    pub fn coef(&self, x: &[f64], j: usize, mm: usize) -> C64 {
        let i = 2 * (j * (self.deg + 1) + mm);
        c64(x[i], x[i + 1])
    }

    pub fn extra(&self, x: &[f64], i: usize) -> f64 {
        x[self.extra_base() + i]
    }

    pub fn extra_c(&self, x: &[f64], i: usize) -> C64 {
        c64(x[self.extra_base() + i], x[self.extra_base() + i + 1])
    }

    pub fn coeff_rows(&self, x: &[f64]) -> Vec<Vec<C64>> {
        (0..self.n).map(|j| (0..=self.deg).map(|mm| self.coef(x, j, mm)).collect()).collect()
    }

    pub fn lam_coeffs(&self, x: &[f64]) -> Vec<C64> {
        let b = self.lam_base();
        (0..self.k).map(|i| c64(x[b + 2 * i], x[b + 2 * i + 1])).collect()
    }

    /// φ at the nodes (per coordinate) and λ at the nodes.
    pub fn samples(&self, x: &[f64]) -> (Vec<Vec<C64>>, Vec<f64>) {
        let phi = self
            .coeff_rows(x)
            .iter()
            .map(|row| {
                let mut buf = vec![c64(0.0, 0.0); self.m];
                self.plans.synthesize(row, &mut buf);
                buf
            })
            .collect();
        let mut lam = vec![0.0; self.m];
        let mut scratch = vec![c64(0.0, 0.0); self.m];
        real_trig_samples(&self.plans, &self.lam_coeffs(x), &mut lam, &mut scratch);
        (phi, lam)
    }

    fn eval_at(&self, x: &[f64], zeta: C64, order: usize) -> Vec<C64> {
        (0..self.n)
            .map(|j| {
                let row: Vec<C64> = (0..=self.deg).map(|mm| self.coef(x, j, mm)).collect();
                crate::hardy::horner_derivative(&row, zeta, order)
            })
            .collect()
    }

    fn eval_nodes(&self, x: &[f64], phi: &[Vec<C64>], lam: &[f64], out: &mut [f64]) {
        let (n, m, deg) = (self.n, self.m, self.deg);
        let mut h = vec![vec![c64(0.0, 0.0); m]; n];
        let mut z = vec![c64(0.0, 0.0); n];
        let mut g = vec![c64(0.0, 0.0); n];
        for k in 0..m {
            for j in 0..n {
                z[j] = phi[j][k];
            }
            out[k] = self.domain.value_and_gradient(&z, &mut g);
            let gn = cvec::norm_sqr(&g).sqrt();
            let f = self.nodes[k] * (lam[k].exp() / gn);
            for j in 0..n {
                h[j][k] = f * g[j].conj();
            }
        }
        let inv = 1.0 / m as f64;
        for j in 0..n {
            self.plans.forward(&mut h[j]);
            for mm in 1..=deg {
                let c = h[j][m - mm] * inv;
                let i = m + 2 * (j * deg + mm - 1);
                out[i] = c.re;
                out[i + 1] = c.im;
            }
        }
        let base = m + 2 * n * deg;
        self.side_residuals(x, &mut out[base..]);
    }

    fn push(out: &mut [f64], at: &mut usize, v: C64) {
        out[*at] = v.re;
        out[*at + 1] = v.im;
        *at += 2;
    }

    fn preferred(&self, x: &[f64]) -> f64 {
        let b = self.lam_base();
        -2.0 * (1..=self.k).map(|mm| mm as f64 * x[b + 2 * (mm - 1) + 1]).sum::<f64>()
    }

    fn side_residuals(&self, x: &[f64], out: &mut [f64]) {
        let one = c64(1.0, 0.0);
        let mut at = 0;
        match &self.side {
            Side::Boundary { p, u, .. } => {
                let v1 = self.eval_at(x, one, 0);
                let d1 = self.eval_at(x, one, 1);
                for j in 0..self.n {
                    Self::push(out, &mut at, v1[j] - p[j]);
                }
                for j in 0..self.n {
                    Self::push(out, &mut at, d1[j] - u[j]);
                }
                out[at] = self.preferred(x);
            }
            Side::Rep { p, nu, z } => {
                let zs = self.extra_c(x, 0);
                let v1 = self.eval_at(x, one, 0);
                let d1 = self.eval_at(x, one, 1);
                let vz = self.eval_at(x, zs, 0);
                for j in 0..self.n {
                    Self::push(out, &mut at, v1[j] - p[j]);
                }
                for j in 0..self.n {
                    Self::push(out, &mut at, vz[j] - z[j]);
                }
                Self::push(out, &mut at, cvec::inner(&d1, nu) - cvec::norm_sqr(&d1));
                out[at] = self.preferred(x);
            }
            Side::Points { z, w } => {
                let z1 = self.extra_c(x, 0);
                let z2 = self.extra_c(x, 2);
                let a = self.eval_at(x, z1, 0);
                let b = self.eval_at(x, z2, 0);
                for j in 0..self.n {
                    Self::push(out, &mut at, a[j] - z[j]);
                }
                for j in 0..self.n {
                    Self::push(out, &mut at, b[j] - w[j]);
                }
                let lb = self.lam_base();
                out[at] = x[lb];
                out[at + 1] = x[lb + 1];
                out[at + 2] = (z2 - z1).im;
            }
            Side::Direction { z, v } => {
                let z1 = self.extra_c(x, 0);
                let s = self.extra(x, 2);
                let a = self.eval_at(x, z1, 0);
                let d = self.eval_at(x, z1, 1);
                for j in 0..self.n {
                    Self::push(out, &mut at, a[j] - z[j]);
                }
                for j in 0..self.n {
                    Self::push(out, &mut at, d[j] - v[j] * s);
                }
                let lb = self.lam_base();
                out[at] = x[lb];
                out[at + 1] = x[lb + 1];
            }
        }
    }
}

impl LsqProblem for System<'_> {
    fn n_unknowns(&self) -> usize {
        self.extra_base() + self.side.extras()
    }

    fn n_residuals(&self) -> usize {
        self.m + 2 * self.n * self.deg + self.side.rows(self.n)
    }

    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let (phi, lam) = self.samples(x);
        self.eval_nodes(x, &phi, &lam, out);
    }

    fn jacobian(&self, x: &[f64], f0: &[f64], jac: &mut DMatrix<f64>) {
        let (phi0, lam0) = self.samples(x);
        let rows = self.n_residuals();
        let n_phi = self.n_phi();
        let lb = self.lam_base();
        let eb = self.extra_base();
        jac.as_mut_slice().par_chunks_mut(rows).enumerate().for_each(|(col, out)| {
            let h = self.fd_step * x[col].abs().max(1.0);
            let mut xp = x.to_vec();
            xp[col] += h;
            if col < n_phi {
                let idx = col / 2;
                let j = idx / (self.deg + 1);
                let mm = idx % (self.deg + 1);
                let dir = if col % 2 == 0 { c64(h, 0.0) } else { c64(0.0, h) };
                let mut phi = phi0.clone();
                for k in 0..self.m {
                    phi[j][k] += dir * self.nodes[(k * mm) % self.m];
                }
                self.eval_nodes(&xp, &phi, &lam0, out);
            } else if col < eb {
                let i = (col - lb) / 2;
                let tab = if (col - lb) % 2 == 0 { &self.cos } else { &self.sin };
                let sign = if (col - lb) % 2 == 0 { 2.0 } else { -2.0 };
                let lam: Vec<f64> = (0..self.m).map(|k| lam0[k] + sign * h * tab[i * self.m + k]).collect();
                self.eval_nodes(&xp, &phi0, &lam, out);
            } else {
                self.eval_nodes(&xp, &phi0, &lam0, out);
            }
            for (o, f) in out.iter_mut().zip(f0) {
                *o = (*o - f) / h;
            }
        });
    }
}
