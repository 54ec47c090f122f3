//! Complex geodesics (stationary discs) with their dual maps, the preferred
//! normalization, Lempert left inverses and geodesy certificates.

mod left_inverse;
mod seed;
mod solve;
mod system;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cvec::{self, c64, CVector, C64};
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::hardy::{HardyMap, Projection};
use crate::spectral::{nodes, real_modes, trig_derivative, trig_interpolate, Plans};

pub use left_inverse::{geodesic_certificate, Certificate, LeftInverse};
pub use solve::{
    kobayashi_distance, kobayashi_metric, solve_stationary, solve_stationary_detailed, KobayashiDistance,
    KobayashiMetric, StationarySolution,
};
pub use solve::{SolveState, TANGENTIAL_CUTOFF};
pub(crate) use solve::{solve_rep, solve_rep_light, solve_stationary_warm};

/// Numerical parameters of the stationary-disc solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Degree N of the coefficient truncation of φ.
    pub degree: usize,
    /// Number M of boundary nodes; M ≥ 4N.
    pub grid: usize,
    /// Convergence threshold on the sup norm of the residual vector.
    pub tol_residual: f64,
    pub max_iter: usize,
    /// Smallest Armijo step length.
    pub damping: f64,
    /// Degree K of the real trigonometric polynomial λ = log μ.
    pub mu_degree: usize,
    /// Relative step of the finite-difference Jacobian.
    pub fd_step: f64,
    /// ε step of the perturbed-ball continuation.
    pub continuation_step: f64,
    /// How many times a solve may double degree, grid and mu_degree when the
    /// model seed shows a truncation tail above the tolerance.
    pub refine: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            degree: 64,
            grid: 256,
            tol_residual: 1e-11,
            max_iter: 40,
            damping: 1e-4,
            mu_degree: 32,
            fd_step: 1e-7,
            continuation_step: 0.02,
            refine: 2,
        }
    }
}

impl SolverConfig {
    /// The configuration with degree, grid and mu_degree scaled by 2^k.
    pub fn refined(&self, k: usize) -> Self {
        SolverConfig { degree: self.degree << k, grid: self.grid << k, mu_degree: self.mu_degree << k, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 {
            return Err(Error::InvalidInput("degree must be at least 1".into()));
        }
        if self.grid < 4 * self.degree {
            return Err(Error::InvalidInput(format!("grid {} must be at least 4·degree", self.grid)));
        }
        if !(self.tol_residual > 0.0) {
            return Err(Error::InvalidInput("tol_residual must be positive".into()));
        }
        if self.mu_degree < 1 || 2 * self.mu_degree >= self.grid {
            return Err(Error::InvalidInput("mu_degree must be in 1..grid/2".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidInput("damping must lie in (0,1)".into()));
        }
        if !(self.fd_step > 0.0) || !(self.continuation_step > 0.0) {
            return Err(Error::InvalidInput("fd_step and continuation_step must be positive".into()));
        }
        Ok(())
    }
}

/// Data fixing a stationary disc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StationaryProblem {
    /// φ(1) = p and φ′(1) = ⟨v̂,ν_p⟩v̂ with v̂ = v/|v|, in the preferred gauge.
    Boundary { p: CVector, v: CVector },
    /// φ(0) = z and φ(t) = w for some t ∈ (0,1).
    InteriorPoint { z: CVector, w: CVector },
    /// φ(0) = z and φ′(0) a positive multiple of v.
    InteriorDirection { z: CVector, v: CVector },
}

/// A stationary disc φ with its dual φ* and boundary weight μ on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPair {
    pub phi: HardyMap,
    pub dual: HardyMap,
    pub mu: Vec<f64>,
    pub residuals: BTreeMap<String, f64>,
}

impl GeodesicPair {
    /// Packages (φ, φ*, μ) and measures its residuals against `domain`.
    pub fn assemble(phi: HardyMap, dual: HardyMap, mu: Vec<f64>, domain: &DomainSpec) -> Result<Self> {
        if phi.dim() != domain.dim() || dual.dim() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: phi.dim() });
        }
        if mu.len() < 2 * phi.degree() + 2 {
            return Err(Error::InvalidInput("μ grid too coarse for the degree".into()));
        }
        let mut pair = GeodesicPair { phi, dual, mu, residuals: BTreeMap::new() };
        pair.residuals = measure_residuals(&pair, domain);
        Ok(pair)
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn grid(&self) -> usize {
        self.mu.len()
    }

    pub fn residual(&self, key: &str) -> Option<f64> {
        self.residuals.get(key).copied()
    }

    /// Modes of log μ on the grid.
    pub fn log_mu_modes(&self) -> Vec<C64> {
        let plans = Plans::new(self.mu.len());
        let logs: Vec<f64> = self.mu.iter().map(|m| m.ln()).collect();
        real_modes(&plans, &logs)
    }

    /// μ at e^{iθ} by trigonometric interpolation of log μ.
    pub fn mu_at(&self, theta: f64) -> f64 {
        trig_interpolate(&self.log_mu_modes(), theta).exp()
    }

    /// d|φ*(e^{iθ})|/dθ at θ = 0, which equals μ′(0).
    pub fn preferred_defect(&self) -> f64 {
        let modes = self.log_mu_modes();
        trig_interpolate(&modes, 0.0).exp() * trig_derivative(&modes, 0.0)
    }

    /// φ∘M with dual (φ*∘M)/M′ and weight μ∘M/|M′|, for a disc automorphism M
    /// given by its value and derivative.
    pub fn reparametrize<F: Fn(C64) -> (C64, C64)>(&self, aut: F, domain: &DomainSpec) -> Result<Self> {
        self.reparametrize_sized(aut, domain, self.phi.degree(), self.dual.degree(), self.grid())
    }

    /// [`Self::reparametrize`] with new truncation degrees and grid.
    pub fn reparametrize_sized<F: Fn(C64) -> (C64, C64)>(
        &self,
        aut: F,
        domain: &DomainSpec,
        deg: usize,
        dual_deg: usize,
        m: usize,
    ) -> Result<Self> {
        let n = self.dim();
        let z = nodes(m);
        let modes = self.log_mu_modes();
        let mut phi_s = vec![vec![c64(0.0, 0.0); m]; n];
        let mut dual_s = vec![vec![c64(0.0, 0.0); m]; n];
        let mut mu = vec![0.0; m];
        let mut a = vec![c64(0.0, 0.0); n];
        let mut b = vec![c64(0.0, 0.0); n];
        for k in 0..m {
            let (w, dw) = aut(z[k]);
            self.phi.eval_into(w, &mut a);
            self.dual.eval_into(w, &mut b);
            for j in 0..n {
                phi_s[j][k] = a[j];
                dual_s[j][k] = b[j] / dw;
            }
            mu[k] = trig_interpolate(&modes, w.arg()).exp() / dw.norm();
        }
        let phi = HardyMap::from_samples(&phi_s, deg)?.map;
        let dual = HardyMap::from_samples(&dual_s, dual_deg)?.map;
        GeodesicPair::assemble(phi, dual, mu, domain)
    }
}

/// Residual diagnostics of a pair: boundary, stationarity, duality, dual_boundary, min_mu.
pub fn measure_residuals(pair: &GeodesicPair, domain: &DomainSpec) -> BTreeMap<String, f64> {
    let m = pair.grid();
    let n = pair.dim();
    let mut out = BTreeMap::new();
    let mut a = vec![c64(0.0, 0.0); n];
    let mut d = vec![c64(0.0, 0.0); n];
    let mut b = vec![c64(0.0, 0.0); n];
    let mut nu = vec![c64(0.0, 0.0); n];
    let mut boundary: f64 = 0.0;
    let mut duality: f64 = 0.0;
    for z in nodes(2 * m) {
        pair.phi.eval_into(z, &mut a);
        boundary = boundary.max(domain.value(&a).abs());
        pair.phi.eval_derivative_into(z, 1, &mut d);
        pair.dual.eval_into(z, &mut b);
        duality = duality.max((cvec::bilinear(&d, &b) - 1.0).norm());
    }
    let mut samples = vec![vec![c64(0.0, 0.0); m]; n];
    let mut dual_fit: f64 = 0.0;
    for (k, z) in nodes(m).into_iter().enumerate() {
        pair.phi.eval_into(z, &mut a);
        domain.normal_at(&a, &mut nu);
        pair.dual.eval_into(z, &mut b);
        for j in 0..n {
            let h = z * pair.mu[k] * nu[j].conj();
            samples[j][k] = h;
            dual_fit = dual_fit.max((h - b[j]).norm());
        }
    }
    let stationarity = HardyMap::from_samples(&samples, pair.phi.degree()).map(|p| p.negative_energy).unwrap_or(f64::NAN);
    out.insert("boundary".into(), boundary);
    out.insert("duality".into(), duality);
    out.insert("dual_boundary".into(), dual_fit);
    out.insert("stationarity".into(), stationarity);
    out.insert("min_mu".into(), pair.mu.iter().cloned().fold(f64::INFINITY, f64::min));
    out
}

/// Projects ζμ·conj(ν∘φ) onto the modes 0..N and rescales so that Σ φ′_j φ*_j = 1 at ζ = 0.
pub fn dual_map(phi: &HardyMap, mu: &[f64], domain: &DomainSpec) -> Result<Projection> {
    dual_map_with_tol(phi, mu, domain, 1e-6)
}

pub fn dual_map_with_tol(phi: &HardyMap, mu: &[f64], domain: &DomainSpec, tol: f64) -> Result<Projection> {
    let (proj, _) = dual_projection(phi, mu, domain)?;
    if !(proj.negative_energy <= tol) {
        return Err(Error::NotStationary(proj.negative_energy));
    }
    Ok(proj)
}

/// Normalized dual projection together with the normalizing constant c₀.
pub(crate) fn dual_projection(phi: &HardyMap, mu: &[f64], domain: &DomainSpec) -> Result<(Projection, C64)> {
    let m = mu.len();
    let n = phi.dim();
    if n != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), got: n });
    }
    if mu.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput("μ must be positive and finite".into()));
    }
    let mut samples = vec![vec![c64(0.0, 0.0); m]; n];
    let mut a = vec![c64(0.0, 0.0); n];
    let mut nu = vec![c64(0.0, 0.0); n];
    for (k, z) in nodes(m).into_iter().enumerate() {
        phi.eval_into(z, &mut a);
        domain.normal_at(&a, &mut nu);
        for j in 0..n {
            samples[j][k] = z * mu[k] * nu[j].conj();
        }
    }
    let proj = HardyMap::from_samples(&samples, phi.degree())?;
    let c0: C64 = (0..n).map(|j| phi.coordinate(j).get(1).copied().unwrap_or_default() * proj.map.coordinate(j)[0]).sum();
    if c0.norm() < 1e-300 {
        return Err(Error::DenominatorTooSmall(c0.norm()));
    }
    let coeffs = proj.map.coeffs().iter().map(|row| row.iter().map(|c| c / c0).collect()).collect();
    let s = 1.0 / c0.norm();
    Ok((
        Projection { map: HardyMap::new(coeffs)?, negative_energy: proj.negative_energy * s, tail_energy: proj.tail_energy * s },
        c0,
    ))
}

/// Composes with the parabolic σ_{t₀} that makes d|φ*(e^{iθ})|/dθ vanish at θ = 0.
/// Returns the normalized pair and t₀.
pub fn preferred_normalize(pair: &GeodesicPair, domain: &DomainSpec) -> Result<(GeodesicPair, f64)> {
    let p = pair.phi.eval(c64(1.0, 0.0));
    let r = domain.value(p.as_slice());
    if r.abs() > 1e-8 {
        return Err(Error::NotOnBoundary(r));
    }
    let modes = pair.log_mu_modes();
    let m = pair.grid();
    let plans = Plans::new(m);
    let z = nodes(m);
    // derivative at θ = 0 of μ_t(e^{iθ}) = μ(σ_t(e^{iθ}))/|σ_t′(e^{iθ})|
    let defect = |t: f64| -> f64 {
        let sigma = crate::disc::DiscAutomorphism::Parabolic { t };
        let logs: Vec<f64> = z
            .iter()
            .map(|&w| trig_interpolate(&modes, sigma.apply(w).arg()) - sigma.derivative(w).norm().ln())
            .collect();
        let lm = real_modes(&plans, &logs);
        trig_interpolate(&lm, 0.0).exp() * trig_derivative(&lm, 0.0)
    };
    let mut t = 0.0;
    let mut d = defect(t);
    let scale = pair.mu.iter().cloned().fold(0.0, f64::max).max(1.0);
    for _ in 0..20 {
        if d.abs() < 1e-12 * scale {
            break;
        }
        let h = 1e-4;
        let slope = (defect(t + h) - defect(t - h)) / (2.0 * h);
        if slope.abs() < 1e-14 {
            return Err(Error::NewtonFailure("flat preferred-condition derivative".into()));
        }
        t -= d / slope;
        d = defect(t);
    }
    if !(d.abs() < 1e-8) {
        return Err(Error::NewtonFailure(format!("preferred condition residual {d:e}")));
    }
    let sigma = crate::disc::DiscAutomorphism::Parabolic { t };
    let mut out = pair.reparametrize(|w| (sigma.apply(w), sigma.derivative(w)), domain)?;
    out.residuals.insert("preferred".into(), out.preferred_defect().abs());
    Ok((out, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::{ball_geodesic, BoundaryDirection};
    use crate::disc::DiscAutomorphism;

    fn eta() -> (BoundaryDirection, GeodesicPair) {
        let v = CVector::new(vec![c64(0.8, 0.0), c64(0.0, 0.6)]).unwrap();
        let d = BoundaryDirection::new(CVector::basis(2, 0), v).unwrap();
        let g = ball_geodesic(&d, 256).unwrap();
        (d, g)
    }

    #[test]
    fn ball_pair_residuals_vanish() {
        let (_, g) = eta();
        for key in ["boundary", "duality", "dual_boundary", "stationarity"] {
            assert!(g.residuals[key] < 1e-13, "{key} = {}", g.residuals[key]);
        }
        assert!(g.preferred_defect().abs() < 1e-12);
    }

    #[test]
    fn dual_map_recovers_ball_dual_and_ignores_scale() {
        let (_, g) = eta();
        let ball = DomainSpec::ball(2).unwrap();
        let phi = g.phi.with_degree(64);
        let d1 = dual_map(&phi, &g.mu, &ball).unwrap().map;
        assert!(d1.coefficient_distance(&g.dual) < 1e-12);
        let scaled: Vec<f64> = g.mu.iter().map(|m| 3.7 * m).collect();
        let d2 = dual_map(&phi, &scaled, &ball).unwrap().map;
        assert!(d2.coefficient_distance(&d1) < 1e-13);
    }

    #[test]
    fn diameter_dual_is_constant() {
        let ball = DomainSpec::ball(2).unwrap();
        let phi = HardyMap::affine(&CVector::zeros(2), &CVector::basis(2, 0), 8);
        let d = dual_map(&phi, &[1.0; 64], &ball).unwrap().map;
        assert!(d.coefficient_distance(&HardyMap::constant(&CVector::basis(2, 0), 8)) < 1e-14);
    }

    #[test]
    fn preferred_normalize_undoes_parabolic_shift() {
        let (_, g) = eta();
        let ball = DomainSpec::ball(2).unwrap();
        let g64 = GeodesicPair::assemble(g.phi.with_degree(64), g.dual.with_degree(64), g.mu.clone(), &ball).unwrap();
        let s = DiscAutomorphism::Parabolic { t: 0.3 };
        let shifted = g64.reparametrize(|w| (s.apply(w), s.derivative(w)), &ball).unwrap();
        assert!(shifted.preferred_defect().abs() > 0.1);
        let (back, t0) = preferred_normalize(&shifted, &ball).unwrap();
        assert!((t0 + 0.3).abs() < 1e-9, "t0 = {t0}");
        assert!(back.phi.boundary_distance(&g64.phi, 256) < 1e-8);
        assert!(back.residuals["preferred"] < 1e-8);
    }

    #[test]
    fn preferred_normalize_keeps_eta() {
        let (_, g) = eta();
        let ball = DomainSpec::ball(2).unwrap();
        let (out, t0) = preferred_normalize(&g, &ball).unwrap();
        assert!(t0.abs() < 1e-12);
        assert!(out.phi.boundary_distance(&g.phi, 64) < 1e-12);
    }
}
