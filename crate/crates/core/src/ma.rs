//! The pluricomplex Poisson kernel P_{Ω,p} = P_{𝔹ⁿ,ν_p}∘Ψ_p, checks of the
//! homogeneous Monge–Ampère system it solves, the pluricomplex Green function,
//! and the boundary relations between the two.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::ball_poisson_kernel;
use crate::cvec::{c64, CVector, C64};
use crate::domain::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::geodesics::{geodesic_certificate, solve_stationary_warm, SolveState, SolverConfig, StationaryProblem, TANGENTIAL_CUTOFF};
use crate::limit::richardson_to_zero;
use crate::rep::{sample_nontangential, SphericalRep};

/// Finite-difference controls for the kernel Hessian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdOptions {
    /// Base step as a fraction of the boundary clearance; must stay below 1/4.
    pub step_ratio: f64,
    /// Number of halvings of the step used for Richardson extrapolation.
    pub levels: usize,
    /// Residual tolerance of the stencil solves; solver noise is divided by h².
    pub solver_tol: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions { step_ratio: 0.1, levels: 4, solver_tol: 1e-13 }
    }
}

impl FdOptions {
    /// Longer ladder for kernels evaluated in closed form, where rounding is the only noise.
    pub fn closed_form() -> Self {
        FdOptions { step_ratio: 0.2, levels: 5, solver_tol: 1e-13 }
    }
}

/// Complex Hessian H with v*Hv = Σ ∂²u/∂z_j∂z̄_k v_j v̄_k.
///
/// The Levi form v*Hv = ¼Δ_ζ u(z+ζv) is sampled with the five-point Laplacian
/// along e_j, e_j+e_k and e_j+ie_k (n² complex lines, 4n²+1 values per step) at
/// steps h, h/2, … and extrapolated in h².
pub fn complex_hessian_fd<F>(f: F, z: &CVector, h: f64, levels: usize) -> Result<DMatrix<C64>>
where
    F: Fn(&CVector) -> Result<f64> + Sync,
{
    if !(h > 0.0) || levels == 0 {
        return Err(Error::InvalidInput("step must be positive and levels nonzero".into()));
    }
    let n = z.len();
    let mut lines: Vec<Vec<C64>> = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut v = vec![c64(0.0, 0.0); n];
        v[j] = c64(1.0, 0.0);
        lines.push(v);
    }
    for j in 0..n {
        for k in (j + 1)..n {
            for c in [c64(1.0, 0.0), c64(0.0, 1.0)] {
                let mut v = vec![c64(0.0, 0.0); n];
                v[j] = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                v[k] = c * std::f64::consts::FRAC_1_SQRT_2;
                lines.push(v);
            }
        }
    }
    let center = f(z)?;
    let units = [c64(1.0, 0.0), c64(-1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0)];
    let mut forms: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for lvl in 0..levels {
        let hk = h * 0.5f64.powi(lvl as i32);
        let pts: Vec<CVector> = lines
            .iter()
            .flat_map(|v| {
                units.iter().map(move |u| {
                    CVector::from_vec_unchecked(z.as_slice().iter().zip(v).map(|(zj, vj)| zj + vj * u * hk).collect())
                })
            })
            .collect();
        let vals: Vec<f64> = pts.par_iter().map(&f).collect::<Result<_>>()?;
        forms.push(vals.chunks(4).map(|c| 0.25 * (c.iter().sum::<f64>() - 4.0 * center) / (hk * hk)).collect());
    }
    let q: Vec<f64> = if levels == 1 {
        forms.pop().expect("one level")
    } else {
        let xs: Vec<f64> = (0..levels).map(|l| (h * 0.5f64.powi(l as i32)).powi(2)).collect();
        (0..lines.len())
            .map(|i| {
                let ys: Vec<C64> = forms.iter().map(|t| c64(t[i], 0.0)).collect();
                richardson_to_zero(&xs, &ys).value.re
            })
            .collect()
    };
    // unit lines: Q(e_j+e_k)/2 and Q(e_j+ie_k)/2 give Re and −Im of H_jk plus the diagonal mean
    let mut hm = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        hm[(j, j)] = c64(q[j], 0.0);
    }
    let mut i = n;
    for j in 0..n {
        for k in (j + 1)..n {
            let mean = 0.5 * (q[j] + q[k]);
            let re = q[i] - mean;
            let im = -(q[i + 1] - mean);
            hm[(j, k)] = c64(re, im);
            hm[(k, j)] = c64(re, -im);
            i += 2;
        }
    }
    Ok(hm)
}

/// Angle in radians between the complex lines spanned by a and b.
pub fn projective_angle(a: &[C64], b: &[C64]) -> f64 {
    let ip: C64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    let cross = (na * nb - ip.norm_sqr()).max(0.0).sqrt();
    cross.atan2(ip.norm())
}

/// Spectral data of a sampled kernel Hessian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianSample {
    pub z: CVector,
    pub value: f64,
    pub clearance: f64,
    pub step: f64,
    pub det: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    /// Angle between the null eigenvector and the tangent of the geodesic through p and z.
    pub null_angle: f64,
    /// Hermitian defect |H − H*| before symmetrization.
    pub asymmetry: f64,
}

/// P_{Ω,p} with its evaluators.
#[derive(Debug)]
pub struct KernelField {
    rep: SphericalRep,
}

impl KernelField {
    pub fn new(domain: &DomainSpec, p: &CVector, config: &SolverConfig) -> Result<Self> {
        Ok(KernelField { rep: SphericalRep::new(domain, p, config)? })
    }

    pub fn from_rep(rep: SphericalRep) -> Self {
        KernelField { rep }
    }

    pub fn rep(&self) -> &SphericalRep {
        &self.rep
    }

    fn is_ball(&self) -> bool {
        matches!(self.rep.domain().kind(), DomainKind::Ball)
    }

    /// P_{Ω,p}(z) for z ∈ Ω̄∖{p}.
    pub fn value(&self, z: &CVector) -> Result<f64> {
        if z.dist(self.rep.p()) < crate::rep::BASE_POINT_RADIUS {
            return Err(Error::InvalidInput("the kernel is singular at p".into()));
        }
        let w = self.rep.map(z)?.w;
        ball_poisson_kernel(&w, self.rep.nu())
    }

    /// Kernel value by a warm-started solve, bypassing the cache.
    /// Finite-difference complex Hessian at an interior z, with its spectrum and
    /// the alignment of its null direction with the geodesic through p and z.
    pub fn hessian(&self, z: &CVector, opts: &FdOptions) -> Result<HessianSample> {
        let domain = self.rep.domain();
        domain.require_interior(z)?;
        let clearance = domain.distance_to_boundary(z)?;
        let h = opts.step_ratio * clearance;
        if !(clearance > 4.0 * h) {
            return Err(Error::InsufficientClearance { clearance, step: h });
        }
        let (value, tangent, hess) = if self.is_ball() {
            let r = self.rep.map(z)?;
            let value = ball_poisson_kernel(&r.w, self.rep.nu())?;
            let hess = complex_hessian_fd(|y| self.value(y), z, h, opts.levels)?;
            (value, r.v, hess)
        } else {
            let cfg = SolverConfig { tol_residual: opts.solver_tol.min(self.rep.config().tol_residual), ..*self.rep.config() };
            let fine = SphericalRep::new(domain, self.rep.p(), &cfg)?;
            let (point, tangent, state) = fine.solve_point(z, None)?;
            let value = ball_poisson_kernel(&point.w, self.rep.nu())?;
            let eval = |y: &CVector| -> Result<f64> {
                let (point, _, _) = fine.solve_point(y, Some(&state))?;
                ball_poisson_kernel(&point.w, fine.nu())
            };
            let hess = complex_hessian_fd(eval, z, h, opts.levels)?;
            (value, tangent, hess)
        };
        let asymmetry = (&hess - hess.adjoint()).norm();
        let sym = (&hess + hess.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(sym);
        let (imin, min_eig) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        let max_eig = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let det = eig.eigenvalues.iter().product();
        let null: Vec<C64> = eig.eigenvectors.column(imin).iter().copied().collect();
        let null_angle = projective_angle(&null, tangent.as_slice());
        Ok(HessianSample { z: z.clone(), value, clearance, step: h, det, min_eig, max_eig, null_angle, asymmetry })
    }
}

/// P_Ω(z,p).
pub fn pluricomplex_poisson(domain: &DomainSpec, p: &CVector, z: &CVector, config: &SolverConfig) -> Result<f64> {
    KernelField::new(domain, p, config)?.value(z)
}

/// Acceptance thresholds for [`ma_verify`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaTolerances {
    pub psd: f64,
    pub det: f64,
    pub angle: f64,
}

impl Default for MaTolerances {
    fn default() -> Self {
        MaTolerances { psd: 1e-4, det: 1e-6, angle: 1e-2 }
    }
}

/// Stencil options, thresholds and sample shrink factor used for `domain`:
/// closed-form kernels on the ball get a longer ladder and tighter thresholds.
pub fn ma_defaults(domain: &DomainSpec) -> (FdOptions, MaTolerances, f64) {
    if matches!(domain.kind(), DomainKind::Ball) {
        (FdOptions::closed_form(), MaTolerances { psd: 1e-10, det: 1e-8, angle: 1e-2 }, 0.6)
    } else {
        (FdOptions::default(), MaTolerances::default(), 0.7)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaReport {
    pub samples: Vec<HessianSample>,
    pub max_abs_det: f64,
    pub min_eig: f64,
    pub max_null_angle: f64,
    pub max_value: f64,
    pub tolerances: MaTolerances,
    pub pass: bool,
}

/// Checks u < 0, Hessian ≥ −tol_psd, |det| ≤ tol_det and null-direction alignment at each sample.
pub fn ma_verify(field: &KernelField, samples: &[CVector], opts: &FdOptions, tol: &MaTolerances) -> Result<MaReport> {
    let out: Vec<HessianSample> = samples.par_iter().map(|z| field.hessian(z, opts)).collect::<Result<_>>()?;
    let max_abs_det = out.iter().map(|s| s.det.abs()).fold(0.0, f64::max);
    let min_eig = out.iter().map(|s| s.min_eig).fold(f64::INFINITY, f64::min);
    let max_null_angle = out.iter().map(|s| s.null_angle).fold(0.0, f64::max);
    let max_value = out.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
    let pass = !out.is_empty()
        && max_value < 0.0
        && min_eig >= -tol.psd
        && max_abs_det <= tol.det
        && max_null_angle < tol.angle;
    Ok(MaReport { samples: out, max_abs_det, min_eig, max_null_angle, max_value, tolerances: *tol, pass })
}

/// Slice identity P_{Ω,p}∘φ_v = −P/⟨v,ν_p⟩² on a disc grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub v: CVector,
    pub max_error: f64,
    /// Error relative to max(1, |P(ζ)/⟨v,ν_p⟩²|).
    pub max_relative_error: f64,
    /// Largest deviation of the ring Fourier modes from the r^{|m|} law on the inner rings.
    pub harmonicity: f64,
    pub pass: bool,
}

pub const SLICE_RADII: usize = 16;
pub const SLICE_ANGLES: usize = 64;
pub const SLICE_TOL: f64 = 1e-6;
pub const HARMONICITY_TOL: f64 = 1e-5;

/// Inner rings whose angular aliasing r^{SLICE_ANGLES} stays negligible.
const HARMONIC_RING_MAX: f64 = 0.6;
const HARMONIC_MODES: usize = 8;

pub fn slice_check(field: &KernelField, v: &CVector) -> Result<SliceReport> {
    let rep = field.rep();
    let pair = rep.geodesic(v)?;
    let a = pair.phi.eval_derivative(c64(1.0, 0.0), 1).normalized()?.inner(rep.nu()).re;
    let radii: Vec<f64> = (0..SLICE_RADII).map(|i| (i as f64 + 0.5) / SLICE_RADII as f64).collect();
    let mut vals = vec![vec![0.0; SLICE_ANGLES]; SLICE_RADII];
    let mut max_error: f64 = 0.0;
    let mut max_relative_error: f64 = 0.0;
    for (i, &r) in radii.iter().enumerate() {
        for k in 0..SLICE_ANGLES {
            let zeta = C64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / SLICE_ANGLES as f64);
            let z = pair.phi.eval(zeta);
            let u = field.value(&z)?;
            let disc_p = (1.0 - zeta.norm_sqr()) / (c64(1.0, 0.0) - zeta).norm_sqr();
            let expected = disc_p / (a * a);
            max_error = max_error.max((u + expected).abs());
            max_relative_error = max_relative_error.max((u + expected).abs() / expected.max(1.0));
            vals[i][k] = u;
        }
    }
    let harmonicity = ring_harmonicity(&radii, &vals);
    Ok(SliceReport { v: v.clone(), max_error, max_relative_error, harmonicity, pass: max_error < SLICE_TOL && harmonicity < HARMONICITY_TOL })
}

fn ring_harmonicity(radii: &[f64], vals: &[Vec<f64>]) -> f64 {
    let m = vals[0].len();
    let modes = |row: &[f64]| -> Vec<C64> {
        (0..=HARMONIC_MODES)
            .map(|q| {
                row.iter()
                    .enumerate()
                    .map(|(k, &u)| C64::from_polar(u, -2.0 * std::f64::consts::PI * (q * k) as f64 / m as f64))
                    .sum::<C64>()
                    / m as f64
            })
            .collect()
    };
    let inner: Vec<usize> = (0..radii.len()).filter(|&i| radii[i] <= HARMONIC_RING_MAX).collect();
    let Some(&top) = inner.last() else { return 0.0 };
    let reference = modes(&vals[top]);
    let mut worst: f64 = 0.0;
    for &i in &inner {
        let c = modes(&vals[i]);
        for q in 0..=HARMONIC_MODES {
            let predicted = reference[q] * (radii[i] / radii[top]).powi(q as i32);
            worst = worst.max((c[q] - predicted).norm());
        }
    }
    worst
}

/// lim_{t→1} P_{Ω,p}(γ(t))(1−t) for γ(t) = p + (t−1)u, against −Re 2/⟨u,ν_p⟩.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub u: CVector,
    pub limit: f64,
    pub error: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub pass: bool,
}

pub const ASYMPTOTICS_TOL: f64 = 1e-3;

pub fn boundary_asymptotics(field: &KernelField, u: &CVector) -> Result<AsymptoticsReport> {
    let rep = field.rep();
    let nu = rep.nu();
    let pairing = u.inner(nu);
    if u.norm() == 0.0 || pairing.re <= 0.0 {
        return Err(Error::InvalidInput("γ′(1) must point into the domain".into()));
    }
    if pairing.re / u.norm() < TANGENTIAL_CUTOFF {
        return Err(Error::NearTangential(pairing.re / u.norm()));
    }
    let domain = rep.domain();
    let point = |x: f64| rep.p() - &u.scale(c64(x, 0.0));
    let mut k0 = 2;
    while !domain.contains(&point(0.5f64.powi(k0))) {
        k0 += 1;
        if k0 > 20 {
            return Err(Error::InvalidInput("γ does not enter the domain".into()));
        }
    }
    let ks = k0..k0 + 11;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut warm: Option<SolveState> = None;
    for k in ks {
        let x = 0.5f64.powi(k);
        let z = point(x);
        let val = if matches!(domain.kind(), DomainKind::Ball) {
            field.value(&z)?
        } else {
            let (point, _, state) = rep.solve_point(&z, warm.as_ref())?;
            warm = Some(state);
            ball_poisson_kernel(&point.w, nu)?
        };
        xs.push(x);
        ys.push(c64(val * x, 0.0));
    }
    let est = richardson_to_zero(&xs, &ys);
    let expected = -(c64(2.0, 0.0) / pairing).re;
    let relative_error = (est.value.re - expected).abs() / expected.abs();
    Ok(AsymptoticsReport {
        u: u.clone(),
        limit: est.value.re,
        error: est.error,
        expected,
        relative_error,
        pass: relative_error < ASYMPTOTICS_TOL,
    })
}

/// Range of −P_{Ω,p}(z)|z−p| over random samples of Γ_β(p).
pub fn pole_band<R: Rng + ?Sized>(field: &KernelField, beta: f64, samples: usize, rng: &mut R) -> Result<(f64, f64)> {
    let rep = field.rep();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..samples {
        if let Some(z) = sample_nontangential(rep.domain(), rep.p(), beta, 1e-3, 0.3, rng)? {
            let s = -field.value(&z)? * z.dist(rep.p());
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    Ok((lo, hi))
}

/// g_Ω(·,w) = log tanh k_Ω(·,w).
#[derive(Debug, Clone)]
pub struct GreenField {
    domain: DomainSpec,
    w: CVector,
    config: SolverConfig,
}

impl GreenField {
    pub fn new(domain: &DomainSpec, w: &CVector, config: &SolverConfig) -> Result<Self> {
        domain.require_interior(w)?;
        Ok(GreenField { domain: domain.clone(), w: w.clone(), config: *config })
    }

    pub fn pole(&self) -> &CVector {
        &self.w
    }

    /// g_Ω(z,w) from a certified extremal disc.
    pub fn value(&self, z: &CVector) -> Result<f64> {
        Ok(self.value_warm(z, None)?.0)
    }

    fn value_warm(&self, z: &CVector, warm: Option<&SolveState>) -> Result<(f64, SolveState)> {
        green_solve(&self.domain, z, &self.w, &self.config, warm)
    }
}

fn green_solve(
    domain: &DomainSpec,
    z: &CVector,
    w: &CVector,
    config: &SolverConfig,
    warm: Option<&SolveState>,
) -> Result<(f64, SolveState)> {
    domain.require_interior(z)?;
    domain.require_interior(w)?;
    if z.dist(w) < 1e-14 {
        return Err(Error::InvalidInput("z coincides with the pole".into()));
    }
    let problem = StationaryProblem::InteriorPoint { z: z.clone(), w: w.clone() };
    let sol = solve_stationary_warm(domain, &problem, config, warm)?;
    let cert = geodesic_certificate(&sol.native, domain);
    if !cert.pass {
        return Err(Error::CertificateFailed(cert.summary()));
    }
    Ok((sol.green().expect("interior point solve"), sol.state().clone()))
}

pub fn green_function(domain: &DomainSpec, w: &CVector, z: &CVector, config: &SolverConfig) -> Result<f64> {
    GreenField::new(domain, w, config)?.value(z)
}

/// −∂g_Ω(z,·)/∂ν_p at p against −P_Ω(z,p).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenRelationReport {
    pub z: CVector,
    pub steps: Vec<f64>,
    pub quotients: Vec<f64>,
    pub derivative: f64,
    pub error: f64,
    pub kernel: f64,
    pub relative_error: f64,
    pub pass: bool,
}

pub const GREEN_RELATION_TOL: f64 = 1e-3;

/// Difference quotients −g_Ω(z, p−hν_p)/h for h = h₀2^{−k}, k < steps, extrapolated to h = 0.
pub fn green_normal_derivative_relation(field: &KernelField, z: &CVector, steps: usize) -> Result<GreenRelationReport> {
    if steps < 3 {
        return Err(Error::InvalidInput("need at least three steps".into()));
    }
    let rep = field.rep();
    let domain = rep.domain();
    domain.require_interior(z)?;
    let (p, nu) = (rep.p(), rep.nu());
    let h0 = 0.25 * z.dist(p).min(1.0);
    let mut hs = Vec::with_capacity(steps);
    let mut qs = Vec::with_capacity(steps);
    let mut warm: Option<SolveState> = None;
    for k in 0..steps {
        let h = h0 * 0.5f64.powi(k as i32);
        let w = p - &nu.scale(c64(h, 0.0));
        if !domain.contains(&w) {
            continue;
        }
        let (g, state) = green_solve(domain, z, &w, rep.config(), warm.as_ref())?;
        warm = Some(state);
        hs.push(h);
        qs.push(-g / h);
    }
    if hs.len() < 3 {
        return Err(Error::NonConvergent(f64::INFINITY));
    }
    let ys: Vec<C64> = qs.iter().map(|q| c64(*q, 0.0)).collect();
    let est = richardson_to_zero(&hs, &ys);
    let kernel = field.value(z)?;
    let relative_error = (est.value.re + kernel).abs() / kernel.abs();
    Ok(GreenRelationReport {
        z: z.clone(),
        steps: hs,
        quotients: qs,
        derivative: est.value.re,
        error: est.error,
        kernel,
        relative_error,
        pass: relative_error < GREEN_RELATION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::ball_poisson_hessian_matrix;

    fn cv(v: &[(f64, f64)]) -> CVector {
        CVector::new(v.iter().map(|&(a, b)| c64(a, b)).collect()).unwrap()
    }

    fn small() -> SolverConfig {
        SolverConfig { degree: 16, grid: 64, mu_degree: 8, ..SolverConfig::default() }
    }

    #[test]
    fn hessian_of_simple_functions() {
        let z = cv(&[(0.3, -0.1), (0.2, 0.4)]);
        let h = complex_hessian_fd(|y| Ok(y.norm_sqr()), &z, 1e-2, 2).unwrap();
        assert!((h - DMatrix::<C64>::identity(2, 2)).norm() < 1e-10);
        let h = complex_hessian_fd(|y| Ok((y[0] * y[0]).re), &z, 1e-2, 2).unwrap();
        assert!(h.norm() < 1e-10);
    }

    #[test]
    fn ball_kernel_hessian_matches_closed_form() {
        let ball = DomainSpec::ball(2).unwrap();
        let p = CVector::basis(2, 0);
        let field = KernelField::new(&ball, &p, &small()).unwrap();
        let z = cv(&[(0.0, 0.0), (0.2, 0.0)]);
        let exact = ball_poisson_hessian_matrix(&z, &p).unwrap().transpose();
        let clearance = 0.8;
        let fd = complex_hessian_fd(|y| field.value(y), &z, 1e-3 * clearance, 3).unwrap();
        assert!((&fd - &exact).norm() < 1e-5, "{}", (&fd - &exact).norm());
        let s = field.hessian(&z, &FdOptions::closed_form()).unwrap();
        assert!(s.det.abs() < 1e-8 && s.min_eig > -1e-10 && s.null_angle < 1e-6, "{s:?}");
    }

    #[test]
    fn ball_kernel_values_and_slice() {
        let ball = DomainSpec::ball(2).unwrap();
        let p = CVector::basis(2, 0);
        let field = KernelField::new(&ball, &p, &small()).unwrap();
        assert!((field.value(&CVector::zeros(2)).unwrap() + 1.0).abs() < 1e-15);
        let x = 0.3;
        let u = field.value(&cv(&[(x, 0.0), (0.0, 0.0)])).unwrap();
        assert!((u + (1.0 + x) / (1.0 - x)).abs() < 1e-13);
        let rep = slice_check(&field, &p).unwrap();
        assert!(rep.max_error < 1e-12 && rep.harmonicity < 1e-10, "{rep:?}");
        let rep = slice_check(&field, &cv(&[(0.6, 0.0), (0.0, 0.8)])).unwrap();
        eprintln!("{rep:?}");
        assert!(rep.max_relative_error < 1e-13 && rep.harmonicity < 1e-10, "{rep:?}");
    }

    #[test]
    fn ball_asymptotics() {
        let ball = DomainSpec::ball(2).unwrap();
        let p = CVector::basis(2, 0);
        let field = KernelField::new(&ball, &p, &small()).unwrap();
        let r = boundary_asymptotics(&field, &p).unwrap();
        assert!((r.limit + 2.0).abs() < 1e-9, "{r:?}");
        let v = cv(&[(0.5, 0.0), (0.0, 0.75f64.sqrt())]);
        let r = boundary_asymptotics(&field, &v).unwrap();
        assert!((r.limit + 4.0).abs() < 1e-6, "{r:?}");
        assert!(boundary_asymptotics(&field, &cv(&[(0.0, 0.0), (1.0, 0.0)])).is_err());
    }

    #[test]
    fn ball_green_and_relation() {
        let ball = DomainSpec::ball(2).unwrap();
        let z = cv(&[(0.3, 0.1), (-0.2, 0.0)]);
        let g = green_function(&ball, &CVector::zeros(2), &z, &small()).unwrap();
        assert!((g - z.norm().ln()).abs() < 1e-10);
        let w = cv(&[(0.0, 0.2), (0.1, 0.1)]);
        let a = green_function(&ball, &w, &z, &small()).unwrap();
        let b = green_function(&ball, &z, &w, &small()).unwrap();
        assert!((a - b).abs() < 1e-8);
        let p = CVector::basis(2, 0);
        let field = KernelField::new(&ball, &p, &small()).unwrap();
        let r = green_normal_derivative_relation(&field, &cv(&[(0.5, 0.0), (0.0, 0.0)]), 8).unwrap();
        assert!((r.derivative - 3.0).abs() < 1e-3 * 3.0, "{r:?}");
        assert!(r.pass);
    }
}
