//! Solve drivers: data validation, seeding, ε-continuation, gauge conversion,
//! and the Kobayashi distance and metric built on them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ball::phase_align;
use crate::cvec::{c64, CVector, C64};
use crate::domain::{DomainKind, DomainSpec, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::hardy::HardyMap;
use crate::lsq::{gauss_newton, Linearization, LsqOptions, LsqOutcome, LsqProblem};
use crate::spectral::{real_trig_samples, Plans};

use super::left_inverse::{geodesic_certificate, Certificate};
use super::seed::{boundary_draft, boundary_stretch, direction_draft, model_domain, stretch, Draft, points_draft, radial_map, rep_draft, LinearModel, Mob};
use super::system::{Side, System};
use super::{dual_projection, GeodesicPair, SolverConfig, StationaryProblem};

/// Smallest admissible ⟨v̂,ν_p⟩ for boundary data.
pub const TANGENTIAL_CUTOFF: f64 = 1e-3;

/// Reusable solver state: the unknown vector and a factored Jacobian.
#[derive(Clone)]
pub struct SolveState {
    pub(crate) x: Vec<f64>,
    pub(crate) lin: Option<Arc<Linearization>>,
    pub(crate) config: SolverConfig,
}

impl std::fmt::Debug for SolveState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SolveState {{ unknowns: {}, factored: {} }}", self.x.len(), self.lin.is_some())
    }
}

/// Full output of a stationary solve.
#[derive(Clone, Debug)]
pub struct StationarySolution {
    /// The pair in the documented gauge of the problem.
    pub pair: GeodesicPair,
    /// The pair in the solver's internal gauge (λ₁ = 0 for interior problems).
    pub native: GeodesicPair,
    /// Disc parameters of the prescribed points in the native gauge.
    pub marks: Vec<C64>,
    /// InteriorPoint: the t with φ(0) = z, φ(t) = w in the documented gauge.
    pub t: Option<f64>,
    /// InteriorDirection: |φ′(0)|/|v| in the documented gauge.
    pub speed: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub(crate) state: SolveState,
}

/// Problem data in terms of the target domain.
#[derive(Clone, Debug)]
enum Data {
    /// `scale` multiplies the prescribed φ′(1).
    Boundary { p: CVector, v: CVector, scale: f64 },
    Rep { p: CVector, z: CVector },
    Points { z: CVector, w: CVector },
    Direction { z: CVector, v: CVector },
}

fn options(cfg: &SolverConfig) -> LsqOptions {
    LsqOptions { tol: cfg.tol_residual, max_iter: cfg.max_iter, min_step: cfg.damping }
}

fn require_boundary(domain: &DomainSpec, p: &CVector) -> Result<CVector> {
    domain.check_point(p)?;
    domain.unit_normal(p)
}

/// Checks ⟨v̂,ν_p⟩ for boundary data and returns the normalized v̂.
pub(crate) fn admissible_direction(domain: &DomainSpec, p: &CVector, v: &CVector) -> Result<CVector> {
    let nu = require_boundary(domain, p)?;
    domain.check_point(v)?;
    let vh = v.normalized()?;
    let a = vh.inner(&nu);
    if !(a.re > 0.0) || a.im.abs() > 1e-9 {
        return Err(Error::InadmissibleDirection { re: a.re, im: a.im });
    }
    if a.re < TANGENTIAL_CUTOFF {
        return Err(Error::NearTangential(a.re));
    }
    Ok(vh)
}

fn validate(domain: &DomainSpec, data: &Data) -> Result<()> {
    if !domain.radius().is_finite() {
        return Err(Error::InvalidInput("geodesics need a bounded domain".into()));
    }
    match data {
        Data::Boundary { p, v, .. } => admissible_direction(domain, p, v).map(|_| ()),
        Data::Rep { p, z } => {
            require_boundary(domain, p)?;
            domain.check_point(z)?;
            let r = domain.value(z.as_slice());
            if !(r < BOUNDARY_TOL) {
                return Err(Error::Exterior(r));
            }
            if z.dist(p) < 1e-6 {
                return Err(Error::InvalidInput("z coincides with p".into()));
            }
            Ok(())
        }
        Data::Points { z, w } => {
            domain.require_interior(z)?;
            domain.require_interior(w)?;
            if z.dist(w) < 1e-12 {
                return Err(Error::InvalidInput("the two points coincide".into()));
            }
            Ok(())
        }
        Data::Direction { z, v } => {
            domain.require_interior(z)?;
            domain.check_point(v)?;
            if !(v.norm() > 0.0) {
                return Err(Error::InvalidInput("direction must be nonzero".into()));
            }
            Ok(())
        }
    }
}

/// Side conditions of `data`, radially transported to `level` when given.
fn side_at(target: &DomainSpec, level: Option<&DomainSpec>, data: &Data) -> Result<Side> {
    let map = |z: &CVector| -> Result<CVector> {
        match level {
            Some(l) => radial_map(target, l, z),
            None => Ok(z.clone()),
        }
    };
    let level = level.unwrap_or(target);
    Ok(match data {
        Data::Boundary { p, v, scale } => {
            let p = map(p)?;
            let nu = level.unit_normal(&p)?;
            let vh = phase_align(v, &nu)?;
            let a = vh.inner(&nu).re;
            let u = vh.scale(c64(a * scale, 0.0));
            Side::Boundary { p: p.into_vec(), u: u.into_vec() }
        }
        Data::Rep { p, z } => {
            let p = map(p)?;
            let nu = level.unit_normal(&p)?;
            Side::Rep { p: p.into_vec(), nu: nu.into_vec(), z: map(z)?.into_vec() }
        }
        Data::Points { z, w } => Side::Points { z: map(z)?.into_vec(), w: map(w)?.into_vec() },
        Data::Direction { z, v } => Side::Direction { z: map(z)?.into_vec(), v: v.as_slice().to_vec() },
    })
}

/// Model draft of `data` and the system it seeds.
fn with_draft<T>(
    model_dom: &DomainSpec,
    target: &DomainSpec,
    data: &Data,
    cfg: &SolverConfig,
    f: impl FnOnce(&Draft, &System, &[f64]) -> Result<T>,
) -> Result<T> {
    let model = LinearModel::of(target);
    let level = match target.kind() {
        DomainKind::Ball | DomainKind::LinearBall { .. } => None,
        _ => Some(model_dom),
    };
    let side = side_at(target, level, data)?;
    let sys = System::new(model_dom, side.clone(), cfg);
    let m = cfg.grid;
    let cv = |v: &[C64]| CVector::from_vec_unchecked(v.to_vec());
    match side {
        Side::Boundary { p, u } => f(&boundary_draft(&model, &cv(&p), &cv(&u), m)?, &sys, &[]),
        Side::Rep { p, z, .. } => {
            let d = rep_draft(&model, &cv(&p), &cv(&z), m)?;
            let zs = d.marks[0];
            f(&d, &sys, &[zs.re, zs.im])
        }
        Side::Points { z, w } => {
            let d = points_draft(&model, &cv(&z), &cv(&w), m)?;
            let (a, b) = (d.marks[0], d.marks[1]);
            f(&d, &sys, &[a.re, a.im, b.re, b.im])
        }
        Side::Direction { z, v } => {
            let d = direction_draft(&model, &cv(&z), &cv(&v), m)?;
            let a = d.marks[0];
            f(&d, &sys, &[a.re, a.im, d.speed.re])
        }
    }
}

/// Exact seed on a ball-like model domain.
fn model_seed(model_dom: &DomainSpec, target: &DomainSpec, data: &Data, cfg: &SolverConfig) -> Result<Vec<f64>> {
    with_draft(model_dom, target, data, cfg, |d, sys, extras| d.to_x(sys, extras))
}

/// `cfg` refined until the model draft truncates below a tenth of the tolerance,
/// at most `cfg.refine` times.
fn sized_config(model_dom: &DomainSpec, target: &DomainSpec, data: &Data, cfg: &SolverConfig) -> Result<SolverConfig> {
    if cfg.refine == 0 {
        return Ok(*cfg);
    }
    let m = 4 * cfg.refined(cfg.refine).grid;
    let level = with_draft(model_dom, target, data, cfg, |d, _, _| {
        for k in 0..cfg.refine {
            let c = cfg.refined(k);
            let (phi_tail, mu_tail) = d.tails(m, c.degree, c.mu_degree)?;
            if phi_tail.max(mu_tail) < 0.1 * cfg.tol_residual {
                return Ok(k);
            }
        }
        Ok(cfg.refine)
    })?;
    Ok(escalate(cfg, level))
}

/// `cfg` refined k times, with the remaining refinement budget.
fn escalate(cfg: &SolverConfig, k: usize) -> SolverConfig {
    SolverConfig { refine: cfg.refine - k, ..cfg.refined(k) }
}

fn run(domain: &DomainSpec, side: Side, cfg: &SolverConfig, x0: Vec<f64>, lin: Option<Arc<Linearization>>) -> Result<LsqOutcome> {
    let sys = System::new(domain, side, cfg);
    gauss_newton(&sys, x0, &options(cfg), lin)
}

/// Solves the target system, from a warm state if given, else from the model seed,
/// falling back to ε-continuation for perturbed balls. Returns the configuration
/// actually used, which may be refined from `cfg`.
fn solve_data(
    domain: &DomainSpec,
    data: &Data,
    cfg: &SolverConfig,
    warm: Option<&SolveState>,
) -> Result<(LsqOutcome, SolverConfig)> {
    cfg.validate()?;
    validate(domain, data)?;
    let side = side_at(domain, None, data)?;
    if let Some(w) = warm {
        let sys = System::new(domain, side.clone(), &w.config);
        if w.x.len() == sys.n_unknowns() {
            if let Ok(out) = run(domain, side.clone(), &w.config, w.x.clone(), w.lin.clone()) {
                return Ok((out, w.config));
            }
        }
    }
    let model_dom = model_domain(domain)?;
    let mut cfg = sized_config(&model_dom, domain, data, cfg)?;
    loop {
        match solve_cold(domain, &model_dom, data, &side, &cfg) {
            Err(Error::SolverStagnation { .. }) if cfg.refine > 0 => cfg = escalate(&cfg, 1),
            other => return other.map(|o| (o, cfg)),
        }
    }
}

fn solve_cold(domain: &DomainSpec, model_dom: &DomainSpec, data: &Data, side: &Side, cfg: &SolverConfig) -> Result<LsqOutcome> {
    let x0 = model_seed(model_dom, domain, data, cfg)?;
    let direct = run(domain, side.clone(), cfg, x0.clone(), None);
    let eps = match (domain.kind(), &direct) {
        (_, Ok(_)) => return direct,
        (DomainKind::PerturbedBall { eps }, _) => *eps,
        _ => return direct,
    };
    let steps = (eps.abs() / cfg.continuation_step).ceil().max(1.0) as usize;
    let mut x = x0;
    for k in 1..=steps {
        let level_eps = eps * k as f64 / steps as f64;
        let level = if k == steps { domain.clone() } else { domain.with_eps(level_eps)? };
        let side = if k == steps { side.clone() } else { side_at(domain, Some(&level), data)? };
        let out = run(&level, side, cfg, x, None)?;
        if k == steps {
            return Ok(out);
        }
        x = out.x;
    }
    unreachable!("continuation ends at the target level")
}

fn pair_from_x(domain: &DomainSpec, side: Side, cfg: &SolverConfig, x: &[f64]) -> Result<GeodesicPair> {
    let sys = System::new(domain, side, cfg);
    let phi = HardyMap::new(sys.coeff_rows(x))?;
    let mut lam = vec![0.0; sys.m];
    let mut scratch = vec![c64(0.0, 0.0); sys.m];
    real_trig_samples(&Plans::new(sys.m), &sys.lam_coeffs(x), &mut lam, &mut scratch);
    let mu: Vec<f64> = lam.iter().map(|l| l.exp()).collect();
    let (proj, c0) = dual_projection(&phi, &mu, domain)?;
    let s = 1.0 / c0.norm();
    let mu = mu.into_iter().map(|m| m * s).collect();
    GeodesicPair::assemble(phi, proj.map, mu, domain)
}

/// φ∘m for the hyperbolic m with m(±1) = ±1, m′(1) = c, truncated where the
/// pole of m leaves coefficients below a hundredth of the tolerance.
fn unstretch(native: &GeodesicPair, c: f64, domain: &DomainSpec, cfg: &SolverConfig) -> Result<GeodesicPair> {
    let m = stretch(c);
    let rho = ((1.0 - c) / (1.0 + c)).abs();
    let extra = ((0.01 * cfg.tol_residual).ln() / rho.ln()).ceil().max(0.0) as usize;
    let mut k = 0;
    while cfg.degree << k < extra && k < cfg.refine + 2 {
        k += 1;
    }
    let sized = cfg.refined(k);
    native.reparametrize_sized(|w| (m.apply(w), m.deriv(w)), domain, sized.degree, sized.degree, sized.grid)
}

fn extras(cfg: &SolverConfig, domain: &DomainSpec, side: &Side, x: &[f64]) -> Vec<f64> {
    let sys = System::new(domain, side.clone(), cfg);
    x[sys.extra_base()..].to_vec()
}

fn solve_problem(
    domain: &DomainSpec,
    problem: &StationaryProblem,
    cfg: &SolverConfig,
    warm: Option<&SolveState>,
) -> Result<StationarySolution> {
    let data = match problem {
        StationaryProblem::Boundary { p, v } => {
            let side = side_at(domain, None, &Data::Boundary { p: p.clone(), v: v.clone(), scale: 1.0 })?;
            let c = match &side {
                Side::Boundary { p, u } => boundary_stretch(
                    &LinearModel::of(domain),
                    &CVector::from_vec_unchecked(p.clone()),
                    &CVector::from_vec_unchecked(u.clone()),
                )?,
                _ => unreachable!("boundary data"),
            };
            Data::Boundary { p: p.clone(), v: v.clone(), scale: 1.0 / c }
        }
        StationaryProblem::InteriorPoint { z, w } => Data::Points { z: z.clone(), w: w.clone() },
        StationaryProblem::InteriorDirection { z, v } => Data::Direction { z: z.clone(), v: v.clone() },
    };
    let (out, used) = solve_data(domain, &data, cfg, warm)?;
    let cfg = &used;
    let side = side_at(domain, None, &data)?;
    let native = pair_from_x(domain, side.clone(), cfg, &out.x)?;
    let ex = extras(cfg, domain, &side, &out.x);
    let state = SolveState { x: out.x.clone(), lin: out.linearization.clone(), config: used };
    let (pair, marks, t, speed) = match data {
        Data::Boundary { scale, .. } => {
            let mut pair = if (scale - 1.0).abs() > 1e-12 {
                unstretch(&native, 1.0 / scale, domain, cfg)?
            } else {
                native.clone()
            };
            pair.residuals.insert("preferred".into(), pair.preferred_defect().abs());
            (pair, vec![], None, None)
        }
        Data::Points { .. } => {
            let (z1, z2) = (c64(ex[0], ex[1]), c64(ex[2], ex[3]));
            let q = (z2 - z1) / (c64(1.0, 0.0) - z1.conj() * z2);
            let aut = Mob::hyperbolic(z1).then(&Mob::rotation(q.arg()));
            let pair = native.reparametrize(|w| (aut.apply(w), aut.deriv(w)), domain)?;
            (pair, vec![z1, z2], Some(q.norm()), None)
        }
        Data::Direction { .. } => {
            let z1 = c64(ex[0], ex[1]);
            let aut = Mob::hyperbolic(z1);
            let pair = native.reparametrize(|w| (aut.apply(w), aut.deriv(w)), domain)?;
            (pair, vec![z1], None, Some(ex[2] * (1.0 - z1.norm_sqr())))
        }
        Data::Rep { .. } => unreachable!("rep data is not a stationary problem"),
    };
    Ok(StationarySolution { pair, native, marks, t, speed, iterations: out.iterations, residual: out.residual, state })
}

/// Solves for the stationary disc fixed by `problem`; see [`StationaryProblem`] for the gauges.
pub fn solve_stationary(domain: &DomainSpec, problem: &StationaryProblem, cfg: &SolverConfig) -> Result<GeodesicPair> {
    Ok(solve_problem(domain, problem, cfg, None)?.pair)
}

pub fn solve_stationary_detailed(
    domain: &DomainSpec,
    problem: &StationaryProblem,
    cfg: &SolverConfig,
) -> Result<StationarySolution> {
    solve_problem(domain, problem, cfg, None)
}

/// Stationary solve started from a previous solution of the same kind.
pub(crate) fn solve_stationary_warm(
    domain: &DomainSpec,
    problem: &StationaryProblem,
    cfg: &SolverConfig,
    warm: Option<&SolveState>,
) -> Result<StationarySolution> {
    solve_problem(domain, problem, cfg, warm)
}

/// Output of the joint solve behind Ψ_p(z).
#[derive(Clone, Debug)]
pub(crate) struct RepSolveOutput {
    pub pair: GeodesicPair,
    pub zeta: C64,
    pub state: SolveState,
    pub iterations: usize,
}

/// Preferred geodesic through p and z, with ζ* = φ⁻¹(z).
pub(crate) fn solve_rep(
    domain: &DomainSpec,
    p: &CVector,
    z: &CVector,
    cfg: &SolverConfig,
    warm: Option<&SolveState>,
) -> Result<RepSolveOutput> {
    let data = Data::Rep { p: p.clone(), z: z.clone() };
    let (out, used) = solve_data(domain, &data, cfg, warm)?;
    let cfg = &used;
    let side = side_at(domain, None, &data)?;
    let ex = extras(cfg, domain, &side, &out.x);
    let mut pair = pair_from_x(domain, side, cfg, &out.x)?;
    pair.residuals.insert("preferred".into(), pair.preferred_defect().abs());
    Ok(RepSolveOutput {
        pair,
        zeta: c64(ex[0], ex[1]),
        state: SolveState { x: out.x, lin: out.linearization, config: used },
        iterations: out.iterations,
    })
}

/// The rep solve without assembling the pair: ζ*, φ′(1) and φ′(ζ*).
#[derive(Clone, Debug)]
pub(crate) struct RepLight {
    pub zeta: C64,
    pub d_one: CVector,
    pub d_zeta: CVector,
    pub state: SolveState,
}

pub(crate) fn solve_rep_light(
    domain: &DomainSpec,
    p: &CVector,
    z: &CVector,
    cfg: &SolverConfig,
    warm: Option<&SolveState>,
) -> Result<RepLight> {
    let data = Data::Rep { p: p.clone(), z: z.clone() };
    let (out, used) = solve_data(domain, &data, cfg, warm)?;
    let side = side_at(domain, None, &data)?;
    let sys = System::new(domain, side, &used);
    let zeta = sys.extra_c(&out.x, 0);
    let rows = sys.coeff_rows(&out.x);
    let deriv = |w: C64| -> Vec<C64> { rows.iter().map(|r| crate::hardy::horner_derivative(r, w, 1)).collect() };
    Ok(RepLight {
        zeta,
        d_one: CVector::from_vec_unchecked(deriv(c64(1.0, 0.0))),
        d_zeta: CVector::from_vec_unchecked(deriv(zeta)),
        state: SolveState { x: out.x, lin: out.linearization, config: used },
    })
}

/// 1 − tanh² of the Poincaré distance between disc points.
pub(crate) fn disc_cosh_defect(z1: C64, z2: C64) -> f64 {
    let num = (1.0 - z1.norm_sqr()) * (1.0 - z2.norm_sqr());
    (num / (c64(1.0, 0.0) - z1.conj() * z2).norm_sqr()).min(1.0)
}

fn distance_from_defect(q: f64) -> f64 {
    let s = (1.0 - q).max(0.0).sqrt();
    ((1.0 + s) / q.sqrt()).ln()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KobayashiDistance {
    pub value: f64,
    /// tanh of the distance: the disc parameter t with φ(0) = z, φ(t) = w.
    pub t: f64,
    /// 1 − t², kept separately to avoid cancellation near the boundary.
    pub defect: f64,
    pub certificate: Certificate,
}

/// k_Ω(z,w) from the extremal disc through z and w, certified.
pub fn kobayashi_distance(domain: &DomainSpec, z: &CVector, w: &CVector, cfg: &SolverConfig) -> Result<KobayashiDistance> {
    let sol = solve_problem(domain, &StationaryProblem::InteriorPoint { z: z.clone(), w: w.clone() }, cfg, None)?;
    let certificate = geodesic_certificate(&sol.native, domain);
    if !certificate.pass {
        return Err(Error::CertificateFailed(certificate.summary()));
    }
    let q = disc_cosh_defect(sol.marks[0], sol.marks[1]);
    Ok(KobayashiDistance { value: distance_from_defect(q), t: (1.0 - q).sqrt(), defect: q, certificate })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KobayashiMetric {
    pub value: f64,
    pub certificate: Certificate,
}

/// κ_Ω(z,v) = |v|/|φ′(0)| for the extremal disc with φ(0) = z, φ′(0) ∥ v.
pub fn kobayashi_metric(domain: &DomainSpec, z: &CVector, v: &CVector, cfg: &SolverConfig) -> Result<KobayashiMetric> {
    let sol = solve_problem(domain, &StationaryProblem::InteriorDirection { z: z.clone(), v: v.clone() }, cfg, None)?;
    let certificate = geodesic_certificate(&sol.native, domain);
    if !certificate.pass {
        return Err(Error::CertificateFailed(certificate.summary()));
    }
    Ok(KobayashiMetric { value: 1.0 / sol.speed.expect("direction solve"), certificate })
}

impl StationarySolution {
    /// 1 − tanh² k_Ω(z,w) for an InteriorPoint solve, from the native parameters.
    pub fn cosh_defect(&self) -> Option<f64> {
        (self.marks.len() == 2).then(|| disc_cosh_defect(self.marks[0], self.marks[1]))
    }

    /// k_Ω(z,w) for an InteriorPoint solve.
    pub fn distance(&self) -> Option<f64> {
        self.cosh_defect().map(distance_from_defect)
    }

    /// log tanh k_Ω(z,w) for an InteriorPoint solve, without cancellation.
    pub fn green(&self) -> Option<f64> {
        let q = self.cosh_defect()?;
        if q < 0.5 {
            return Some(0.5 * (-q).ln_1p());
        }
        let (z1, z2) = (self.marks[0], self.marks[1]);
        Some(((z2 - z1) / (c64(1.0, 0.0) - z1.conj() * z2)).norm().ln())
    }

    pub fn state(&self) -> &SolveState {
        &self.state
    }
}
