//! Seeded property suites producing deterministic JSON reports.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ball::{ball_busemann, ball_geodesic, ball_horosphere_membership, phase_align, BoundaryDirection};
use crate::cvec::{c64, CVector, C64};
use crate::domain::{DomainDescriptor, DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::geodesics::{
    geodesic_certificate, kobayashi_distance, solve_stationary, GeodesicPair, SolverConfig, StationaryProblem,
};
use crate::hardy::HardyMap;
use crate::limit::richardson_to_zero;
use crate::ma::{boundary_asymptotics, green_normal_derivative_relation, ma_defaults, ma_verify, slice_check, KernelField};
use crate::rep::SphericalRep;
use crate::rigidity::{
    contact_family, shoikhet_counterexample, third_derivative_at_one, verify_bk_inequalities, DiscGrid, MobiusMix,
    SelfMap, SAFE_CONTACT_SCALE,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Rigidity,
    Ma,
    Rep,
    Geodesics,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rigidity" => Ok(Suite::Rigidity),
            "ma" => Ok(Suite::Ma),
            "rep" => Ok(Suite::Rep),
            "geodesics" => Ok(Suite::Geodesics),
            other => Err(Error::InvalidInput(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    /// value < limit
    Below,
    /// value ≥ limit
    AtLeast,
    /// value is 1 when the check holds
    Flag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, bound: Bound::Below, pass: value < limit }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, bound: Bound::AtLeast, pass: value >= limit }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, limit: 1.0, bound: Bound::Flag, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Number of random cases per property.
    pub samples: usize,
    pub config: SolverConfig,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 0, samples: 10, config: SolverConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub domain: Option<DomainDescriptor>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A unit vector from the complex Gaussian.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    loop {
        let v = CVector::from_vec_unchecked((0..n).map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect());
        if let Ok(u) = v.normalized() {
            return u;
        }
    }
}

/// A random unit v with ⟨v,ν⟩ real and at least `min_pairing`.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R, nu: &CVector, min_pairing: f64) -> CVector {
    loop {
        let v = random_unit(rng, nu.len());
        if let Ok(v) = phase_align(&v, nu) {
            if v.inner(nu).re >= min_pairing {
                return v;
            }
        }
    }
}

/// A random unitary matrix (QR of a complex Gaussian matrix).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    g.qr().q()
}

/// A = U diag(s) V with singular values in [1, max_cond], plus a small translation.
pub fn random_linear_ball<R: Rng + ?Sized>(rng: &mut R, n: usize, max_cond: f64) -> Result<DomainSpec> {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let mut s: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..max_cond)).collect();
    s[0] = 1.0;
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { c64(s[i], 0.0) } else { c64(0.0, 0.0) });
    let b = CVector::from_vec_unchecked((0..n).map(|_| c64(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect());
    DomainSpec::linear_ball(&u * d * v, b)
}

/// Hausdorff distance between the boundary curves of two discs, each sampled at m
/// nodes and refined by Newton on the squared distance to the other curve.
pub fn boundary_hausdorff(a: &HardyMap, b: &HardyMap, m: usize) -> f64 {
    fn one_sided(a: &HardyMap, b: &HardyMap, m: usize) -> f64 {
        let thetas: Vec<f64> = (0..m).map(|k| 2.0 * std::f64::consts::PI * k as f64 / m as f64).collect();
        let bs: Vec<CVector> = thetas.iter().map(|t| b.eval(C64::from_polar(1.0, *t))).collect();
        let mut worst: f64 = 0.0;
        for t in &thetas {
            let x = a.eval(C64::from_polar(1.0, *t));
            let (k, _) = bs
                .iter()
                .enumerate()
                .map(|(k, y)| (k, y.dist(&x)))
                .fold((0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
            let mut th = thetas[k];
            for _ in 0..30 {
                let z = C64::from_polar(1.0, th);
                let iz = c64(0.0, 1.0) * z;
                let y = b.eval(z);
                let d1 = b.eval_derivative(z, 1).scale(iz);
                let d2 = &b.eval_derivative(z, 2).scale(iz * iz) + &b.eval_derivative(z, 1).scale(iz * c64(0.0, 1.0));
                let diff = &y - &x;
                let g = diff.inner(&d1).re;
                let h = d1.norm_sqr() + diff.inner(&d2).re;
                if h <= 0.0 {
                    break;
                }
                let step = g / h;
                th -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let d = b.eval(C64::from_polar(1.0, th)).dist(&x).min(bs[k].dist(&x));
            worst = worst.max(d);
        }
        worst
    }
    one_sided(a, b, m).max(one_sided(b, a, m))
}

fn apply(m: &DMatrix<C64>, z: &CVector) -> CVector {
    let n = z.len();
    CVector::from_vec_unchecked((0..n).map(|i| (0..n).map(|k| m[(i, k)] * z[k]).sum()).collect())
}

/// The preferred geodesic of the ball at p with direction v as a pair.
fn eta(p: &CVector, v: &CVector, grid: usize) -> Result<GeodesicPair> {
    ball_geodesic(&BoundaryDirection::new(p.clone(), v.clone())?, grid)
}

pub fn run_suite(suite: Suite, domain: Option<&DomainSpec>, opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (checks, domain) = match suite {
        Suite::Rigidity => (rigidity_suite(&mut rng, opts)?, None),
        other => {
            let d = domain.cloned().map_or_else(|| DomainSpec::ball(2), Ok)?;
            let checks = match other {
                Suite::Geodesics => geodesics_suite(&d, &mut rng, opts)?,
                Suite::Rep => rep_suite(&d, &mut rng, opts)?,
                Suite::Ma => ma_suite(&d, &mut rng, opts)?,
                Suite::Rigidity => unreachable!(),
            };
            (checks, d.descriptor())
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport { suite, seed: opts.seed, samples: opts.samples, domain, checks, pass })
}

fn rigidity_suite(rng: &mut ChaCha8Rng, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let sh = shoikhet_counterexample()?;
    out.push(Check::flag("shoikhet_counterexample.violated", sh.violated));
    out.push(Check::below("shoikhet_counterexample.lhs_exact", (sh.lhs - 1024.0 / 25281.0).abs(), 1e-12));
    out.push(Check::below("shoikhet_counterexample.rhs_exact", (sh.rhs_incorrect - 64.0 / 1590.0).abs(), 1e-12));
    out.push(Check::flag("shoikhet_counterexample.lemma_holds", sh.lemma_holds));
    out.push(Check::below("shoikhet.f3_plus_0.6", (sh.f3.value + 0.6).abs(), 1e-6));
    let id = third_derivative_at_one(&SelfMap::identity())?;
    out.push(Check::below("identity.f3", id.value.abs(), 1e-10));
    let grid = DiscGrid::default();
    out.push(Check::flag("parabolic.rejected", third_derivative_at_one(&SelfMap::parabolic(0.5)).is_err()));
    let mut worst_i = f64::INFINITY;
    let mut worst_ii = f64::INFINITY;
    let mut worst_f3 = f64::NEG_INFINITY;
    let mut worst_f3_match: f64 = 0.0;
    for _ in 0..opts.samples {
        let chi = MobiusMix::random(rng, 3);
        let s = rng.gen_range(0.05..SAFE_CONTACT_SCALE);
        let f = contact_family(&chi, s)?;
        f.check_self_map(&grid)?;
        let r = verify_bk_inequalities(&f, &grid)?;
        worst_i = worst_i.min(r.margin_i);
        worst_ii = worst_ii.min(r.margin_ii);
        worst_f3 = worst_f3.max(r.f3.value);
        worst_f3_match = worst_f3_match.max((r.f3.value + 3.0 * s * chi.derivative_at_one()).abs());
    }
    out.push(Check::at_least("family.margin_i", worst_i, -1e-10));
    out.push(Check::at_least("family.margin_ii", worst_ii, -1e-8));
    out.push(Check::below("family.f3_max", worst_f3, 1e-10));
    out.push(Check::below("family.f3_vs_closed_form", worst_f3_match, 1e-6));
    Ok(out)
}

fn geodesics_suite(domain: &DomainSpec, rng: &mut ChaCha8Rng, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let cfg = &opts.config;
    let mut cert_fail = 0usize;
    let mut worst_model: f64 = 0.0;
    for _ in 0..opts.samples {
        let p = domain.sample_boundary(rng);
        let nu = domain.unit_normal(&p)?;
        let v = random_direction(rng, &nu, 0.1);
        let pair = solve_stationary(domain, &StationaryProblem::Boundary { p: p.clone(), v: v.clone() }, cfg)?;
        if !geodesic_certificate(&pair, domain).pass {
            cert_fail += 1;
        }
        match domain.kind() {
            DomainKind::Ball => {
                let e = eta(&p, &v, cfg.grid)?;
                worst_model = worst_model.max(pair.phi.boundary_distance(&e.phi, 4 * cfg.grid));
            }
            DomainKind::LinearBall { a, a_inv, b } => {
                let pb = apply(a_inv, &(&p - b));
                let vb = phase_align(&apply(a_inv, &v), &pb)?;
                let e = eta(&pb, &vb, cfg.grid)?;
                let img = e.phi.affine_image(a, b)?;
                worst_model = worst_model.max(boundary_hausdorff(&pair.phi, &img, 512));
            }
            _ => {}
        }
    }
    out.push(Check::below("boundary.certificate_failures", cert_fail as f64, 0.5));
    match domain.kind() {
        DomainKind::Ball => out.push(Check::below("boundary.sup_distance_to_eta", worst_model, 1e-8)),
        DomainKind::LinearBall { .. } => out.push(Check::below("boundary.hausdorff_to_image", worst_model, 1e-6)),
        _ => {}
    }
    let mut worst_sym: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    for _ in 0..opts.samples.div_ceil(2) {
        let z = domain.sample_interior(rng, 0.8);
        let w = domain.sample_interior(rng, 0.8);
        let a = kobayashi_distance(domain, &z, &w, cfg)?.value;
        let b = kobayashi_distance(domain, &w, &z, cfg)?.value;
        worst_sym = worst_sym.max((a - b).abs());
        if let DomainKind::Ball = domain.kind() {
            worst_closed = worst_closed.max((a - crate::ball::ball_kobayashi(&z, &w)?).abs());
        }
    }
    out.push(Check::below("distance.symmetry", worst_sym, 1e-8));
    if let DomainKind::Ball = domain.kind() {
        out.push(Check::below("distance.closed_form", worst_closed, 1e-8));
    }
    Ok(out)
}

fn rep_suite(domain: &DomainSpec, rng: &mut ChaCha8Rng, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let p = domain.sample_boundary(rng);
    let rep = SphericalRep::new(domain, &p, &opts.config)?;
    let nu = rep.nu().clone();
    let mut round: f64 = 0.0;
    let mut ident: f64 = 0.0;
    for _ in 0..opts.samples {
        let z = domain.sample_interior(rng, 0.95);
        let w = rep.map(&z)?.w;
        round = round.max(rep.inverse(&w)?.dist(&z));
        if let DomainKind::Ball = domain.kind() {
            ident = ident.max(w.dist(&z));
        }
    }
    out.push(Check::below("map_then_inverse", round, 1e-7));
    if let DomainKind::Ball = domain.kind() {
        out.push(Check::below("ball_identity", ident, 1e-8));
    }
    let mut sphere: f64 = 0.0;
    for _ in 0..opts.samples.div_ceil(5).max(1) {
        let q = domain.sample_boundary(rng);
        if q.dist(&p) < 1e-3 {
            continue;
        }
        sphere = sphere.max((rep.map(&q)?.w.norm() - 1.0).abs());
    }
    out.push(Check::below("boundary_to_sphere", sphere, 1e-8));
    let mut back: f64 = 0.0;
    for _ in 0..opts.samples {
        let w = CVector::from_vec_unchecked(
            random_unit(rng, domain.dim()).as_slice().iter().map(|c| c * rng.gen::<f64>().powf(0.5) * 0.95).collect(),
        );
        let z = rep.inverse(&w)?;
        back = back.max(rep.map(&z)?.w.dist(&w));
    }
    out.push(Check::below("inverse_then_map", back, 1e-7));
    let z0 = domain.sample_interior(rng, 0.7);
    out.push(Check::flag("horosphere.pole_member_iff_r_gt_1", rep.horosphere_membership(&z0, 1.5, &z0)? && !rep.horosphere_membership(&z0, 0.8, &z0)?));
    if let DomainKind::Ball = domain.kind() {
        let mut agree = true;
        for _ in 0..opts.samples {
            let z = domain.sample_interior(rng, 0.95);
            let r = rng.gen_range(0.2..5.0);
            let z0 = CVector::zeros(domain.dim());
            agree &= rep.horosphere_membership(&z0, r, &z)? == ball_horosphere_membership(&p, r, &z);
        }
        out.push(Check::flag("horosphere.ball_closed_form", agree));
        let z = domain.sample_interior(rng, 0.7);
        let b = crate::rep::busemann(&rep, &z, &z0)?;
        out.push(Check::below("busemann.ball_closed_form", (b.kernel - ball_busemann(&z, &z0, &p)?).abs(), 1e-8));
    }
    // ⟨(Ψ∘φ_v)′(1),ν⟩ = ⟨φ_v′(1),ν⟩
    let mut deriv: f64 = 0.0;
    for _ in 0..opts.samples.div_ceil(5).max(1) {
        let v = random_direction(rng, &nu, 0.3);
        let pair = rep.geodesic(&v)?;
        let target = pair.phi.eval_derivative(c64(1.0, 0.0), 1).inner(&nu);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 3..10 {
            let x = 0.5f64.powi(k);
            let w = rep.map(&pair.phi.eval(c64(1.0 - x, 0.0)))?.w;
            xs.push(x);
            ys.push((&nu - &w).inner(&nu) / x);
        }
        let est = richardson_to_zero(&xs, &ys);
        deriv = deriv.max((est.value - target).norm());
    }
    out.push(Check::below("derivative_preserved", deriv, 1e-6));
    let c = rep.nontangential_image_bound(2.0, opts.samples, rng)?;
    out.push(Check::flag("nontangential_image_bound.finite", c.is_finite()));
    Ok(out)
}

fn ma_suite(domain: &DomainSpec, rng: &mut ChaCha8Rng, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let p = domain.sample_boundary(rng);
    let field = KernelField::new(domain, &p, &opts.config)?;
    let nu = field.rep().nu().clone();
    let is_ball = matches!(domain.kind(), DomainKind::Ball);
    let (fd, tol, shrink) = ma_defaults(domain);
    let samples: Vec<CVector> = (0..opts.samples).map(|_| domain.sample_interior(rng, shrink)).collect();
    let rep = ma_verify(&field, &samples, &fd, &tol)?;
    out.push(Check::below("hessian.max_abs_det", rep.max_abs_det, tol.det));
    out.push(Check::at_least("hessian.min_eig", rep.min_eig, -tol.psd));
    out.push(Check::below("hessian.max_null_angle", rep.max_null_angle, tol.angle));
    out.push(Check::below("kernel.max_value", rep.max_value, 0.0));
    let mut slice: f64 = 0.0;
    let mut harm: f64 = 0.0;
    for _ in 0..opts.samples.div_ceil(5).max(1) {
        let v = random_direction(rng, &nu, 0.3);
        let s = slice_check(&field, &v)?;
        slice = slice.max(if is_ball { s.max_relative_error } else { s.max_error });
        harm = harm.max(s.harmonicity);
    }
    out.push(Check::below("slice.max_error", slice, if is_ball { 1e-12 } else { 1e-6 }));
    out.push(Check::below("slice.harmonicity", harm, 1e-5));
    let mut asym: f64 = 0.0;
    for _ in 0..opts.samples.div_ceil(5).max(1) {
        let v = random_direction(rng, &nu, 0.3);
        asym = asym.max(boundary_asymptotics(&field, &v)?.relative_error);
    }
    out.push(Check::below("asymptotics.relative_error", asym, 1e-3));
    let mut green: f64 = 0.0;
    for _ in 0..opts.samples.div_ceil(5).max(1) {
        let z = domain.sample_interior(rng, 0.7);
        green = green.max(green_normal_derivative_relation(&field, &z, 8)?.relative_error);
    }
    out.push(Check::below("green_relation.relative_error", green, 1e-3));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hausdorff_of_reparametrized_disc_is_small() {
        let p = CVector::basis(2, 0);
        let v = phase_align(&CVector::new(vec![c64(0.7, 0.0), c64(0.2, 0.3)]).unwrap(), &p).unwrap();
        let e = eta(&p, &v, 64).unwrap();
        let aut = crate::disc::mobius_automorphism(c64(0.3, 0.2)).unwrap();
        let m = 256;
        let mut samples = vec![vec![c64(0.0, 0.0); m]; 2];
        for k in 0..m {
            let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
            let w = e.phi.eval(aut.apply(z));
            samples[0][k] = w[0];
            samples[1][k] = w[1];
        }
        let moved = HardyMap::from_samples(&samples, 100).unwrap().map;
        assert!(boundary_hausdorff(&e.phi, &moved, 256) < 1e-10);
        let shifted = e.phi.affine_image(&DMatrix::identity(2, 2), &CVector::new(vec![c64(1e-3, 0.0), c64(0.0, 0.0)]).unwrap()).unwrap();
        assert!((boundary_hausdorff(&e.phi, &shifted, 256) - 1e-3).abs() < 2e-4);
    }

    #[test]
    fn rigidity_suite_is_deterministic() {
        let opts = SuiteOptions { samples: 3, ..SuiteOptions::default() };
        let a = match run_suite(Suite::Rigidity, None, &opts) {
            Ok(a) => a,
            Err(e) => panic!("{e:?}"),
        };
        let b = run_suite(Suite::Rigidity, None, &opts).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert!(a.pass, "{:?}", a.failures().collect::<Vec<_>>());
    }

    #[test]
    fn ball_suites_pass() {
        let cfg = SolverConfig { degree: 16, grid: 64, mu_degree: 8, ..SolverConfig::default() };
        let opts = SuiteOptions { samples: 4, seed: 5, config: cfg };
        let ball = DomainSpec::ball(2).unwrap();
        for s in [Suite::Geodesics, Suite::Rep, Suite::Ma] {
            let r = run_suite(s, Some(&ball), &opts).unwrap();
            assert!(r.pass, "{s:?}: {:?}", r.failures().collect::<Vec<_>>());
        }
    }
}
