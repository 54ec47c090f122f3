//! The boundary spherical representation Ψ_p: Ω̄ → 𝔹̄ⁿ, its inverse,
//! horosphere membership and Busemann functions.
//!
//! Ψ_p(z) = ν_p + (ζ−1)⟨v,ν_p⟩v where φ is the preferred geodesic through p
//! and z, v = φ′(1)/|φ′(1)| and φ(ζ) = z. Each solve is a single joint system
//! in (φ, λ, ζ); see the geodesics module.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ball::{ball_busemann, ball_horosphere_membership, ball_invert, ball_poisson_kernel};
use crate::cvec::{c64, CVector, C64};
use crate::domain::{DomainKind, DomainSpec, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::geodesics::{
    geodesic_certificate, solve_rep, solve_rep_light, solve_stationary_detailed, solve_stationary_warm, GeodesicPair, LeftInverse,
    SolveState, SolverConfig, StationaryProblem,
};
use crate::limit::{richardson_to_zero, LimitEstimate};

/// Points closer than this to p are mapped to ν_p.
pub const BASE_POINT_RADIUS: f64 = 1e-6;

/// A cached disc must reproduce z to this accuracy to be reused.
const CACHE_MATCH_TOL: f64 = 1e-10;

/// Ψ_p(z) together with the data (v, ζ) that produce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepPoint {
    pub z: CVector,
    pub v: CVector,
    pub zeta: C64,
    pub w: CVector,
}

/// A rep solve with its disc and reusable solver state.
#[derive(Clone, Debug)]
pub struct RepSolution {
    pub point: RepPoint,
    pub pair: GeodesicPair,
    pub state: SolveState,
    pub iterations: usize,
}

struct Entry {
    pair: GeodesicPair,
    li: LeftInverse,
    v: CVector,
}

/// Ψ_p for one domain and base point, with a cache of certified discs through p.
pub struct SphericalRep {
    domain: DomainSpec,
    p: CVector,
    nu: CVector,
    config: SolverConfig,
    cache: Mutex<BTreeMap<Vec<i64>, Arc<Entry>>>,
}

impl std::fmt::Debug for SphericalRep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphericalRep").field("p", &self.p).field("nu", &self.nu).finish_non_exhaustive()
    }
}

fn cache_key(v: &CVector) -> Vec<i64> {
    v.as_slice().iter().flat_map(|c| [(c.re * 1e9).round() as i64, (c.im * 1e9).round() as i64]).collect()
}

/// w = ν + (ζ−1)⟨v,ν⟩v.
fn ball_image(nu: &CVector, v: &CVector, zeta: C64) -> CVector {
    nu + &v.scale((zeta - 1.0) * v.inner(nu))
}

impl SphericalRep {
    pub fn new(domain: &DomainSpec, p: &CVector, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        domain.check_point(p)?;
        let nu = domain.unit_normal(p)?;
        Ok(SphericalRep {
            domain: domain.clone(),
            p: p.clone(),
            nu,
            config: *config,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn p(&self) -> &CVector {
        &self.p
    }

    pub fn nu(&self) -> &CVector {
        &self.nu
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    fn check_closure(&self, z: &CVector) -> Result<()> {
        self.domain.check_point(z)?;
        let r = self.domain.value(z.as_slice());
        if !(r < BOUNDARY_TOL) {
            return Err(Error::Exterior(r));
        }
        Ok(())
    }

    fn base_point(&self, z: &CVector) -> RepPoint {
        RepPoint { z: z.clone(), v: self.nu.clone(), zeta: c64(1.0, 0.0), w: self.nu.clone() }
    }

    fn point(&self, z: &CVector, v: CVector, zeta: C64) -> RepPoint {
        let w = ball_image(&self.nu, &v, zeta);
        RepPoint { z: z.clone(), v, zeta, w }
    }

    fn lookup(&self, z: &CVector) -> Option<RepPoint> {
        let cache = self.cache.lock().expect("cache lock");
        for e in cache.values() {
            if let Ok(zeta) = e.li.eval(z) {
                if e.pair.phi.eval(zeta).dist(z) < CACHE_MATCH_TOL {
                    return Some(self.point(z, e.v.clone(), zeta));
                }
            }
        }
        None
    }

    fn direction_of(pair: &GeodesicPair) -> Result<CVector> {
        pair.phi.eval_derivative(c64(1.0, 0.0), 1).normalized()
    }

    /// Ψ_p(z), reusing cached discs and certifying new ones. On the unit ball the
    /// closed-form inversion is used.
    pub fn map(&self, z: &CVector) -> Result<RepPoint> {
        self.check_closure(z)?;
        if z.dist(&self.p) < BASE_POINT_RADIUS {
            return Ok(self.base_point(z));
        }
        if let DomainKind::Ball = self.domain.kind() {
            let (dir, zeta) = ball_invert(&self.p, z)?;
            return Ok(self.point(z, dir.v, zeta));
        }
        if let Some(hit) = self.lookup(z) {
            return Ok(hit);
        }
        let out = solve_rep(&self.domain, &self.p, z, &self.config, None)?;
        let cert = geodesic_certificate(&out.pair, &self.domain);
        if !cert.pass {
            return Err(Error::CertificateFailed(cert.summary()));
        }
        let v = Self::direction_of(&out.pair)?;
        let entry = Entry { li: LeftInverse::new(&out.pair), pair: out.pair, v: v.clone() };
        self.cache.lock().expect("cache lock").entry(cache_key(&v)).or_insert_with(|| Arc::new(entry));
        Ok(self.point(z, v, out.zeta))
    }

    /// Ψ_p(z) by the joint solve, bypassing the cache and the closed form; warm
    /// started from `warm` when given.
    pub fn solve_from(&self, z: &CVector, warm: Option<&SolveState>) -> Result<RepSolution> {
        self.check_closure(z)?;
        if z.dist(&self.p) < BASE_POINT_RADIUS {
            return Err(Error::InvalidInput("z is at the base point".into()));
        }
        let out = solve_rep(&self.domain, &self.p, z, &self.config, warm)?;
        let v = Self::direction_of(&out.pair)?;
        Ok(RepSolution { point: self.point(z, v, out.zeta), pair: out.pair, state: out.state, iterations: out.iterations })
    }


    /// Like [`SphericalRep::solve_from`] but without building the disc; returns
    /// Ψ_p(z), the tangent φ′(ζ_z) of the disc at z, and the solver state.
    pub fn solve_point(&self, z: &CVector, warm: Option<&SolveState>) -> Result<(RepPoint, CVector, SolveState)> {
        self.check_closure(z)?;
        if z.dist(&self.p) < BASE_POINT_RADIUS {
            return Err(Error::InvalidInput("z is at the base point".into()));
        }
        let out = solve_rep_light(&self.domain, &self.p, z, &self.config, warm)?;
        let v = out.d_one.normalized()?;
        Ok((self.point(z, v, out.zeta), out.d_zeta, out.state))
    }

    /// The preferred geodesic at p with direction v.
    pub fn geodesic(&self, v: &CVector) -> Result<GeodesicPair> {
        let sol = solve_stationary_detailed(
            &self.domain,
            &StationaryProblem::Boundary { p: self.p.clone(), v: v.clone() },
            &self.config,
        )?;
        Ok(sol.pair)
    }

    /// Ψ_p⁻¹(w) = φ_{v_w}(ζ_w), where η_{v_w}(ζ_w) = w in the ball with base point ν_p.
    pub fn inverse(&self, w: &CVector) -> Result<CVector> {
        self.domain.check_point(w)?;
        if w.dist(&self.nu) < BASE_POINT_RADIUS {
            return Ok(self.p.clone());
        }
        let (dir, zeta) = ball_invert(&self.nu, w)?;
        if let DomainKind::Ball = self.domain.kind() {
            return Ok(dir.eval(zeta));
        }
        let pair = self.geodesic(&dir.v)?;
        Ok(pair.phi.eval(zeta))
    }

    /// P_{Ω,p}(z) = P_{𝔹ⁿ,ν_p}(Ψ_p(z)).
    pub fn poisson(&self, z: &CVector) -> Result<f64> {
        let r = self.map(z)?;
        ball_poisson_kernel(&r.w, &self.nu)
    }

    /// Membership of z in E_Ω(p, z₀, R) through the image horosphere in the ball.
    pub fn horosphere_membership(&self, z0: &CVector, radius: f64, z: &CVector) -> Result<bool> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!("horosphere radius must be positive, got {radius}")));
        }
        let w0 = self.map(z0)?.w;
        let w = self.map(z)?.w;
        if w0.norm() < 1e-15 {
            return Ok(ball_horosphere_membership(&self.nu, radius, &w));
        }
        Ok(ball_busemann(&w, &w0, &self.nu)? < 0.5 * radius.ln())
    }

    /// Empirical sup of |Ψ_p(z)−ν_p|/(1−|Ψ_p(z)|) over random z ∈ Γ_β(p) approaching p.
    pub fn nontangential_image_bound<R: Rng + ?Sized>(&self, beta: f64, samples: usize, rng: &mut R) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for _ in 0..samples {
            let Some(z) = sample_nontangential(&self.domain, &self.p, beta, 1e-4, 0.5, rng)? else {
                continue;
            };
            let w = self.map(&z)?.w;
            let gap = 1.0 - w.norm();
            if gap > 0.0 {
                sup = sup.max(w.dist(&self.nu) / gap);
            }
        }
        Ok(sup)
    }
}

/// A random point of Γ_β(p) at distance in [d_min, d_max] from p (log-uniform),
/// or None if 100 tries all land outside the region.
pub fn sample_nontangential<R: Rng + ?Sized>(
    domain: &DomainSpec,
    p: &CVector,
    beta: f64,
    d_min: f64,
    d_max: f64,
    rng: &mut R,
) -> Result<Option<CVector>> {
    if !(beta > 1.0) {
        return Err(Error::InvalidInput(format!("aperture must exceed 1, got {beta}")));
    }
    if !(0.0 < d_min && d_min <= d_max) {
        return Err(Error::InvalidInput("need 0 < d_min <= d_max".into()));
    }
    let nu = domain.unit_normal(p)?;
    let basis = crate::domain::tangent_basis(&nu);
    let n = domain.dim();
    for _ in 0..100 {
        let t = (rng.gen_range(d_min.ln()..=d_max.ln())).exp();
        let spread = rng.gen_range(0.0..1.0) * (beta - 1.0).min(1.0);
        let mut d = nu.scale(c64(-1.0, 0.0));
        for b in &basis {
            let c = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * spread / (n as f64).sqrt();
            d = &d + &CVector::from_vec_unchecked(b.iter().map(|x| x * c).collect());
        }
        let z = p + &d.scale(c64(t / d.norm(), 0.0));
        if domain.contains(&z) && domain.in_nontangential_region(p, beta, &z)? {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

/// Ψ_p(z) with a fresh representation object.
pub fn spherical_rep(domain: &DomainSpec, p: &CVector, z: &CVector, config: &SolverConfig) -> Result<RepPoint> {
    SphericalRep::new(domain, p, config)?.map(z)
}

pub fn spherical_rep_inverse(domain: &DomainSpec, p: &CVector, w: &CVector, config: &SolverConfig) -> Result<CVector> {
    SphericalRep::new(domain, p, config)?.inverse(w)
}

/// Two computations of the Busemann function B(z,z₀).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusemannReport {
    /// lim (k_Ω(z,w) − k_Ω(z₀,w)) as w → p along the normal geodesic.
    pub limit: f64,
    /// Extrapolation error estimate of `limit`.
    pub limit_error: f64,
    /// ½ log(P_Ω(z₀,p)/P_Ω(z,p)).
    pub kernel: f64,
    pub agree: bool,
}

/// Busemann profiles b(x) = lim (k_Ω(x,w_k) − k_Ω(o,w_k)) along w_k = φ_ν(1−2^{−k}),
/// o the anchor, so that B(z,z₀) = b(z) − b(z₀).
pub struct BusemannLimit {
    domain: DomainSpec,
    config: SolverConfig,
    points: Vec<CVector>,
    xs: Vec<f64>,
    reference: Vec<f64>,
}

/// Agreement tolerance between the two Busemann computations.
pub const BUSEMANN_TOL: f64 = 1e-4;

impl BusemannLimit {
    pub fn new(rep: &SphericalRep, k_min: u32, k_max: u32) -> Result<Self> {
        if k_max <= k_min + 1 {
            return Err(Error::InvalidInput("need at least three levels".into()));
        }
        let normal = rep.geodesic(rep.nu())?;
        let xs: Vec<f64> = (k_min..=k_max).map(|k| 0.5f64.powi(k as i32)).collect();
        let points: Vec<CVector> = xs.iter().map(|x| normal.phi.eval(c64(1.0 - x, 0.0))).collect();
        let mut me = BusemannLimit {
            domain: rep.domain().clone(),
            config: *rep.config(),
            points,
            xs,
            reference: Vec::new(),
        };
        let anchor = rep.domain().anchor().clone();
        me.reference = me.distances(&anchor)?;
        Ok(me)
    }

    fn distances(&self, x: &CVector) -> Result<Vec<f64>> {
        let mut warm: Option<SolveState> = None;
        let mut out = Vec::with_capacity(self.points.len());
        for w in &self.points {
            let problem = StationaryProblem::InteriorPoint { z: x.clone(), w: w.clone() };
            let sol = solve_stationary_warm(&self.domain, &problem, &self.config, warm.as_ref())?;
            out.push(sol.distance().expect("interior point solve"));
            warm = Some(sol.state().clone());
        }
        Ok(out)
    }

    pub fn profile(&self, x: &CVector) -> Result<LimitEstimate> {
        let d = self.distances(x)?;
        let ys: Vec<C64> = d.iter().zip(&self.reference).map(|(a, b)| c64(a - b, 0.0)).collect();
        Ok(richardson_to_zero(&self.xs, &ys))
    }
}

/// B(z,z₀) by the distance limit and by the kernel; they must agree to 1e−4.
pub fn busemann(rep: &SphericalRep, z: &CVector, z0: &CVector) -> Result<BusemannReport> {
    rep.domain().require_interior(z)?;
    rep.domain().require_interior(z0)?;
    let lim = BusemannLimit::new(rep, 3, 12)?;
    let a = lim.profile(z)?;
    let b = lim.profile(z0)?;
    let limit = a.value.re - b.value.re;
    let kernel = 0.5 * (rep.poisson(z0)? / rep.poisson(z)?).ln();
    let agree = (limit - kernel).abs() < BUSEMANN_TOL;
    let report = BusemannReport { limit, limit_error: a.error + b.error, kernel, agree };
    if !agree {
        return Err(Error::Disagreement(format!("Busemann limit {limit} vs kernel {kernel}")));
    }
    Ok(report)
}
