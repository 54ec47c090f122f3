//! Boundary rigidity for holomorphic self-maps f of Δ with third-order contact
//! with the identity at 1.
//!
//! The chain f → g → φ → ψ:
//!   g = (1+f)/(1−f) − (1+ζ)/(1−ζ),  φ = (f−ζ)/(ζ−1)²,  ψ = (1−φ)/(1+φ).
//! Maps are stored through their displacement d = f − ζ so that φ near 1 does
//! not suffer from cancellation.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::cauchy_derivative;
use crate::cvec::{c64, C64};
use crate::error::{Error, Result};
use crate::hardy::HardyMap;
use crate::limit::{angular_limit, LimitOptions};

type ScalarFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// Slack for |f| ≤ 1 and |ψ| ≤ 1 on grids.
pub const SELF_MAP_SLACK: f64 = 1e-12;

/// A holomorphic map of Δ near the identity at 1, given by its displacement.
#[derive(Clone)]
pub struct SelfMap {
    disp: ScalarFn,
    pub label: String,
    /// Caller's claim of third-order contact with the identity at 1.
    pub third_order_contact: bool,
}

impl std::fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SelfMap").field("label", &self.label).finish_non_exhaustive()
    }
}

impl SelfMap {
    /// From f itself; d = f(ζ) − ζ is formed by subtraction.
    pub fn from_fn<F: Fn(C64) -> C64 + Send + Sync + 'static>(label: &str, f: F, third_order_contact: bool) -> Self {
        SelfMap { disp: Arc::new(move |z| f(z) - z), label: label.into(), third_order_contact }
    }

    /// From the displacement d(ζ) = f(ζ) − ζ.
    pub fn from_displacement<F: Fn(C64) -> C64 + Send + Sync + 'static>(
        label: &str,
        d: F,
        third_order_contact: bool,
    ) -> Self {
        SelfMap { disp: Arc::new(d), label: label.into(), third_order_contact }
    }

    pub fn from_hardy(h: HardyMap, third_order_contact: bool) -> Result<Self> {
        if h.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: h.dim() });
        }
        Ok(Self::from_fn("hardy", move |z| h.eval_scalar(z), third_order_contact))
    }

    pub fn identity() -> Self {
        Self::from_displacement("identity", |_| c64(0.0, 0.0), true)
    }

    /// σ_t(ζ) = ((1−it)ζ + it)/(−itζ + 1+it), with d = it(1−ζ)²/(1+it(1−ζ)).
    pub fn parabolic(t: f64) -> Self {
        let it = c64(0.0, t);
        Self::from_displacement(
            &format!("parabolic({t})"),
            move |z| {
                let w = c64(1.0, 0.0) - z;
                it * w * w / (c64(1.0, 0.0) + it * w)
            },
            false,
        )
    }

    /// f(ζ) = (10ζ + (1−ζ)²)/(10 + (1−ζ)²), with d = (1−ζ)³/(10 + (1−ζ)²).
    pub fn shoikhet() -> Self {
        Self::from_displacement(
            "shoikhet",
            |z| {
                let w = c64(1.0, 0.0) - z;
                w * w * w / (10.0 + w * w)
            },
            true,
        )
    }

    pub fn eval(&self, z: C64) -> C64 {
        z + (self.disp)(z)
    }

    pub fn displacement(&self, z: C64) -> C64 {
        (self.disp)(z)
    }

    /// max |f| over a grid; errors if it exceeds 1 + slack.
    pub fn check_self_map(&self, grid: &DiscGrid) -> Result<f64> {
        let worst = grid.points().par_iter().map(|&z| self.eval(z).norm()).reduce(|| 0.0, f64::max);
        if !(worst <= 1.0 + SELF_MAP_SLACK) {
            return Err(Error::NotSelfMap(format!("max |f| = {worst}")));
        }
        Ok(worst)
    }
}

/// Tensor grid of radii (i+½)/radii × equispaced angles, excluding |ζ−1| < exclusion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscGrid {
    pub radii: usize,
    pub angles: usize,
    pub exclusion: f64,
}

impl Default for DiscGrid {
    fn default() -> Self {
        DiscGrid { radii: 64, angles: 256, exclusion: 1e-3 }
    }
}

impl DiscGrid {
    pub fn points(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.radii * self.angles);
        for i in 0..self.radii {
            let r = (i as f64 + 0.5) / self.radii as f64;
            for k in 0..self.angles {
                let z = C64::from_polar(r, 2.0 * PI * k as f64 / self.angles as f64);
                if (z - 1.0).norm() >= self.exclusion {
                    out.push(z);
                }
            }
        }
        out
    }
}

/// g, φ, ψ derived from f.
#[derive(Clone, Debug)]
pub struct ChainBundle {
    pub f: SelfMap,
}

impl ChainBundle {
    pub fn g(&self, z: C64) -> C64 {
        let one = c64(1.0, 0.0);
        let d = self.f.displacement(z);
        // 2(f−ζ)/((1−f)(1−ζ))
        2.0 * d / ((one - z - d) * (one - z))
    }

    pub fn phi(&self, z: C64) -> C64 {
        let w = z - 1.0;
        self.f.displacement(z) / (w * w)
    }

    pub fn psi(&self, z: C64) -> C64 {
        let p = self.phi(z);
        (1.0 - p) / (1.0 + p)
    }

    /// (1−ψ)/(1−ζ) = 2φ/((1+φ)(1−ζ)), whose limit at 1 is ψ′(1).
    pub fn psi_quotient(&self, z: C64) -> C64 {
        let p = self.phi(z);
        2.0 * p / ((1.0 + p) * (1.0 - z))
    }
}

/// Builds g, φ, ψ and checks Re g ≥ 0 and |ψ| ≤ 1 on the grid.
pub fn chain_transform(f: &SelfMap, grid: &DiscGrid) -> Result<ChainBundle> {
    let bundle = ChainBundle { f: f.clone() };
    let pts = grid.points();
    let bad = pts.par_iter().find_any(|&&z| (f.eval(z) - 1.0).norm() < 1e-14);
    if let Some(z) = bad {
        return Err(Error::InvalidInput(format!("f(ζ) = 1 at interior sample {z}")));
    }
    let (min_re_g, max_psi) = pts
        .par_iter()
        .map(|&z| (bundle.g(z).re, bundle.psi(z).norm()))
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    if min_re_g < -1e-10 {
        return Err(Error::NotSelfMap(format!("min Re g = {min_re_g}")));
    }
    if max_psi > 1.0 + SELF_MAP_SLACK {
        return Err(Error::NotSelfMap(format!("max |ψ| = {max_psi}")));
    }
    Ok(bundle)
}

/// f with d = (ζ−1)²(1−ψ)/(1+ψ); not checked to be a self-map.
pub fn inverse_chain_unchecked<F: Fn(C64) -> C64 + Send + Sync + 'static>(label: &str, psi: F) -> SelfMap {
    SelfMap::from_displacement(
        label,
        move |z| {
            let p = psi(z);
            let w = z - 1.0;
            w * w * (1.0 - p) / (1.0 + p)
        },
        true,
    )
}

/// The f whose chain ends in ψ; checks |ψ| ≤ 1 and |f| ≤ 1 on the grid.
pub fn inverse_chain<F: Fn(C64) -> C64 + Send + Sync + Clone + 'static>(label: &str, psi: F, grid: &DiscGrid) -> Result<SelfMap> {
    let pts = grid.points();
    let max_psi = pts.par_iter().map(|&z| psi(z).norm()).reduce(|| 0.0, f64::max);
    if max_psi > 1.0 + SELF_MAP_SLACK {
        return Err(Error::InvalidInput(format!("|ψ| reaches {max_psi} > 1")));
    }
    let f = inverse_chain_unchecked(label, psi);
    f.check_self_map(grid)?;
    Ok(f)
}

/// χ = Σ w_k M_k with M_k the disc automorphism with zero a_k normalized by M_k(1) = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusMix {
    pub zeros: Vec<C64>,
    pub weights: Vec<f64>,
}

impl MobiusMix {
    pub fn new(zeros: Vec<C64>, weights: Vec<f64>) -> Result<Self> {
        if zeros.is_empty() || zeros.len() != weights.len() {
            return Err(Error::InvalidInput("zeros and weights must be nonempty and of equal length".into()));
        }
        if zeros.iter().any(|a| !(a.norm() < 1.0)) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidInput("zeros must lie in Δ and weights be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("weights must not all vanish".into()));
        }
        Ok(MobiusMix { zeros, weights: weights.iter().map(|w| w / total).collect() })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, terms: usize) -> Self {
        let zeros = (0..terms).map(|_| C64::from_polar(0.9 * rng.gen::<f64>().sqrt(), 2.0 * PI * rng.gen::<f64>())).collect();
        let weights = (0..terms).map(|_| rng.gen_range(0.1..1.0)).collect();
        MobiusMix::new(zeros, weights).expect("valid random mixture")
    }

    pub fn eval(&self, z: C64) -> C64 {
        let one = c64(1.0, 0.0);
        self.zeros
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| {
                let c = (one - a.conj()) / (one - a);
                c * (z - a) / (one - a.conj() * z) * *w
            })
            .sum()
    }

    /// 1 − χ, summed termwise as (1−|a|²)(1−ζ)/((1−a)(1−āζ)) to avoid cancellation.
    pub fn one_minus(&self, z: C64) -> C64 {
        let one = c64(1.0, 0.0);
        self.zeros
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| (1.0 - a.norm_sqr()) * (one - z) / ((one - a) * (one - a.conj() * z)) * *w)
            .sum()
    }

    /// χ′(1) = Σ w_k (1−|a_k|²)/|1−a_k|².
    pub fn derivative_at_one(&self) -> f64 {
        self.zeros.iter().zip(&self.weights).map(|(a, w)| w * (1.0 - a.norm_sqr()) / (c64(1.0, 0.0) - a).norm_sqr()).sum()
    }
}

/// Largest s for which ψ = 1 − s(1−χ) always yields a self-map f.
pub const SAFE_CONTACT_SCALE: f64 = 1.0 / 3.0;

/// f from ψ = 1 − s(1−χ), χ a Möbius mixture, 0 < s ≤ 1/3; f‴(1) = −3sχ′(1).
pub fn contact_family(chi: &MobiusMix, s: f64) -> Result<SelfMap> {
    if !(s > 0.0 && s <= SAFE_CONTACT_SCALE) {
        return Err(Error::InvalidInput(format!("s must lie in (0, 1/3], got {s}")));
    }
    let chi = chi.clone();
    Ok(SelfMap::from_displacement(
        &format!("contact-family(s={s})"),
        move |z| {
            let om = chi.one_minus(z) * s;
            let w = z - 1.0;
            w * w * om / (2.0 - om)
        },
        true,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThirdDerivative {
    /// Radial/Stolz limit of d‴.
    pub radial: f64,
    pub radial_error: f64,
    /// −3 times the angular derivative of ψ at 1.
    pub angular: f64,
    pub angular_error: f64,
    pub value: f64,
}

fn limit_options() -> LimitOptions {
    // d = O((1−ζ)³), so finer radii only add rounding in the Cauchy integrals
    LimitOptions { k_min: 2, k_max: 11, rel_tol: 1e-6, cauchy_nodes: 64 }
}

/// f‴(1) by two independent limits, which must agree.
pub fn third_derivative_at_one(f: &SelfMap) -> Result<ThirdDerivative> {
    let opts = limit_options();
    let d = |z: C64| f.displacement(z);
    let radial = angular_limit(d, 2.0, 3, &opts)?;
    let bundle = ChainBundle { f: f.clone() };
    let q = angular_limit(|z| bundle.psi_quotient(z), 2.0, 0, &opts)?;
    let angular = -3.0 * q.value.re;
    let gap = (radial.value.re - angular).abs();
    let allowed = 10.0 * (radial.error + 3.0 * q.error) + 1e-7 * (1.0 + angular.abs());
    if gap > allowed {
        return Err(Error::Disagreement(format!("f‴(1): radial {} vs −3ψ′(1) {angular}", radial.value.re)));
    }
    Ok(ThirdDerivative {
        radial: radial.value.re,
        radial_error: radial.error,
        angular,
        angular_error: 3.0 * q.error,
        value: radial.value.re,
    })
}

/// d‴(ζ) by a Cauchy integral, for interior ζ.
pub fn third_derivative(f: &SelfMap, z: C64) -> C64 {
    let rad = 0.5 * (1.0 - z.norm());
    cauchy_derivative(&|w| f.displacement(w), z, rad, 3, limit_options().cauchy_nodes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BkReport {
    pub label: String,
    pub samples: usize,
    pub f3: ThirdDerivative,
    /// min Re φ.
    pub margin_i: f64,
    pub worst_i: C64,
    /// min of RHS − LHS of |f−ζ|² ≤ −⅓f‴(1)|1−ζ|⁶ Re φ/(1−|ζ|²).
    pub margin_ii: f64,
    pub worst_ii: C64,
    pub pass_i: bool,
    pub pass_ii: bool,
}

pub const BK_TOL_I: f64 = 1e-10;
pub const BK_TOL_II: f64 = 1e-8;

/// Margins of both inequalities of the quantitative Burns–Krantz lemma on a grid.
pub fn verify_bk_inequalities(f: &SelfMap, grid: &DiscGrid) -> Result<BkReport> {
    let f3 = third_derivative_at_one(f)?;
    let bundle = ChainBundle { f: f.clone() };
    let pts = grid.points();
    let rows: Vec<(C64, f64, f64)> = pts
        .par_iter()
        .map(|&z| {
            let d = f.displacement(z);
            let re_phi = bundle.phi(z).re;
            let w6 = (c64(1.0, 0.0) - z).norm_sqr().powi(3);
            let rhs = -f3.value / 3.0 * w6 * re_phi / (1.0 - z.norm_sqr());
            (z, re_phi, rhs - d.norm_sqr())
        })
        .collect();
    if rows.iter().any(|r| !r.1.is_finite() || !r.2.is_finite()) {
        return Err(Error::NonFinite("inequality margins"));
    }
    let wi = rows.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty grid");
    let wii = rows.iter().min_by(|a, b| a.2.total_cmp(&b.2)).expect("nonempty grid");
    Ok(BkReport {
        label: f.label.clone(),
        samples: rows.len(),
        f3,
        margin_i: wi.1,
        worst_i: wi.0,
        margin_ii: wii.2,
        worst_ii: wii.0,
        pass_i: wi.1 >= -BK_TOL_I,
        pass_ii: wii.2 >= -BK_TOL_II,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShoikhetReport {
    pub zeta: f64,
    pub f3: ThirdDerivative,
    pub lhs: f64,
    /// −(1/6)f‴(1) Re((f−ζ)(1−ζ̄)²)/(1−|ζ|²).
    pub rhs_incorrect: f64,
    /// −(1/3)f‴(1)|1−ζ|⁶ Re φ/(1−|ζ|²).
    pub rhs_lemma: f64,
    pub violated: bool,
    pub lemma_holds: bool,
}

/// Both sides of the incorrect inequality at ζ = −1/3 for the Shoikhet map.
pub fn shoikhet_counterexample() -> Result<ShoikhetReport> {
    let f = SelfMap::shoikhet();
    let f3 = third_derivative_at_one(&f)?;
    let z = c64(-1.0 / 3.0, 0.0);
    let d = f.displacement(z);
    let one = c64(1.0, 0.0);
    let lhs = d.norm_sqr();
    let w = one - z.conj();
    let rhs_incorrect = -f3.value / 6.0 * (d * w * w).re / (1.0 - z.norm_sqr());
    let phi = ChainBundle { f: f.clone() }.phi(z);
    let rhs_lemma = -f3.value / 3.0 * (one - z).norm_sqr().powi(3) * phi.re / (1.0 - z.norm_sqr());
    Ok(ShoikhetReport {
        zeta: z.re,
        f3,
        lhs,
        rhs_incorrect,
        rhs_lemma,
        violated: lhs > rhs_incorrect,
        lemma_holds: lhs <= rhs_lemma,
    })
}

/// JSON description of a test map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SelfMapSpec {
    Identity,
    Parabolic { t: f64 },
    Shoikhet,
    /// ψ = 1 − s(1−χ) with χ a normalized Möbius mixture.
    ContactFamily { s: f64, zeros: Vec<[f64; 2]>, weights: Vec<f64> },
    /// Taylor coefficients of f as [re, im] pairs.
    Hardy { coeffs: Vec<[f64; 2]>, third_order_contact: bool },
}

impl SelfMapSpec {
    pub fn build(&self) -> Result<SelfMap> {
        match self {
            SelfMapSpec::Identity => Ok(SelfMap::identity()),
            SelfMapSpec::Parabolic { t } => Ok(SelfMap::parabolic(*t)),
            SelfMapSpec::Shoikhet => Ok(SelfMap::shoikhet()),
            SelfMapSpec::ContactFamily { s, zeros, weights } => {
                let chi = MobiusMix::new(zeros.iter().map(|a| c64(a[0], a[1])).collect(), weights.clone())?;
                contact_family(&chi, *s)
            }
            SelfMapSpec::Hardy { coeffs, third_order_contact } => {
                let h = HardyMap::scalar(coeffs.iter().map(|a| c64(a[0], a[1])).collect())?;
                SelfMap::from_hardy(h, *third_order_contact)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> DiscGrid {
        DiscGrid { radii: 16, angles: 64, exclusion: 1e-3 }
    }

    #[test]
    fn parabolic_phi_closed_form() {
        let t = 0.7;
        let b = ChainBundle { f: SelfMap::parabolic(t) };
        for z in small().points() {
            let expect = c64(0.0, t) / (1.0 + c64(0.0, t) * (1.0 - z));
            assert!((b.phi(z) - expect).norm() < 1e-12);
            let re = t * t * (1.0 - z.re) / (1.0 + c64(0.0, t) * (1.0 - z)).norm_sqr();
            assert!((b.phi(z).re - re).abs() < 1e-12);
        }
        assert!(chain_transform(&SelfMap::parabolic(t), &small()).is_ok());
    }

    #[test]
    fn chain_identities() {
        let f = SelfMap::shoikhet();
        let b = chain_transform(&f, &small()).unwrap();
        let z = c64(-1.0 / 3.0, 0.0);
        assert!((b.phi(z) - c64(6.0 / 53.0, 0.0)).norm() < 1e-15);
        for z in small().points() {
            let p = b.phi(z);
            let lhs = 1.0 - b.psi(z).norm_sqr();
            let rhs = 4.0 * p.re / (1.0 + p).norm_sqr();
            assert!((lhs - rhs).abs() < 1e-12);
            let via_g = b.g(z) / ((1.0 - z) * b.g(z) + 2.0);
            assert!((via_g - p).norm() < 1e-12);
        }
        let id = chain_transform(&SelfMap::identity(), &small()).unwrap();
        assert_eq!(id.psi(c64(0.3, 0.1)), c64(1.0, 0.0));
    }

    #[test]
    fn third_derivatives() {
        assert!(third_derivative_at_one(&SelfMap::identity()).unwrap().value.abs() < 1e-12);
        let s = third_derivative_at_one(&SelfMap::shoikhet()).unwrap();
        assert!((s.value + 0.6).abs() < 1e-6, "{s:?}");
        let f = inverse_chain_unchecked("psi=z", |z| z);
        assert!((third_derivative_at_one(&f).unwrap().value + 3.0).abs() < 1e-6);
        let a = 0.4;
        let f = inverse_chain_unchecked("mobius", move |z| (z + a) / (1.0 + a * z));
        let v = third_derivative_at_one(&f).unwrap().value;
        assert!((v + 3.0 * (1.0 - a) / (1.0 + a)).abs() < 1e-6);
    }

    #[test]
    fn psi_identity_is_not_a_self_map() {
        assert!(inverse_chain("psi=z", |z| z, &small()).is_err());
        let f = inverse_chain("psi=1", |_| c64(1.0, 0.0), &small()).unwrap();
        assert_eq!(f.displacement(c64(0.2, 0.3)), c64(0.0, 0.0));
    }

    #[test]
    fn contact_family_round_trip_and_inequalities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let chi = MobiusMix::random(&mut rng, 3);
            let s = rng.gen_range(0.05..SAFE_CONTACT_SCALE);
            let f = contact_family(&chi, s).unwrap();
            f.check_self_map(&small()).unwrap();
            let b = chain_transform(&f, &small()).unwrap();
            for z in small().points() {
                let psi = 1.0 - chi.one_minus(z) * s;
                assert!((b.psi(z) - psi).norm() < 1e-10);
            }
            let r = verify_bk_inequalities(&f, &small()).unwrap();
            assert!((r.f3.value + 3.0 * s * chi.derivative_at_one()).abs() < 1e-6, "{r:?}");
            assert!(r.pass_i && r.pass_ii, "{r:?}");
        }
    }

    #[test]
    fn shoikhet_violates_incorrect_inequality() {
        let r = shoikhet_counterexample().unwrap();
        assert!((r.lhs - (32.0f64 / 159.0).powi(2)).abs() < 1e-15);
        assert!((r.rhs_incorrect - 64.0 / 1590.0).abs() < 1e-7);
        assert!((r.rhs_lemma - 0.143116).abs() < 1e-6);
        assert!(r.violated && r.lemma_holds);
    }
}
