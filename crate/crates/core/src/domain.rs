//! Bounded domains Ω = {r < 0} ⊂ ℂⁿ given by defining functions with derivative oracles.
//!
//! The complex gradient is g_j = ∂r/∂x_j + i ∂r/∂y_j = 2 ∂r/∂z̄_j, so that the
//! outward unit normal is ν = g/|g| and Re⟨v,ν⟩ is the directional derivative of
//! r along v divided by |∇r|.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cvec::{self, c64, CVector, C64};
use crate::error::{Error, Result};

/// Tolerance on |r(p)| for a point to count as a boundary point.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// A user-supplied defining function.
pub trait DefiningFunction: Send + Sync {
    fn value(&self, z: &[C64]) -> f64;
    /// Complex gradient g_j = ∂r/∂x_j + i ∂r/∂y_j.
    fn gradient(&self, z: &[C64], g: &mut [C64]);
    /// H_{jk̄} = ∂²r/∂z_j∂z̄_k.
    fn hessian_mixed(&self, z: &[C64]) -> DMatrix<C64>;
    /// H_{jk} = ∂²r/∂z_j∂z_k.
    fn hessian_holo(&self, z: &[C64]) -> DMatrix<C64>;
}

#[derive(Clone)]
pub enum DomainKind {
    Ball,
    /// Ω = A𝔹ⁿ + b, r(z) = |A⁻¹(z−b)|² − 1.
    LinearBall { a: DMatrix<C64>, a_inv: DMatrix<C64>, b: CVector },
    /// r(z) = |z|² − 1 + ε Re(z₁²).
    PerturbedBall { eps: f64 },
    Custom(Arc<dyn DefiningFunction>),
}

impl fmt::Debug for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Ball => write!(f, "Ball"),
            DomainKind::LinearBall { a, b, .. } => write!(f, "LinearBall {{ a: {a:?}, b: {b:?} }}"),
            DomainKind::PerturbedBall { eps } => write!(f, "PerturbedBall {{ eps: {eps} }}"),
            DomainKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A domain with an interior anchor point and a radius R with Ω̄ ⊂ B(anchor, R).
#[derive(Clone, Debug)]
pub struct DomainSpec {
    n: usize,
    kind: DomainKind,
    anchor: CVector,
    radius: f64,
}

/// Result of the sampled strong linear convexity test at a boundary point.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    /// Minimum over sampled unit tangent v of Levi(v) − |Σ H_{jk} v_j v_k|.
    pub margin: f64,
    pub min_levi: f64,
    pub directions: usize,
}

impl DomainSpec {
    pub fn ball(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(DomainSpec { n, kind: DomainKind::Ball, anchor: CVector::zeros(n), radius: 1.0 })
    }

    pub fn linear_ball(a: DMatrix<C64>, b: CVector) -> Result<Self> {
        let n = b.len();
        check_dim(n)?;
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix A"));
        }
        let svd = a.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 1e-12 * smax) {
            return Err(Error::InvalidInput("matrix A is singular".into()));
        }
        let a_inv = a.clone().try_inverse().ok_or_else(|| Error::InvalidInput("matrix A is singular".into()))?;
        Ok(DomainSpec { n, anchor: b.clone(), radius: smax, kind: DomainKind::LinearBall { a, a_inv, b } })
    }

    /// Perturbed ball |z|² − 1 + ε Re(z₁²). Bounded only for |ε| < 1; larger values
    /// are accepted for convexity diagnostics but have no finite radius.
    pub fn perturbed_ball(n: usize, eps: f64) -> Result<Self> {
        check_dim(n)?;
        if !eps.is_finite() {
            return Err(Error::NonFinite("eps"));
        }
        let radius = if eps.abs() < 1.0 { 1.0 / (1.0 - eps.abs()).sqrt() } else { f64::INFINITY };
        Ok(DomainSpec { n, kind: DomainKind::PerturbedBall { eps }, anchor: CVector::zeros(n), radius })
    }

    /// A custom domain; `anchor` must be interior and Ω̄ must lie within `radius` of it.
    pub fn custom(n: usize, f: Arc<dyn DefiningFunction>, anchor: CVector, radius: f64) -> Result<Self> {
        check_dim(n)?;
        if anchor.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: anchor.len() });
        }
        if f.value(anchor.as_slice()) >= 0.0 {
            return Err(Error::NotInterior(f.value(anchor.as_slice())));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidInput("radius must be positive".into()));
        }
        Ok(DomainSpec { n, kind: DomainKind::Custom(f), anchor, radius })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn anchor(&self) -> &CVector {
        &self.anchor
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.kind, DomainKind::Ball)
    }

    /// Same family with a different ε (perturbed balls only).
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        match self.kind {
            DomainKind::PerturbedBall { .. } => DomainSpec::perturbed_ball(self.n, eps),
            _ => Err(Error::InvalidInput("not a perturbed ball".into())),
        }
    }

    pub fn check_point(&self, z: &CVector) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: z.len() });
        }
        Ok(())
    }

    pub fn value(&self, z: &[C64]) -> f64 {
        match &self.kind {
            DomainKind::Ball => cvec::norm_sqr(z) - 1.0,
            DomainKind::LinearBall { a_inv, b, .. } => {
                let u = apply_shifted(a_inv, z, b.as_slice());
                cvec::norm_sqr(&u) - 1.0
            }
            DomainKind::PerturbedBall { eps } => cvec::norm_sqr(z) - 1.0 + eps * (z[0] * z[0]).re,
            DomainKind::Custom(f) => f.value(z),
        }
    }

    /// Writes the complex gradient into `g` and returns r(z).
    pub fn value_and_gradient(&self, z: &[C64], g: &mut [C64]) -> f64 {
        match &self.kind {
            DomainKind::Ball => {
                for (gj, zj) in g.iter_mut().zip(z) {
                    *gj = zj * 2.0;
                }
                cvec::norm_sqr(z) - 1.0
            }
            DomainKind::LinearBall { a_inv, b, .. } => {
                let u = apply_shifted(a_inv, z, b.as_slice());
                let n = z.len();
                for k in 0..n {
                    let mut acc = c64(0.0, 0.0);
                    for i in 0..n {
                        acc += a_inv[(i, k)].conj() * u[i];
                    }
                    g[k] = acc * 2.0;
                }
                cvec::norm_sqr(&u) - 1.0
            }
            DomainKind::PerturbedBall { eps } => {
                for (gj, zj) in g.iter_mut().zip(z) {
                    *gj = zj * 2.0;
                }
                g[0] += z[0].conj() * (2.0 * eps);
                cvec::norm_sqr(z) - 1.0 + eps * (z[0] * z[0]).re
            }
            DomainKind::Custom(f) => {
                f.gradient(z, g);
                f.value(z)
            }
        }
    }

    pub fn gradient(&self, z: &[C64]) -> CVector {
        let mut g = vec![c64(0.0, 0.0); self.n];
        self.value_and_gradient(z, &mut g);
        CVector::from_vec_unchecked(g)
    }

    pub fn hessian_mixed(&self, z: &[C64]) -> DMatrix<C64> {
        match &self.kind {
            DomainKind::Ball | DomainKind::PerturbedBall { .. } => DMatrix::identity(self.n, self.n),
            DomainKind::LinearBall { a_inv, .. } => {
                let n = self.n;
                DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| a_inv[(i, j)] * a_inv[(i, k)].conj()).sum())
            }
            DomainKind::Custom(f) => f.hessian_mixed(z),
        }
    }

    pub fn hessian_holo(&self, z: &[C64]) -> DMatrix<C64> {
        match &self.kind {
            DomainKind::Ball | DomainKind::LinearBall { .. } => DMatrix::zeros(self.n, self.n),
            DomainKind::PerturbedBall { eps } => {
                let mut h = DMatrix::zeros(self.n, self.n);
                h[(0, 0)] = c64(*eps, 0.0);
                h
            }
            DomainKind::Custom(f) => f.hessian_holo(z),
        }
    }

    /// Real Hessian of r in the coordinates (x_1..x_n, y_1..y_n).
    pub fn real_hessian(&self, z: &[C64]) -> DMatrix<f64> {
        real_hessian_from_blocks(&self.hessian_mixed(z), &self.hessian_holo(z))
    }

    /// Unit normal at an arbitrary point (no boundary check); returns |g| as well.
    pub fn normal_at(&self, z: &[C64], out: &mut [C64]) -> f64 {
        self.value_and_gradient(z, out);
        let nrm = cvec::norm_sqr(out).sqrt();
        if nrm > 0.0 {
            out.iter_mut().for_each(|x| *x /= nrm);
        }
        nrm
    }

    /// Outward unit normal ν_p at a boundary point.
    pub fn unit_normal(&self, p: &CVector) -> Result<CVector> {
        self.check_point(p)?;
        let r = self.value(p.as_slice());
        if r.abs() >= BOUNDARY_TOL {
            return Err(Error::NotOnBoundary(r));
        }
        let mut nu = vec![c64(0.0, 0.0); self.n];
        let g = self.normal_at(p.as_slice(), &mut nu);
        if !(g > 1e-8) {
            return Err(Error::VanishingGradient(g));
        }
        Ok(CVector::from_vec_unchecked(nu))
    }

    pub fn contains(&self, z: &CVector) -> bool {
        z.len() == self.n && self.value(z.as_slice()) < 0.0
    }

    pub fn require_interior(&self, z: &CVector) -> Result<()> {
        self.check_point(z)?;
        let r = self.value(z.as_slice());
        if !(r < 0.0) {
            return Err(Error::NotInterior(r));
        }
        Ok(())
    }

    /// The boundary point on the ray from the anchor through z.
    pub fn radial_projection(&self, z: &CVector) -> Result<CVector> {
        self.check_point(z)?;
        let d = z - &self.anchor;
        let dn = d.norm();
        if dn == 0.0 {
            return Err(Error::InvalidInput("cannot project the anchor point".into()));
        }
        let dir = d.scale(c64(1.0 / dn, 0.0));
        self.ray_exit(&self.anchor, &dir)
    }

    /// First boundary point on the ray z + s·dir (s > 0) from an interior z.
    pub fn ray_exit(&self, z: &CVector, dir: &CVector) -> Result<CVector> {
        let at = |s: f64| -> CVector { z + &dir.scale(c64(s, 0.0)) };
        if !(self.value(z.as_slice()) < 0.0) {
            return Err(Error::NotInterior(self.value(z.as_slice())));
        }
        let reach = (z - &self.anchor).norm() + self.radius;
        let mut hi = if reach.is_finite() { 1.01 * reach / dir.norm() } else { 1.0 };
        let mut grow = 0;
        while self.value(at(hi).as_slice()) <= 0.0 {
            hi *= 2.0;
            grow += 1;
            if grow > 60 {
                return Err(Error::NewtonFailure("ray does not leave the domain".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.value(at(mid).as_slice()) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * hi.max(1.0) {
                break;
            }
        }
        // Newton polish on s ↦ r(z + s dir)
        let mut s = 0.5 * (lo + hi);
        let mut g = vec![c64(0.0, 0.0); self.n];
        for _ in 0..4 {
            let w = at(s);
            let r = self.value_and_gradient(w.as_slice(), &mut g);
            let slope = cvec::inner(dir.as_slice(), &g).re;
            if slope.abs() < 1e-14 {
                break;
            }
            let step = r / slope;
            s -= step;
            if step.abs() < 1e-17 {
                break;
            }
        }
        Ok(at(s))
    }

    /// Sampled test of Σ H_{jk̄} v_j v̄_k > |Σ H_{jk} v_j v_k| on the complex tangent space at p.
    pub fn strong_linear_convexity_check(&self, p: &CVector, num_directions: usize) -> Result<ConvexityReport> {
        let nu = self.unit_normal(p)?;
        let hm = self.hessian_mixed(p.as_slice());
        let hh = self.hessian_holo(p.as_slice());
        let basis = tangent_basis(&nu);
        let mut dirs: Vec<Vec<C64>> = basis.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
        for _ in 0..num_directions {
            let mut v = vec![c64(0.0, 0.0); self.n];
            for b in &basis {
                let c = c64(rng.sample(StandardNormal), rng.sample(StandardNormal));
                for (vj, bj) in v.iter_mut().zip(b) {
                    *vj += c * bj;
                }
            }
            let nrm = cvec::norm_sqr(&v).sqrt();
            if nrm > 0.0 {
                v.iter_mut().for_each(|x| *x /= nrm);
                dirs.push(v);
            }
        }
        let mut margin = f64::INFINITY;
        let mut min_levi = f64::INFINITY;
        for v in &dirs {
            let (levi, sym) = forms(&hm, &hh, v);
            min_levi = min_levi.min(levi);
            margin = margin.min(levi - sym.norm());
        }
        Ok(ConvexityReport { margin, min_levi, directions: dirs.len() })
    }

    /// Euclidean distance from an interior point to ∂Ω.
    pub fn distance_to_boundary(&self, z: &CVector) -> Result<f64> {
        Ok(self.closest_boundary_point(z)?.dist(z))
    }

    /// Nearest boundary point, by Newton on the Lagrange system from several ray starts.
    pub fn closest_boundary_point(&self, z: &CVector) -> Result<CVector> {
        self.require_interior(z)?;
        let n = self.n;
        let mut starts: Vec<CVector> = Vec::new();
        let g = self.gradient(z.as_slice());
        if g.norm() > 0.0 {
            starts.push(g.normalized()?);
        }
        for j in 0..n {
            for c in [c64(1.0, 0.0), c64(-1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0)] {
                starts.push(CVector::basis(n, j).scale(c));
            }
        }
        let mut best: Option<(f64, CVector)> = None;
        for dir in starts {
            let w0 = match self.ray_exit(z, &dir) {
                Ok(w) => w,
                Err(_) => continue,
            };
            if let Some(w) = self.lagrange_newton(z, w0) {
                let d = w.dist(z);
                if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                    best = Some((d, w));
                }
            }
        }
        let (d, w) = best.ok_or_else(|| Error::NewtonFailure("closest-point iteration did not converge".into()))?;
        // mean-value sanity bound: |r(z)| ≤ sup_segment |∇r| · d
        let rz = self.value(z.as_slice()).abs();
        let sup_grad = (0..=16)
            .map(|i| {
                let t = i as f64 / 16.0;
                let p = z + &(&w - z).scale(c64(t, 0.0));
                self.gradient(p.as_slice()).norm()
            })
            .fold(0.0, f64::max);
        if rz > sup_grad * d * (1.0 + 1e-6) + 1e-14 {
            return Err(Error::NewtonFailure("distance violates the gradient lower bound".into()));
        }
        Ok(w)
    }

    fn lagrange_newton(&self, z: &CVector, w0: CVector) -> Option<CVector> {
        let n = self.n;
        let to_real = |v: &[C64]| -> DVector<f64> {
            DVector::from_iterator(2 * n, v.iter().map(|c| c.re).chain(v.iter().map(|c| c.im)))
        };
        let x = to_real(z.as_slice());
        let mut w = to_real(w0.as_slice());
        let grad_real = |wv: &DVector<f64>| -> (f64, DVector<f64>) {
            let wc: Vec<C64> = (0..n).map(|j| c64(wv[j], wv[n + j])).collect();
            let mut g = vec![c64(0.0, 0.0); n];
            let r = self.value_and_gradient(&wc, &mut g);
            (r, to_real(&g))
        };
        let (_, g0) = grad_real(&w);
        let mut lam = -(&w - &x).norm() / g0.norm().max(1e-300);
        for _ in 0..50 {
            let (r, g) = grad_real(&w);
            let wc: Vec<C64> = (0..n).map(|j| c64(w[j], w[n + j])).collect();
            let h = self.real_hessian(&wc);
            let res_w = &w - &x + &g * lam;
            if r.abs() < 1e-15 && res_w.norm() < 1e-15 * (1.0 + w.norm()) {
                break;
            }
            let m = 2 * n;
            let mut k = DMatrix::<f64>::zeros(m + 1, m + 1);
            for i in 0..m {
                for j in 0..m {
                    k[(i, j)] = lam * h[(i, j)] + if i == j { 1.0 } else { 0.0 };
                }
                k[(i, m)] = g[i];
                k[(m, i)] = g[i];
            }
            let mut rhs = DVector::<f64>::zeros(m + 1);
            for i in 0..m {
                rhs[i] = -res_w[i];
            }
            rhs[m] = -r;
            let step = k.lu().solve(&rhs)?;
            for i in 0..m {
                w[i] += step[i];
            }
            lam += step[m];
            let sn = step.norm();
            if sn < 1e-15 * (1.0 + w.norm()) {
                break;
            }
        }
        let (r, g) = grad_real(&w);
        let res = (&w - &x + &g * lam).norm();
        if r.abs() < 1e-12 && res < 1e-10 && w.iter().all(|v| v.is_finite()) {
            Some(CVector::from_vec_unchecked((0..n).map(|j| c64(w[j], w[n + j])).collect()))
        } else {
            None
        }
    }

    /// |z − p| < β·dist(z, ∂Ω).
    pub fn in_nontangential_region(&self, p: &CVector, beta: f64, z: &CVector) -> Result<bool> {
        NontangentialRegion::new(p.clone(), beta)?.contains(self, z)
    }

    /// Uniform sample of Ω contracted toward the anchor by `shrink` ∈ (0,1].
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R, shrink: f64) -> CVector {
        let n = self.n;
        assert!(self.radius.is_finite(), "sampling needs a bounded domain");
        loop {
            let v: Vec<C64> = (0..n).map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
            let nrm = cvec::norm_sqr(&v).sqrt();
            let rad = self.radius * rng.gen::<f64>().powf(1.0 / (2 * n) as f64);
            let z: Vec<C64> = v.iter().zip(self.anchor.as_slice()).map(|(vj, a)| a + vj * (rad / nrm)).collect();
            if self.value(&z) < 0.0 {
                let zc = CVector::from_vec_unchecked(z);
                let d = &zc - &self.anchor;
                return &self.anchor + &d.scale(c64(shrink, 0.0));
            }
        }
    }

    /// A boundary point in a uniformly random direction from the anchor.
    pub fn sample_boundary<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        loop {
            let v: Vec<C64> = (0..self.n).map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
            let d = CVector::from_vec_unchecked(v);
            if d.norm() < 1e-8 {
                continue;
            }
            let z = &self.anchor + &d.normalized().expect("nonzero");
            let dir = &z - &self.anchor;
            if let Ok(p) = self.ray_exit(&self.anchor, &dir) {
                return p;
            }
        }
    }

    /// Serializable descriptor for the builtin kinds.
    pub fn descriptor(&self) -> Option<DomainDescriptor> {
        let params = match &self.kind {
            DomainKind::Ball => DomainParams::default(),
            DomainKind::LinearBall { a, b, .. } => DomainParams {
                a: Some((0..self.n).map(|i| (0..self.n).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect()).collect()),
                b: Some(b.clone()),
                eps: None,
            },
            DomainKind::PerturbedBall { eps } => DomainParams { eps: Some(*eps), ..Default::default() },
            DomainKind::Custom(_) => return None,
        };
        let kind = match self.kind {
            DomainKind::Ball => DescriptorKind::Ball,
            DomainKind::LinearBall { .. } => DescriptorKind::LinearBall,
            DomainKind::PerturbedBall { .. } => DescriptorKind::PerturbedBall,
            DomainKind::Custom(_) => unreachable!(),
        };
        Some(DomainDescriptor { kind, n: self.n, params })
    }

    pub fn from_descriptor(d: &DomainDescriptor) -> Result<Self> {
        match d.kind {
            DescriptorKind::Ball => DomainSpec::ball(d.n),
            DescriptorKind::PerturbedBall => DomainSpec::perturbed_ball(d.n, d.params.eps.unwrap_or(0.1)),
            DescriptorKind::LinearBall => {
                let rows = d.params.a.as_ref().ok_or_else(|| Error::InvalidInput("linear-ball needs params.A".into()))?;
                if rows.len() != d.n || rows.iter().any(|r| r.len() != d.n) {
                    return Err(Error::InvalidInput(format!("params.A must be {0}×{0}", d.n)));
                }
                let a = DMatrix::from_fn(d.n, d.n, |i, j| c64(rows[i][j][0], rows[i][j][1]));
                let b = d.params.b.clone().unwrap_or_else(|| CVector::zeros(d.n));
                DomainSpec::linear_ball(a, b)
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: DomainDescriptor = serde_json::from_str(s)?;
        Self::from_descriptor(&d)
    }

    /// Linear-ball data (A, A⁻¹, b) when applicable.
    pub fn linear_parts(&self) -> Option<(&DMatrix<C64>, &DMatrix<C64>, &CVector)> {
        match &self.kind {
            DomainKind::LinearBall { a, a_inv, b } => Some((a, a_inv, b)),
            _ => None,
        }
    }
}

/// Γ_β(p) = {z : |z−p| < β dist(z, ∂Ω)}.
#[derive(Clone, Debug)]
pub struct NontangentialRegion {
    pub p: CVector,
    pub beta: f64,
}

impl NontangentialRegion {
    pub fn new(p: CVector, beta: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::InvalidInput(format!("aperture must exceed 1, got {beta}")));
        }
        Ok(NontangentialRegion { p, beta })
    }

    pub fn contains(&self, domain: &DomainSpec, z: &CVector) -> Result<bool> {
        let d = domain.distance_to_boundary(z)?;
        Ok(z.dist(&self.p) < self.beta * d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DescriptorKind {
    #[serde(rename = "ball")]
    Ball,
    #[serde(rename = "linear-ball", alias = "linear_ball")]
    LinearBall,
    #[serde(rename = "perturbed-ball", alias = "perturbed_ball")]
    PerturbedBall,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainParams {
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<CVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

/// JSON form `{kind, n, params {A, b, eps}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDescriptor {
    pub kind: DescriptorKind,
    pub n: usize,
    #[serde(default)]
    pub params: DomainParams,
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("dimension must be at least 2, got {n}")));
    }
    Ok(())
}

fn apply_shifted(m: &DMatrix<C64>, z: &[C64], b: &[C64]) -> Vec<C64> {
    let n = z.len();
    (0..n).map(|i| (0..n).map(|k| m[(i, k)] * (z[k] - b[k])).sum()).collect()
}

/// Levi form Σ H_{jk̄} v_j v̄_k and symmetric form Σ H_{jk} v_j v_k.
pub fn forms(hm: &DMatrix<C64>, hh: &DMatrix<C64>, v: &[C64]) -> (f64, C64) {
    let n = v.len();
    let mut levi = c64(0.0, 0.0);
    let mut sym = c64(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            levi += hm[(j, k)] * v[j] * v[k].conj();
            sym += hh[(j, k)] * v[j] * v[k];
        }
    }
    (levi.re, sym)
}

/// Orthonormal basis of {v : ⟨v,ν⟩ = 0}.
pub fn tangent_basis(nu: &CVector) -> Vec<Vec<C64>> {
    let n = nu.len();
    let mut basis: Vec<Vec<C64>> = vec![nu.as_slice().to_vec()];
    for j in 0..n {
        let mut v = CVector::basis(n, j).into_vec();
        for b in &basis {
            let c = cvec::inner(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let nrm = cvec::norm_sqr(&v).sqrt();
        if nrm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nrm);
            basis.push(v);
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Real Hessian in coordinates (x, y) from the complex blocks H_{jk̄}, H_{jk}.
pub fn real_hessian_from_blocks(hm: &DMatrix<C64>, hh: &DMatrix<C64>) -> DMatrix<f64> {
    let n = hm.nrows();
    let mut r = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let m = hm[(j, k)];
            let h = hh[(j, k)];
            r[(j, k)] = 2.0 * (h + m).re;
            r[(n + j, n + k)] = 2.0 * (m - h).re;
            let xy = 2.0 * (m - h).im;
            r[(j, n + k)] = xy;
            r[(n + k, j)] = xy;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag21() -> DomainSpec {
        let a = DMatrix::from_row_slice(2, 2, &[c64(2.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        DomainSpec::linear_ball(a, CVector::zeros(2)).unwrap()
    }

    #[test]
    fn ball_normals() {
        let d = DomainSpec::ball(3).unwrap();
        let p = CVector::basis(3, 0);
        assert_eq!(d.unit_normal(&p).unwrap(), p);
        let q = CVector::basis(3, 2).scale(c64(0.0, 1.0));
        assert!(d.unit_normal(&q).unwrap().dist(&q) < 1e-15);
        assert!(matches!(d.unit_normal(&CVector::zeros(3)), Err(Error::NotOnBoundary(_))));
    }

    #[test]
    fn linear_ball_normal() {
        let d = diag21();
        let p = CVector::from_real(&[2.0, 0.0]).unwrap();
        assert!(d.unit_normal(&p).unwrap().dist(&CVector::basis(2, 0)) < 1e-15);
    }

    #[test]
    fn convexity_margins() {
        let b = DomainSpec::ball(2).unwrap();
        let m = b.strong_linear_convexity_check(&CVector::basis(2, 0), 20).unwrap();
        assert!((m.margin - 1.0).abs() < 1e-12);
        let pb = DomainSpec::perturbed_ball(2, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = pb.sample_boundary(&mut rng);
            let m = pb.strong_linear_convexity_check(&p, 20).unwrap();
            assert!(m.margin >= 0.9 - 1e-12);
        }
        let bad = DomainSpec::perturbed_ball(2, 2.0).unwrap();
        let p = CVector::basis(2, 1);
        assert!(bad.strong_linear_convexity_check(&p, 10).unwrap().margin < 0.0);
    }

    #[test]
    fn distances() {
        let b = DomainSpec::ball(2).unwrap();
        assert!((b.distance_to_boundary(&CVector::zeros(2)).unwrap() - 1.0).abs() < 1e-12);
        let z = CVector::from_real(&[0.5, 0.0]).unwrap();
        assert!((b.distance_to_boundary(&z).unwrap() - 0.5).abs() < 1e-12);
        let d = diag21();
        assert!((d.distance_to_boundary(&CVector::zeros(2)).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nontangential_examples() {
        let b = DomainSpec::ball(2).unwrap();
        let p = CVector::basis(2, 0);
        assert!(b.in_nontangential_region(&p, 2.0, &CVector::from_real(&[0.9, 0.0]).unwrap()).unwrap());
        assert!(!b.in_nontangential_region(&p, 2.0, &CVector::from_real(&[0.0, 0.9]).unwrap()).unwrap());
    }

    #[test]
    fn real_hessian_matches_finite_differences() {
        let d = DomainSpec::perturbed_ball(2, 0.3).unwrap();
        let z = vec![c64(0.2, -0.1), c64(0.3, 0.25)];
        let h = d.real_hessian(&z);
        let n = 2;
        let shift = |i: usize, s: f64| {
            let mut w = z.clone();
            if i < n {
                w[i] += c64(s, 0.0);
            } else {
                w[i - n] += c64(0.0, s);
            }
            w
        };
        let e = 1e-4;
        for i in 0..4 {
            for j in 0..4 {
                let fd = (d.value(&shift_both(&shift(i, e), j, e, n))
                    - d.value(&shift_both(&shift(i, e), j, -e, n))
                    - d.value(&shift_both(&shift(i, -e), j, e, n))
                    + d.value(&shift_both(&shift(i, -e), j, -e, n)))
                    / (4.0 * e * e);
                assert!((fd - h[(i, j)]).abs() < 1e-6, "{i} {j} {fd} {}", h[(i, j)]);
            }
        }
    }

    fn shift_both(z: &[C64], i: usize, s: f64, n: usize) -> Vec<C64> {
        let mut w = z.to_vec();
        if i < n {
            w[i] += c64(s, 0.0);
        } else {
            w[i - n] += c64(0.0, s);
        }
        w
    }

    #[test]
    fn descriptor_round_trip() {
        let d = diag21();
        let s = serde_json::to_string(&d.descriptor().unwrap()).unwrap();
        let back = DomainSpec::from_json(&s).unwrap();
        assert_eq!(back.descriptor(), d.descriptor());
        assert!(DomainSpec::from_json(r#"{"kind":"torus","n":2}"#).is_err());
        let pb = DomainSpec::from_json(r#"{"kind":"perturbed-ball","n":2,"params":{"eps":0.1}}"#).unwrap();
        assert!(matches!(pb.kind(), DomainKind::PerturbedBall { eps } if *eps == 0.1));
    }

    #[test]
    fn radial_projection_lands_on_boundary() {
        let d = DomainSpec::perturbed_ball(2, 0.1).unwrap();
        let z = CVector::new(vec![c64(0.3, 0.4), c64(-0.2, 0.1)]).unwrap();
        let p = d.radial_projection(&z).unwrap();
        assert!(d.value(p.as_slice()).abs() < 1e-14);
    }
}
