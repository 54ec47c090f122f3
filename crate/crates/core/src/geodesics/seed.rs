//! Initial guesses built from exact ball geodesics pushed through an affine
//! model Ω ≈ A𝔹ⁿ + b, and the radial data maps used for continuation.

use nalgebra::DMatrix;

use crate::ball::{ball_invert, phase_align};
use crate::cvec::{c64, CVector, C64};
use crate::domain::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::hardy::HardyMap;
use crate::spectral::{nodes, real_modes, trig_derivative, Plans};

use super::system::System;

/// ζ ↦ (αζ+β)/(γζ+δ).
#[derive(Clone, Copy, Debug)]
pub(crate) struct Mob([C64; 4]);

impl Mob {
    pub fn identity() -> Self {
        let (o, z) = (c64(1.0, 0.0), c64(0.0, 0.0));
        Mob([o, z, z, o])
    }

    /// (ζ + a)/(1 + āζ).
    pub fn hyperbolic(a: C64) -> Self {
        Mob([c64(1.0, 0.0), a, a.conj(), c64(1.0, 0.0)])
    }

    pub fn parabolic(t: f64) -> Self {
        let it = c64(0.0, t);
        Mob([c64(1.0, 0.0) - it, it, -it, c64(1.0, 0.0) + it])
    }

    pub fn rotation(beta: f64) -> Self {
        Mob([C64::from_polar(1.0, beta), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)])
    }

    pub fn apply(&self, z: C64) -> C64 {
        let [a, b, c, d] = self.0;
        (a * z + b) / (c * z + d)
    }

    pub fn deriv(&self, z: C64) -> C64 {
        let [a, b, c, d] = self.0;
        let den = c * z + d;
        (a * d - b * c) / (den * den)
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mob([d, -b, -c, a])
    }

    /// self∘inner.
    pub fn then(&self, inner: &Mob) -> Self {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = inner.0;
        Mob([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

/// Ω_model = A𝔹ⁿ + b.
pub(crate) struct LinearModel {
    a: DMatrix<C64>,
    a_inv: DMatrix<C64>,
    b: CVector,
}

impl LinearModel {
    pub fn of(domain: &DomainSpec) -> Self {
        let n = domain.dim();
        match domain.kind() {
            DomainKind::LinearBall { a, a_inv, b } => LinearModel { a: a.clone(), a_inv: a_inv.clone(), b: b.clone() },
            DomainKind::Custom(_) => {
                let r = domain.radius();
                LinearModel {
                    a: DMatrix::identity(n, n) * c64(r, 0.0),
                    a_inv: DMatrix::identity(n, n) * c64(1.0 / r, 0.0),
                    b: domain.anchor().clone(),
                }
            }
            _ => LinearModel { a: DMatrix::identity(n, n), a_inv: DMatrix::identity(n, n), b: CVector::zeros(n) },
        }
    }

    fn mul(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
        let n = v.len();
        (0..n).map(|i| (0..n).map(|k| m[(i, k)] * v[k]).sum()).collect()
    }

    pub fn to_ball(&self, z: &CVector) -> CVector {
        CVector::from_vec_unchecked(Self::mul(&self.a_inv, (z - &self.b).as_slice()))
    }

    pub fn dir_to_ball(&self, v: &CVector) -> CVector {
        CVector::from_vec_unchecked(Self::mul(&self.a_inv, v.as_slice()))
    }

    pub fn to_domain(&self, w: &[C64]) -> Vec<C64> {
        let mut out = Self::mul(&self.a, w);
        for (o, b) in out.iter_mut().zip(self.b.as_slice()) {
            *o += b;
        }
        out
    }

    pub fn dir_to_domain(&self, w: &[C64]) -> Vec<C64> {
        Self::mul(&self.a, w)
    }

    /// |B^H w| for B = A⁻¹, the factor relating μ of a ball disc to μ of its image.
    pub fn weight(&self, w: &[C64]) -> f64 {
        let n = w.len();
        (0..n)
            .map(|k| (0..n).map(|i| self.a_inv[(i, k)].conj() * w[i]).sum::<C64>().norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// φ = A ψ∘M + b for the affine ball disc ψ(ζ) = c0 + ζ c1 with constant μ₀,
/// tracking parameter marks and a derivative factor through compositions.
pub(crate) struct Draft<'a> {
    model: &'a LinearModel,
    c0: CVector,
    c1: CVector,
    mu0: f64,
    mob: Mob,
    pub marks: Vec<C64>,
    pub speed: C64,
}

impl<'a> Draft<'a> {
    fn new(model: &'a LinearModel, c0: CVector, c1: CVector, mu0: f64) -> Self {
        Draft { model, c0, c1, mu0, mob: Mob::identity(), marks: Vec::new(), speed: c64(1.0, 0.0) }
    }

    fn ball_point(&self, zeta: C64) -> Vec<C64> {
        let w = self.mob.apply(zeta);
        self.c0.as_slice().iter().zip(self.c1.as_slice()).map(|(a, b)| a + b * w).collect()
    }

    pub fn phi(&self, zeta: C64) -> Vec<C64> {
        self.model.to_domain(&self.ball_point(zeta))
    }

    pub fn mu(&self, zeta: C64) -> f64 {
        self.mu0 * self.model.weight(&self.ball_point(zeta)) / self.mob.deriv(zeta).norm()
    }

    /// Replaces φ by φ∘m, moving marks and the derivative factor along.
    fn compose(&mut self, m: Mob) {
        let inv = m.inverse();
        for z in self.marks.iter_mut() {
            *z = inv.apply(*z);
        }
        if let Some(&z1) = self.marks.first() {
            self.speed *= m.deriv(z1);
        }
        self.mob = self.mob.then(&m);
    }

    fn log_mu_modes(&self, m: usize) -> Vec<C64> {
        let logs: Vec<f64> = nodes(m).iter().map(|&z| self.mu(z).ln()).collect();
        real_modes(&Plans::new(m), &logs)
    }

    /// Composes with σ_{t₀}, t₀ = −(log μ)′(0)/2, which fixes 1 and φ′(1).
    fn make_preferred(&mut self, m: usize) {
        let t0 = -0.5 * trig_derivative(&self.log_mu_modes(m), 0.0);
        self.compose(Mob::parabolic(t0));
    }

    /// Composes with the hyperbolic map that kills mode 1 of log μ.
    fn balance(&mut self, m: usize) -> Result<()> {
        let lam1 = |d: &Draft, a: C64| -> C64 {
            let logs: Vec<f64> = nodes(m).iter().map(|&z| (d.mu(Mob::hyperbolic(a).apply(z)) / Mob::hyperbolic(a).deriv(z).norm()).ln()).collect();
            real_modes(&Plans::new(m), &logs)[1]
        };
        let mut a = c64(0.0, 0.0);
        let mut f = lam1(self, a);
        for _ in 0..40 {
            if f.norm() < 1e-14 {
                break;
            }
            let h = 1e-6;
            let fx = (lam1(self, a + h) - f) / h;
            let fy = (lam1(self, a + c64(0.0, h)) - f) / h;
            let det = fx.re * fy.im - fy.re * fx.im;
            if det.abs() < 1e-300 {
                return Err(Error::NewtonFailure("singular balancing Jacobian".into()));
            }
            let dx = (fy.im * f.re - fy.re * f.im) / det;
            let dy = (-fx.im * f.re + fx.re * f.im) / det;
            let mut step = c64(-dx, -dy);
            while (a + step).norm() >= 0.99 {
                step *= 0.5;
            }
            a += step;
            f = lam1(self, a);
        }
        if !(f.norm() < 1e-10) {
            return Err(Error::NewtonFailure(format!("balancing left |λ₁| = {:e}", f.norm())));
        }
        self.compose(Mob::hyperbolic(a));
        Ok(())
    }

    /// Largest coefficient of φ beyond `deg` and of log μ beyond `mu_deg`, from `m` samples.
    pub fn tails(&self, m: usize, deg: usize, mu_deg: usize) -> Result<(f64, f64)> {
        let z = nodes(m);
        let n = self.c0.len();
        let mut samples = vec![vec![c64(0.0, 0.0); m]; n];
        for (k, &zk) in z.iter().enumerate() {
            for (j, v) in self.phi(zk).into_iter().enumerate() {
                samples[j][k] = v;
            }
        }
        let full = HardyMap::from_samples(&samples, m / 2 - 1)?.map;
        let phi_tail = full.coeffs().iter().flat_map(|row| row.iter().skip(deg + 1)).fold(0.0f64, |a, c| a.max(c.norm()));
        let modes = self.log_mu_modes(m);
        let mu_tail = modes.iter().take(m / 2).skip(mu_deg + 1).fold(0.0f64, |a, c| a.max(c.norm()));
        Ok((phi_tail, mu_tail))
    }

    /// Solver unknowns for this draft; `extras` come after λ.
    pub fn to_x(&self, sys: &System, extras: &[f64]) -> Result<Vec<f64>> {
        let m = sys.m;
        let z = nodes(m);
        let n = sys.n;
        let mut samples = vec![vec![c64(0.0, 0.0); m]; n];
        for (k, &zk) in z.iter().enumerate() {
            let v = self.phi(zk);
            for j in 0..n {
                samples[j][k] = v[j];
            }
        }
        let proj = HardyMap::from_samples(&samples, sys.deg)?;
        let modes = self.log_mu_modes(m);
        let mut x = Vec::with_capacity(sys.extra_base() + extras.len());
        for row in proj.map.coeffs() {
            for c in row {
                x.push(c.re);
                x.push(c.im);
            }
        }
        for mm in 1..=sys.k {
            x.push(modes[mm].re);
            x.push(modes[mm].im);
        }
        x.extend_from_slice(extras);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial guess"));
        }
        Ok(x)
    }
}

/// The hyperbolic map m_s, s = (1−c)/(1+c), with m_s(1) = 1 and m_s′(1) = c > 0.
pub(crate) fn stretch(c: f64) -> Mob {
    Mob::hyperbolic(c64((1.0 - c) / (1.0 + c), 0.0))
}

/// The factor m′(1) of the stretch in [`boundary_draft`]; 1 when the image of the
/// affine ball disc already has φ′(1) = u.
pub(crate) fn boundary_stretch(model: &LinearModel, p: &CVector, u: &CVector) -> Result<f64> {
    let pb = model.to_ball(p).normalized()?;
    let ub = model.dir_to_ball(u);
    let a = phase_align(&ub, &pb)?.inner(&pb).re;
    if !(a > 0.0) {
        return Err(Error::InadmissibleDirection { re: a, im: 0.0 });
    }
    Ok(ub.norm() / a)
}

/// φ(1) = p, φ′(1) = u, preferred; p on the model boundary, ⟨u,ν_p⟩ > 0.
pub(crate) fn boundary_draft<'a>(model: &'a LinearModel, p: &CVector, u: &CVector, m: usize) -> Result<Draft<'a>> {
    let pb = model.to_ball(p);
    let pb = pb.normalized()?;
    let ub = model.dir_to_ball(u);
    let vb = phase_align(&ub, &pb)?;
    let a = vb.inner(&pb).re;
    if !(a > 0.0) {
        return Err(Error::InadmissibleDirection { re: a, im: 0.0 });
    }
    let av = vb.scale(c64(a, 0.0));
    let mut d = Draft::new(model, &pb - &av, av, 1.0 / (a * a));
    d.compose(stretch(ub.norm() / a));
    d.make_preferred(m);
    Ok(d)
}

/// φ(1) = p, φ(ζ*) = z, ⟨φ′(1),ν_p⟩ = |φ′(1)|², preferred. Marks: [ζ*].
pub(crate) fn rep_draft<'a>(model: &'a LinearModel, p: &CVector, z: &CVector, m: usize) -> Result<Draft<'a>> {
    let pb = model.to_ball(p).normalized()?;
    let zb = model.to_ball(z);
    let (dir, zeta) = ball_invert(&pb, &zb)?;
    let a = dir.pairing();
    let av = dir.v.scale(c64(a, 0.0));
    let mut d = Draft::new(model, &pb - &av, av.clone(), 1.0 / (a * a));
    d.marks = vec![zeta];
    let w = CVector::from_vec_unchecked(model.dir_to_domain(av.as_slice()));
    // ν_p ∝ B^H p_b
    let n = p.len();
    let bh: Vec<C64> = (0..n)
        .map(|k| (0..n).map(|i| model.a_inv[(i, k)].conj() * pb[i]).sum())
        .collect();
    let nu = CVector::from_vec_unchecked(bh).normalized()?;
    let c = w.inner(&nu).re / w.norm_sqr();
    if !(c > 0.0) {
        return Err(Error::InadmissibleDirection { re: c, im: 0.0 });
    }
    d.compose(stretch(c));
    d.make_preferred(m);
    Ok(d)
}

fn affine_ball_disc(z: &CVector, u: &CVector) -> Result<(CVector, CVector, f64, C64)> {
    let zu = z.inner(u);
    let c = z - &u.scale(zu);
    let rho2 = 1.0 - c.norm_sqr();
    if !(rho2 > 0.0) {
        return Err(Error::NotInterior(-rho2));
    }
    let rho = rho2.sqrt();
    Ok((c, u.scale(c64(rho, 0.0)), rho, zu / rho))
}

/// φ(ζ₁) = z, φ(ζ₂) = w, λ₁ = 0, ζ₂ − ζ₁ > 0. Marks: [ζ₁, ζ₂].
pub(crate) fn points_draft<'a>(model: &'a LinearModel, z: &CVector, w: &CVector, m: usize) -> Result<Draft<'a>> {
    let zb = model.to_ball(z);
    let wb = model.to_ball(w);
    let u = (&wb - &zb).normalized()?;
    let (c0, c1, rho, z1) = affine_ball_disc(&zb, &u)?;
    let z2 = wb.inner(&u) / rho;
    let mut d = Draft::new(model, c0, c1, 1.0 / (rho * rho));
    d.marks = vec![z1, z2];
    d.balance(m)?;
    let beta = (d.marks[1] - d.marks[0]).arg();
    d.compose(Mob::rotation(beta));
    Ok(d)
}

/// φ(ζ₁) = z, φ′(ζ₁) = s v with s > 0, λ₁ = 0. Marks: [ζ₁]; `speed` holds s.
pub(crate) fn direction_draft<'a>(model: &'a LinearModel, z: &CVector, v: &CVector, m: usize) -> Result<Draft<'a>> {
    let zb = model.to_ball(z);
    let vb = model.dir_to_ball(v);
    let u = vb.normalized()?;
    let (c0, c1, rho, z1) = affine_ball_disc(&zb, &u)?;
    let mut d = Draft::new(model, c0, c1, 1.0 / (rho * rho));
    d.marks = vec![z1];
    d.speed = c64(rho / vb.norm(), 0.0);
    d.balance(m)?;
    let beta = -d.speed.arg();
    d.compose(Mob::rotation(beta));
    Ok(d)
}

/// Gauge h with Ω = {h < 1}, 1-homogeneous about the anchor.
fn gauge(domain: &DomainSpec, z: &CVector) -> Result<f64> {
    match domain.kind() {
        DomainKind::Ball => Ok(z.norm()),
        DomainKind::PerturbedBall { eps } => {
            let s = z.norm_sqr() + eps * (z[0] * z[0]).re;
            if !(s >= 0.0) {
                return Err(Error::InvalidInput("perturbed gauge is not defined here".into()));
            }
            Ok(s.sqrt())
        }
        _ => {
            let d = z - domain.anchor();
            let dn = d.norm();
            if dn == 0.0 {
                return Ok(0.0);
            }
            let q = domain.radial_projection(z)?;
            Ok(dn / (&q - domain.anchor()).norm())
        }
    }
}

/// Moves z along the ray from the anchor so that its gauge for `to` equals its gauge for `from`.
pub(crate) fn radial_map(from: &DomainSpec, to: &DomainSpec, z: &CVector) -> Result<CVector> {
    let a = to.anchor();
    let d = z - a;
    if d.norm() == 0.0 {
        return Ok(z.clone());
    }
    let hf = gauge(from, z)?;
    let ht = gauge(to, z)?;
    if !(ht > 0.0) {
        return Err(Error::InvalidInput("degenerate radial gauge".into()));
    }
    Ok(a + &d.scale(c64(hf / ht, 0.0)))
}

/// The anchored ball Ω_model used to seed a custom domain, as a domain.
pub(crate) fn model_domain(domain: &DomainSpec) -> Result<DomainSpec> {
    match domain.kind() {
        DomainKind::Custom(_) => {
            let n = domain.dim();
            DomainSpec::linear_ball(DMatrix::identity(n, n) * c64(domain.radius(), 0.0), domain.anchor().clone())
        }
        DomainKind::PerturbedBall { .. } => DomainSpec::ball(domain.dim()),
        _ => Ok(domain.clone()),
    }
}
