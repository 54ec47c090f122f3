//! Closed-form geometry of the unit ball 𝔹ⁿ, with ν_p = p throughout.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cvec::{c64, CVector, C64};
#[cfg(test)]
use crate::cvec;
use crate::domain::{DomainSpec, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::geodesics::GeodesicPair;
use crate::hardy::HardyMap;

/// A unit direction v with ⟨v,p⟩ > 0 at a point p of the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDirection {
    pub p: CVector,
    pub v: CVector,
}

impl BoundaryDirection {
    /// Normalizes v; rejects ⟨v,p⟩ that is not real and positive.
    pub fn new(p: CVector, v: CVector) -> Result<Self> {
        if p.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), got: v.len() });
        }
        let r = p.norm_sqr() - 1.0;
        if r.abs() >= BOUNDARY_TOL {
            return Err(Error::NotOnBoundary(r));
        }
        let v = v.normalized()?;
        let a = v.inner(&p);
        if !(a.re > 0.0) || a.im.abs() > 1e-10 {
            return Err(Error::InadmissibleDirection { re: a.re, im: a.im });
        }
        Ok(BoundaryDirection { p, v })
    }

    /// ⟨v,ν_p⟩ = ⟨v,p⟩.
    pub fn pairing(&self) -> f64 {
        self.v.inner(&self.p).re
    }

    /// η_v(ζ) = p + (ζ−1)⟨v,p⟩v.
    pub fn eval(&self, zeta: C64) -> CVector {
        let a = self.pairing();
        &self.p + &self.v.scale((zeta - 1.0) * a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorosphereShape {
    /// Euclidean center p/(1+R), stored as the scale factor 1/(1+R).
    pub center_scale: f64,
    /// Radius R/(1+R) in the complex normal line.
    pub disc_radius: f64,
    /// Radius sqrt(R/(1+R)) in the orthogonal directions.
    pub orthogonal_radius: f64,
}

/// A horosphere E_Ω(p, z₀, R).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horosphere {
    pub p: CVector,
    pub z0: CVector,
    pub radius: f64,
}

impl Horosphere {
    pub fn new(p: CVector, z0: CVector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("horosphere radius must be positive, got {radius}")));
        }
        if p.len() != z0.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), got: z0.len() });
        }
        Ok(Horosphere { p, z0, radius })
    }
}

/// The preferred ball geodesic η_v and its dual η_v* = (ζp̄ + (1−ζ)a v̄)/a², a = ⟨v,p⟩.
pub fn ball_geodesic(dir: &BoundaryDirection, grid: usize) -> Result<GeodesicPair> {
    let n = dir.p.len();
    let a = dir.pairing();
    let av = dir.v.scale(c64(a, 0.0));
    let phi = HardyMap::affine(&(&dir.p - &av), &av, 1);
    let inv = 1.0 / (a * a);
    let c0 = dir.v.conj().scale(c64(a * inv, 0.0));
    let c1 = (&dir.p.conj() - &dir.v.conj().scale(c64(a, 0.0))).scale(c64(inv, 0.0));
    let dual = HardyMap::affine(&c0, &c1, 1);
    let domain = DomainSpec::ball(n)?;
    GeodesicPair::assemble(phi, dual, vec![inv; grid], &domain)
}

/// (v_w, ζ_w) with η_{v_w}(ζ_w) = w, for w in the closed ball, w ≠ p.
pub fn ball_invert(p: &CVector, w: &CVector) -> Result<(BoundaryDirection, C64)> {
    if p.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: w.len() });
    }
    if w.norm_sqr() > 1.0 + BOUNDARY_TOL {
        return Err(Error::Exterior(w.norm_sqr() - 1.0));
    }
    let d = w - p;
    let dn = d.norm();
    if dn < 1e-14 {
        return Err(Error::InvalidInput("w coincides with p".into()));
    }
    let one = c64(1.0, 0.0);
    let c = one - p.inner(w);
    let v = d.scale(-(c / c.norm()) / dn);
    let zeta = one - (dn * dn / c.norm_sqr()) * (one - w.inner(p));
    let dir = BoundaryDirection::new(p.clone(), v)?;
    Ok((dir, zeta))
}

fn require_ball_interior(z: &CVector) -> Result<()> {
    let r = z.norm_sqr() - 1.0;
    if !(r < 0.0) {
        return Err(Error::NotInterior(r));
    }
    Ok(())
}

/// 1 − tanh² k_𝔹(z,w) = (1−|z|²)(1−|w|²)/|1−⟨z,w⟩|².
pub fn ball_cosh_defect(z: &CVector, w: &CVector) -> f64 {
    let num = (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr());
    (num / (c64(1.0, 0.0) - z.inner(w)).norm_sqr()).min(1.0)
}

/// Kobayashi distance of the ball.
pub fn ball_kobayashi(z: &CVector, w: &CVector) -> Result<f64> {
    if z.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: z.len(), got: w.len() });
    }
    require_ball_interior(z)?;
    require_ball_interior(w)?;
    let q = ball_cosh_defect(z, w);
    let s = (1.0 - q).max(0.0).sqrt();
    Ok(((1.0 + s) / q.sqrt()).ln())
}

/// |1−⟨z,p⟩|²/(1−|z|²) < R.
pub fn ball_horosphere_membership(p: &CVector, radius: f64, z: &CVector) -> bool {
    let d = 1.0 - z.norm_sqr();
    if d <= 0.0 {
        return false;
    }
    (c64(1.0, 0.0) - z.inner(p)).norm_sqr() / d < radius
}

pub fn ball_horosphere_shape(radius: f64) -> Result<HorosphereShape> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("horosphere radius must be positive, got {radius}")));
    }
    let r = radius / (1.0 + radius);
    Ok(HorosphereShape { center_scale: 1.0 / (1.0 + radius), disc_radius: r, orthogonal_radius: r.sqrt() })
}

/// P_{𝔹ⁿ,p}(z) = −(1−|z|²)/|1−⟨z,p⟩|².
pub fn ball_poisson_kernel(z: &CVector, p: &CVector) -> Result<f64> {
    if z.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: z.len() });
    }
    let den = (c64(1.0, 0.0) - z.inner(p)).norm_sqr();
    if z.dist(p) < 1e-14 || den == 0.0 {
        return Err(Error::InvalidInput("kernel is singular at p".into()));
    }
    if z.norm_sqr() > 1.0 + BOUNDARY_TOL {
        return Err(Error::Exterior(z.norm_sqr() - 1.0));
    }
    Ok(-(1.0 - z.norm_sqr()) / den)
}

/// Matrix H with Σ H_{jk} v_j v̄_k = |(1−⟨z,p⟩)v + ⟨v,p⟩(z−p)|²/|1−⟨z,p⟩|⁴.
pub fn ball_poisson_hessian_matrix(z: &CVector, p: &CVector) -> Result<DMatrix<C64>> {
    if z.dist(p) < 1e-14 {
        return Err(Error::InvalidInput("kernel is singular at p".into()));
    }
    let n = z.len();
    let c = c64(1.0, 0.0) - z.inner(p);
    let d = z - p;
    // L = cI + (z−p)p*
    let l = DMatrix::from_fn(n, n, |i, j| if i == j { c } else { c64(0.0, 0.0) } + d[i] * p[j].conj());
    let s = 1.0 / c.norm_sqr().powi(2);
    Ok(DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| l[(i, j)] * l[(i, k)].conj()).sum::<C64>() * s))
}

/// Levi form of P_{𝔹ⁿ,p} at z in direction v.
pub fn ball_poisson_hessian(z: &CVector, p: &CVector, v: &CVector) -> Result<f64> {
    require_ball_interior(z)?;
    let c = c64(1.0, 0.0) - z.inner(p);
    let lv = &v.scale(c) + &(z - p).scale(v.inner(p));
    if z.dist(p) < 1e-14 {
        return Err(Error::InvalidInput("kernel is singular at p".into()));
    }
    Ok(lv.norm_sqr() / c.norm_sqr().powi(2))
}

/// B(z,z₀) = ½ log(|1−⟨z,p⟩|²/(1−|z|²)) − (same at z₀).
pub fn ball_busemann(z: &CVector, z0: &CVector, p: &CVector) -> Result<f64> {
    require_ball_interior(z)?;
    require_ball_interior(z0)?;
    let h = |x: &CVector| 0.5 * ((c64(1.0, 0.0) - x.inner(p)).norm_sqr() / (1.0 - x.norm_sqr())).ln();
    Ok(h(z) - h(z0))
}

/// Rotates the phase of v/|v| so that ⟨v,ν⟩ is real and positive.
pub fn phase_align(v: &CVector, nu: &CVector) -> Result<CVector> {
    let v = v.normalized()?;
    let a = v.inner(nu);
    if a.norm() < 1e-14 {
        return Err(Error::InadmissibleDirection { re: a.re, im: a.im });
    }
    Ok(v.scale(a.conj() / a.norm()))
}
