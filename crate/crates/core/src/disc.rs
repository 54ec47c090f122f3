//! Geometry of the unit disc Δ.

use serde::{Deserialize, Serialize};

use crate::cvec::{c64, C64};
use crate::error::{Error, Result};

fn check_open_disc(z: C64) -> Result<()> {
    let r = z.norm();
    if !r.is_finite() || r >= 1.0 {
        return Err(Error::OutsideDisc(r));
    }
    Ok(())
}

/// k_Δ(ζ1, ζ2) = artanh |(ζ1−ζ2)/(1−ζ1 ζ̄2)|.
pub fn poincare_distance(z1: C64, z2: C64) -> Result<f64> {
    check_open_disc(z1)?;
    check_open_disc(z2)?;
    let q = ((z1 - z2) / (c64(1.0, 0.0) - z1 * z2.conj())).norm();
    Ok(q.min(1.0).atanh())
}

/// P(ζ) = (1−|ζ|²)/|1−ζ|².
pub fn poisson_kernel(z: C64) -> Result<f64> {
    check_open_disc(z)?;
    Ok((1.0 - z.norm_sqr()) / (c64(1.0, 0.0) - z).norm_sqr())
}

/// An automorphism of the closed disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscAutomorphism {
    /// σ_t(ζ) = ((1−it)ζ + it)/(−itζ + 1 + it); fixes 1 with σ_t′(1) = 1.
    Parabolic { t: f64 },
    /// ζ ↦ (ζ + a)/(1 + āζ), sending 0 to a.
    Mobius { a: [f64; 2] },
}

pub fn parabolic_automorphism(t: f64) -> Result<DiscAutomorphism> {
    if !t.is_finite() {
        return Err(Error::NonFinite("parabolic parameter"));
    }
    Ok(DiscAutomorphism::Parabolic { t })
}

pub fn mobius_automorphism(a: C64) -> Result<DiscAutomorphism> {
    check_open_disc(a)?;
    Ok(DiscAutomorphism::Mobius { a: [a.re, a.im] })
}

impl DiscAutomorphism {
    /// Möbius coefficients (α, β, γ, δ) of ζ ↦ (αζ+β)/(γζ+δ).
    fn coefficients(&self) -> (C64, C64, C64, C64) {
        match *self {
            DiscAutomorphism::Parabolic { t } => {
                let it = c64(0.0, t);
                (c64(1.0, 0.0) - it, it, -it, c64(1.0, 0.0) + it)
            }
            DiscAutomorphism::Mobius { a } => {
                let a = c64(a[0], a[1]);
                (c64(1.0, 0.0), a, a.conj(), c64(1.0, 0.0))
            }
        }
    }

    pub fn apply(&self, z: C64) -> C64 {
        let (al, be, ga, de) = self.coefficients();
        (al * z + be) / (ga * z + de)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let (al, be, ga, de) = self.coefficients();
        let den = ga * z + de;
        (al * de - be * ga) / (den * den)
    }

    pub fn inverse(&self) -> DiscAutomorphism {
        match *self {
            DiscAutomorphism::Parabolic { t } => DiscAutomorphism::Parabolic { t: -t },
            DiscAutomorphism::Mobius { a } => DiscAutomorphism::Mobius { a: [-a[0], -a[1]] },
        }
    }
}

/// Stolz region {ζ : |ζ−1| < β(1−|ζ|)} with vertex 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StolzRegion {
    beta: f64,
}

impl StolzRegion {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::InvalidInput(format!("aperture must exceed 1, got {beta}")));
        }
        Ok(StolzRegion { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - c64(1.0, 0.0)).norm() < self.beta * (1.0 - z.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poincare_examples() {
        assert_eq!(poincare_distance(c64(0.0, 0.0), c64(0.0, 0.0)).unwrap(), 0.0);
        let d = poincare_distance(c64(0.0, 0.0), c64(0.5, 0.0)).unwrap();
        assert!((d - 0.5493061443340549).abs() < 1e-15);
        assert!(poincare_distance(c64(1.0, 0.0), c64(0.0, 0.0)).is_err());
    }

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson_kernel(c64(0.0, 0.0)).unwrap(), 1.0);
        assert!((poisson_kernel(c64(0.5, 0.0)).unwrap() - 3.0).abs() < 1e-15);
        // tangential approach stays bounded
        let v = poisson_kernel(c64(0.0, 0.999999)).unwrap();
        assert!(v < 1e-5);
        assert!(poisson_kernel(c64(0.0, 1.0)).is_err());
    }

    #[test]
    fn parabolic_examples() {
        let s1 = parabolic_automorphism(1.0).unwrap();
        assert!((s1.apply(c64(0.0, 0.0)) - c64(0.5, 0.5)).norm() < 1e-15);
        let s = parabolic_automorphism(0.37).unwrap();
        assert!((s.apply(c64(1.0, 0.0)) - c64(1.0, 0.0)).norm() < 1e-15);
        assert!((s.derivative(c64(1.0, 0.0)) - c64(1.0, 0.0)).norm() < 1e-15);
        let id = parabolic_automorphism(0.0).unwrap();
        assert_eq!(id.apply(c64(0.3, -0.2)), c64(0.3, -0.2));
    }

    #[test]
    fn mobius_sends_zero_to_parameter() {
        let a = c64(0.3, 0.4);
        let m = mobius_automorphism(a).unwrap();
        assert!((m.apply(c64(0.0, 0.0)) - a).norm() < 1e-15);
        let z = c64(-0.2, 0.5);
        assert!((m.inverse().apply(m.apply(z)) - z).norm() < 1e-15);
        assert!(mobius_automorphism(c64(1.0, 0.0)).is_err());
    }

    #[test]
    fn stolz_membership_is_literal() {
        let s = StolzRegion::new(2.0).unwrap();
        assert!(s.contains(c64(0.9, 0.0)));
        assert!(!s.contains(c64(0.0, 0.9)));
        assert!(StolzRegion::new(1.0).is_err());
    }
}
