//! The Lempert left inverse ϱ of a stationary disc, defined by
//! Σ_j (z_j − φ_j(ϱ)) φ*_j(ϱ) = 0, its gradient, the retraction φ∘ϱ, and the
//! geodesy certificate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contour::winding_number;
use crate::cvec::{self, c64, CVector, C64};
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::spectral::nodes;

use super::GeodesicPair;

/// |F(ϱ)| accepted as a root of the defining equation.
const ROOT_TOL: f64 = 1e-9;

/// Seed of the interior probes used by the certificate.
const PROBE_SEED: u64 = 0x5eed_0001;

/// ϱ and ρ = φ∘ϱ for a geodesic pair.
#[derive(Clone, Debug)]
pub struct LeftInverse {
    pair: GeodesicPair,
    nodes: Vec<C64>,
    /// φ*_j at the nodes, per node.
    dual: Vec<Vec<C64>>,
    /// φ*′_j at the nodes, per node.
    dual_d: Vec<Vec<C64>>,
    /// Σ φ_j φ*_j at the nodes.
    s0: Vec<C64>,
    /// Σ (φ′_j φ*_j + φ_j φ*′_j) at the nodes.
    s1: Vec<C64>,
}

impl LeftInverse {
    pub fn new(pair: &GeodesicPair) -> Self {
        let m = pair.grid();
        let n = pair.dim();
        let z = nodes(m);
        let mut a = vec![c64(0.0, 0.0); n];
        let mut da = vec![c64(0.0, 0.0); n];
        let mut b = vec![c64(0.0, 0.0); n];
        let mut db = vec![c64(0.0, 0.0); n];
        let mut dual = Vec::with_capacity(m);
        let mut dual_d = Vec::with_capacity(m);
        let mut s0 = Vec::with_capacity(m);
        let mut s1 = Vec::with_capacity(m);
        for &zk in &z {
            pair.phi.eval_into(zk, &mut a);
            pair.phi.eval_derivative_into(zk, 1, &mut da);
            pair.dual.eval_into(zk, &mut b);
            pair.dual.eval_derivative_into(zk, 1, &mut db);
            s0.push(cvec::bilinear(&a, &b));
            s1.push(cvec::bilinear(&da, &b) + cvec::bilinear(&a, &db));
            dual.push(b.clone());
            dual_d.push(db.clone());
        }
        LeftInverse { pair: pair.clone(), nodes: z, dual, dual_d, s0, s1 }
    }

    pub fn pair(&self) -> &GeodesicPair {
        &self.pair
    }

    /// F(ζ) = Σ (z−φ(ζ)) φ*(ζ) and F′(ζ) at a general ζ.
    fn f_and_d(&self, z: &[C64], zeta: C64) -> (C64, C64) {
        let n = z.len();
        let mut a = vec![c64(0.0, 0.0); n];
        let mut da = vec![c64(0.0, 0.0); n];
        let mut b = vec![c64(0.0, 0.0); n];
        let mut db = vec![c64(0.0, 0.0); n];
        self.pair.phi.eval_into(zeta, &mut a);
        self.pair.phi.eval_derivative_into(zeta, 1, &mut da);
        self.pair.dual.eval_into(zeta, &mut b);
        self.pair.dual.eval_derivative_into(zeta, 1, &mut db);
        let mut f = c64(0.0, 0.0);
        let mut d = c64(0.0, 0.0);
        for j in 0..n {
            let r = z[j] - a[j];
            f += r * b[j];
            d += r * db[j] - da[j] * b[j];
        }
        (f, d)
    }

    fn node_samples(&self, z: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let m = self.nodes.len();
        let mut f = Vec::with_capacity(m);
        let mut d = Vec::with_capacity(m);
        for k in 0..m {
            f.push(cvec::bilinear(z, &self.dual[k]) - self.s0[k]);
            d.push(cvec::bilinear(z, &self.dual_d[k]) - self.s1[k]);
        }
        (f, d)
    }

    fn check(&self, z: &CVector) -> Result<()> {
        if z.len() != self.pair.dim() {
            return Err(Error::DimensionMismatch { expected: self.pair.dim(), got: z.len() });
        }
        Ok(())
    }

    /// Winding number of ζ ↦ F(ζ) on the boundary grid.
    pub fn winding(&self, z: &CVector) -> Result<i64> {
        self.check(z)?;
        let (f, _) = self.node_samples(z.as_slice());
        winding_number(&f)
    }

    fn newton(&self, z: &[C64], mut zeta: C64) -> Option<C64> {
        for _ in 0..50 {
            let (f, d) = self.f_and_d(z, zeta);
            if !(d.norm() > 0.0) {
                return None;
            }
            let step = f / d;
            zeta -= step;
            if !zeta.re.is_finite() || zeta.norm() > 1.5 {
                return None;
            }
            if step.norm() < 1e-15 {
                break;
            }
        }
        (self.f_and_d(z, zeta).0.norm() < ROOT_TOL).then_some(zeta)
    }

    /// ϱ(z) for z in the closure of Ω.
    pub fn eval(&self, z: &CVector) -> Result<C64> {
        self.check(z)?;
        let zs = z.as_slice();
        let (f, d) = self.node_samples(zs);
        let m = self.nodes.len();
        let near_zero = match winding_number(&f) {
            Ok(1) => false,
            Ok(w) => return Err(Error::WindingNumber(w)),
            Err(Error::SampleNearZero) => true,
            Err(e) => return Err(e),
        };
        if !near_zero {
            let rho0: C64 = (0..m).map(|k| self.nodes[k] * self.nodes[k] * d[k] / f[k]).sum::<C64>() / m as f64;
            if let Some(r) = self.newton(zs, rho0) {
                return Ok(r);
            }
        }
        let kmin = (0..m).min_by(|&i, &j| f[i].norm().total_cmp(&f[j].norm())).expect("grid is nonempty");
        self.newton(zs, self.nodes[kmin]).ok_or_else(|| Error::DenominatorTooSmall(f[kmin].norm()))
    }

    /// grad ϱ(z) = φ*(ϱ)/(1 − Σ (z−φ(ϱ)) φ*′(ϱ)).
    pub fn gradient(&self, z: &CVector) -> Result<CVector> {
        let r = self.eval(z)?;
        let n = z.len();
        let a = self.pair.phi.eval(r);
        let b = self.pair.dual.eval(r);
        let db = self.pair.dual.eval_derivative(r, 1);
        let den = c64(1.0, 0.0) - (0..n).map(|j| (z[j] - a[j]) * db[j]).sum::<C64>();
        if den.norm() < 1e-6 {
            return Err(Error::DenominatorTooSmall(den.norm()));
        }
        Ok(b.scale(den.inv()))
    }

    /// ρ(z) = φ(ϱ(z)).
    pub fn retraction(&self, z: &CVector) -> Result<CVector> {
        Ok(self.pair.phi.eval(self.eval(z)?))
    }
}

/// Geodesy certificate of a pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// max |ϱ(φ(ζ)) − ζ| over a 32×32 polar grid in Δ.
    pub pullback: f64,
    /// Winding numbers at the interior probes.
    pub windings: Vec<i64>,
    /// max |r∘φ| on the doubled boundary grid.
    pub boundary: f64,
    /// max |Σ φ′_j φ*_j − 1| on the doubled boundary grid.
    pub duality: f64,
    pub min_mu: f64,
    /// max |grad ϱ(φ(ζ)) − φ*(ζ)| over the boundary grid.
    pub gradient_pullback: f64,
    pub pass: bool,
}

impl Certificate {
    pub const TOL: f64 = 1e-7;

    pub fn summary(&self) -> String {
        format!(
            "pullback {:e}, boundary {:e}, duality {:e}, min μ {:e}, windings≠1: {}",
            self.pullback,
            self.boundary,
            self.duality,
            self.min_mu,
            self.windings.iter().filter(|&&w| w != 1).count()
        )
    }
}

/// Runs the checks that certify φ as a complex geodesic of `domain`.
pub fn geodesic_certificate(pair: &GeodesicPair, domain: &DomainSpec) -> Certificate {
    let li = LeftInverse::new(pair);
    let mut pullback: f64 = 0.0;
    for i in 0..32 {
        let r = (i as f64 + 0.5) / 32.0;
        for j in 0..32 {
            let zeta = C64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / 32.0);
            let e = match li.eval(&pair.phi.eval(zeta)) {
                Ok(x) => (x - zeta).norm(),
                Err(_) => f64::INFINITY,
            };
            pullback = pullback.max(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let windings: Vec<i64> = if domain.radius().is_finite() {
        (0..50).map(|_| li.winding(&domain.sample_interior(&mut rng, 0.999)).unwrap_or(0)).collect()
    } else {
        vec![0]
    };
    let mut gradient_pullback: f64 = 0.0;
    for (k, &zk) in nodes(pair.grid()).iter().enumerate() {
        let e = match li.gradient(&pair.phi.eval(zk)) {
            Ok(g) => cvec::dist(g.as_slice(), &li.dual[k]),
            Err(_) => f64::INFINITY,
        };
        gradient_pullback = gradient_pullback.max(e);
    }
    let get = |k: &str| pair.residual(k).unwrap_or(f64::NAN);
    let (boundary, duality, min_mu) = (get("boundary"), get("duality"), get("min_mu"));
    let pass = pullback < Certificate::TOL
        && boundary < Certificate::TOL
        && duality < Certificate::TOL
        && windings.iter().all(|&w| w == 1)
        && min_mu > 0.0;
    Certificate { pullback, windings, boundary, duality, min_mu, gradient_pullback, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::{ball_geodesic, BoundaryDirection};
    use crate::hardy::HardyMap;

    fn diameter() -> GeodesicPair {
        let ball = DomainSpec::ball(2).unwrap();
        let phi = HardyMap::affine(&CVector::zeros(2), &CVector::basis(2, 0), 4);
        let dual = HardyMap::constant(&CVector::basis(2, 0), 4);
        GeodesicPair::assemble(phi, dual, vec![1.0; 64], &ball).unwrap()
    }

    fn eta() -> GeodesicPair {
        let v = CVector::new(vec![c64(0.8, 0.0), c64(0.36, 0.48)]).unwrap();
        ball_geodesic(&BoundaryDirection::new(CVector::basis(2, 0), v).unwrap(), 256).unwrap()
    }

    #[test]
    fn diameter_left_inverse_is_first_coordinate() {
        let li = LeftInverse::new(&diameter());
        let z = CVector::new(vec![c64(0.3, 0.1), c64(0.4, -0.2)]).unwrap();
        assert!((li.eval(&z).unwrap() - c64(0.3, 0.1)).norm() < 1e-13);
        let g = li.gradient(&z).unwrap();
        assert!(g.dist(&CVector::basis(2, 0)) < 1e-13);
        let r = li.retraction(&CVector::new(vec![c64(0.3, 0.0), c64(0.4, 0.0)]).unwrap()).unwrap();
        assert!(r.dist(&CVector::new(vec![c64(0.3, 0.0), c64(0.0, 0.0)]).unwrap()) < 1e-13);
    }

    #[test]
    fn eta_certificate_passes() {
        let ball = DomainSpec::ball(2).unwrap();
        let c = geodesic_certificate(&eta(), &ball);
        assert!(c.pass, "{}", c.summary());
        assert!(c.pullback < 1e-12 && c.gradient_pullback < 1e-10, "{c:?}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let li = LeftInverse::new(&eta());
        let z = CVector::new(vec![c64(0.2, -0.1), c64(0.1, 0.3)]).unwrap();
        let g = li.gradient(&z).unwrap();
        let h = 1e-5;
        for j in 0..2 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp.as_mut_slice()[j] += h;
            zm.as_mut_slice()[j] -= h;
            let fd = (li.eval(&zp).unwrap() - li.eval(&zm).unwrap()) / (2.0 * h);
            assert!((fd - g[j]).norm() < 1e-6);
        }
    }

    #[test]
    fn retraction_is_idempotent() {
        let li = LeftInverse::new(&eta());
        let z = CVector::new(vec![c64(0.1, 0.5), c64(-0.4, 0.2)]).unwrap();
        let r = li.retraction(&z).unwrap();
        assert!(li.retraction(&r).unwrap().dist(&r) < 1e-9);
    }

    #[test]
    fn noisy_map_fails_certificate() {
        let ball = DomainSpec::ball(2).unwrap();
        let g = eta();
        let mut coeffs = g.phi.with_degree(8).coeffs().to_vec();
        coeffs[1][3] += c64(1e-3, 0.0);
        let phi = HardyMap::new(coeffs).unwrap();
        let noisy = GeodesicPair::assemble(phi, g.dual.clone(), g.mu.clone(), &ball).unwrap();
        assert!(!geodesic_certificate(&noisy, &ball).pass);
    }
}
