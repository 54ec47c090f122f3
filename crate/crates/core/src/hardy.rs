//! Holomorphic maps Δ → ℂⁿ stored as truncated power series.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cvec::{c64, CVector, C64};
use crate::disc::DiscAutomorphism;
use crate::error::{Error, Result};
use crate::spectral::{nodes, Plans};

/// ζ ↦ Σ_{m=0}^N a_m ζ^m, one coefficient list per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct HardyMap {
    coeffs: Vec<Vec<C64>>,
}

/// Result of projecting boundary samples onto the nonnegative modes 0..N.
#[derive(Clone, Debug)]
pub struct Projection {
    pub map: HardyMap,
    /// ℓ² norm of the modes −1..−M/2 (zero for boundary values of a holomorphic map).
    pub negative_energy: f64,
    /// ℓ² norm of the discarded positive modes N+1..M/2−1.
    pub tail_energy: f64,
}

impl HardyMap {
    pub fn new(coeffs: Vec<Vec<C64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("map needs at least one coordinate".into()));
        }
        let len = coeffs[0].len();
        if len == 0 {
            return Err(Error::InvalidInput("map needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidInput("coordinates have different degrees".into()));
        }
        if coeffs.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("map coefficients"));
        }
        Ok(HardyMap { coeffs })
    }

    pub fn scalar(coeffs: Vec<C64>) -> Result<Self> {
        Self::new(vec![coeffs])
    }

    pub fn constant(v: &CVector, degree: usize) -> Self {
        let coeffs = v
            .as_slice()
            .iter()
            .map(|&c| {
                let mut row = vec![c64(0.0, 0.0); degree + 1];
                row[0] = c;
                row
            })
            .collect();
        HardyMap { coeffs }
    }

    /// Affine disc ζ ↦ a + ζ b.
    pub fn affine(a: &CVector, b: &CVector, degree: usize) -> Self {
        let mut m = Self::constant(a, degree.max(1));
        for (row, &bj) in m.coeffs.iter_mut().zip(b.as_slice()) {
            row[1] = bj;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn degree(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    pub fn coeffs(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    pub fn coordinate(&self, j: usize) -> &[C64] {
        &self.coeffs[j]
    }

    pub fn eval_into(&self, zeta: C64, out: &mut [C64]) {
        for (o, row) in out.iter_mut().zip(&self.coeffs) {
            *o = horner(row, zeta);
        }
    }

    pub fn eval(&self, zeta: C64) -> CVector {
        let mut out = vec![c64(0.0, 0.0); self.dim()];
        self.eval_into(zeta, &mut out);
        CVector::from_vec_unchecked(out)
    }

    /// Value of the first coordinate (convenient for scalar maps).
    pub fn eval_scalar(&self, zeta: C64) -> C64 {
        horner(&self.coeffs[0], zeta)
    }

    /// The `order`-th derivative at ζ, computed term-wise.
    pub fn eval_derivative_into(&self, zeta: C64, order: usize, out: &mut [C64]) {
        for (o, row) in out.iter_mut().zip(&self.coeffs) {
            *o = horner_derivative(row, zeta, order);
        }
    }

    pub fn eval_derivative(&self, zeta: C64, order: usize) -> CVector {
        let mut out = vec![c64(0.0, 0.0); self.dim()];
        self.eval_derivative_into(zeta, order, &mut out);
        CVector::from_vec_unchecked(out)
    }

    /// Term-wise derivative as a map of degree N−1 (degree 0 stays constant zero).
    pub fn derivative(&self) -> HardyMap {
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                if row.len() == 1 {
                    vec![c64(0.0, 0.0)]
                } else {
                    row.iter().enumerate().skip(1).map(|(m, a)| a * m as f64).collect()
                }
            })
            .collect();
        HardyMap { coeffs }
    }

    /// Same map with coefficients padded with zeros or truncated to the given degree.
    pub fn with_degree(&self, degree: usize) -> HardyMap {
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                let mut r = row.clone();
                r.resize(degree + 1, c64(0.0, 0.0));
                r
            })
            .collect();
        HardyMap { coeffs }
    }

    /// Boundary values on the M-node grid, one vector per coordinate.
    pub fn boundary_samples(&self, m: usize) -> Result<Vec<Vec<C64>>> {
        if m < self.degree() + 1 {
            return Err(Error::InvalidInput(format!(
                "grid of {m} nodes cannot carry degree {}",
                self.degree()
            )));
        }
        let plans = Plans::new(m);
        Ok(self
            .coeffs
            .iter()
            .map(|row| {
                let mut buf = vec![c64(0.0, 0.0); m];
                plans.synthesize(row, &mut buf);
                buf
            })
            .collect())
    }

    /// Projects boundary samples onto modes 0..=degree (discrete Fourier inversion).
    pub fn from_samples(samples: &[Vec<C64>], degree: usize) -> Result<Projection> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("no sample coordinates".into()));
        }
        let m = samples[0].len();
        if samples.iter().any(|s| s.len() != m) {
            return Err(Error::InvalidInput("sample coordinates differ in length".into()));
        }
        if m < 2 * degree + 2 {
            return Err(Error::InvalidInput(format!(
                "{m} samples are too few for degree {degree} (need ≥ {})",
                2 * degree + 2
            )));
        }
        let plans = Plans::new(m);
        let mut neg = 0.0;
        let mut tail = 0.0;
        let mut coeffs = Vec::with_capacity(samples.len());
        for s in samples {
            let mut buf = s.clone();
            plans.analyze(&mut buf);
            for (k, c) in buf.iter().enumerate() {
                if k >= m / 2 && k > 0 {
                    neg += c.norm_sqr();
                } else if k > degree {
                    tail += c.norm_sqr();
                }
            }
            buf.truncate(degree + 1);
            coeffs.push(buf);
        }
        Ok(Projection { map: HardyMap::new(coeffs)?, negative_energy: neg.sqrt(), tail_energy: tail.sqrt() })
    }

    /// φ∘σ resampled on an M-node grid and truncated to the current degree.
    pub fn compose(&self, aut: &DiscAutomorphism, m: usize) -> Result<Projection> {
        let z = nodes(m);
        let n = self.dim();
        let mut samples = vec![vec![c64(0.0, 0.0); m]; n];
        let mut buf = vec![c64(0.0, 0.0); n];
        for (k, &zk) in z.iter().enumerate() {
            self.eval_into(aut.apply(zk), &mut buf);
            for j in 0..n {
                samples[j][k] = buf[j];
            }
        }
        HardyMap::from_samples(&samples, self.degree())
    }

    /// ζ ↦ A φ(ζ) + b.
    pub fn affine_image(&self, a: &DMatrix<C64>, b: &CVector) -> Result<HardyMap> {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n || b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
        }
        let len = self.degree() + 1;
        let mut coeffs = vec![vec![c64(0.0, 0.0); len]; n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[(i, k)];
                for m in 0..len {
                    coeffs[i][m] += aik * self.coeffs[k][m];
                }
            }
            coeffs[i][0] += b[i];
        }
        HardyMap::new(coeffs)
    }

    /// Largest |φ(ζ) − ψ(ζ)| over an M-node boundary grid.
    pub fn boundary_distance(&self, other: &HardyMap, m: usize) -> f64 {
        let n = self.dim();
        let mut a = vec![c64(0.0, 0.0); n];
        let mut b = vec![c64(0.0, 0.0); n];
        nodes(m)
            .into_iter()
            .map(|z| {
                self.eval_into(z, &mut a);
                other.eval_into(z, &mut b);
                crate::cvec::dist(&a, &b)
            })
            .fold(0.0, f64::max)
    }

    /// Largest coefficient difference in modulus (degrees padded to match).
    pub fn coefficient_distance(&self, other: &HardyMap) -> f64 {
        let d = self.degree().max(other.degree());
        let a = self.with_degree(d);
        let b = other.with_degree(d);
        a.coeffs
            .iter()
            .flatten()
            .zip(b.coeffs.iter().flatten())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub fn horner(row: &[C64], zeta: C64) -> C64 {
    row.iter().rev().fold(c64(0.0, 0.0), |acc, a| acc * zeta + a)
}

/// d^order/dζ^order of Σ a_m ζ^m at ζ.
pub fn horner_derivative(row: &[C64], zeta: C64, order: usize) -> C64 {
    if order == 0 {
        return horner(row, zeta);
    }
    let mut acc = c64(0.0, 0.0);
    for m in (order..row.len()).rev() {
        let fall: f64 = (0..order).map(|i| (m - i) as f64).product();
        acc = acc * zeta + row[m] * fall;
    }
    acc
}

#[derive(Serialize, Deserialize)]
struct HardyMapJson {
    dim: usize,
    degree: usize,
    coeffs: Vec<Vec<[f64; 2]>>,
}

impl Serialize for HardyMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HardyMapJson {
            dim: self.dim(),
            degree: self.degree(),
            coeffs: self.coeffs.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HardyMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = HardyMapJson::deserialize(d)?;
        if j.coeffs.len() != j.dim {
            return Err(D::Error::custom("dim does not match number of coefficient rows"));
        }
        if j.coeffs.iter().any(|r| r.len() != j.degree + 1) {
            return Err(D::Error::custom("coefficient row length must be degree + 1"));
        }
        let coeffs = j.coeffs.into_iter().map(|r| r.into_iter().map(|[a, b]| c64(a, b)).collect()).collect();
        HardyMap::new(coeffs).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_map() -> HardyMap {
        HardyMap::new(vec![
            vec![c64(0.1, 0.0), c64(0.5, -0.2), c64(0.0, 0.3)],
            vec![c64(-0.2, 0.1), c64(0.0, 0.0), c64(0.25, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn evaluation_and_derivatives_are_termwise() {
        let f = sample_map();
        let z = c64(0.3, -0.4);
        let v = f.eval(z);
        let expect = c64(0.1, 0.0) + c64(0.5, -0.2) * z + c64(0.0, 0.3) * z * z;
        assert!((v[0] - expect).norm() < 1e-15);
        let d = f.eval_derivative(z, 1);
        assert!((d[0] - (c64(0.5, -0.2) + c64(0.0, 0.6) * z)).norm() < 1e-15);
        let d2 = f.eval_derivative(z, 2);
        assert!((d2[1] - c64(0.5, 0.0)).norm() < 1e-15);
        assert!((f.derivative().eval(z)[0] - d[0]).norm() < 1e-15);
        assert_eq!(f.eval_derivative(z, 3)[0], c64(0.0, 0.0));
    }

    #[test]
    fn samples_round_trip() {
        let f = sample_map().with_degree(8);
        let s = f.boundary_samples(32).unwrap();
        let p = HardyMap::from_samples(&s, 8).unwrap();
        assert!(p.map.coefficient_distance(&f) < 1e-15);
        assert!(p.negative_energy < 1e-15);
    }

    #[test]
    fn conjugate_samples_have_negative_energy() {
        let m = 16;
        let z = nodes(m);
        let s = vec![z.iter().map(|w| w.conj()).collect::<Vec<_>>()];
        let p = HardyMap::from_samples(&s, 4).unwrap();
        assert!((p.negative_energy - 1.0).abs() < 1e-14);
    }

    #[test]
    fn too_few_samples_rejected() {
        let s = vec![vec![c64(0.0, 0.0); 8]];
        assert!(HardyMap::from_samples(&s, 4).is_err());
    }

    #[test]
    fn json_layout() {
        let f = HardyMap::scalar(vec![c64(1.0, 0.0), c64(0.0, 2.0)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"dim":1,"degree":1,"coeffs":[[[1.0,0.0],[0.0,2.0]]]}"#);
        let back: HardyMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<HardyMap>(r#"{"dim":2,"degree":1,"coeffs":[[[1,0],[0,2]]]}"#).is_err());
    }

    #[test]
    fn affine_image_applies_matrix() {
        let f = sample_map();
        let a = DMatrix::from_row_slice(2, 2, &[c64(2.0, 0.0), c64(0.0, 1.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        let b = CVector::new(vec![c64(1.0, 0.0), c64(0.0, -1.0)]).unwrap();
        let g = f.affine_image(&a, &b).unwrap();
        let z = c64(0.2, 0.1);
        let fz = f.eval(z);
        let expect = c64(2.0, 0.0) * fz[0] + c64(0.0, 1.0) * fz[1] + c64(1.0, 0.0);
        assert!((g.eval(z)[0] - expect).norm() < 1e-15);
    }
}
