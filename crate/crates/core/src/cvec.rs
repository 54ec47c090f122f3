//! Vectors in ℂⁿ with the standard Hermitian inner product ⟨z,w⟩ = Σ z_j w̄_j.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A point or tangent vector in ℂⁿ (n ≥ 1, finite entries).
///
/// Serialized as a list of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct CVector(Vec<C64>);

impl TryFrom<Vec<[f64; 2]>> for CVector {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        CVector::new(v.into_iter().map(|[a, b]| c64(a, b)).collect())
    }
}

impl From<CVector> for Vec<[f64; 2]> {
    fn from(v: CVector) -> Self {
        v.0.iter().map(|z| [z.re, z.im]).collect()
    }
}

impl CVector {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("vector must have at least one coordinate".into()));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(CVector(coords))
    }

    /// Builds a vector without validation; callers guarantee finiteness.
    pub(crate) fn from_vec_unchecked(coords: Vec<C64>) -> Self {
        CVector(coords)
    }

    pub fn from_slice(coords: &[C64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    pub fn from_real(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| c64(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1);
        CVector(vec![C64::new(0.0, 0.0); n])
    }

    /// The standard basis vector e_j (0-based index).
    pub fn basis(n: usize, j: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[j] = c64(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        CVector(self.0.iter().map(|z| z * c).collect())
    }

    pub fn conj(&self) -> Self {
        CVector(self.0.iter().map(|z| z.conj()).collect())
    }

    /// Unit vector in the same direction; errors on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        Ok(self.scale(c64(1.0 / n, 0.0)))
    }

    pub fn dist(&self, other: &CVector) -> f64 {
        dist(&self.0, &other.0)
    }

    /// ⟨self, other⟩ without a dimension check in release builds.
    pub fn inner(&self, other: &CVector) -> C64 {
        debug_assert_eq!(self.len(), other.len());
        inner(&self.0, &other.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// ⟨z,w⟩ = Σ z_j conj(w_j) on raw slices.
#[inline]
pub fn inner(z: &[C64], w: &[C64]) -> C64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

/// Σ z_j w_j (no conjugation).
#[inline]
pub fn bilinear(z: &[C64], w: &[C64]) -> C64 {
    z.iter().zip(w).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm_sqr(z: &[C64]) -> f64 {
    z.iter().map(|a| a.norm_sqr()).sum()
}

#[inline]
pub fn dist(z: &[C64], w: &[C64]) -> f64 {
    z.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product with a dimension check.
pub fn hermitian_inner(z: &CVector, w: &CVector) -> Result<C64> {
    if z.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: z.len(), got: w.len() });
    }
    Ok(inner(&z.0, &w.0))
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        debug_assert_eq!(self.len(), rhs.len());
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        debug_assert_eq!(self.len(), rhs.len());
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &CVector {
    type Output = CVector;
    fn neg(self) -> CVector {
        CVector(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<C64> for &CVector {
    type Output = CVector;
    fn mul(self, c: C64) -> CVector {
        self.scale(c)
    }
}

impl Mul<f64> for &CVector {
    type Output = CVector;
    fn mul(self, c: f64) -> CVector {
        self.scale(c64(c, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vector_has_unit_inner_product() {
        let e1 = CVector::basis(2, 0);
        assert_eq!(hermitian_inner(&e1, &e1).unwrap(), c64(1.0, 0.0));
    }

    #[test]
    fn orthogonal_pair() {
        let z = CVector::new(vec![c64(1.0, 0.0), c64(0.0, 1.0)]).unwrap();
        let w = CVector::new(vec![c64(0.0, 1.0), c64(1.0, 0.0)]).unwrap();
        assert!(hermitian_inner(&z, &w).unwrap().norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let z = CVector::zeros(2);
        let w = CVector::zeros(3);
        assert!(matches!(hermitian_inner(&z, &w), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(CVector::new(vec![]).is_err());
        assert!(CVector::new(vec![c64(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let z = CVector::new(vec![c64(0.5, -1.0), c64(2.0, 0.25)]).unwrap();
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(s, "[[0.5,-1.0],[2.0,0.25]]");
        let back: CVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
    }
}
