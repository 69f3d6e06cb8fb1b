use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;

use crate::{CMat, C64};

/// Element of the Lie algebra in the orthonormal basis `{e_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraVec(DVector<f64>);

impl AlgebraVec {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    pub fn from_dvector(v: DVector<f64>) -> Self {
        Self(v)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// The basis vector `e_k` (zero-based).
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &AlgebraVec) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

impl Add for &AlgebraVec {
    type Output = AlgebraVec;
    fn add(self, rhs: &AlgebraVec) -> AlgebraVec {
        AlgebraVec(&self.0 + &rhs.0)
    }
}

impl Sub for &AlgebraVec {
    type Output = AlgebraVec;
    fn sub(self, rhs: &AlgebraVec) -> AlgebraVec {
        AlgebraVec(&self.0 - &rhs.0)
    }
}

impl Neg for &AlgebraVec {
    type Output = AlgebraVec;
    fn neg(self) -> AlgebraVec {
        AlgebraVec(-&self.0)
    }
}

impl Mul<f64> for &AlgebraVec {
    type Output = AlgebraVec;
    fn mul(self, rhs: f64) -> AlgebraVec {
        AlgebraVec(&self.0 * rhs)
    }
}

/// A point of `G` or of its complexification, stored as a matrix in the
/// defining representation.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint(CMat);

impl GroupPoint {
    pub fn new(matrix: CMat) -> Self {
        Self(matrix)
    }

    pub fn identity(size: usize) -> Self {
        Self(CMat::identity(size, size))
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn mul(&self, other: &GroupPoint) -> GroupPoint {
        GroupPoint(&self.0 * &other.0)
    }

    /// Frobenius distance of `g† g` from the identity.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.size();
        (self.0.adjoint() * &self.0 - CMat::identity(n, n)).norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// Inverse; uses the adjoint when the point is unitary.
    pub fn inverse(&self) -> Option<GroupPoint> {
        if self.is_unitary(1e-12) {
            Some(GroupPoint(self.0.adjoint()))
        } else {
            self.0.clone().try_inverse().map(GroupPoint)
        }
    }

    pub fn determinant(&self) -> C64 {
        self.0.determinant()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }
}

/// A real root, stored as a covector on `t` in the orthonormal torus basis.
#[derive(Clone, Debug, PartialEq)]
pub struct RealRoot {
    pub covector: Vec<f64>,
}

impl RealRoot {
    pub fn new(covector: Vec<f64>) -> Self {
        Self { covector }
    }

    /// `α(Y)` for `Y` given in torus coordinates.
    pub fn eval(&self, y_t: &[f64]) -> f64 {
        self.covector.iter().zip(y_t).map(|(a, y)| a * y).sum()
    }

    pub fn negated(&self) -> RealRoot {
        RealRoot::new(self.covector.iter().map(|a| -a).collect())
    }

    pub fn norm_sq(&self) -> f64 {
        self.covector.iter().map(|a| a * a).sum()
    }

    /// Positive with respect to the lexicographic order on coordinates.
    pub fn is_positive(&self) -> bool {
        self.covector
            .iter()
            .find(|a| a.abs() > 1e-14)
            .map(|a| *a > 0.0)
            .unwrap_or(false)
    }

    pub fn approx_eq(&self, other: &RealRoot, tol: f64) -> bool {
        self.covector.len() == other.covector.len()
            && self
                .covector
                .iter()
                .zip(&other.covector)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}
