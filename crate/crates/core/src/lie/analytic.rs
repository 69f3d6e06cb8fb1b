//! Analytic functions of `ad Y`.
//!
//! `ad Y` is antisymmetric in the orthonormal basis, so `i ad Y` is hermitian
//! and `f(ad Y) = U f(-iλ) U†` with `i ad Y = U diag(λ) U†`. The removable
//! singularities at zero are handled by a six-term Taylor expansion below
//! `|z| = 1e-6`.

use nalgebra::DMatrix;

use crate::lie::{AlgebraVec, LieModel};
use crate::{CMat, RMat, C64};

const TAYLOR_RADIUS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdFunction {
    /// `cos z`
    Cos,
    /// `sin z`
    Sin,
    /// `sin z / z`
    SinOverZ,
    /// `(1 - cos z) / z`
    OneMinusCosOverZ,
    /// `z / sin z`
    ZOverSin,
    /// `(1 - cos z) / sin z`
    OneMinusCosOverSin,
    /// `(1 - cos z) / (z sin z)`
    OneMinusCosOverZSin,
    /// `(e^{-iz} - 1) / z`
    ExpMinusIOverZ,
}

fn horner(z: C64, coeffs: &[C64]) -> C64 {
    coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn real(c: &[f64]) -> Vec<C64> {
    c.iter().map(|x| C64::new(*x, 0.0)).collect()
}

/// `1 - cos z` as `2 sin²(z/2)`, accurate for small `z`.
fn one_minus_cos(z: C64) -> C64 {
    let s = (z * 0.5).sin();
    s * s * 2.0
}

/// Evaluate one of the analytic functions at a complex point.
pub fn scalar_function(f: AdFunction, z: C64) -> C64 {
    let small = z.norm() < TAYLOR_RADIUS;
    let i = C64::new(0.0, 1.0);
    match f {
        AdFunction::Cos => z.cos(),
        AdFunction::Sin => z.sin(),
        AdFunction::SinOverZ => {
            if small {
                let z2 = z * z;
                horner(
                    z2,
                    &real(&[
                        1.0,
                        -1.0 / 6.0,
                        1.0 / 120.0,
                        -1.0 / 5040.0,
                        1.0 / 362_880.0,
                        -1.0 / 39_916_800.0,
                    ]),
                )
            } else {
                z.sin() / z
            }
        }
        AdFunction::OneMinusCosOverZ => {
            if small {
                let z2 = z * z;
                z * horner(
                    z2,
                    &real(&[
                        0.5,
                        -1.0 / 24.0,
                        1.0 / 720.0,
                        -1.0 / 40_320.0,
                        1.0 / 3_628_800.0,
                        -1.0 / 479_001_600.0,
                    ]),
                )
            } else {
                one_minus_cos(z) / z
            }
        }
        AdFunction::ZOverSin => {
            if small {
                let z2 = z * z;
                horner(
                    z2,
                    &real(&[
                        1.0,
                        1.0 / 6.0,
                        7.0 / 360.0,
                        31.0 / 15_120.0,
                        127.0 / 604_800.0,
                        73.0 / 3_421_440.0,
                    ]),
                )
            } else {
                z / z.sin()
            }
        }
        AdFunction::OneMinusCosOverSin => {
            if small {
                // tan(z/2)
                let z2 = z * z;
                z * horner(
                    z2,
                    &real(&[
                        0.5,
                        1.0 / 24.0,
                        1.0 / 240.0,
                        17.0 / 40_320.0,
                        31.0 / 725_760.0,
                        691.0 / 159_667_200.0,
                    ]),
                )
            } else {
                one_minus_cos(z) / z.sin()
            }
        }
        AdFunction::OneMinusCosOverZSin => {
            if small {
                // tan(z/2) / z
                let z2 = z * z;
                horner(
                    z2,
                    &real(&[
                        0.5,
                        1.0 / 24.0,
                        1.0 / 240.0,
                        17.0 / 40_320.0,
                        31.0 / 725_760.0,
                        691.0 / 159_667_200.0,
                    ]),
                )
            } else {
                one_minus_cos(z) / (z * z.sin())
            }
        }
        AdFunction::ExpMinusIOverZ => {
            if small {
                // sum_{k>=1} (-i)^k z^{k-1} / k!
                let coeffs = [
                    -i,
                    C64::new(-0.5, 0.0),
                    i / 6.0,
                    C64::new(1.0 / 24.0, 0.0),
                    -i / 120.0,
                    C64::new(-1.0 / 720.0, 0.0),
                ];
                horner(z, &coeffs)
            } else {
                // e^{-iz/2} (-2i sin(z/2)) / z, free of cancellation.
                (-i * z * 0.5).exp() * (-i * 2.0) * (z * 0.5).sin() / z
            }
        }
    }
}

/// `sinh(x) / x`, with a Taylor expansion to `x^4` below `|x| = 1e-4`.
pub fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// `f(ad Y)` as a complex matrix acting on the complexified algebra.
pub fn ad_function(model: &LieModel, y: &AlgebraVec, f: AdFunction) -> CMat {
    let ad = model.ad_matrix(y);
    let n = ad.nrows();
    let i = C64::new(0.0, 1.0);
    let h: CMat = DMatrix::from_fn(n, n, |r, c| i * ad[(r, c)]);
    // Enforce exact hermiticity before the eigensolver.
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let u = &eig.eigenvectors;
    let diag: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|lam| scalar_function(f, C64::new(0.0, -*lam)))
        .collect();
    let mut scaled = u.clone();
    for (col, d) in diag.iter().enumerate() {
        for row in 0..n {
            scaled[(row, col)] *= d;
        }
    }
    scaled * u.adjoint()
}

/// Real part of `f(ad Y)`; exact for functions that map conjugate eigenvalue
/// pairs to conjugate values, which covers every real-analytic entry of the
/// polar-map differential.
pub fn ad_function_real(model: &LieModel, y: &AlgebraVec, f: AdFunction) -> RMat {
    ad_function(model, y, f).map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_branches_are_continuous() {
        let fs = [
            AdFunction::SinOverZ,
            AdFunction::OneMinusCosOverZ,
            AdFunction::ZOverSin,
            AdFunction::OneMinusCosOverSin,
            AdFunction::OneMinusCosOverZSin,
            AdFunction::ExpMinusIOverZ,
        ];
        for f in fs {
            for z in [C64::new(0.0, 1.0001e-6), C64::new(0.99e-6, 0.0)] {
                let inside = scalar_function(f, z * 0.9999);
                let outside = scalar_function(f, z * 1.0001);
                assert!((inside - outside).norm() < 1e-9, "{f:?} jumps at {z}");
            }
        }
    }

    #[test]
    fn sinhc_limits() {
        assert_eq!(sinhc(0.0), 1.0);
        assert!((sinhc(1.0) - 1.0f64.sinh()).abs() < 1e-15);
        assert!((sinhc(0.99e-4) - sinhc(1.01e-4)).abs() < 1e-9);
    }

    #[test]
    fn cos_of_zero_is_identity() {
        let m = LieModel::su2();
        let c = ad_function_real(&m, &AlgebraVec::zeros(3), AdFunction::Cos);
        assert!((c - RMat::identity(3, 3)).norm() < 1e-15);
    }
}
