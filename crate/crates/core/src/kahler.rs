//! The Kähler structure of `G × g ≅ T*G ≅ G^C`.
//!
//! Tangent vectors at `(x, Y)` are left-trivialized pairs `(X1, X2)`, where
//! `X1` moves `x` by `x exp(s X1)` and `X2` moves `Y` linearly. Covectors use
//! the dual frame `{α_k, dy_k}`. `ω = dθ` with `θ(X1, X2) = <Y, X1>`, the
//! complex structure is pulled back along the polar map `(x, Y) ↦ x e^{iY}`
//! and `g(v, w) = ω(Jv, w)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::lie::{ad_function_real, AdFunction, AlgebraVec, GroupPoint, LieModel, NORMALIZATION};
use crate::report::CheckReport;
use crate::sampling::{max_abs, par_samples};
use crate::{CMat, Error, RMat, Result, C64};

/// Central-difference step on group and flat directions.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct BasePoint {
    pub x: GroupPoint,
    pub y: AlgebraVec,
}

impl BasePoint {
    pub fn new(x: GroupPoint, y: AlgebraVec) -> Self {
        Self { x, y }
    }

    pub fn at_identity(model: &LieModel, y: AlgebraVec) -> Self {
        Self {
            x: model.identity(),
            y,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentPair {
    pub x1: AlgebraVec,
    pub x2: AlgebraVec,
}

impl TangentPair {
    pub fn new(x1: AlgebraVec, x2: AlgebraVec) -> Self {
        Self { x1, x2 }
    }

    /// Stacked coordinates `(X1, X2)`.
    pub fn to_vector(&self) -> DVector<f64> {
        let n = self.x1.dim();
        DVector::from_fn(2 * n, |i, _| {
            if i < n {
                self.x1.coords()[i]
            } else {
                self.x2.coords()[i - n]
            }
        })
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        let n = v.len() / 2;
        Self {
            x1: AlgebraVec::new(v.rows(0, n).iter().copied().collect()),
            x2: AlgebraVec::new(v.rows(n, n).iter().copied().collect()),
        }
    }

    /// The `k`-th vector of the frame dual to `{α_k, dy_k}`.
    pub fn frame(n: usize, k: usize) -> Self {
        let mut v = DVector::zeros(2 * n);
        v[k] = 1.0;
        Self::from_vector(&v)
    }
}

/// A complex covector `Σ a_k α_k + b_k dy_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovectorPair {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl CovectorPair {
    pub fn from_row(row: &[C64]) -> Self {
        let n = row.len() / 2;
        Self {
            a: row[..n].to_vec(),
            b: row[n..].to_vec(),
        }
    }

    pub fn real(row: &DVector<f64>) -> Self {
        let c: Vec<C64> = row.iter().map(|x| C64::new(*x, 0.0)).collect();
        Self::from_row(&c)
    }

    pub fn to_row(&self) -> Vec<C64> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    pub fn pair(&self, v: &TangentPair) -> C64 {
        let a: C64 = self
            .a
            .iter()
            .zip(v.x1.as_slice())
            .map(|(c, x)| c * *x)
            .sum();
        let b: C64 = self
            .b
            .iter()
            .zip(v.x2.as_slice())
            .map(|(c, x)| c * *x)
            .sum();
        a + b
    }

    pub fn conj(&self) -> Self {
        Self {
            a: self.a.iter().map(|z| z.conj()).collect(),
            b: self.b.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_diff(&self, other: &CovectorPair) -> f64 {
        max_abs(
            self.to_row()
                .iter()
                .zip(other.to_row())
                .map(|(a, b)| (a - b).norm()),
        )
    }

    /// `α ∘ J`, as a covector.
    fn compose(&self, j: &RMat) -> Self {
        let row = self.to_row();
        let n2 = row.len();
        let out: Vec<C64> = (0..n2)
            .map(|c| (0..n2).map(|r| row[r] * j[(r, c)]).sum())
            .collect();
        Self::from_row(&out)
    }
}

pub fn theta_form(p: &BasePoint, v: &TangentPair) -> f64 {
    p.y.dot(&v.x1)
}

/// Matrix of `ω` at a point with fibre coordinate `Y`: `ω(v, w) = vᵀ Ω w`.
pub fn omega_matrix(model: &LieModel, y: &AlgebraVec) -> RMat {
    let n = model.dim();
    let mut om = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let yb: f64 = (0..n)
                .map(|k| y.coords()[k] * model.structure(i, j, k))
                .sum();
            om[(i, j)] = -yb;
        }
        om[(i, n + i)] = -1.0;
        om[(n + i, i)] = 1.0;
    }
    om
}

pub fn omega_form(model: &LieModel, p: &BasePoint, v: &TangentPair, w: &TangentPair) -> f64 {
    let bracket = model.bracket_unchecked(&v.x1, &w.x1);
    v.x2.dot(&w.x1) - v.x1.dot(&w.x2) - p.y.dot(&bracket)
}

fn blocks(a: &RMat, b: &RMat, c: &RMat, d: &RMat) -> RMat {
    let n = a.nrows();
    let mut m = RMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Differential of the polar map in left-trivialized coordinates: maps
/// `(X1, X2)` to `(A, B)` with `t⁻¹ dt = A + iB`.
pub fn dphi_matrix(model: &LieModel, y: &AlgebraVec) -> RMat {
    let cos = ad_function_real(model, y, AdFunction::Cos);
    let sin = ad_function_real(model, y, AdFunction::Sin);
    let one_minus_cos = ad_function_real(model, y, AdFunction::OneMinusCosOverZ);
    let sinc = ad_function_real(model, y, AdFunction::SinOverZ);
    blocks(&cos, &one_minus_cos, &(-sin), &sinc)
}

/// Central finite differences of `(x, Y) ↦ x e^{iY}`, left-trivialized.
pub fn dphi_finite_difference(model: &LieModel, p: &BasePoint, h: f64) -> RMat {
    let n = model.dim();
    let t = model.polar(&p.x, &p.y);
    let t_inv = t.inverse().expect("polar image is invertible");
    let mut out = RMat::zeros(2 * n, 2 * n);
    for k in 0..2 * n {
        let v = TangentPair::frame(n, k);
        let at = |s: f64| {
            let x = p.x.mul(&model.exp(&(&v.x1 * s)));
            let y = &p.y + &(&v.x2 * s);
            model.polar(&x, &y).into_matrix()
        };
        let d = (at(h) - at(-h)) * C64::new(0.5 / h, 0.0);
        let (a, b) = model.complex_coords_of(&(t_inv.matrix() * d));
        for i in 0..n {
            out[(i, k)] = a.coords()[i];
            out[(n + i, k)] = b.coords()[i];
        }
    }
    out
}

/// `J_e(A, B) = (-B, A)` on `g^C = g ⊕ i g`.
pub fn j_standard(n: usize) -> RMat {
    let z = RMat::zeros(n, n);
    let id = RMat::identity(n, n);
    blocks(&z, &(-&id), &id, &z)
}

/// `J = (TΦ)⁻¹ J_e TΦ`, in the closed block form
/// `[[(1-cos)/sin, -2(1-cos)/(ad sin)], [ad/sin, -(1-cos)/sin]]` of `ad Y`,
/// whose entries stay bounded for large `|Y|`.
pub fn complex_structure_j(model: &LieModel, y: &AlgebraVec) -> RMat {
    let t = ad_function_real(model, y, AdFunction::OneMinusCosOverSin);
    let q = ad_function_real(model, y, AdFunction::OneMinusCosOverZSin);
    let r = ad_function_real(model, y, AdFunction::ZOverSin);
    blocks(&t, &(q * -2.0), &r, &(-&t))
}

/// `J` by explicit conjugation of `J_e` with the polar-map differential.
pub fn complex_structure_by_conjugation(model: &LieModel, y: &AlgebraVec) -> Result<RMat> {
    let d = dphi_matrix(model, y);
    let lu = d.clone().lu();
    let rhs = j_standard(model.dim()) * &d;
    lu.solve(&rhs)
        .ok_or_else(|| Error::Numerical("polar-map differential is singular".into()))
}

/// Gram matrix of `g(v, w) = ω(Jv, w)`, i.e. `Jᵀ Ω`.
pub fn metric_matrix(model: &LieModel, y: &AlgebraVec) -> RMat {
    complex_structure_j(model, y).transpose() * omega_matrix(model, y)
}

pub fn metric_g(model: &LieModel, p: &BasePoint, v: &TangentPair, w: &TangentPair) -> f64 {
    let jv = TangentPair::from_vector(&(complex_structure_j(model, &p.y) * v.to_vector()));
    omega_form(model, p, &jv, w)
}

/// Scalar field on `G × g`.
pub type ScalarField<'a> = dyn Fn(&GroupPoint, &AlgebraVec) -> f64 + Sync + 'a;

/// `df` in the frame `{α_k, dy_k}` by central differences.
pub fn differential(model: &LieModel, f: &ScalarField<'_>, p: &BasePoint, h: f64) -> DVector<f64> {
    let n = model.dim();
    DVector::from_fn(2 * n, |k, _| {
        let v = TangentPair::frame(n, k);
        let at = |s: f64| {
            let x = p.x.mul(&model.exp(&(&v.x1 * s)));
            f(&x, &(&p.y + &(&v.x2 * s)))
        };
        (at(h) - at(-h)) / (2.0 * h)
    })
}

/// `∂̄ α = ½(α - i Jα)` with `(Jα)(v) = -α(Jv)`.
pub fn dbar_of_covector(model: &LieModel, y: &AlgebraVec, alpha: &CovectorPair) -> CovectorPair {
    let aj = alpha.compose(&complex_structure_j(model, y));
    let row: Vec<C64> = alpha
        .to_row()
        .iter()
        .zip(aj.to_row())
        .map(|(a, b)| (a + C64::new(0.0, 1.0) * b) * 0.5)
        .collect();
    CovectorPair::from_row(&row)
}

/// `∂̄ f` of a real function, from its finite-difference differential.
pub fn dbar_function(model: &LieModel, f: &ScalarField<'_>, p: &BasePoint) -> CovectorPair {
    let df = differential(model, f, p, FD_STEP);
    dbar_of_covector(model, &p.y, &CovectorPair::real(&df))
}

/// `∂ f = ½(df + i J df)`.
pub fn del_function(model: &LieModel, f: &ScalarField<'_>, p: &BasePoint) -> CovectorPair {
    dbar_function(model, f, p).conj()
}

/// `2πi π^{(0,1)} θ`.
pub fn two_pi_i_theta01(model: &LieModel, p: &BasePoint) -> CovectorPair {
    let n = model.dim();
    let mut theta = DVector::zeros(2 * n);
    theta.rows_mut(0, n).copy_from(p.y.coords());
    let t01 = dbar_of_covector(model, &p.y, &CovectorPair::real(&theta));
    let s = C64::new(0.0, 2.0 * PI);
    CovectorPair::from_row(&t01.to_row().iter().map(|z| z * s).collect::<Vec<_>>())
}

/// `|Y|²` of the fibre coordinate of a point of `G^C`, using
/// `t†t = e^{2iY}`.
pub fn fibre_norm_sq(model: &LieModel, t: &CMat) -> f64 {
    let p = t.adjoint() * t;
    let p = (&p + p.adjoint()) * C64::new(0.5, 0.0);
    let eig = p.symmetric_eigen();
    let u = &eig.eigenvectors;
    let mut logd = u.clone();
    for (c, lam) in eig.eigenvalues.iter().enumerate() {
        for r in 0..logd.nrows() {
            logd[(r, c)] *= C64::new(lam.ln(), 0.0);
        }
    }
    let log = logd * u.adjoint();
    let y = log * C64::new(0.0, -0.5);
    model.coords_of(&y).norm_sq()
}

/// Largest entry of `ω - (-i ∂∂̄|Y|²)` at `(e, Y)`, with the potential
/// differentiated numerically in the holomorphic chart
/// `z ↦ e^{iY} exp(Σ z_k e_k)`.
pub fn potential_residual(model: &LieModel, y: &AlgebraVec, h: f64) -> f64 {
    let n = model.dim();
    let base = model.exp_alg(&AlgebraVec::zeros(n), y).into_matrix();
    let rho = |a: &[f64], b: &[f64]| {
        let z = model.exp_alg(&AlgebraVec::new(a.to_vec()), &AlgebraVec::new(b.to_vec()));
        fibre_norm_sq(model, &(&base * z.matrix()))
    };
    // Real Hessian in (a, b) coordinates.
    let m = 2 * n;
    let eval = |shift: &[(usize, f64)]| {
        let mut v = vec![0.0; m];
        for (k, s) in shift {
            v[*k] += s;
        }
        rho(&v[..n], &v[n..])
    };
    let r0 = eval(&[]);
    let hess = RMat::from_fn(m, m, |i, j| {
        if i == j {
            (eval(&[(i, h)]) - 2.0 * r0 + eval(&[(i, -h)])) / (h * h)
        } else {
            (eval(&[(i, h), (j, h)]) - eval(&[(i, h), (j, -h)]) - eval(&[(i, -h), (j, h)])
                + eval(&[(i, -h), (j, -h)]))
                / (4.0 * h * h)
        }
    });
    // ρ_{j k̄} = ¼(ρ_{a_j a_k} + ρ_{b_j b_k} + i(ρ_{a_j b_k} - ρ_{b_j a_k})).
    let levi = DMatrix::from_fn(n, n, |j, k| {
        C64::new(
            0.25 * (hess[(j, k)] + hess[(n + j, n + k)]),
            0.25 * (hess[(j, n + k)] - hess[(n + j, k)]),
        )
    });
    let dz = |u: usize, j: usize| -> C64 {
        if u == j {
            C64::new(1.0, 0.0)
        } else if u == n + j {
            C64::new(0.0, 1.0)
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let pot = RMat::from_fn(m, m, |u, v| {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                s += levi[(j, k)] * (dz(u, j) * dz(v, k).conj() - dz(v, j) * dz(u, k).conj());
            }
        }
        (C64::new(0.0, -1.0) * s).re
    });
    // The chart's left-trivialized derivative at z = 0 is (A, B) = (da, db).
    let d = dphi_matrix(model, y);
    let dinv = match d.try_inverse() {
        Some(m) => m,
        None => return f64::INFINITY,
    };
    let form = dinv.transpose() * omega_matrix(model, y) * dinv;
    (pot - form).amax()
}

/// Left-trivialized derivative `e^{-S} ∂_j e^{S}` of the chart
/// `s ↦ exp(Σ s_k e_k)`, by finite differences of the matrix exponential.
fn chart_frame(model: &LieModel, s: &[f64], h: f64) -> RMat {
    let n = model.dim();
    let base = model.exp(&AlgebraVec::new(s.to_vec()));
    let inv = base.inverse().expect("unitary");
    let mut out = RMat::zeros(n, n);
    for j in 0..n {
        let mut sp = s.to_vec();
        let mut sm = s.to_vec();
        sp[j] += h;
        sm[j] -= h;
        let d = (model.exp(&AlgebraVec::new(sp)).into_matrix()
            - model.exp(&AlgebraVec::new(sm)).into_matrix())
            * C64::new(0.5 / h, 0.0);
        out.set_column(j, model.coords_of(&(inv.matrix() * d)).coords());
    }
    out
}

/// Residuals of `dθ = ω` (Palais formula in the chart
/// `(s, Y) ↦ (x exp(s), Y)`) and of `dω = 0`, both by finite differences.
pub fn closedness_residuals(model: &LieModel, y: &AlgebraVec) -> (f64, f64) {
    let n = model.dim();
    let m = 2 * n;
    let inner_h = 1e-6;
    let outer_h = 2e-4;
    // θ(∂_j) at chart coordinates c = (s, Y).
    let theta = |c: &[f64]| -> DVector<f64> {
        let frame = chart_frame(model, &c[..n], inner_h);
        let yv = DVector::from_column_slice(&c[n..]);
        let mut t = DVector::zeros(m);
        t.rows_mut(0, n).copy_from(&(frame.transpose() * yv));
        t
    };
    let omega_chart = |c: &[f64]| -> RMat {
        let frame = chart_frame(model, &c[..n], inner_h);
        let mut lift = RMat::zeros(m, m);
        lift.view_mut((0, 0), (n, n)).copy_from(&frame);
        lift.view_mut((n, n), (n, n)).fill_with_identity();
        lift.transpose() * omega_matrix(model, &AlgebraVec::new(c[n..].to_vec())) * lift
    };
    let mut c0 = vec![0.0; m];
    c0[n..].copy_from_slice(y.as_slice());
    let shifted = |i: usize, s: f64| {
        let mut c = c0.clone();
        c[i] += s;
        c
    };
    let dtheta: Vec<DVector<f64>> = (0..m)
        .map(|i| (theta(&shifted(i, outer_h)) - theta(&shifted(i, -outer_h))) / (2.0 * outer_h))
        .collect();
    let om = omega_matrix(model, y);
    let mut palais: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let d = dtheta[i][j] - dtheta[j][i];
            palais = palais.max((d - om[(i, j)]).abs());
        }
    }
    let domega: Vec<RMat> = (0..m)
        .map(|i| {
            (omega_chart(&shifted(i, outer_h)) - omega_chart(&shifted(i, -outer_h)))
                / (2.0 * outer_h)
        })
        .collect();
    let mut closed: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let v = domega[i][(j, k)] + domega[j][(k, i)] + domega[k][(i, j)];
                closed = closed.max(v.abs());
            }
        }
    }
    (palais, closed)
}

fn random_base_point<R: Rng + ?Sized>(
    model: &LieModel,
    rng: &mut R,
    scale: f64,
) -> Result<BasePoint> {
    Ok(BasePoint::new(
        model.random_group_point(rng)?,
        model.random_algebra(rng, scale),
    ))
}

/// `‖df‖²_g` for `f = log(1 + |Y|²)`, computed via `g` on the
/// finite-difference `df^#`, and in closed form `4|Y|²/(1+|Y|²)²`.
pub fn completeness_sample(model: &LieModel, p: &BasePoint) -> Result<(f64, f64, f64)> {
    let f = |_: &GroupPoint, y: &AlgebraVec| (1.0 + y.norm_sq()).ln();
    let df = differential(model, &f, p, FD_STEP);
    let g = metric_matrix(model, &p.y);
    let sharp = g
        .clone()
        .lu()
        .solve(&df)
        .ok_or_else(|| Error::Numerical("metric is singular".into()))?;
    let v = TangentPair::from_vector(&sharp);
    let numeric = metric_g(model, p, &v, &v);
    let r2 = p.y.norm_sq();
    let closed = 4.0 * r2 / ((1.0 + r2) * (1.0 + r2));
    // df^# = (0, 2Y / (1 + |Y|²)).
    let mut expect = DVector::zeros(sharp.len());
    expect
        .rows_mut(model.dim(), model.dim())
        .copy_from(&(p.y.coords() * (2.0 / (1.0 + r2))));
    let sharp_err = (sharp - expect).amax();
    Ok((numeric, closed, sharp_err))
}

pub fn completeness_certificate(model: &LieModel, samples: usize, seed: u64) -> CheckReport {
    let results = par_samples(seed, 11, samples, |rng| {
        // Radii spread over [0, 6] so both the small-|Y| and the saturated
        // regime are covered.
        let mut p = random_base_point(model, rng, 1.0)?;
        let r = 6.0 * rng.random::<f64>();
        let norm = p.y.norm();
        if norm > 0.0 {
            p.y = &p.y * (r / norm);
        }
        completeness_sample(model, &p)
    });
    let mut sup_numeric: f64 = 0.0;
    let mut sup_closed: f64 = 0.0;
    let mut agreement: f64 = 0.0;
    let mut sharp: f64 = 0.0;
    let mut failures = 0usize;
    for r in &results {
        match r {
            Ok((a, b, s)) => {
                sup_numeric = sup_numeric.max(*a);
                sup_closed = sup_closed.max(*b);
                agreement = agreement.max((a - b).abs());
                sharp = sharp.max(*s);
            }
            Err(_) => failures += 1,
        }
    }
    let bound = CheckReport::new(
        "kahler.completeness.bound",
        "f = log(1 + |Y|^2): |df|_g^2 <= 4",
        1e-9,
        (sup_numeric.max(sup_closed) - 4.0).max(0.0)
            + if failures > 0 { f64::INFINITY } else { 0.0 },
    )
    .with("sup_numeric", sup_numeric)
    .with("sup_closed_form", sup_closed)
    .with("bound", 4.0);
    let agree = CheckReport::new(
        "kahler.completeness.agreement",
        "|df|_g^2 = 4|Y|^2 / (1 + |Y|^2)^2",
        1e-6,
        agreement,
    )
    .with("df_sharp_max_error", sharp);
    CheckReport::combine(
        "kahler.completeness",
        "f = log(1 + |Y|^2), |df|_g^2 <= 4 (geodesic completeness)",
        vec![bound, agree],
    )
    .with("samples", samples as u64)
    .with("fd_step", FD_STEP)
    .with("bound", 4.0)
    .with("sup_norm_sq", sup_numeric)
    .with("normalization", NORMALIZATION)
}

/// Sample counts for [`kahler_certificates`].
#[derive(Clone, Copy, Debug)]
pub struct KahlerSampling {
    pub j_samples: usize,
    pub completeness_samples: usize,
    pub dphi_samples: usize,
    pub fd_samples: usize,
}

impl Default for KahlerSampling {
    fn default() -> Self {
        Self {
            j_samples: 10_000,
            completeness_samples: 10_000,
            dphi_samples: 1_000,
            fd_samples: 20,
        }
    }
}

pub fn j_squared_certificate(model: &LieModel, samples: usize, seed: u64) -> CheckReport {
    let n2 = 2 * model.dim();
    let res = par_samples(seed, 12, samples, |rng| {
        let y = model.random_algebra(rng, 1.0);
        let j = complex_structure_j(model, &y);
        let sq = (&j * &j + RMat::identity(n2, n2)).norm();
        let om = omega_matrix(model, &y);
        let compat = (j.transpose() * &om * &j - om).amax();
        (sq, compat)
    });
    let sq = max_abs(res.iter().map(|r| r.0));
    let compat = max_abs(res.iter().map(|r| r.1));
    CheckReport::combine(
        "kahler.complex_structure",
        "J = (T Phi)^-1 J_e (T Phi), J^2 = -1, omega(J., J.) = omega",
        vec![
            CheckReport::new("kahler.j_squared", "J^2 = -1", 1e-10, sq),
            CheckReport::new(
                "kahler.j_compatible",
                "omega(Jv, Jw) = omega(v, w)",
                1e-9,
                compat,
            ),
        ],
    )
    .with("samples", samples as u64)
}

pub fn dphi_certificate(model: &LieModel, samples: usize, seed: u64) -> CheckReport {
    let res = par_samples(seed, 13, samples, |rng| -> Result<(f64, f64)> {
        let p = random_base_point(model, rng, 1.0)?;
        let analytic = dphi_matrix(model, &p.y);
        let fd = dphi_finite_difference(model, &p, FD_STEP);
        let conj = complex_structure_by_conjugation(model, &p.y)?;
        let closed = complex_structure_j(model, &p.y);
        Ok(((analytic - fd).amax(), (conj - closed).amax()))
    });
    let fd = max_abs(
        res.iter()
            .map(|r| r.as_ref().map(|v| v.0).unwrap_or(f64::INFINITY)),
    );
    let conj = max_abs(
        res.iter()
            .map(|r| r.as_ref().map(|v| v.1).unwrap_or(f64::INFINITY)),
    );
    CheckReport::combine(
        "kahler.dphi",
        "T Phi = [[cos ad Y, (1 - cos ad Y)/ad Y], [-sin ad Y, sin ad Y / ad Y]]",
        vec![
            CheckReport::new(
                "kahler.dphi.finite_difference",
                "T Phi vs d/ds x e^{iY}",
                1e-6,
                fd,
            ),
            CheckReport::new(
                "kahler.dphi.j_closed_form",
                "J closed form vs conjugation",
                1e-9,
                conj,
            ),
        ],
    )
    .with("samples", samples as u64)
    .with("fd_step", FD_STEP)
}

pub fn metric_certificate(model: &LieModel, samples: usize, seed: u64) -> CheckReport {
    let res = par_samples(seed, 14, samples, |rng| {
        let y = model.random_algebra(rng, 1.0);
        let g = metric_matrix(model, &y);
        let asym = (&g - g.transpose()).amax();
        let sym = (&g + g.transpose()) * 0.5;
        let min_eig = sym.symmetric_eigen().eigenvalues.min();
        (asym, min_eig)
    });
    let asym = max_abs(res.iter().map(|r| r.0));
    let min_eig = res.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    CheckReport::combine(
        "kahler.metric",
        "g(X, Y) = omega(JX, Y) symmetric and positive",
        vec![
            CheckReport::new("kahler.metric.symmetry", "g(v, w) = g(w, v)", 1e-9, asym),
            CheckReport::condition("kahler.metric.positive", "g > 0", min_eig > 0.0)
                .with("min_eigenvalue", min_eig),
        ],
    )
    .with("samples", samples as u64)
    .with("min_eigenvalue", min_eig)
}

pub fn potential_certificate(model: &LieModel, samples: usize, seed: u64) -> CheckReport {
    let res = par_samples(seed, 15, samples, |rng| {
        let y = model.random_algebra(rng, 0.8);
        potential_residual(model, &y, 1e-3)
    });
    CheckReport::new(
        "kahler.potential",
        "omega = -i d dbar |Y|^2",
        1e-5,
        max_abs(res),
    )
    .with("samples", samples as u64)
    .with("fd_step", 1e-3)
}

pub fn closedness_certificate(model: &LieModel, samples: usize, seed: u64) -> CheckReport {
    let res = par_samples(seed, 16, samples, |rng| {
        closedness_residuals(model, &model.random_algebra(rng, 0.8))
    });
    CheckReport::combine(
        "kahler.closedness",
        "omega = d theta, d omega = 0",
        vec![
            CheckReport::new(
                "kahler.palais",
                "d theta = omega",
                1e-6,
                max_abs(res.iter().map(|r| r.0)),
            ),
            CheckReport::new(
                "kahler.d_omega",
                "d omega = 0",
                1e-5,
                max_abs(res.iter().map(|r| r.1)),
            ),
        ],
    )
    .with("samples", samples as u64)
}

pub fn dbar_certificate(model: &LieModel, samples: usize, seed: u64) -> CheckReport {
    let phi = |_: &GroupPoint, y: &AlgebraVec| PI * y.norm_sq();
    let res = par_samples(seed, 17, samples, |rng| -> Result<(f64, f64)> {
        let p = random_base_point(model, rng, 1.0)?;
        let lhs = dbar_function(model, &phi, &p);
        let rhs = two_pi_i_theta01(model, &p);
        // ∂f + ∂̄f reconstructs df for a real non-invariant f.
        let probe = |x: &GroupPoint, y: &AlgebraVec| {
            x.matrix()[(0, 0)].re * (1.0 + y.coords()[0]) + y.norm_sq().sin()
        };
        let d = dbar_function(model, &probe, &p);
        let df = differential(model, &probe, &p, FD_STEP);
        let sum: Vec<f64> = d
            .to_row()
            .iter()
            .zip(d.conj().to_row())
            .map(|(a, b)| (a + b).re)
            .collect();
        let recon = max_abs(sum.iter().zip(df.iter()).map(|(a, b)| a - b));
        Ok((lhs.max_diff(&rhs), recon))
    });
    let a = max_abs(
        res.iter()
            .map(|r| r.as_ref().map(|v| v.0).unwrap_or(f64::INFINITY)),
    );
    let b = max_abs(
        res.iter()
            .map(|r| r.as_ref().map(|v| v.1).unwrap_or(f64::INFINITY)),
    );
    CheckReport::combine(
        "kahler.dbar",
        "dbar(pi |Y|^2) = 2 pi i pi^(0,1) theta",
        vec![
            CheckReport::new(
                "kahler.dbar.theta",
                "dbar phi = 2 pi i pi^(0,1) theta",
                1e-7,
                a,
            ),
            CheckReport::new("kahler.dbar.split", "df = del f + dbar f", 1e-12, b),
        ],
    )
    .with("samples", samples as u64)
}

/// All Kähler-geometry certificates.
pub fn kahler_certificates(
    model: &LieModel,
    sampling: KahlerSampling,
    seed: u64,
) -> Vec<CheckReport> {
    vec![
        j_squared_certificate(model, sampling.j_samples, seed),
        dphi_certificate(model, sampling.dphi_samples, seed),
        metric_certificate(model, sampling.j_samples, seed),
        potential_certificate(model, sampling.fd_samples, seed),
        closedness_certificate(model, sampling.fd_samples, seed),
        dbar_certificate(model, sampling.fd_samples, seed),
        completeness_certificate(model, sampling.completeness_samples, seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, k: usize) -> AlgebraVec {
        AlgebraVec::basis(n, k)
    }

    fn tp(x1: AlgebraVec, x2: AlgebraVec) -> TangentPair {
        TangentPair::new(x1, x2)
    }

    #[test]
    fn theta_examples() {
        let m = LieModel::su2();
        let z = AlgebraVec::zeros(3);
        let p0 = BasePoint::at_identity(&m, z.clone());
        assert_eq!(theta_form(&p0, &tp(e(3, 0), e(3, 1))), 0.0);
        let p = BasePoint::at_identity(&m, e(3, 0));
        assert_eq!(theta_form(&p, &tp(e(3, 0), e(3, 2))), 1.0);
    }

    #[test]
    fn omega_examples() {
        let m = LieModel::su2();
        let z = AlgebraVec::zeros(3);
        let p = BasePoint::at_identity(&m, AlgebraVec::new(vec![0.3, -2.0, 1.1]));
        let v = tp(e(3, 0), z.clone());
        let w = tp(z.clone(), e(3, 0));
        assert_eq!(omega_form(&m, &p, &v, &w), -1.0);
        assert_eq!(omega_form(&m, &p, &w, &v), 1.0);
        let p3 = BasePoint::at_identity(&m, e(3, 2));
        assert_eq!(
            omega_form(&m, &p3, &tp(e(3, 0), z.clone()), &tp(e(3, 1), z.clone())),
            -1.0
        );
        // Matrix form agrees with the pairing formula.
        let om = omega_matrix(&m, &p.y);
        let v = tp(
            AlgebraVec::new(vec![1.0, 2.0, -1.0]),
            AlgebraVec::new(vec![0.5, 0.0, 3.0]),
        );
        let w = tp(
            AlgebraVec::new(vec![-0.2, 1.0, 0.4]),
            AlgebraVec::new(vec![1.5, -1.0, 0.0]),
        );
        let via_matrix = v.to_vector().dot(&(&om * w.to_vector()));
        assert!((via_matrix - omega_form(&m, &p, &v, &w)).abs() < 1e-14);
    }

    #[test]
    fn dphi_identity_cases() {
        let m = LieModel::su2();
        let d0 = dphi_matrix(&m, &AlgebraVec::zeros(3));
        assert!((d0 - RMat::identity(6, 6)).amax() < 1e-15);
        let t = LieModel::t2();
        let d = dphi_matrix(&t, &AlgebraVec::new(vec![1.3, -4.0]));
        assert!((d - RMat::identity(4, 4)).amax() < 1e-15);
    }

    #[test]
    fn dphi_determinant_is_eta_squared() {
        let m = LieModel::su2();
        for r in [0.3, 1.0, 2.5] {
            let y = AlgebraVec::new(vec![r * 0.6, r * 0.8, 0.0]);
            let eta = crate::lie::sinhc(r);
            assert!((dphi_matrix(&m, &y).determinant() - eta * eta).abs() < 1e-10 * eta * eta);
        }
    }

    #[test]
    fn j_examples() {
        let m = LieModel::su2();
        let j0 = complex_structure_j(&m, &AlgebraVec::zeros(3));
        assert!((j0 - j_standard(3)).amax() < 1e-15);
        let y = AlgebraVec::new(vec![0.4, -1.3, 0.9]);
        let j = complex_structure_j(&m, &y);
        let v = tp(AlgebraVec::zeros(3), &y * 2.0).to_vector();
        let jv = TangentPair::from_vector(&(&j * v));
        assert!((&jv.x1 + &(&y * 2.0)).norm() < 1e-12);
        assert!(jv.x2.norm() < 1e-12);
        let eig = j.complex_eigenvalues();
        let plus = eig
            .iter()
            .filter(|z| (z.im - 1.0).abs() < 1e-8 && z.re.abs() < 1e-8)
            .count();
        let minus = eig
            .iter()
            .filter(|z| (z.im + 1.0).abs() < 1e-8 && z.re.abs() < 1e-8)
            .count();
        assert_eq!((plus, minus), (3, 3));
    }

    #[test]
    fn metric_examples() {
        let m = LieModel::su2();
        let p = BasePoint::at_identity(&m, AlgebraVec::zeros(3));
        let v = tp(e(3, 0), AlgebraVec::zeros(3));
        assert!((metric_g(&m, &p, &v, &v) - 1.0).abs() < 1e-15);
        let g = metric_matrix(&m, &e(3, 2));
        let sym = (&g + g.transpose()) * 0.5;
        assert!(sym.symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn dbar_value_at_e3() {
        let m = LieModel::su2();
        let p = BasePoint::at_identity(&m, e(3, 2));
        let phi = |_: &GroupPoint, y: &AlgebraVec| PI * y.norm_sq();
        let d = dbar_function(&m, &phi, &p);
        let expect = CovectorPair {
            a: vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, PI)],
            b: vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(PI, 0.0)],
        };
        assert!(d.max_diff(&expect) < 1e-9);
        let constant = |_: &GroupPoint, _: &AlgebraVec| 2.5;
        let zero = dbar_function(&m, &constant, &p);
        assert!(zero.to_row().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn completeness_closed_form_at_unit_radius() {
        let m = LieModel::su2();
        let p = BasePoint::at_identity(&m, e(3, 1));
        let (num, closed, _) = completeness_sample(&m, &p).unwrap();
        assert!((closed - 1.0).abs() < 1e-15);
        assert!((num - 1.0).abs() < 1e-8);
        let p0 = BasePoint::at_identity(&m, AlgebraVec::zeros(3));
        assert_eq!(completeness_sample(&m, &p0).unwrap().1, 0.0);
    }

    #[test]
    fn potential_and_closedness_small_samples() {
        for m in [LieModel::u1(), LieModel::su2()] {
            let y = AlgebraVec::new((0..m.dim()).map(|k| 0.3 + 0.2 * k as f64).collect());
            assert!(potential_residual(&m, &y, 1e-3) < 1e-5);
            let (palais, closed) = closedness_residuals(&m, &y);
            assert!(palais < 1e-6, "{palais}");
            assert!(closed < 1e-5, "{closed}");
        }
    }
}
