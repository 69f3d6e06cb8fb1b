//! Weyl-invariant potentials `K̃` on `t`, the equivariant gradient
//! `μ = ∇K`, and the spectrum of the hermitian map `Θ - i ad μ`.
//!
//! On `t`, the spectrum is the Hessian of `K̃` together with
//! `α(μ)(coth α(Y) + 1)` for every root `α`. Inside the guard band
//! `|α(Y)| < 1e-6` the root value is the limit `(αᵀ H α / |α|²)(t coth t + t)`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::kahler::{complex_structure_j, BasePoint, TangentPair, FD_STEP};
use crate::lie::{sinhc, AlgebraVec, GroupPoint, LieModel, ModelKind, RealRoot};
use crate::report::CheckReport;
use crate::sampling::{max_abs, par_samples, sample_rng};
use crate::{CMat, Error, RMat, Result, C64};

/// Half-width of the band around root hyperplanes where the hyperplane limit
/// replaces the closed form.
pub const GUARD_BAND: f64 = 1e-6;

/// Twist presets `(a, b)` for `a|Y|² + b log η`.
pub const TWIST_PRESETS: [(&str, f64, f64); 2] =
    [("dolbeault", 2.0 * PI, 2.0), ("spin", 2.0 * PI, 1.0)];

/// Natural cubic spline through `(x_i, y_i)`, `x` strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::Usage(
                "a spline needs at least three (x, y) pairs".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage(
                "spline abscissae must be strictly increasing".into(),
            ));
        }
        // Tridiagonal system for the interior second derivatives.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let cc = h1 / 6.0;
            let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(Self { x, y, m })
    }

    fn segment(&self, t: f64) -> usize {
        match self
            .x
            .binary_search_by(|v| v.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.clamp(1, self.x.len() - 1) - 1,
        }
    }

    /// Value and first two derivatives; linear extrapolation outside the knots.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let tc = t.clamp(x0, x1);
        let a = (x1 - tc) / h;
        let b = (tc - x0) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dv = (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0
            + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let ddv = a * m0 + b * m1;
        if t < x0 || t > x1 {
            (v + dv * (t - tc), dv, 0.0)
        } else {
            (v, dv, ddv)
        }
    }
}

/// Read `x value` pairs, one per line; `#` starts a comment.
pub fn parse_table(text: &str) -> Result<CubicSpline> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: k + 1,
                message: format!("'{s}' is not a number"),
            })
        };
        if parts.len() != 2 {
            return Err(Error::Parse {
                line: k + 1,
                message: "expected two columns: x value".into(),
            });
        }
        xs.push(parse(parts[0])?);
        ys.push(parse(parts[1])?);
    }
    CubicSpline::new(xs, ys)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// `|Y|²`
    Square,
    /// `-|Y|²`
    NegSquare,
    /// `log η`
    LogEta,
    /// `a|Y|² + b log η`
    Combined { a: f64, b: f64 },
    /// `cos` of one torus coordinate.
    Cosine { coord: usize },
    /// Cubic interpolation of tabulated values, rank one only.
    Tabulated(CubicSpline),
}

/// A potential `K̃` on `t`, extended to `g` by conjugation invariance.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantPotential {
    pub name: String,
    pub kind: PotentialKind,
    /// Verify Weyl invariance before use.
    pub check_symmetry: bool,
}

/// `coth t - 1/t`, the derivative of `log(sinh t / t)`.
fn log_sinhc_d1(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        let t2 = t * t;
        t * (1.0 / 3.0 - t2 / 45.0 + 2.0 * t2 * t2 / 945.0)
    } else {
        1.0 / t.tanh() - 1.0 / t
    }
}

/// `1/t² - 1/sinh² t`, the second derivative of `log(sinh t / t)`.
fn log_sinhc_d2(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        let t2 = t * t;
        1.0 / 3.0 - t2 / 15.0 + 2.0 * t2 * t2 / 189.0
    } else {
        let s = t.sinh();
        1.0 / (t * t) - 1.0 / (s * s)
    }
}

/// `t coth t`.
fn t_coth_t(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        1.0 + t * t / 3.0
    } else {
        t / t.tanh()
    }
}

impl InvariantPotential {
    fn new(name: &str, kind: PotentialKind) -> Self {
        Self {
            name: name.to_string(),
            kind,
            check_symmetry: true,
        }
    }

    pub fn square() -> Self {
        Self::new("square", PotentialKind::Square)
    }

    pub fn neg_square() -> Self {
        Self::new("negsquare", PotentialKind::NegSquare)
    }

    pub fn log_eta() -> Self {
        Self::new("logeta", PotentialKind::LogEta)
    }

    pub fn combined(a: f64, b: f64) -> Self {
        Self::new(
            &format!("combined:{a},{b}"),
            PotentialKind::Combined { a, b },
        )
    }

    pub fn cosine(coord: usize) -> Self {
        Self::new(&format!("cos:{coord}"), PotentialKind::Cosine { coord })
    }

    pub fn tabulated(name: &str, spline: CubicSpline) -> Self {
        Self::new(name, PotentialKind::Tabulated(spline))
    }

    pub fn load_table(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::tabulated(
            &format!("table:{}", path.display()),
            parse_table(&text)?,
        ))
    }

    /// `square`, `negsquare`, `logeta`, `combined:a,b`, `cos:k` or
    /// `table:<path>`.
    pub fn by_name(name: &str) -> Result<Self> {
        let bad = || {
            Error::Usage(format!("unknown potential '{name}'; use square, negsquare, logeta, combined:a,b, cos:k or table:<path>"))
        };
        match name {
            "square" => Ok(Self::square()),
            "negsquare" => Ok(Self::neg_square()),
            "logeta" => Ok(Self::log_eta()),
            _ => {
                if let Some(rest) = name.strip_prefix("combined:") {
                    let (a, b) = rest.split_once(',').ok_or_else(bad)?;
                    let a = a.trim().parse().map_err(|_| bad())?;
                    let b = b.trim().parse().map_err(|_| bad())?;
                    Ok(Self::combined(a, b))
                } else if let Some(rest) = name.strip_prefix("cos:") {
                    Ok(Self::cosine(rest.trim().parse().map_err(|_| bad())?))
                } else if let Some(rest) = name.strip_prefix("table:") {
                    Self::load_table(Path::new(rest))
                } else {
                    Err(bad())
                }
            }
        }
    }

    fn check_rank(&self, model: &LieModel) -> Result<()> {
        match &self.kind {
            PotentialKind::Cosine { coord } if *coord >= model.rank() => {
                Err(Error::Usage(format!(
                    "cos:{coord} needs a torus coordinate below rank {}",
                    model.rank()
                )))
            }
            PotentialKind::Tabulated(_) if model.rank() != 1 => Err(Error::Usage(
                "tabulated potentials are defined on rank-one tori only".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Value, gradient and Hessian of `K̃` at `y ∈ t`.
    pub fn jet(&self, model: &LieModel, y: &[f64]) -> (f64, Vec<f64>, RMat) {
        let r = y.len();
        let square = || {
            let v: f64 = y.iter().map(|a| a * a).sum();
            (
                v,
                y.iter().map(|a| 2.0 * a).collect::<Vec<_>>(),
                RMat::identity(r, r) * 2.0,
            )
        };
        let log_eta = || {
            let mut v = 0.0;
            let mut g = vec![0.0; r];
            let mut h = RMat::zeros(r, r);
            for a in model.positive_roots() {
                let t = a.eval(y);
                v += sinhc(t).ln();
                let d1 = log_sinhc_d1(t);
                let d2 = log_sinhc_d2(t);
                for i in 0..r {
                    g[i] += a.covector[i] * d1;
                    for j in 0..r {
                        h[(i, j)] += a.covector[i] * a.covector[j] * d2;
                    }
                }
            }
            (v, g, h)
        };
        match &self.kind {
            PotentialKind::Square => square(),
            PotentialKind::NegSquare => {
                let (v, g, h) = square();
                (-v, g.iter().map(|x| -x).collect(), -h)
            }
            PotentialKind::LogEta => log_eta(),
            PotentialKind::Combined { a, b } => {
                let (v0, g0, h0) = square();
                let (v1, g1, h1) = log_eta();
                (
                    a * v0 + b * v1,
                    g0.iter().zip(&g1).map(|(p, q)| a * p + b * q).collect(),
                    h0 * *a + h1 * *b,
                )
            }
            PotentialKind::Cosine { coord } => {
                let k = (*coord).min(r.saturating_sub(1));
                let mut g = vec![0.0; r];
                let mut h = RMat::zeros(r, r);
                g[k] = -y[k].sin();
                h[(k, k)] = -y[k].cos();
                (y[k].cos(), g, h)
            }
            PotentialKind::Tabulated(s) => {
                let (v, d, dd) = s.eval(y[0]);
                (v, vec![d], RMat::from_element(1, 1, dd))
            }
        }
    }

    pub fn value(&self, model: &LieModel, y: &[f64]) -> f64 {
        self.jet(model, y).0
    }

    /// Largest `|K̃(wY) - K̃(Y)|` over Weyl elements and random `Y`.
    pub fn invariance_defect(&self, model: &LieModel, samples: usize, seed: u64) -> Result<f64> {
        self.check_rank(model)?;
        let weyl = model.weyl_group()?;
        let r = model.rank();
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let mut rng = sample_rng(seed, 41, i as u64);
            let y: Vec<f64> = (0..r).map(|_| rng.random_range(-3.0..3.0)).collect();
            let base = self.value(model, &y);
            for w in &weyl {
                worst = worst.max((self.value(model, &w.act(&y)) - base).abs());
            }
        }
        Ok(worst)
    }

    /// Precondition check for the Weyl invariance of `K̃`.
    pub fn ensure_invariant(&self, model: &LieModel) -> Result<()> {
        self.check_rank(model)?;
        if !self.check_symmetry {
            return Ok(());
        }
        let d = self.invariance_defect(model, 64, 0)?;
        if d > 1e-10 {
            return Err(Error::Precondition(format!(
                "potential '{}' is not Weyl invariant (defect {d:.3e})",
                self.name
            )));
        }
        Ok(())
    }

    /// `∇K(Y) = Ad_h ∇K̃(y)` for `Y = Ad_h y`.
    pub fn gradient_on_g(&self, model: &LieModel, y: &AlgebraVec) -> Result<AlgebraVec> {
        let (h, y_t) = model.torus_conjugate(y)?;
        let (_, g, _) = self.jet(model, &y_t);
        Ok(model.adjoint_unchecked(&h, &model.torus_embed(&g)))
    }
}

/// `μ(g, Y) = Ad_g ∇K(Y)`.
pub fn mu_gradient(model: &LieModel, k: &InvariantPotential, p: &BasePoint) -> Result<AlgebraVec> {
    let grad = k.gradient_on_g(model, &p.y)?;
    Ok(model.adjoint_unchecked(&p.x, &grad))
}

/// One root value of the spectrum.
pub fn root_value(alpha: &RealRoot, grad: &[f64], hess: &RMat, y: &[f64]) -> f64 {
    let t = alpha.eval(y);
    if t.abs() < GUARD_BAND {
        hyperplane_limit(alpha, hess, t)
    } else {
        alpha.eval(grad) * (1.0 / t.tanh() + 1.0)
    }
}

/// `(αᵀ H α / |α|²)(t coth t + t)`: the root value with `α(μ)/α(Y)` replaced
/// by its limit on the hyperplane.
pub fn hyperplane_limit(alpha: &RealRoot, hess: &RMat, t: f64) -> f64 {
    let a = DVector::from_vec(alpha.covector.clone());
    let ratio = (a.transpose() * hess * &a)[(0, 0)] / alpha.norm_sq();
    ratio * (t_coth_t(t) + t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub point: Vec<f64>,
    pub hessian_eigenvalues: Vec<f64>,
    pub root_eigenvalues: Vec<(Vec<f64>, f64)>,
    pub min_eigenvalue: f64,
    /// Distance of the point to the nearest root hyperplane.
    pub hyperplane_distance: f64,
    pub oracle_residual: Option<f64>,
}

impl SpectrumReport {
    /// Every eigenvalue, sorted.
    pub fn all(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .hessian_eigenvalues
            .iter()
            .copied()
            .chain(self.root_eigenvalues.iter().map(|r| r.1))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Closed-form spectrum of `Θ - i ad μ` at `Y ∈ t`.
pub fn theta_spectrum(model: &LieModel, k: &InvariantPotential, y: &[f64]) -> SpectrumReport {
    let (_, grad, hess) = k.jet(model, y);
    let mut hev: Vec<f64> = hess
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    hev.sort_by(f64::total_cmp);
    let roots: Vec<(Vec<f64>, f64)> = model
        .roots()
        .iter()
        .map(|a| (a.covector.clone(), root_value(a, &grad, &hess, y)))
        .collect();
    let min = hev
        .iter()
        .copied()
        .chain(roots.iter().map(|r| r.1))
        .fold(f64::INFINITY, f64::min);
    let dist = model
        .positive_roots()
        .iter()
        .map(|a| a.eval(y).abs() / a.norm_sq().sqrt())
        .fold(f64::INFINITY, f64::min);
    SpectrumReport {
        point: y.to_vec(),
        hessian_eigenvalues: hev,
        root_eigenvalues: roots,
        min_eigenvalue: min,
        hyperplane_distance: dist,
        oracle_residual: None,
    }
}

/// `Θ - i ad μ` at `(e, Y)` assembled from its definition: the column of
/// `e_l` is `dμ(J(e_l, 0)) - i[μ, e_l]`, with `dμ` by central differences
/// of the equivariant `μ` and one Richardson step.
pub fn theta_matrix_oracle(model: &LieModel, k: &InvariantPotential, y: &[f64]) -> Result<CMat> {
    let dist = model
        .positive_roots()
        .iter()
        .map(|a| a.eval(y).abs() / a.norm_sq().sqrt())
        .fold(f64::INFINITY, f64::min);
    if dist < GUARD_BAND {
        return Err(Error::Numerical(format!(
            "finite differences break down {dist:.3e} from a root hyperplane"
        )));
    }
    let n = model.dim();
    let yv = model.torus_embed(y);
    let j = complex_structure_j(model, &yv);
    let mu0 = mu_gradient(model, k, &BasePoint::at_identity(model, yv.clone()))?;
    let mut m = CMat::zeros(n, n);
    for l in 0..n {
        let v = TangentPair::from_vector(&j.column(l).into_owned());
        let mu_at = |s: f64| -> Result<AlgebraVec> {
            let x: GroupPoint = model.exp(&(&v.x1 * s));
            mu_gradient(model, k, &BasePoint::new(x, &yv + &(&v.x2 * s)))
        };
        let central =
            |h: f64| -> Result<AlgebraVec> { Ok(&(&mu_at(h)? - &mu_at(-h)?) * (0.5 / h)) };
        let d1 = central(FD_STEP)?;
        let d2 = central(FD_STEP / 2.0)?;
        let dmu = &(&(&d2 * 4.0) - &d1) * (1.0 / 3.0);
        let br = model.bracket_unchecked(&mu0, &AlgebraVec::basis(n, l));
        for r in 0..n {
            m[(r, l)] = C64::new(dmu.coords()[r], -br.coords()[r]);
        }
    }
    Ok(m)
}

/// Sorted eigenvalues of the hermitian part and `‖M - M†‖`.
pub fn hermitian_spectrum(m: &CMat) -> (Vec<f64>, f64) {
    let skew = (m - m.adjoint()).norm();
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    (ev, skew)
}

/// Multiset relative distance between two sorted spectra.
pub fn spectrum_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let s = x.abs().max(y.abs());
            if s < 1e-12 {
                0.0
            } else {
                (x - y).abs() / s
            }
        })
        .fold(0.0, f64::max)
}

/// Closed-form spectrum with the oracle residual filled in.
pub fn spectrum_with_oracle(
    model: &LieModel,
    k: &InvariantPotential,
    y: &[f64],
) -> Result<(SpectrumReport, f64)> {
    let mut s = theta_spectrum(model, k, y);
    let m = theta_matrix_oracle(model, k, y)?;
    let (ev, skew) = hermitian_spectrum(&m);
    s.oracle_residual = Some(spectrum_distance(&s.all(), &ev));
    Ok((s, skew))
}

/// Cartesian grid on `[-radius, radius]^r` with `points` per axis.
pub fn torus_grid(rank: usize, radius: f64, points: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..points)
        .map(|k| -radius + 2.0 * radius * k as f64 / (points - 1).max(1) as f64)
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..rank {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |a| {
                    let mut q = p.clone();
                    q.push(*a);
                    q
                })
            })
            .collect();
    }
    out
}

/// Default grid: 64 points on `t`, none on a root hyperplane.
pub fn default_grid(model: &LieModel) -> Vec<Vec<f64>> {
    match model.rank() {
        1 => torus_grid(1, 4.0, 64),
        2 => torus_grid(2, 3.0, 8),
        r => torus_grid(r, 2.0, 3),
    }
}

/// Closed-form spectra against the matrix oracle at every grid point.
pub fn oracle_agreement_certificate(
    model: &LieModel,
    k: &InvariantPotential,
    grid: &[Vec<f64>],
) -> Result<CheckReport> {
    k.ensure_invariant(model)?;
    let rows: Vec<Result<(f64, f64)>> = grid
        .par_iter()
        .map(|y| {
            spectrum_with_oracle(model, k, y)
                .map(|(s, skew)| (s.oracle_residual.unwrap_or(f64::INFINITY), skew))
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut skew: f64 = 0.0;
    let mut used = 0u64;
    for r in rows {
        let (a, b) = r?;
        worst = worst.max(a);
        skew = skew.max(b);
        used += 1;
    }
    Ok(CheckReport::combine(
        &format!("psh.oracle.{}", k.name),
        "spectrum of Theta - i ad mu",
        vec![
            CheckReport::new(
                "psh.oracle.spectrum",
                "alpha(mu)(coth alpha + 1) and Hess K~",
                1e-4,
                worst,
            ),
            CheckReport::new(
                "psh.oracle.hermitian",
                "Theta - i ad mu hermitian",
                1e-8,
                skew,
            ),
            CheckReport::condition(
                "psh.oracle.grid_size",
                "at least 50 grid points",
                used >= 50,
            )
            .with("points", used),
        ],
    ))
}

/// `μ(hgh⁻¹, Ad_h Y) = Ad_h μ(g, Y)` on random samples.
pub fn mu_equivariance_certificate(
    model: &LieModel,
    k: &InvariantPotential,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    k.ensure_invariant(model)?;
    let res = par_samples(seed, 42, samples, |rng| -> Result<f64> {
        let h = model.random_group_point(rng)?;
        let g = model.random_group_point(rng)?;
        let y = model.random_algebra(rng, 1.5);
        let hgh = GroupPoint::new(h.matrix() * g.matrix() * h.matrix().adjoint());
        let lhs = mu_gradient(
            model,
            k,
            &BasePoint::new(hgh, model.adjoint_unchecked(&h, &y)),
        )?;
        let rhs = model.adjoint_unchecked(&h, &mu_gradient(model, k, &BasePoint::new(g, y))?);
        Ok((&lhs - &rhs).norm())
    });
    let err = max_abs(res.into_iter().map(|r| r.unwrap_or(f64::INFINITY)));
    Ok(CheckReport::new(
        &format!("psh.mu_equivariance.{}", k.name),
        "mu(h g h^-1, Ad_h Y) = Ad_h mu(g, Y)",
        1e-8,
        err,
    )
    .with("samples", samples as u64))
}

/// Outcome of a grid search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub psh: bool,
    pub convex: bool,
    pub min_eigenvalue: f64,
    pub witness: Option<Vec<f64>>,
    pub min_hessian_eigenvalue: f64,
    pub hessian_witness: Option<Vec<f64>>,
}

pub fn grid_verdict(
    model: &LieModel,
    k: &InvariantPotential,
    grid: &[Vec<f64>],
    tol: f64,
) -> Verdict {
    let mut v = Verdict {
        psh: true,
        convex: true,
        min_eigenvalue: f64::INFINITY,
        witness: None,
        min_hessian_eigenvalue: f64::INFINITY,
        hessian_witness: None,
    };
    for y in grid {
        let s = theta_spectrum(model, k, y);
        if s.min_eigenvalue < v.min_eigenvalue {
            v.min_eigenvalue = s.min_eigenvalue;
            v.witness = Some(y.clone());
        }
        let h = s.hessian_eigenvalues.first().copied().unwrap_or(0.0);
        if h < v.min_hessian_eigenvalue {
            v.min_hessian_eigenvalue = h;
            v.hessian_witness = Some(y.clone());
        }
    }
    v.psh = v.min_eigenvalue >= -tol;
    v.convex = v.min_hessian_eigenvalue >= -tol;
    if v.psh {
        v.witness = None;
    }
    if v.convex {
        v.hessian_witness = None;
    }
    v
}

/// Convexity of `K̃` and plurisubharmonicity of `K` agree on the grid.
pub fn psh_verdict(
    model: &LieModel,
    k: &InvariantPotential,
    grid: &[Vec<f64>],
) -> Result<CheckReport> {
    k.ensure_invariant(model)?;
    let v = grid_verdict(model, k, grid, 1e-8);
    let label = match (v.psh, v.convex) {
        (true, _) => "psh",
        (false, true) => "not_psh_but_convex",
        (false, false) => "not_psh",
    };
    Ok(CheckReport::condition(
        &format!("psh.verdict.{}", k.name),
        "K~ convex <=> K plurisubharmonic",
        v.psh == v.convex,
    )
    .with("verdict", label)
    .with("grid_points", grid.len() as u64)
    .with_json("detail", &v))
}

/// `α(∇K̃(Y)) / α(Y) ≥ 0` for convex `K̃`.
pub fn root_sign_certificate(
    model: &LieModel,
    k: &InvariantPotential,
    grid: &[Vec<f64>],
) -> CheckReport {
    let mut worst = 0.0f64;
    for y in grid {
        let (_, g, _) = k.jet(model, y);
        for a in model.positive_roots() {
            let t = a.eval(y);
            if t.abs() > GUARD_BAND {
                worst = worst.min(a.eval(&g) / t);
            }
        }
    }
    CheckReport::new(
        &format!("psh.root_sign.{}", k.name),
        "alpha(grad K~(Y)) / alpha(Y) >= 0",
        1e-10,
        (-worst).max(0.0),
    )
    .with("min_ratio", worst)
}

/// Closed form at `|α(Y)| = 1e-3` against the hyperplane limit.
pub fn smooth_limit_certificate(model: &LieModel, k: &InvariantPotential) -> CheckReport {
    let id = format!("psh.smooth_limit.{}", k.name);
    let roots = model.positive_roots();
    if roots.is_empty() {
        return CheckReport::new(&id, "hyperplane limit", 1e-5, 0.0).with("note", "no roots");
    }
    let mut worst: f64 = 0.0;
    for a in &roots {
        let scale = 1e-3 / a.norm_sq();
        for sign in [1.0, -1.0] {
            let y: Vec<f64> = a.covector.iter().map(|c| sign * c * scale).collect();
            let (_, grad, hess) = k.jet(model, &y);
            for b in model.roots() {
                let t = b.eval(&y);
                let closed = b.eval(&grad) * (1.0 / t.tanh() + 1.0);
                worst = worst.max((closed - hyperplane_limit(b, &hess, t)).abs());
            }
        }
    }
    CheckReport::new(
        &id,
        "alpha(mu)/alpha(Y) (alpha(Y) coth alpha(Y) + alpha(Y))",
        1e-5,
        worst,
    )
}

/// `K̃ = log η` has non-negative spectrum everywhere.
pub fn canonical_semi_negativity_certificate(
    model: &LieModel,
    grid: &[Vec<f64>],
) -> Result<CheckReport> {
    let k = InvariantPotential::log_eta();
    k.ensure_invariant(model)?;
    let v = grid_verdict(model, &k, grid, 1e-8);
    let origin = vec![0.0; model.rank()];
    let (_, _, h0) = k.jet(model, &origin);
    Ok(CheckReport::new(
        "psh.canonical_semi_negative",
        "K~ = log eta convex, canonical bundle semi-negative",
        1e-8,
        (-v.min_eigenvalue).max(0.0),
    )
    .with("min_eigenvalue", v.min_eigenvalue)
    .with(
        "hessian_at_origin",
        h0.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
    .with("grid_points", grid.len() as u64))
}

/// Strictly positive spectrum of `a|Y|² + b log η` on the grid, also for
/// `(a, b)` perturbed by ±10%.
pub fn twist_positivity_certificate(
    model: &LieModel,
    name: &str,
    a: f64,
    b: f64,
    grid: &[Vec<f64>],
) -> Result<CheckReport> {
    if a <= 0.0 {
        return Err(Error::Precondition(format!("twist needs a > 0, got {a}")));
    }
    const MARGIN: f64 = 1e-8;
    let mut min = f64::INFINITY;
    let mut neighbourhood = f64::INFINITY;
    for (da, db) in [(1.0, 1.0), (0.9, 0.9), (0.9, 1.1), (1.1, 0.9), (1.1, 1.1)] {
        let k = InvariantPotential::combined(a * da, b * db);
        let v = grid_verdict(model, &k, grid, 0.0);
        if da == 1.0 && db == 1.0 {
            min = v.min_eigenvalue;
        }
        neighbourhood = neighbourhood.min(v.min_eigenvalue);
    }
    Ok(CheckReport::new(
        &format!("psh.twist.{name}"),
        "K* (x) L positive: a|Y|^2 + b log eta strictly convex",
        0.0,
        (MARGIN - min.min(neighbourhood)).max(0.0),
    )
    .with("a", a)
    .with("b", b)
    .with("margin", min)
    .with("neighbourhood_margin", neighbourhood)
    .with("threshold", MARGIN))
}

/// Grid on `|y| ≤ 5` including the root hyperplanes.
pub fn closed_form_grid(model: &LieModel) -> Vec<Vec<f64>> {
    match model.rank() {
        1 => torus_grid(1, 5.0, 201),
        2 => torus_grid(2, 5.0, 41),
        r => torus_grid(r, 5.0, 11),
    }
}

pub fn psh_certificates(model: &LieModel, seed: u64) -> Result<Vec<CheckReport>> {
    if matches!(model.kind(), ModelKind::Custom) {
        return Err(Error::Model(
            "PSH analysis needs a torus parametrization".into(),
        ));
    }
    let grid = default_grid(model);
    let wide = closed_form_grid(model);
    let mut potentials = vec![InvariantPotential::square(), InvariantPotential::log_eta()];
    for (_, a, b) in TWIST_PRESETS {
        potentials.push(InvariantPotential::combined(a, b));
    }
    let mut out = Vec::new();
    for k in &potentials {
        out.push(oracle_agreement_certificate(model, k, &grid)?);
    }
    for k in &potentials[..2] {
        out.push(mu_equivariance_certificate(model, k, 1000, seed)?);
        out.push(root_sign_certificate(model, k, &wide));
        out.push(smooth_limit_certificate(model, k));
    }
    for k in [
        InvariantPotential::square(),
        InvariantPotential::neg_square(),
        InvariantPotential::cosine(0),
    ] {
        out.push(psh_verdict(model, &k, &wide)?);
    }
    out.push(canonical_semi_negativity_certificate(model, &wide)?);
    for (name, a, b) in TWIST_PRESETS {
        out.push(twist_positivity_certificate(model, name, a, b, &wide)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_examples() {
        let m = LieModel::su2();
        let p = BasePoint::at_identity(&m, AlgebraVec::new(vec![0.0, 0.0, 1.0]));
        let sq = mu_gradient(&m, &InvariantPotential::square(), &p).unwrap();
        assert!((&sq - &AlgebraVec::new(vec![0.0, 0.0, 2.0])).norm() < 1e-12);
        let le = mu_gradient(&m, &InvariantPotential::log_eta(), &p).unwrap();
        let expected = 1.0 / 1f64.tanh() - 1.0;
        assert!((le.coords()[2] - expected).abs() < 1e-12);
        assert!((expected - 0.3130).abs() < 1e-4);
        let zero = InvariantPotential::combined(0.0, 0.0);
        assert_eq!(mu_gradient(&m, &zero, &p).unwrap().norm(), 0.0);
    }

    #[test]
    fn square_spectrum_at_e3() {
        let m = LieModel::su2();
        let s = theta_spectrum(&m, &InvariantPotential::square(), &[1.0]);
        let all = s.all();
        let c = 1.0 / 1f64.tanh();
        let expected = [2.0 * (c - 1.0), 2.0, 2.0 * (c + 1.0)];
        for (a, b) in all.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((expected[2] - 4.626071).abs() < 1e-6);
        assert!((expected[0] - 0.626071).abs() < 1e-6);
        let (ev, skew) = hermitian_spectrum(
            &theta_matrix_oracle(&m, &InvariantPotential::square(), &[1.0]).unwrap(),
        );
        assert!(skew < 1e-8);
        assert!(spectrum_distance(&ev, &all) < 1e-4, "{ev:?}");
    }

    #[test]
    fn limit_at_origin() {
        let m = LieModel::su2();
        let s = theta_spectrum(&m, &InvariantPotential::square(), &[0.0]);
        assert!(s.all().iter().all(|v| (v - 2.0).abs() < 1e-12));
        let le = theta_spectrum(&m, &InvariantPotential::log_eta(), &[0.0]);
        assert!((le.hessian_eigenvalues[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn torus_spectrum_is_hessian() {
        let m = LieModel::t2();
        let s = theta_spectrum(&m, &InvariantPotential::cosine(1), &[0.3, 0.2]);
        assert!(s.root_eigenvalues.is_empty());
        let (ev, _) = hermitian_spectrum(
            &theta_matrix_oracle(&m, &InvariantPotential::cosine(1), &[0.3, 0.2]).unwrap(),
        );
        assert!(spectrum_distance(&ev, &s.all()) < 1e-6);
    }

    #[test]
    fn verdicts() {
        let m = LieModel::su2();
        let grid = closed_form_grid(&m);
        let neg = grid_verdict(&m, &InvariantPotential::neg_square(), &grid, 1e-8);
        assert!(!neg.psh && !neg.convex);
        assert!((neg.min_hessian_eigenvalue + 2.0).abs() < 1e-12);
        let cos = grid_verdict(&m, &InvariantPotential::cosine(0), &grid, 1e-8);
        assert!(!cos.psh && cos.witness.is_some());
        assert!(grid_verdict(&m, &InvariantPotential::square(), &grid, 1e-8).psh);
    }

    #[test]
    fn names_and_tables() {
        assert_eq!(
            InvariantPotential::by_name("combined:2,1").unwrap().kind,
            PotentialKind::Combined { a: 2.0, b: 1.0 }
        );
        assert!(matches!(
            InvariantPotential::by_name("cubic"),
            Err(Error::Usage(_))
        ));
        let text = "# y K\n-2 4\n-1 1\n0 0\n1 1\n2 4\n";
        let s = parse_table(text).unwrap();
        assert!((s.eval(0.0).0).abs() < 1e-12);
        assert!((s.eval(1.0).0 - 1.0).abs() < 1e-12);
        assert!(matches!(
            parse_table("0 1\n1 x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        let k = InvariantPotential::tabulated("t", s);
        assert!(k.invariance_defect(&LieModel::su2(), 16, 1).unwrap() < 1e-12);
        let lopsided = InvariantPotential::tabulated("l", parse_table("-2 0\n0 1\n2 3\n").unwrap());
        assert!(matches!(
            lopsided.ensure_invariant(&LieModel::su2()),
            Err(Error::Precondition(_))
        ));
    }
}
