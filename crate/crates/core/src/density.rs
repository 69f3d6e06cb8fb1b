//! The density `η(Y) = ∏_{α>0} sinh α(Y) / α(Y)`, its log-convexity, the
//! relation `dμ_{G^C} = η² ε`, the Weyl denominator and the Weyl
//! integration formula.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::irrep::{su2_character, IrrepLabel};
use crate::kahler::dphi_matrix;
use crate::lie::{sinhc, AlgebraVec, LieModel, ModelKind, NORMALIZATION};
use crate::quadrature::{
    converge_by_doubling, gaussian_rule, radial_rule, su2_euler, su2_haar_rule, torus_rule,
};
use crate::report::CheckReport;
use crate::sampling::{max_abs, par_samples};
use crate::{CMat, Error, Result, C64};

/// `η` on torus coordinates.
pub fn eta_on_torus(model: &LieModel, y_t: &[f64]) -> f64 {
    model
        .positive_roots()
        .iter()
        .map(|a| sinhc(a.eval(y_t)))
        .product()
}

/// `η(Y)` for any `Y`, via a torus representative.
pub fn eta(model: &LieModel, y: &AlgebraVec) -> Result<f64> {
    let y_t = match model.kind() {
        ModelKind::Custom => {
            if model.off_torus_norm(y) > 1e-12 {
                return Err(Error::Precondition(
                    "custom models evaluate η only on t".into(),
                ));
            }
            model.torus_coords(y)
        }
        _ => model.torus_conjugate(y)?.1,
    };
    Ok(eta_on_torus(model, &y_t))
}

/// `η̃ η̃'' - η̃'² = (sinh²t - t²)/t⁴` for `η̃(t) = sinh t / t`.
pub fn log_eta_curvature_closed(t: f64) -> f64 {
    if t.abs() < 1e-2 {
        let t2 = t * t;
        1.0 / 3.0 + t2 * (2.0 / 45.0 + t2 / 315.0)
    } else {
        let s = t.sinh();
        (s * s - t * t) / (t * t * t * t)
    }
}

/// `η̃² (log η̃)''` by central differences of `log η̃`.
pub fn log_eta_curvature_fd(t: f64, h: f64) -> f64 {
    let f = |x: f64| sinhc(x).ln();
    let e = sinhc(t);
    e * e * (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
}

pub fn eta_log_convexity_certificate(t_max: f64, grid: usize) -> CheckReport {
    let h = 1e-3;
    let mut min_closed = f64::INFINITY;
    let mut agreement: f64 = 0.0;
    let mut t_at_min = 0.0;
    for k in 0..grid {
        let t = -t_max + 2.0 * t_max * k as f64 / (grid - 1) as f64;
        let c = log_eta_curvature_closed(t);
        if c < min_closed {
            min_closed = c;
            t_at_min = t;
        }
        agreement = agreement.max((c - log_eta_curvature_fd(t, h)).abs());
    }
    CheckReport::combine(
        "density.eta_log_convexity",
        "(sinh^2 t - t^2) / t^4 > 0",
        vec![
            CheckReport::condition(
                "density.eta_log_convexity.positive",
                "(sinh^2 t - t^2)/t^4 > 0",
                min_closed > 0.0,
            )
            .with("min_value", min_closed),
            CheckReport::new(
                "density.eta_log_convexity.agreement",
                "eta~ eta~'' - eta~'^2 = eta~^2 (log eta~)''",
                1e-5,
                agreement,
            ),
        ],
    )
    .with("grid", grid as u64)
    .with("t_max", t_max)
    .with("fd_step", h)
    .with("min_value", min_closed)
    .with("argmin", t_at_min)
}

/// Finite-difference Hessian of a function on `R^d`.
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> nalgebra::DMatrix<f64> {
    let d = x.len();
    let at = |shift: &[(usize, f64)]| {
        let mut p = x.to_vec();
        for (k, s) in shift {
            p[*k] += s;
        }
        f(&p)
    };
    let f0 = at(&[]);
    nalgebra::DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            (at(&[(i, h)]) - 2.0 * f0 + at(&[(i, -h)])) / (h * h)
        } else {
            (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h)
        }
    })
}

/// Minimum eigenvalue of the finite-difference Hessian of `log η` over a
/// grid, on `t` and on all of `g`.
pub fn log_eta_hessian_certificate(model: &LieModel, radius: f64, grid: usize) -> CheckReport {
    let h = 1e-3;
    let r = model.rank();
    let n = model.dim();
    let log_eta_t = |y: &[f64]| eta_on_torus(model, y).ln();
    let log_eta_g = |y: &[f64]| {
        eta(model, &AlgebraVec::new(y.to_vec()))
            .map(f64::ln)
            .unwrap_or(f64::NAN)
    };
    let axis = |k: usize| -radius + 2.0 * radius * k as f64 / (grid - 1) as f64;
    let mut min_t = f64::INFINITY;
    for idx in 0..grid.pow(r as u32) {
        let mut rem = idx;
        let y: Vec<f64> = (0..r)
            .map(|_| {
                let v = axis(rem % grid);
                rem /= grid;
                v
            })
            .collect();
        let hess = fd_hessian(log_eta_t, &y, h);
        min_t = min_t.min(hess.symmetric_eigen().eigenvalues.min());
    }
    // Coarser Cartesian grid on the ball |Y| <= radius in all of g.
    let mut min_g = min_t;
    if n > r {
        let g_grid = grid.min(17);
        let g_axis = |k: usize| -radius + 2.0 * radius * k as f64 / (g_grid - 1) as f64;
        for idx in 0..g_grid.pow(n as u32) {
            let mut rem = idx;
            let y: Vec<f64> = (0..n)
                .map(|_| {
                    let v = g_axis(rem % g_grid);
                    rem /= g_grid;
                    v
                })
                .collect();
            if y.iter().map(|v| v * v).sum::<f64>() > radius * radius {
                continue;
            }
            let hess = fd_hessian(log_eta_g, &y, h);
            min_g = min_g.min(hess.symmetric_eigen().eigenvalues.min());
        }
    }
    let min_eig = min_t.min(min_g);
    let err = (-min_eig).max(0.0);
    CheckReport::new(
        "density.log_eta_convex",
        "log eta convex, K = log eta semi-negative curvature",
        1e-8,
        if min_eig.is_nan() { f64::INFINITY } else { err },
    )
    .with("min_eigenvalue_t", min_t)
    .with("min_eigenvalue_g", min_g)
    .with("radius", radius)
    .with("grid", grid as u64)
    .with("fd_step", h)
}

/// `|W|`.
pub fn weyl_order(model: &LieModel) -> Result<usize> {
    Ok(model.weyl_group()?.len())
}

/// `|δ|² = ∏_{α>0} 4 sin²(α(Y)/2)` at `exp(Y)`, `Y ∈ t`.
pub fn weyl_denominator_sq(model: &LieModel, y_t: &[f64]) -> f64 {
    model
        .positive_roots()
        .iter()
        .map(|a| {
            let s = (a.eval(y_t) / 2.0).sin();
            4.0 * s * s
        })
        .product()
}

/// Complex-valued function on the complexified group, given in the defining
/// representation.
pub type GroupFunction<'a> = dyn Fn(&CMat) -> C64 + Sync + 'a;

/// `∫_{G × g} f(x e^{iY}) w(Y) e^{-2π|Y|²} dx dY` on a product rule.
fn fibre_integral(
    model: &LieModel,
    f: &GroupFunction<'_>,
    weight: &(dyn Fn(&AlgebraVec) -> f64 + Sync),
    g_level: usize,
    y_level: usize,
) -> f64 {
    let n = model.dim();
    let ys = gaussian_rule(n, y_level);
    let group_nodes = group_rule_nodes(model, g_level);
    let terms: Vec<f64> = (0..ys.len())
        .into_par_iter()
        .map(|i| {
            let y = AlgebraVec::new(ys.nodes[i].clone());
            let e = model.exp_alg(&AlgebraVec::zeros(n), &y).into_matrix();
            let w = weight(&y);
            let inner: f64 = group_nodes.iter().map(|(g, gw)| gw * f(&(g * &e)).re).sum();
            ys.weights[i] * w * inner
        })
        .collect();
    terms.iter().sum()
}

/// Nodes of the probability Haar rule as matrices.
pub fn group_rule_nodes(model: &LieModel, level: usize) -> Vec<(CMat, f64)> {
    match model.kind() {
        ModelKind::Su2 => {
            let rule = su2_haar_rule(level);
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(n, w)| (su2_euler(n[0], n[1], n[2]), *w))
                .collect()
        }
        _ => {
            let periods = model.torus_periods().unwrap_or_default();
            let rule = torus_rule(&periods, level);
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(n, w)| (model.torus_point(n).into_matrix(), *w))
                .collect()
        }
    }
}

/// Compare `∫ f dμ` (Cartesian rule with the polar-map Jacobian
/// `det TΦ`) against `∫ f η² ε` (radial rule with the closed-form `η`).
pub fn haar_liouville_consistency(
    model: &LieModel,
    name: &str,
    f: &GroupFunction<'_>,
    g_level: usize,
) -> CheckReport {
    let n = model.dim();
    let jac = |y: &AlgebraVec| dphi_matrix(model, y).determinant();
    let route_a = converge_by_doubling(
        |lvl| fibre_integral(model, f, &jac, g_level, lvl),
        12,
        48,
        1e-11,
    );
    let route_b = match model.kind() {
        ModelKind::Su2 => {
            // Class functions: the G-integral depends on |Y| only.
            let group_nodes = group_rule_nodes(model, g_level);
            let radial = |r: f64| -> f64 {
                let e = model
                    .exp_alg(&AlgebraVec::zeros(n), &model.torus_embed(&[r]))
                    .into_matrix();
                let inner: f64 = group_nodes.iter().map(|(g, gw)| gw * f(&(g * &e)).re).sum();
                let eta = sinhc(r);
                4.0 * PI * r * r * eta * eta * inner
            };
            converge_by_doubling(
                |lvl| radial_rule(lvl, 4.0 + 2.0 * g_level as f64).integrate(|x| radial(x[0])),
                16,
                256,
                1e-12,
            )
        }
        _ => {
            let eta_sq = |y: &AlgebraVec| eta(model, y).map(|e| e * e).unwrap_or(f64::NAN);
            converge_by_doubling(
                |lvl| fibre_integral(model, f, &eta_sq, g_level, lvl),
                12,
                48,
                1e-11,
            )
        }
    };
    let scale = route_a.value.abs().max(route_b.value.abs());
    let rel = if scale == 0.0 {
        0.0
    } else {
        (route_a.value - route_b.value).abs() / scale
    };
    CheckReport::new(
        &format!("density.haar_liouville.{name}"),
        "d mu = eta^2 epsilon",
        1e-6,
        rel,
    )
    .with("cartesian_det_dphi", route_a.value)
    .with("radial_eta_sq", route_b.value)
    .with("cartesian_level", route_a.level as u64)
    .with("radial_level", route_b.level as u64)
    .with("doubling_delta", route_a.delta.max(route_b.delta))
    .with("normalization", NORMALIZATION)
}

/// Maximum of `|f(g x g⁻¹) - f(x)|` over random samples.
pub fn class_function_defect(
    model: &LieModel,
    f: &GroupFunction<'_>,
    samples: usize,
    seed: u64,
) -> f64 {
    let res = par_samples(seed, 21, samples, |rng| -> Result<f64> {
        let g = model.random_group_point(rng)?;
        let x = model.random_group_point(rng)?;
        let conj = g.matrix() * x.matrix() * g.matrix().adjoint();
        Ok((f(&conj) - f(x.matrix())).norm())
    });
    max_abs(res.into_iter().map(|r| r.unwrap_or(f64::INFINITY)))
}

/// `∫_G f dx` against `(1/|W|) ∫_T |δ|² f|_T dt`, both with probability
/// Haar; `g_level` controls exactness of the group rule.
pub fn weyl_integration_check(
    model: &LieModel,
    name: &str,
    f: &GroupFunction<'_>,
    g_level: usize,
    seed: u64,
) -> Result<CheckReport> {
    let defect = class_function_defect(model, f, 64, seed);
    if defect > 1e-9 {
        return Ok(CheckReport::new(
            &format!("density.weyl_integration.{name}"),
            "int_G f = |W|^-1 int_T |delta|^2 f",
            1e-10,
            f64::INFINITY,
        )
        .with("precondition", "not a class function")
        .with("class_defect", defect));
    }
    let w = weyl_order(model)? as f64;
    let lhs: f64 = group_rule_nodes(model, g_level)
        .iter()
        .map(|(g, gw)| gw * f(g).re)
        .sum();
    let periods = model.torus_periods()?;
    let t_rule = torus_rule(&periods, 2 * g_level + 4);
    let rhs = t_rule
        .integrate(|y| weyl_denominator_sq(model, y) * f(model.torus_point(y).matrix()).re)
        / w;
    Ok(CheckReport::new(
        &format!("density.weyl_integration.{name}"),
        "int_G f = |W|^-1 int_T |delta|^2 f",
        1e-10,
        (lhs - rhs).abs(),
    )
    .with("group_integral", lhs)
    .with("torus_integral", rhs)
    .with("weyl_order", w)
    .with("class_defect", defect))
}

/// Characters of the model up to the given height, as group functions
/// `(label, χ)`.
pub fn character_functions(
    model: &LieModel,
    max_label: usize,
) -> Result<Vec<(String, Box<GroupFunction<'static>>)>> {
    match model.kind() {
        ModelKind::Su2 => Ok((0..=2 * max_label as u32)
            .map(|tj| {
                let f: Box<GroupFunction<'static>> = Box::new(move |t: &CMat| su2_character(tj, t));
                (format!("chi_{}", IrrepLabel::Su2 { twice_j: tj }), f)
            })
            .collect()),
        ModelKind::Torus { .. } => {
            let labels = crate::irrep::labels_up_to(model, max_label)?;
            Ok(labels
                .into_iter()
                .map(|l| {
                    let name = format!("{l}");
                    let m = model.clone();
                    let irrep = crate::irrep::Irrep::new(&m, l).expect("label from model");
                    let f: Box<GroupFunction<'static>> =
                        Box::new(move |t: &CMat| irrep.character(t));
                    (name, f)
                })
                .collect())
        }
        ModelKind::Custom => Err(Error::Model("no character table for custom models".into())),
    }
}

/// Gram matrices of the character span in `L²(G)` and of its image under
/// `f ↦ c|δ| f|_T` in `L²(T)`, with `c = |W|^{-1/2}`; the fitted `c` is
/// reported alongside.
pub fn weyl_isometry_certificate(model: &LieModel, max_label: usize) -> Result<CheckReport> {
    let chars = character_functions(model, max_label)?;
    let k = chars.len();
    let g_nodes = group_rule_nodes(model, 2 * max_label.max(1));
    let periods = model.torus_periods()?;
    let t_rule = torus_rule(&periods, 4 * max_label + 4);
    let w = weyl_order(model)? as f64;
    let c = w.powf(-0.5);
    let g_vals: Vec<Vec<C64>> = g_nodes
        .iter()
        .map(|(g, _)| chars.iter().map(|(_, f)| f(g)).collect())
        .collect();
    let t_vals: Vec<Vec<C64>> = t_rule
        .nodes
        .iter()
        .map(|y| {
            let d = weyl_denominator_sq(model, y).sqrt();
            let p = model.torus_point(y).into_matrix();
            chars.iter().map(|(_, f)| f(&p) * (c * d)).collect()
        })
        .collect();
    let mut err: f64 = 0.0;
    let mut gram_g = vec![vec![0.0; k]; k];
    let mut gram_t = vec![vec![0.0; k]; k];
    let mut fit = Vec::with_capacity(k);
    for a in 0..k {
        for b in 0..k {
            let gg: C64 = g_nodes
                .iter()
                .zip(&g_vals)
                .map(|((_, wt), v)| v[a] * v[b].conj() * *wt)
                .sum();
            let tt: C64 = t_rule
                .weights
                .iter()
                .zip(&t_vals)
                .map(|(wt, v)| v[a] * v[b].conj() * *wt)
                .sum();
            err = err.max((gg - tt).norm());
            gram_g[a][b] = gg.re;
            gram_t[a][b] = tt.re;
        }
        // ‖f‖²_G = c² ‖|δ| f‖²_T determines c.
        fit.push((gram_g[a][a] / (gram_t[a][a] / (c * c))).sqrt());
    }
    let c_fit = fit.iter().sum::<f64>() / k as f64;
    Ok(CheckReport::new(
        "density.weyl_isometry",
        "f -> c |delta| f|_T unitary onto L^2(T)^W",
        1e-6,
        err,
    )
    .with("c_expected", c)
    .with("c_fitted", c_fit)
    .with(
        "span",
        chars.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
    )
    .with_heatmap("L2(T) Gram of c|delta| chi", &gram_t))
}

/// Default density suite.
pub fn density_certificates(
    model: &LieModel,
    cutoff: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let mut out = vec![
        eta_log_convexity_certificate(5.0, 10_000),
        log_eta_hessian_certificate(model, 5.0, 41),
    ];
    let one: Box<GroupFunction<'static>> = Box::new(|_: &CMat| C64::new(1.0, 0.0));
    out.push(haar_liouville_consistency(model, "one", &*one, 1));
    match model.kind() {
        ModelKind::Su2 => {
            let f = |t: &CMat| C64::new(su2_character(1, t).norm_sqr(), 0.0);
            out.push(haar_liouville_consistency(model, "abs_chi_half_sq", &f, 2));
        }
        _ => {
            let irrep = crate::irrep::Irrep::new(model, IrrepLabel::Torus(vec![1; model.rank()]))?;
            let f = move |t: &CMat| C64::new(irrep.character(t).norm_sqr(), 0.0);
            out.push(haar_liouville_consistency(model, "abs_chi_one_sq", &f, 2));
        }
    }
    let label_cap = 3.max(cutoff);
    for (name, f) in character_functions(model, label_cap.min(3))? {
        let sq = move |t: &CMat| C64::new(f(t).norm_sqr(), 0.0);
        out.push(weyl_integration_check(
            model,
            &format!("abs_{name}_sq"),
            &sq,
            2 * label_cap,
            seed,
        )?);
    }
    out.push(weyl_isometry_certificate(model, 3)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_examples() {
        let m = LieModel::su2();
        assert_eq!(eta(&m, &AlgebraVec::zeros(3)).unwrap(), 1.0);
        assert!(
            (eta(&m, &AlgebraVec::basis(3, 2)).unwrap() - 1.175_201_193_643_801_4).abs() < 1e-12
        );
        // Conjugation invariance: η depends on |Y| only.
        let y = AlgebraVec::new(vec![0.6, 0.0, 0.8]);
        assert!((eta(&m, &y).unwrap() - 1.175_201_193_643_801_4).abs() < 1e-12);
        assert_eq!(
            eta(&LieModel::t2(), &AlgebraVec::new(vec![3.0, -1.0])).unwrap(),
            1.0
        );
        for w in m.weyl_group().unwrap() {
            assert!((eta_on_torus(&m, &w.act(&[1.7])) - eta_on_torus(&m, &[1.7])).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_values() {
        assert!((log_eta_curvature_closed(1.0) - 0.381_097_845_541_7).abs() < 1e-9);
        assert!((log_eta_curvature_closed(1e-8) - 1.0 / 3.0).abs() < 1e-15);
        // Either side of the series switch, against 50-digit values.
        assert!((log_eta_curvature_closed(0.0099999) - 0.333_337_777_720_634_2).abs() < 1e-11);
        assert!((log_eta_curvature_closed(0.0100001) - 0.333_337_777_898_414_6).abs() < 1e-11);
    }

    #[test]
    fn weyl_denominator_vanishes_on_singular_points() {
        let m = LieModel::su2();
        assert!(weyl_denominator_sq(&m, &[0.0]).abs() < 1e-30);
        assert!(weyl_denominator_sq(&m, &[2.0 * PI]).abs() < 1e-25);
        assert!((weyl_denominator_sq(&m, &[PI]) - 4.0).abs() < 1e-12);
        assert_eq!(weyl_denominator_sq(&LieModel::u1(), &[1.0]), 1.0);
    }

    #[test]
    fn weyl_integration_of_constants_and_non_class() {
        let m = LieModel::su2();
        let one = |_: &CMat| C64::new(1.0, 0.0);
        let r = weyl_integration_check(&m, "one", &one, 2, 1).unwrap();
        assert!(r.pass, "{r:?}");
        let entry = |t: &CMat| t[(0, 1)];
        let r = weyl_integration_check(&m, "entry", &entry, 2, 1).unwrap();
        assert!(!r.pass);
        assert!(r.metadata.contains_key("precondition"));
    }
}
