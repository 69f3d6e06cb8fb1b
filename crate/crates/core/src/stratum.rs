//! Flat model of removing a codimension-two set: smooth functions on `R²`
//! are approximated in the Dolbeault graph norm by functions vanishing near
//! the origin, with the logarithmic capacity cutoff; removing a line
//! instead does not allow this.

use rayon::prelude::*;
use serde::Serialize;

use crate::report::CheckReport;
use crate::{Error, Result, C64};

/// Default grid size per axis.
pub const DEFAULT_GRID: usize = 2048;

/// Cell-centred uniform grid on `[-1, 1]²`: node `i` sits at
/// `-1 + (i + ½) h`, `h = 2 / n`.
pub fn grid_coord(n: usize, i: usize) -> f64 {
    -1.0 + (i as f64 + 0.5) * (2.0 / n as f64)
}

/// `‖f‖²`, `‖∂_x f‖²`, `‖∂_y f‖²` and `‖∂̄f‖²` by central differences,
/// with `f = 0` outside the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct GridNorms {
    pub l2_sq: f64,
    pub dx_sq: f64,
    pub dy_sq: f64,
    pub dbar_sq: f64,
}

impl GridNorms {
    pub fn h1(&self) -> f64 {
        (self.l2_sq + self.dx_sq + self.dy_sq).sqrt()
    }

    /// `(‖f‖² + 2‖∂̄f‖²)^{1/2}`.
    pub fn graph(&self) -> f64 {
        (self.l2_sq + 2.0 * self.dbar_sq).sqrt()
    }

    fn add(self, o: GridNorms) -> GridNorms {
        GridNorms {
            l2_sq: self.l2_sq + o.l2_sq,
            dx_sq: self.dx_sq + o.dx_sq,
            dy_sq: self.dy_sq + o.dy_sq,
            dbar_sq: self.dbar_sq + o.dbar_sq,
        }
    }
}

/// Norms of the field `value(i, j)` (row `i` is the `y` index). Rows are
/// evaluated in parallel and summed in row order.
pub fn grid_norms<F: Fn(usize, usize) -> C64 + Sync>(n: usize, value: F) -> GridNorms {
    let h = 2.0 / n as f64;
    let row = |i: isize| -> Vec<C64> {
        if i < 0 || i as usize >= n {
            vec![C64::new(0.0, 0.0); n]
        } else {
            (0..n).map(|j| value(i as usize, j)).collect()
        }
    };
    let per_row: Vec<GridNorms> = (0..n as isize)
        .into_par_iter()
        .map(|i| {
            let (below, cur, above) = (row(i - 1), row(i), row(i + 1));
            let mut s = GridNorms::default();
            for j in 0..n {
                let left = if j > 0 {
                    cur[j - 1]
                } else {
                    C64::new(0.0, 0.0)
                };
                let right = if j + 1 < n {
                    cur[j + 1]
                } else {
                    C64::new(0.0, 0.0)
                };
                let dx = (right - left) / (2.0 * h);
                let dy = (above[j] - below[j]) / (2.0 * h);
                let dbar = (dx + C64::new(0.0, 1.0) * dy) * 0.5;
                s.l2_sq += cur[j].norm_sqr();
                s.dx_sq += dx.norm_sqr();
                s.dy_sq += dy.norm_sqr();
                s.dbar_sq += dbar.norm_sqr();
            }
            s
        })
        .collect();
    let total = per_row
        .into_iter()
        .fold(GridNorms::default(), GridNorms::add);
    let a = h * h;
    GridNorms {
        l2_sq: total.l2_sq * a,
        dx_sq: total.dx_sq * a,
        dy_sq: total.dy_sq * a,
        dbar_sq: total.dbar_sq * a,
    }
}

/// Complex field sampled on the cell-centred grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub n: usize,
    pub h: f64,
    /// Row-major, row index `y`.
    pub values: Vec<C64>,
}

impl GridField {
    pub fn sample<F: Fn(f64, f64) -> C64 + Sync>(n: usize, f: F) -> Self {
        let values = (0..n * n)
            .into_par_iter()
            .map(|k| f(grid_coord(n, k % n), grid_coord(n, k / n)))
            .collect();
        Self {
            n,
            h: 2.0 / n as f64,
            values,
        }
    }

    fn check_support(&self) -> Result<()> {
        let n = self.n;
        let edge = (0..n).any(|k| {
            self.values[k] != C64::new(0.0, 0.0)
                || self.values[(n - 1) * n + k] != C64::new(0.0, 0.0)
                || self.values[k * n] != C64::new(0.0, 0.0)
                || self.values[k * n + n - 1] != C64::new(0.0, 0.0)
        });
        if edge {
            return Err(Error::Usage(
                "field support touches the grid boundary".into(),
            ));
        }
        Ok(())
    }

    pub fn norms(&self) -> Result<GridNorms> {
        self.check_support()?;
        Ok(grid_norms(self.n, |i, j| self.values[i * self.n + j]))
    }

    pub fn h1_norm(&self) -> Result<f64> {
        Ok(self.norms()?.h1())
    }

    pub fn dolbeault_graph_norm(&self) -> Result<f64> {
        Ok(self.norms()?.graph())
    }
}

/// `exp(1 - 1/(1 - |p - c|²/R²))` inside the disc, zero outside; value one
/// at the centre.
pub fn bump(x: f64, y: f64, centre: (f64, f64), radius: f64) -> f64 {
    let s = ((x - centre.0).powi(2) + (y - centre.1).powi(2)) / (radius * radius);
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s)).exp()
    }
}

/// Which set is removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Removed {
    /// The origin, codimension two.
    Point,
    /// The line `x = 0`, codimension one.
    Line,
}

/// `ψ_m(d) = clamp(log(m² d) / log m, 0, 1)`: zero for `d ≤ 1/m²`, one for
/// `d ≥ 1/m`.
pub fn log_cutoff(m: f64, d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    ((m * m * d).ln() / m.ln()).clamp(0.0, 1.0)
}

/// `(1 - ψ_m) f` on an `n × n` grid.
pub fn removal_error<F: Fn(f64, f64) -> f64 + Sync>(
    f: &F,
    removed: Removed,
    m: f64,
    n: usize,
) -> GridNorms {
    grid_norms(n, |i, j| {
        let (x, y) = (grid_coord(n, j), grid_coord(n, i));
        let d = match removed {
            Removed::Point => (x * x + y * y).sqrt(),
            Removed::Line => x.abs(),
        };
        C64::new((1.0 - log_cutoff(m, d)) * f(x, y), 0.0)
    })
}

/// Largest `m` whose inner radius `1/m²` spans at least two cells.
pub fn max_resolvable_m(n: usize) -> f64 {
    (1.0 / (2.0 * (2.0 / n as f64))).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityDemo {
    pub grid: usize,
    pub m: Vec<f64>,
    pub errors: Vec<f64>,
    pub line_errors: Vec<f64>,
    /// `p` in `E(m) ≈ C (log m)^{-p/2}`, least squares.
    pub rate_exponent: f64,
    /// `E(m) √(log m)`.
    pub scaled: Vec<f64>,
    pub max_resolvable_m: f64,
    /// `(m, E on grid/2, E on grid)` for resolvable `m`.
    pub refinement: Vec<(f64, f64, f64)>,
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

pub fn run_density_demo<F: Fn(f64, f64) -> f64 + Sync>(
    f: &F,
    m_list: &[f64],
    n: usize,
) -> Result<DensityDemo> {
    if m_list.iter().any(|m| *m <= 1.0) {
        return Err(Error::Usage("cutoff parameters m must exceed 1".into()));
    }
    let errors: Vec<f64> = m_list
        .iter()
        .map(|m| removal_error(f, Removed::Point, *m, n).graph())
        .collect();
    let line_errors: Vec<f64> = m_list
        .iter()
        .map(|m| removal_error(f, Removed::Line, *m, n).graph())
        .collect();
    let x: Vec<f64> = m_list.iter().map(|m| m.ln().sqrt().ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let coarse = n / 2;
    let m_max = max_resolvable_m(coarse);
    let refinement = m_list
        .iter()
        .zip(&errors)
        .filter(|(m, _)| **m <= m_max)
        .map(|(m, e)| (*m, removal_error(f, Removed::Point, *m, coarse).graph(), *e))
        .collect();
    Ok(DensityDemo {
        grid: n,
        m: m_list.to_vec(),
        scaled: errors
            .iter()
            .zip(m_list)
            .map(|(e, m)| e * m.ln().sqrt())
            .collect(),
        rate_exponent: -slope(&x, &y),
        errors,
        line_errors,
        max_resolvable_m: max_resolvable_m(n),
        refinement,
    })
}

/// `(m, E(m))` rows.
pub fn demo_csv(demo: &DensityDemo) -> String {
    let mut out = String::from("m,E_point,E_line\n");
    for ((m, e), l) in demo.m.iter().zip(&demo.errors).zip(&demo.line_errors) {
        out.push_str(&format!("{m},{e},{l}\n"));
    }
    out
}

/// Strictly decreasing `E(m)`, rate exponent in `[0.5, 2]`, line contrast
/// above `0.1 E(m_1)` and refinement changes below 10%.
pub fn removal_density_demo<F: Fn(f64, f64) -> f64 + Sync>(
    f: &F,
    m_list: &[f64],
    n: usize,
) -> Result<CheckReport> {
    if f(0.0, 0.0) == 0.0 {
        return Err(Error::Precondition("the demo needs f(0) != 0".into()));
    }
    let probe = GridField::sample(n.min(256), |x, y| C64::new(f(x, y), 0.0));
    probe.check_support()?;
    let d = run_density_demo(f, m_list, n)?;
    let decreasing = d.errors.windows(2).all(|w| w[1] < w[0]);
    let e1 = d.errors.first().copied().unwrap_or(0.0);
    let line_min = d.line_errors.iter().copied().fold(f64::INFINITY, f64::min);
    let refine = d
        .refinement
        .iter()
        .map(|(_, c, fine)| (c - fine).abs() / fine)
        .fold(0.0, f64::max);
    let rate_ok = (0.5..=2.0).contains(&d.rate_exponent);
    let logm: Vec<f64> = d.m.iter().map(|m| m.ln()).collect();
    Ok(CheckReport::combine(
        "stratum.removal_density",
        "C_c(R^n minus R^(n-k)) dense in H^s iff s <= k/2; graph norm of the Dolbeault-Dirac operator",
        vec![
            CheckReport::condition("stratum.decreasing", "E(m) strictly decreasing", decreasing),
            CheckReport::condition("stratum.rate", "E(m) ~ (log m)^(-p/2), p in [0.5, 2]", rate_ok)
                .with("rate_exponent", d.rate_exponent),
            CheckReport::condition("stratum.line_contrast", "k = 1: error stays above 0.1 E(m_1)", line_min >= 0.1 * e1)
                .with("line_min", line_min)
                .with("threshold", 0.1 * e1),
            CheckReport::new("stratum.refinement", "E(m) stable under h -> h/2", 0.1, refine)
                .with("compared", d.refinement.len() as u64),
        ],
    )
    .with_json("demo", &d)
    .with_series("E(m) against log m", &logm, &d.errors, true))
}

/// `graph² - ‖f‖² = ½ (‖∂_x f‖² + ‖∂_y f‖²)` for real `f`, and the
/// equivalence constants `½ H¹² ≤ graph² ≤ H¹²`.
pub fn norm_equivalence_certificate(n: usize) -> Result<CheckReport> {
    let field = GridField::sample(n, |x, y| C64::new(bump(x, y, (0.1, -0.05), 0.7), 0.0));
    let s = field.norms()?;
    let lhs = s.graph().powi(2) - s.l2_sq;
    let rhs = 0.5 * (s.dx_sq + s.dy_sq);
    let ratio = s.graph().powi(2) / s.h1().powi(2);
    Ok(CheckReport::new(
        "stratum.norm_equivalence",
        "graph norm of the Dolbeault-Dirac operator, flat case",
        1e-12,
        (lhs - rhs).abs() / rhs,
    )
    .with("lower_constant", 0.5)
    .with("upper_constant", 1.0)
    .with("graph_sq_over_h1_sq", ratio))
}

/// Second-order convergence of the grid `H¹` norm under `h → h/2`.
pub fn refinement_ratio(sizes: [usize; 3]) -> Result<f64> {
    let v = sizes
        .iter()
        .map(|n| {
            GridField::sample(*n, |x, y| C64::new(bump(x, y, (0.0, 0.0), 0.75), 0.0))
                .norms()
                .map(|s| s.h1().powi(2))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((v[0] - v[1]) / (v[1] - v[2]))
}

pub fn stratum_certificates(grid: usize) -> Result<Vec<CheckReport>> {
    let f = |x: f64, y: f64| bump(x, y, (0.0, 0.0), 0.75);
    let m_list: Vec<f64> = (1..=4).map(|k| (k as f64).exp()).collect();
    let ratio = refinement_ratio([128, 256, 512])?;
    Ok(vec![
        removal_density_demo(&f, &m_list, grid)?,
        norm_equivalence_certificate(512)?,
        CheckReport::new(
            "stratum.h1_convergence",
            "second-order scheme: Richardson ratio 4",
            0.5,
            (ratio - 4.0).abs(),
        )
        .with("ratio", ratio),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field() {
        let f = GridField::sample(64, |_, _| C64::new(0.0, 0.0));
        assert_eq!(f.h1_norm().unwrap(), 0.0);
        assert_eq!(f.dolbeault_graph_norm().unwrap(), 0.0);
    }

    #[test]
    fn boundary_support_rejected() {
        let f = GridField::sample(32, |_, _| C64::new(1.0, 0.0));
        assert!(matches!(f.norms(), Err(Error::Usage(_))));
    }

    #[test]
    fn cutoff_profile() {
        let m = 10.0;
        assert_eq!(log_cutoff(m, 1.0 / (m * m)), 0.0);
        assert_eq!(log_cutoff(m, 0.5 / (m * m)), 0.0);
        assert!((log_cutoff(m, 1.0 / m) - 1.0).abs() < 1e-15);
        assert_eq!(log_cutoff(m, 0.5), 1.0);
        let mid = log_cutoff(m, 1.0 / m.powf(1.5));
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn support_away_from_origin() {
        let f = |x: f64, y: f64| bump(x, y, (0.5, 0.0), 0.3);
        for m in [10.0, 20.0] {
            assert_eq!(removal_error(&f, Removed::Point, m, 256).graph(), 0.0);
        }
    }

    #[test]
    fn complex_cross_term_vanishes() {
        let f = GridField::sample(256, |x, y| {
            let b = bump(x, y, (0.0, 0.1), 0.6);
            C64::new(b * (3.0 * x).cos(), b * (2.0 * y).sin())
        });
        let s = f.norms().unwrap();
        let rhs = 0.25 * (s.dx_sq + s.dy_sq);
        assert!((s.dbar_sq - rhs).abs() / rhs < 1e-10);
    }
}
