//! Quadrature rules for probability Haar on tori and SU(2), for the Gaussian
//! weight `e^{-2π|Y|²}` on `R^r`, and for radial class-function integrals.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{CMat, C64};

/// Nodes and non-negative weights. Node coordinates depend on the rule:
/// angles for tori, Euler angles `(α, β, γ)` for SU(2), Cartesian
/// coordinates for Gaussian rules and a radius for radial rules.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub exactness: String,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_i f(x_i)`, summed in node order.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }

    pub fn integrate_complex<F: Fn(&[f64]) -> C64>(&self, f: F) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| f(x) * *w)
            .sum()
    }

    fn product(a: &QuadratureRule, b: &QuadratureRule) -> QuadratureRule {
        let mut nodes = Vec::with_capacity(a.len() * b.len());
        let mut weights = Vec::with_capacity(a.len() * b.len());
        for (na, wa) in a.nodes.iter().zip(&a.weights) {
            for (nb, wb) in b.nodes.iter().zip(&b.weights) {
                let mut n = na.clone();
                n.extend_from_slice(nb);
                nodes.push(n);
                weights.push(wa * wb);
            }
        }
        QuadratureRule {
            nodes,
            weights,
            exactness: a.exactness.clone(),
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, p1) = legendre_pair(n, z);
            dp = n as f64 * (z * p - p1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (p, p1) = legendre_pair(n, z);
        dp = if (z * z - 1.0).abs() > 0.0 {
            n as f64 * (z * p - p1) / (z * z - 1.0)
        } else {
            dp
        };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_{n-1}(z))` by the three-term recurrence.
fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss–Hermite nodes and weights for the weight `e^{-x²}` on `R`.
///
/// Golub–Welsch start, then Newton on the orthonormal recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            ((i.max(j)) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut x: Vec<f64> = SymmetricEigen::new(jacobi)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut w = vec![0.0; n];
    for (xi, wi) in x.iter_mut().zip(w.iter_mut()) {
        let mut z = *xi;
        for _ in 0..20 {
            let (p, pm1) = hermite_pair(n, z);
            let dp = (2.0 * n as f64).sqrt() * pm1;
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, pm1) = hermite_pair(n, z);
        let dp = (2.0 * n as f64).sqrt() * pm1;
        *xi = z;
        *wi = 2.0 / (dp * dp);
    }
    // Symmetrize away rounding asymmetry.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let xs = 0.5 * (x[j] - x[i]);
        let ws = 0.5 * (w[i] + w[j]);
        x[i] = -xs;
        x[j] = xs;
        w[i] = ws;
        w[j] = ws;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Orthonormal Hermite values `(h_n(z), h_{n-1}(z))` without the weight.
fn hermite_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 0.0;
    let mut p1 = PI.powf(-0.25);
    for k in 1..=n {
        let kf = k as f64;
        let p2 = z * (2.0 / kf).sqrt() * p1 - ((kf - 1.0) / kf).sqrt() * p0;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Trapezoid rule on the torus with the given coordinate periods; exact for
/// characters with frequency index `|n| ≤ modes` in each coordinate.
pub fn torus_rule(periods: &[f64], modes: usize) -> QuadratureRule {
    let m = modes + 1;
    let mut rule = QuadratureRule {
        nodes: vec![Vec::new()],
        weights: vec![1.0],
        exactness: format!("characters |n| <= {modes} per coordinate"),
    };
    for &p in periods {
        let axis = QuadratureRule {
            nodes: (0..m).map(|k| vec![p * k as f64 / m as f64]).collect(),
            weights: vec![1.0 / m as f64; m],
            exactness: String::new(),
        };
        rule = QuadratureRule::product(&rule, &axis);
    }
    rule.exactness = format!("characters |n| <= {modes} per coordinate");
    rule
}

/// `exp(α e3) exp(β e2) exp(γ e3)` in the defining representation.
pub fn su2_euler(alpha: f64, beta: f64, gamma: f64) -> CMat {
    let rot3 = |a: f64| {
        CMat::from_row_slice(
            2,
            2,
            &[
                C64::from_polar(1.0, -a / 2.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::from_polar(1.0, a / 2.0),
            ],
        )
    };
    let (s, c) = (beta / 2.0).sin_cos();
    let rot2 = CMat::from_row_slice(
        2,
        2,
        &[
            C64::new(c, 0.0),
            C64::new(-s, 0.0),
            C64::new(s, 0.0),
            C64::new(c, 0.0),
        ],
    );
    rot3(alpha) * rot2 * rot3(gamma)
}

/// Probability Haar rule on SU(2) in Euler angles; exact for matrix
/// coefficients of `π_j` with `j ≤ level`.
pub fn su2_haar_rule(level: usize) -> QuadratureRule {
    let level = level.max(1);
    let m = 2 * level + 1;
    let (x, w) = gauss_legendre(level + 2);
    let mut nodes = Vec::with_capacity(m * m * x.len());
    let mut weights = Vec::with_capacity(m * m * x.len());
    let angle = |k: usize| 4.0 * PI * k as f64 / m as f64;
    for a in 0..m {
        for (xb, wb) in x.iter().zip(&w) {
            for g in 0..m {
                nodes.push(vec![angle(a), xb.acos(), angle(g)]);
                // dβ sin β / 2 = d(cos β) / 2.
                weights.push(wb / 2.0 / (m * m) as f64);
            }
        }
    }
    QuadratureRule {
        nodes,
        weights,
        exactness: format!("SU(2) matrix coefficients j <= {level}"),
    }
}

/// Product Gauss–Hermite rule for `∫_{R^r} f(Y) e^{-2π|Y|²} dY`; total mass
/// `2^{-r/2}`.
pub fn gaussian_rule(r: usize, level: usize) -> QuadratureRule {
    let (x, w) = gauss_hermite(level.max(1));
    let s = (2.0 * PI).sqrt();
    let axis = QuadratureRule {
        nodes: x.iter().map(|xi| vec![xi / s]).collect(),
        weights: w.iter().map(|wi| wi / s).collect(),
        exactness: String::new(),
    };
    let mut rule = QuadratureRule {
        nodes: vec![Vec::new()],
        weights: vec![1.0],
        exactness: String::new(),
    };
    for _ in 0..r {
        rule = QuadratureRule::product(&rule, &axis);
    }
    rule.exactness = format!(
        "polynomials of degree <= {} times the Gaussian",
        2 * level.max(1) - 1
    );
    rule
}

/// Radius beyond which `e^{growth·r − 2πr²} < e^{-40}`.
pub fn gaussian_tail_radius(growth: f64) -> f64 {
    let c = growth.max(0.0);
    (c + (c * c + 320.0 * PI).sqrt()) / (4.0 * PI)
}

/// Gauss–Legendre rule for `∫_0^∞ g(r) e^{-2πr²} dr` on `[0, R]`, `R` from
/// [`gaussian_tail_radius`]. The Gaussian is folded into the weights.
pub fn radial_rule(level: usize, growth: f64) -> QuadratureRule {
    let radius = gaussian_tail_radius(growth);
    let (x, w) = gauss_legendre(level.max(1));
    let nodes: Vec<Vec<f64>> = x.iter().map(|xi| vec![0.5 * radius * (xi + 1.0)]).collect();
    let weights = nodes
        .iter()
        .zip(&w)
        .map(|(r, wi)| 0.5 * radius * wi * (-2.0 * PI * r[0] * r[0]).exp())
        .collect();
    QuadratureRule {
        nodes,
        weights,
        exactness: format!("Gauss-Legendre {} nodes on [0, {radius:.6}]", level.max(1)),
    }
}

/// Result of a level-doubling convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Converged {
    pub value: f64,
    pub level: usize,
    pub delta: f64,
}

/// Double `level` until successive values move by less than `tol`.
pub fn converge_by_doubling<F: FnMut(usize) -> f64>(
    mut f: F,
    start: usize,
    max_level: usize,
    tol: f64,
) -> Converged {
    let mut level = start.max(1);
    let mut prev = f(level);
    let mut delta = f64::INFINITY;
    while level * 2 <= max_level {
        level *= 2;
        let next = f(level);
        delta = (next - prev).abs();
        prev = next;
        if delta < tol {
            break;
        }
    }
    Converged {
        value: prev,
        level,
        delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        for n in [1, 2, 5, 12, 40] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn hermite_moments() {
        for n in [1, 3, 8, 30, 80] {
            let (x, w) = gauss_hermite(n);
            assert!((w.iter().sum::<f64>() - PI.sqrt()).abs() < 1e-13);
            // ∫ x^{2k} e^{-x²} = Γ(k + 1/2).
            let mut gamma = PI.sqrt();
            for k in 0..n.min(10) {
                let got: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| w * x.powi(2 * k as i32))
                    .sum();
                assert!((got - gamma).abs() < 1e-11 * gamma.max(1.0), "n={n} k={k}");
                gamma *= k as f64 + 0.5;
            }
        }
    }

    #[test]
    fn torus_rule_is_probability_and_exact() {
        let rule = torus_rule(&[2.0 * PI], 6);
        assert!((rule.total_mass() - 1.0).abs() < 1e-15);
        for n in 1..=6 {
            let re = rule.integrate(|y| (n as f64 * y[0]).cos());
            assert!(re.abs() < 1e-14);
        }
        let t2 = torus_rule(&[2.0 * PI, 2.0 * PI], 3);
        assert_eq!(t2.len(), 16);
        assert!((t2.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_mass() {
        assert!((gaussian_rule(1, 10).total_mass() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((gaussian_rule(3, 6).total_mass() - 0.5f64.powf(1.5)).abs() < 1e-14);
        let second = gaussian_rule(1, 10).integrate(|y| y[0] * y[0]);
        // ∫ y² e^{-2πy²} dy = (1/√2) / (4π).
        assert!((second - 0.5f64.sqrt() / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn radial_rule_mass() {
        let rule = radial_rule(40, 0.0);
        assert!((rule.total_mass() - 0.5 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn su2_rule_is_probability_haar() {
        let rule = su2_haar_rule(4);
        assert!((rule.total_mass() - 1.0).abs() < 1e-14);
        assert!(rule.weights.iter().all(|w| *w > 0.0));
        // ∫ |tr g|² = 1 and ∫ tr g = 0.
        let tr = |n: &[f64]| su2_euler(n[0], n[1], n[2]).trace();
        assert!((rule.integrate(|n| tr(n).norm_sqr()) - 1.0).abs() < 1e-13);
        assert!(rule.integrate_complex(tr).norm() < 1e-13);
    }

    #[test]
    fn doubling_converges() {
        let c = converge_by_doubling(
            |n| gaussian_rule(1, n).integrate(|y| (3.0 * y[0]).cos()),
            2,
            256,
            1e-12,
        );
        // ∫ cos(3y) e^{-2πy²} dy = e^{-9/(8π)} / √2.
        assert!((c.value - (-9.0 / (8.0 * PI)).exp() / 2f64.sqrt()).abs() < 1e-12);
        assert!(c.delta < 1e-12);
    }
}
