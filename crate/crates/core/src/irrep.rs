//! Irreducible representations of the built-in models, extended
//! holomorphically to the complexified group.

use std::cmp::Ordering;
use std::fmt;

use crate::lie::{AlgebraVec, LieModel, ModelKind};
use crate::{CMat, Error, Result, C64};

/// Label of an irreducible representation.
#[derive(
    Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum IrrepLabel {
    /// Character `t ↦ ∏ t_kk^{n_k}` of a torus.
    Torus(Vec<i64>),
    /// Spin `j = twice_j / 2` of SU(2).
    Su2 { twice_j: u32 },
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::Torus(n) => {
                let parts: Vec<String> = n.iter().map(i64::to_string).collect();
                write!(f, "n={}", parts.join(","))
            }
            IrrepLabel::Su2 { twice_j } => {
                if twice_j % 2 == 0 {
                    write!(f, "j={}", twice_j / 2)
                } else {
                    write!(f, "j={twice_j}/2")
                }
            }
        }
    }
}

impl IrrepLabel {
    /// Label of the dual representation.
    pub fn dual(&self) -> IrrepLabel {
        match self {
            IrrepLabel::Torus(n) => IrrepLabel::Torus(n.iter().map(|k| -k).collect()),
            IrrepLabel::Su2 { .. } => self.clone(),
        }
    }

    /// Cutoff size: `max |n_k|` for tori, `j` rounded up for SU(2).
    pub fn height(&self) -> f64 {
        match self {
            IrrepLabel::Torus(n) => n.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0) as f64,
            IrrepLabel::Su2 { twice_j } => *twice_j as f64 / 2.0,
        }
    }
}

/// All labels with height at most `cutoff`, in increasing order.
pub fn labels_up_to(model: &LieModel, cutoff: usize) -> Result<Vec<IrrepLabel>> {
    match model.kind() {
        ModelKind::Torus { scales } => {
            let r = scales.len();
            let c = cutoff as i64;
            let mut out = vec![Vec::new()];
            for _ in 0..r {
                out = out
                    .into_iter()
                    .flat_map(|prefix: Vec<i64>| {
                        (-c..=c).map(move |k| {
                            let mut p = prefix.clone();
                            p.push(k);
                            p
                        })
                    })
                    .collect();
            }
            let mut labels: Vec<IrrepLabel> = out.into_iter().map(IrrepLabel::Torus).collect();
            labels.sort_by(torus_order);
            Ok(labels)
        }
        ModelKind::Su2 => Ok((0..=2 * cutoff as u32)
            .map(|twice_j| IrrepLabel::Su2 { twice_j })
            .collect()),
        ModelKind::Custom => Err(Error::Model(format!(
            "model '{}' has no irreducible representation table",
            model.name()
        ))),
    }
}

/// Order tori labels by height, then lexicographically.
fn torus_order(a: &IrrepLabel, b: &IrrepLabel) -> Ordering {
    a.height()
        .partial_cmp(&b.height())
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.cmp(b))
}

/// An irreducible representation with its Lie algebra generator images.
#[derive(Clone, Debug)]
pub struct Irrep {
    pub label: IrrepLabel,
    pub dim: usize,
    /// `π̄(e_k)`, skew-hermitian.
    pub generators: Vec<CMat>,
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of `(a e1 + b e2)^k`, indexed by the power of `e1`.
fn linear_power(a: C64, b: C64, k: usize) -> Vec<C64> {
    (0..=k)
        .map(|p| a.powu(p as u32) * b.powu((k - p) as u32) * binom(k, p))
        .collect()
}

fn poly_mul(p: &[C64], q: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// `Sym^n` of a 2×2 matrix in the orthonormal basis
/// `u_k = √C(n,k) e1^k e2^{n-k}`.
pub fn symmetric_power(g: &CMat, n: usize) -> CMat {
    let mut out = CMat::zeros(n + 1, n + 1);
    let (g11, g21, g12, g22) = (g[(0, 0)], g[(1, 0)], g[(0, 1)], g[(1, 1)]);
    for k in 0..=n {
        let poly = poly_mul(&linear_power(g11, g21, k), &linear_power(g12, g22, n - k));
        let scale = binom(n, k).sqrt();
        for (a, c) in poly.iter().enumerate() {
            out[(a, k)] = c * (scale / binom(n, a).sqrt());
        }
    }
    out
}

/// Derivative of [`symmetric_power`] at the identity in direction `x`.
pub fn symmetric_power_derivation(x: &CMat, n: usize) -> CMat {
    let mut out = CMat::zeros(n + 1, n + 1);
    let zero = C64::new(0.0, 0.0);
    for k in 0..=n {
        let scale = binom(n, k).sqrt();
        // X e1 = x11 e1 + x21 e2 and X e2 = x12 e1 + x22 e2.
        let mut poly = vec![zero; n + 1];
        if k > 0 {
            let kf = k as f64;
            poly[k] += x[(0, 0)] * kf;
            poly[k - 1] += x[(1, 0)] * kf;
        }
        if k < n {
            let rest = (n - k) as f64;
            poly[k + 1] += x[(0, 1)] * rest;
            poly[k] += x[(1, 1)] * rest;
        }
        for (a, c) in poly.iter().enumerate() {
            out[(a, k)] = c * (scale / binom(n, a).sqrt());
        }
    }
    out
}

/// SU(2) character `χ_j(t) = U_{2j}(tr t / 2)` at a point of `SL(2, C)`.
pub fn su2_character(twice_j: u32, t: &CMat) -> C64 {
    let tr = t.trace();
    let mut prev = C64::new(1.0, 0.0);
    if twice_j == 0 {
        return prev;
    }
    let mut cur = tr;
    for _ in 1..twice_j {
        let next = tr * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

impl Irrep {
    pub fn new(model: &LieModel, label: IrrepLabel) -> Result<Self> {
        match (model.kind(), &label) {
            (ModelKind::Torus { scales }, IrrepLabel::Torus(n)) if n.len() == scales.len() => {
                let generators = (0..scales.len())
                    .map(|k| CMat::from_element(1, 1, C64::new(0.0, n[k] as f64 * scales[k])))
                    .collect();
                Ok(Self {
                    label,
                    dim: 1,
                    generators,
                })
            }
            (ModelKind::Su2, IrrepLabel::Su2 { twice_j }) => {
                let n = *twice_j as usize;
                let generators = model
                    .generators()
                    .iter()
                    .map(|g| symmetric_power_derivation(g, n))
                    .collect();
                Ok(Self {
                    label,
                    dim: n + 1,
                    generators,
                })
            }
            _ => Err(Error::Model(format!(
                "label {label} does not belong to model '{}'",
                model.name()
            ))),
        }
    }

    /// `π(t)` for `t` in the complexified group, given in the defining
    /// representation.
    pub fn matrix(&self, t: &CMat) -> CMat {
        match &self.label {
            IrrepLabel::Torus(n) => {
                let v = n
                    .iter()
                    .enumerate()
                    .fold(C64::new(1.0, 0.0), |acc, (k, p)| {
                        acc * t[(k, k)].powi(*p as i32)
                    });
                CMat::from_element(1, 1, v)
            }
            IrrepLabel::Su2 { twice_j } => symmetric_power(t, *twice_j as usize),
        }
    }

    pub fn character(&self, t: &CMat) -> C64 {
        match &self.label {
            IrrepLabel::Su2 { twice_j } => su2_character(*twice_j, t),
            IrrepLabel::Torus(_) => self.matrix(t)[(0, 0)],
        }
    }

    /// `π̄(Y)`.
    pub fn algebra_image(&self, y: &AlgebraVec) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (g, c) in self.generators.iter().zip(y.as_slice()) {
            m += g * C64::new(*c, 0.0);
        }
        m
    }

    /// Eigenvalues of the hermitian matrix `-i π̄(Y)`.
    pub fn weights(&self, y: &AlgebraVec) -> Vec<f64> {
        let h = self.algebra_image(y) * C64::new(0.0, -1.0);
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let mut w: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        w
    }

    /// `log ‖π(e^{iY})⁻¹‖²_HS = log Σ e^{2m}` over the weights `m`.
    pub fn log_hs_inverse_sq(&self, y: &AlgebraVec) -> f64 {
        log_sum_exp(self.weights(y).iter().map(|m| 2.0 * m))
    }

    /// Largest deviation from skew-hermiticity and from the bracket relations.
    pub fn residuals(&self, model: &LieModel) -> (f64, f64) {
        let n = model.dim();
        let skew = self
            .generators
            .iter()
            .map(|g| (g + g.adjoint()).norm())
            .fold(0.0, f64::max);
        let mut comm: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let lhs = &self.generators[i] * &self.generators[j]
                    - &self.generators[j] * &self.generators[i];
                let b = model.bracket_unchecked(&AlgebraVec::basis(n, i), &AlgebraVec::basis(n, j));
                comm = comm.max((lhs - self.algebra_image(&b)).norm());
            }
        }
        (skew, comm)
    }
}

pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{su2_euler, su2_haar_rule};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity(n: usize) -> CMat {
        CMat::identity(n, n)
    }

    #[test]
    fn su2_irreps_are_representations() {
        let m = LieModel::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for twice_j in 0..=6 {
            let pi = Irrep::new(&m, IrrepLabel::Su2 { twice_j }).unwrap();
            let (skew, comm) = pi.residuals(&m);
            assert!(skew < 1e-12 && comm < 1e-12, "j={twice_j}");
            let g = m.random_group_point(&mut rng).unwrap();
            let h = m.random_group_point(&mut rng).unwrap();
            let pg = pi.matrix(g.matrix());
            let ph = pi.matrix(h.matrix());
            let pgh = pi.matrix(&(g.matrix() * h.matrix()));
            assert!((&pg * &ph - pgh).norm() < 1e-12);
            assert!((pg.adjoint() * &pg - identity(pi.dim)).norm() < 1e-12);
            assert!((pi.character(g.matrix()) - pg.trace()).norm() < 1e-12);
            assert!((pi.character(&identity(2)).re - pi.dim as f64).abs() < 1e-12);
            // Derivation agrees with the exponential on complex points.
            let y = m.random_algebra(&mut rng, 0.7);
            let z = m.random_algebra(&mut rng, 0.7);
            let t = m.exp_alg(&y, &z);
            let mut gen = pi.algebra_image(&y) + pi.algebra_image(&z) * C64::new(0.0, 1.0);
            gen = gen.exp();
            assert!((gen - pi.matrix(t.matrix())).norm() < 1e-11);
        }
    }

    #[test]
    fn su2_weights() {
        let m = LieModel::su2();
        let pi = Irrep::new(&m, IrrepLabel::Su2 { twice_j: 3 }).unwrap();
        let w = pi.weights(&m.torus_embed(&[2.0]));
        let expect = [-3.0, -1.0, 1.0, 3.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn character_orthonormality_under_haar_rule() {
        let rule = su2_haar_rule(4);
        for a in 0..=4 {
            for b in 0..=4 {
                let v = rule.integrate_complex(|n| {
                    let g = su2_euler(n[0], n[1], n[2]);
                    su2_character(a, &g) * su2_character(b, &g).conj()
                });
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((v - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn torus_labels() {
        let m = LieModel::t2();
        let l = labels_up_to(&m, 1).unwrap();
        assert_eq!(l.len(), 9);
        assert_eq!(l[0], IrrepLabel::Torus(vec![0, 0]));
        let u = labels_up_to(&LieModel::u1(), 8).unwrap();
        assert_eq!(u.len(), 17);
        assert_eq!(format!("{}", IrrepLabel::Su2 { twice_j: 3 }), "j=3/2");
    }

    #[test]
    fn log_sum_exp_is_stable() {
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
