use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::lie::weyl::{generate_weyl_group, WeylElement};
use crate::lie::{AlgebraVec, GroupPoint, RealRoot};
use crate::{CMat, Error, RMat, Result, C64};

/// Normalization statement attached to every report.
pub const NORMALIZATION: &str = "su2: e_j = -(i/2) sigma_j, <X,Y> = -2 tr(XY), alpha(y e3) = y; \
tori: orthonormal angle coordinates; probability Haar on G and T; \
Lebesgue dY in orthonormal coordinates; Gaussian weight exp(-2 pi |Y|^2)";

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    /// Torus `T^r` with `exp(y e_k) = diag(.., e^{i s_k y}, ..)`.
    Torus {
        scales: Vec<f64>,
    },
    Su2,
    /// Loaded from a model file; group-level operations beyond the defining
    /// representation are unavailable.
    Custom,
}

/// A compact connected Lie group at desk scale.
#[derive(Clone, Debug)]
pub struct LieModel {
    name: String,
    kind: ModelKind,
    dim: usize,
    structure: Vec<f64>,
    inner: RMat,
    torus_indices: Vec<usize>,
    roots: Vec<RealRoot>,
    generators: Vec<CMat>,
    coord_gram_inv: RMat,
    weyl_reps: Vec<CMat>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl LieModel {
    /// Assemble a model from raw data. Validates antisymmetry, the Jacobi
    /// identity, ad-invariance and that the generators realize the brackets.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        name: &str,
        kind: ModelKind,
        structure: Vec<f64>,
        torus_indices: Vec<usize>,
        roots: Vec<RealRoot>,
        generators: Vec<CMat>,
        weyl_reps: Vec<CMat>,
    ) -> Result<Self> {
        let dim = generators.len();
        if dim == 0 {
            return Err(Error::Model("model has no generators".into()));
        }
        if structure.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                got: structure.len(),
            });
        }
        let size = generators[0].nrows();
        if generators
            .iter()
            .any(|g| g.nrows() != size || g.ncols() != size)
        {
            return Err(Error::Model("generators must share one square size".into()));
        }
        let rank = torus_indices.len();
        if torus_indices.iter().any(|&k| k >= dim) {
            return Err(Error::Model("torus index out of range".into()));
        }
        if roots.iter().any(|r| r.covector.len() != rank) {
            return Err(Error::Model(
                "root covector length differs from rank".into(),
            ));
        }
        let gram = DMatrix::from_fn(dim, dim, |k, l| {
            (generators[k].adjoint() * &generators[l]).trace().re
        });
        let coord_gram_inv = gram
            .try_inverse()
            .ok_or_else(|| Error::Model("generators are linearly dependent".into()))?;
        let model = Self {
            name: name.to_string(),
            kind,
            dim,
            structure,
            inner: RMat::identity(dim, dim),
            torus_indices,
            roots,
            generators,
            coord_gram_inv,
            weyl_reps,
        };
        let inv = model.invariant_residuals();
        if inv.max() > 1e-10 {
            return Err(Error::Model(format!(
                "model '{}' violates Lie algebra invariants: {inv:?}",
                model.name
            )));
        }
        Ok(model)
    }

    /// The circle group, `e1 = i` in the 1×1 defining representation.
    pub fn u1() -> Self {
        Self::torus("u1", vec![1.0])
    }

    /// The two-torus.
    pub fn t2() -> Self {
        Self::torus("t2", vec![1.0, 1.0])
    }

    /// A torus with `exp(y e_k) = e^{i s_k y}` on the k-th diagonal entry.
    pub fn torus(name: &str, scales: Vec<f64>) -> Self {
        let r = scales.len();
        let generators = (0..r)
            .map(|k| {
                let mut m = CMat::zeros(r, r);
                m[(k, k)] = c(0.0, scales[k]);
                m
            })
            .collect();
        Self::from_parts(
            name,
            ModelKind::Torus { scales },
            vec![0.0; r * r * r],
            (0..r).collect(),
            Vec::new(),
            generators,
            Vec::new(),
        )
        .expect("built-in torus model is valid")
    }

    pub fn su2() -> Self {
        let h = 0.5;
        let e1 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -h), c(0.0, -h), c(0.0, 0.0)]);
        let e2 = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-h, 0.0), c(h, 0.0), c(0.0, 0.0)]);
        let e3 = DMatrix::from_row_slice(2, 2, &[c(0.0, -h), c(0.0, 0.0), c(0.0, 0.0), c(0.0, h)]);
        let mut structure = vec![0.0; 27];
        let mut set = |i: usize, j: usize, k: usize| {
            structure[i * 9 + j * 3 + k] = 1.0;
            structure[j * 9 + i * 3 + k] = -1.0;
        };
        set(0, 1, 2);
        set(1, 2, 0);
        set(2, 0, 1);
        // exp(π e2) maps e3 to -e3.
        let n =
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        Self::from_parts(
            "su2",
            ModelKind::Su2,
            structure,
            vec![2],
            vec![RealRoot::new(vec![1.0]), RealRoot::new(vec![-1.0])],
            vec![e1, e2, e3],
            vec![n],
        )
        .expect("built-in su2 model is valid")
    }

    /// Names accepted by [`LieModel::by_name`].
    pub const BUILTIN: [&'static str; 3] = ["u1", "t2", "su2"];

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "u1" => Ok(Self::u1()),
            "t2" => Ok(Self::t2()),
            "su2" => Ok(Self::su2()),
            other => Err(Error::Usage(format!(
                "unknown model '{other}'; available models: {}",
                Self::BUILTIN.join(", ")
            ))),
        }
    }

    /// The maximal torus of this model as a torus model of its own, together
    /// with the diagonal entry of the defining matrix that carries its
    /// coordinate character.
    pub fn maximal_torus(&self) -> Result<LieModel> {
        match &self.kind {
            ModelKind::Torus { .. } => Ok(self.clone()),
            ModelKind::Su2 => Ok(Self::torus("su2-torus", vec![0.5])),
            ModelKind::Custom => Err(Error::Model(format!(
                "model '{}' has no torus parametrization",
                self.name
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.torus_indices.len()
    }

    pub fn defining_rep_dim(&self) -> usize {
        self.generators[0].nrows()
    }

    pub fn is_abelian(&self) -> bool {
        self.structure.iter().all(|c| *c == 0.0)
    }

    pub fn inner(&self) -> &RMat {
        &self.inner
    }

    pub fn torus_indices(&self) -> &[usize] {
        &self.torus_indices
    }

    pub fn roots(&self) -> &[RealRoot] {
        &self.roots
    }

    pub fn positive_roots(&self) -> Vec<RealRoot> {
        self.roots
            .iter()
            .filter(|r| r.is_positive())
            .cloned()
            .collect()
    }

    pub fn generators(&self) -> &[CMat] {
        &self.generators
    }

    /// Group representatives of the reflections in the positive roots.
    pub(crate) fn weyl_reps(&self) -> &[CMat] {
        &self.weyl_reps
    }

    /// `c[i][j][k]` with `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
    pub fn structure(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[i * self.dim * self.dim + j * self.dim + k]
    }

    fn check_dim(&self, v: &AlgebraVec) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &AlgebraVec, y: &AlgebraVec) -> Result<AlgebraVec> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &AlgebraVec, y: &AlgebraVec) -> AlgebraVec {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let xi = x.coords()[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..n {
                let yj = y.coords()[j];
                if yj == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += xi * yj * self.structure(i, j, k);
                }
            }
        }
        AlgebraVec::new(out)
    }

    /// Matrix of `ad Y` acting on coordinates.
    pub fn ad_matrix(&self, y: &AlgebraVec) -> RMat {
        let n = self.dim;
        RMat::from_fn(n, n, |k, j| {
            (0..n)
                .map(|i| y.coords()[i] * self.structure(i, j, k))
                .sum()
        })
    }

    /// Image of `Y` in the defining representation.
    pub fn to_matrix(&self, y: &AlgebraVec) -> CMat {
        let size = self.defining_rep_dim();
        let mut m = CMat::zeros(size, size);
        for (k, g) in self.generators.iter().enumerate() {
            m += g * c(y.coords()[k], 0.0);
        }
        m
    }

    /// Coordinates of a matrix lying in the real span of the generators.
    pub fn coords_of(&self, m: &CMat) -> AlgebraVec {
        let b = DVector::from_fn(self.dim, |k, _| {
            (self.generators[k].adjoint() * m).trace().re
        });
        AlgebraVec::from_dvector(&self.coord_gram_inv * b)
    }

    /// Split an element `A + iB` of the complexified algebra into `(A, B)`.
    pub fn complex_coords_of(&self, m: &CMat) -> (AlgebraVec, AlgebraVec) {
        let half = c(0.5, 0.0);
        let anti = (m - m.adjoint()) * half;
        let herm = (m + m.adjoint()) * half;
        let b = herm * c(0.0, -1.0);
        (self.coords_of(&anti), self.coords_of(&b))
    }

    /// `exp(Y + iZ)` in the defining representation.
    pub fn exp_alg(&self, y: &AlgebraVec, z: &AlgebraVec) -> GroupPoint {
        let m = self.to_matrix(y) + self.to_matrix(z) * c(0.0, 1.0);
        GroupPoint::new(m.exp())
    }

    pub fn exp(&self, y: &AlgebraVec) -> GroupPoint {
        GroupPoint::new(self.to_matrix(y).exp())
    }

    /// The polar map `(x, Y) ↦ x e^{iY}`.
    pub fn polar(&self, x: &GroupPoint, y: &AlgebraVec) -> GroupPoint {
        x.mul(&self.exp_alg(&AlgebraVec::zeros(self.dim), y))
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::identity(self.defining_rep_dim())
    }

    pub fn adjoint_action(&self, g: &GroupPoint, y: &AlgebraVec) -> Result<AlgebraVec> {
        self.check_dim(y)?;
        let res = g.unitarity_residual();
        if res > 1e-10 {
            return Err(Error::Usage(format!(
                "adjoint action needs a unitary group element (residual {res:.3e})"
            )));
        }
        Ok(self.adjoint_unchecked(g, y))
    }

    pub(crate) fn adjoint_unchecked(&self, g: &GroupPoint, y: &AlgebraVec) -> AlgebraVec {
        let gm = g.matrix();
        self.coords_of(&(gm * self.to_matrix(y) * gm.adjoint()))
    }

    /// Matrix of `Ad_g` in the orthonormal basis.
    pub fn adjoint_matrix(&self, g: &GroupPoint) -> RMat {
        let n = self.dim;
        let mut m = RMat::zeros(n, n);
        for k in 0..n {
            let col = self.adjoint_unchecked(g, &AlgebraVec::basis(n, k));
            m.set_column(k, col.coords());
        }
        m
    }

    /// Embed torus coordinates into the algebra.
    pub fn torus_embed(&self, y_t: &[f64]) -> AlgebraVec {
        let mut v = vec![0.0; self.dim];
        for (&k, y) in self.torus_indices.iter().zip(y_t) {
            v[k] = *y;
        }
        AlgebraVec::new(v)
    }

    /// Coordinates of the projection of `Y` onto `t`.
    pub fn torus_coords(&self, y: &AlgebraVec) -> Vec<f64> {
        self.torus_indices.iter().map(|&k| y.coords()[k]).collect()
    }

    /// Residual of `Y` from `t`.
    pub fn off_torus_norm(&self, y: &AlgebraVec) -> f64 {
        let t = self.torus_embed(&self.torus_coords(y));
        (y - &t).norm()
    }

    pub fn torus_point(&self, y_t: &[f64]) -> GroupPoint {
        self.exp(&self.torus_embed(y_t))
    }

    /// Periods of the torus coordinates (`exp(period · e_k) = 1`).
    pub fn torus_periods(&self) -> Result<Vec<f64>> {
        match &self.kind {
            ModelKind::Torus { scales } => Ok(scales
                .iter()
                .map(|s| 2.0 * std::f64::consts::PI / s)
                .collect()),
            ModelKind::Su2 => Ok(vec![4.0 * std::f64::consts::PI]),
            ModelKind::Custom => Err(Error::Model(format!(
                "model '{}' has no torus parametrization",
                self.name
            ))),
        }
    }

    /// Find `h` and `Y' ∈ t` with `Ad_h Y' = Y`.
    pub fn torus_conjugate(&self, y: &AlgebraVec) -> Result<(GroupPoint, Vec<f64>)> {
        self.check_dim(y)?;
        match &self.kind {
            ModelKind::Torus { .. } => Ok((self.identity(), y.as_slice().to_vec())),
            ModelKind::Su2 => {
                let h = self.to_matrix(y) * c(0.0, 1.0);
                let h = (&h + h.adjoint()) * c(0.5, 0.0);
                let eig = h.symmetric_eigen();
                let u = special_unitary(eig.eigenvectors);
                // Y = U diag(-iλ0, -iλ1) U† and y e3 = diag(-iy/2, iy/2).
                Ok((GroupPoint::new(u), vec![2.0 * eig.eigenvalues[0]]))
            }
            ModelKind::Custom => Err(Error::Model(format!(
                "model '{}' has no torus parametrization",
                self.name
            ))),
        }
    }

    /// Haar-random group element.
    pub fn random_group_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GroupPoint> {
        match &self.kind {
            ModelKind::Torus { .. } => {
                let periods = self.torus_periods()?;
                let y: Vec<f64> = periods.iter().map(|p| rng.random::<f64>() * p).collect();
                Ok(self.torus_point(&y))
            }
            ModelKind::Su2 => {
                let mut q = [0.0f64; 4];
                for v in q.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                let [a, b, cc, d] = q.map(|v| v / n);
                Ok(GroupPoint::new(DMatrix::from_row_slice(
                    2,
                    2,
                    &[c(a, b), c(cc, d), c(-cc, d), c(a, -b)],
                )))
            }
            ModelKind::Custom => {
                let y = self.random_algebra(rng, 1.0);
                Ok(self.exp(&y))
            }
        }
    }

    /// Gaussian-random algebra element with per-coordinate standard deviation `scale`.
    pub fn random_algebra<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraVec {
        AlgebraVec::new(
            (0..self.dim)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        )
    }

    pub fn weyl_group(&self) -> Result<Vec<WeylElement>> {
        generate_weyl_group(self)
    }

    /// Residuals of the structural invariants.
    pub fn invariant_residuals(&self) -> InvariantResiduals {
        let n = self.dim;
        let mut antisym: f64 = 0.0;
        let mut jacobi: f64 = 0.0;
        let mut ad_inv: f64 = 0.0;
        let mut rep: f64 = 0.0;
        let basis: Vec<AlgebraVec> = (0..n).map(|k| AlgebraVec::basis(n, k)).collect();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    antisym =
                        antisym.max((self.structure(i, j, k) + self.structure(j, i, k)).abs());
                }
                let bij = self.bracket_unchecked(&basis[i], &basis[j]);
                let comm = &self.generators[i] * &self.generators[j]
                    - &self.generators[j] * &self.generators[i];
                rep = rep.max((comm - self.to_matrix(&bij)).norm());
                for k in 0..n {
                    let a = self.bracket_unchecked(
                        &basis[i],
                        &self.bracket_unchecked(&basis[j], &basis[k]),
                    );
                    let b = self.bracket_unchecked(
                        &basis[j],
                        &self.bracket_unchecked(&basis[k], &basis[i]),
                    );
                    let cc = self.bracket_unchecked(
                        &basis[k],
                        &self.bracket_unchecked(&basis[i], &basis[j]),
                    );
                    jacobi = jacobi.max((&(&a + &b) + &cc).norm());
                    // <[e_i, e_j], e_k> + <e_j, [e_i, e_k]>
                    let lhs = self.bracket_unchecked(&basis[i], &basis[j]).dot(&basis[k])
                        + basis[j].dot(&self.bracket_unchecked(&basis[i], &basis[k]));
                    ad_inv = ad_inv.max(lhs.abs());
                }
            }
        }
        let mut torus_comm: f64 = 0.0;
        for &a in &self.torus_indices {
            for &b in &self.torus_indices {
                torus_comm = torus_comm.max(self.bracket_unchecked(&basis[a], &basis[b]).norm());
            }
        }
        InvariantResiduals {
            antisymmetry: antisym,
            jacobi,
            ad_invariance: ad_inv,
            representation: rep,
            torus_commutation: torus_comm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantResiduals {
    pub antisymmetry: f64,
    pub jacobi: f64,
    pub ad_invariance: f64,
    pub representation: f64,
    pub torus_commutation: f64,
}

impl InvariantResiduals {
    pub fn max(&self) -> f64 {
        self.antisymmetry
            .max(self.jacobi)
            .max(self.ad_invariance)
            .max(self.representation)
            .max(self.torus_commutation)
    }
}

/// Rescale a unitary matrix by a phase so that its determinant is one.
pub(crate) fn special_unitary(u: CMat) -> CMat {
    let n = u.nrows() as f64;
    let det = u.determinant();
    let phase = C64::from_polar(1.0, -det.arg() / n);
    u * phase
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn e(n: usize, k: usize) -> AlgebraVec {
        AlgebraVec::basis(n, k)
    }

    #[test]
    fn su2_bracket_is_cyclic() {
        let m = LieModel::su2();
        assert_eq!(m.bracket(&e(3, 0), &e(3, 1)).unwrap(), e(3, 2));
        assert_eq!(m.bracket(&e(3, 1), &e(3, 2)).unwrap(), e(3, 0));
        assert_eq!(m.bracket(&e(3, 2), &e(3, 0)).unwrap(), e(3, 1));
    }

    #[test]
    fn bracket_with_self_vanishes() {
        let m = LieModel::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = m.random_algebra(&mut rng, 2.0);
            assert!(m.bracket(&x, &x).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn torus_brackets_vanish() {
        let m = LieModel::t2();
        let x = AlgebraVec::new(vec![1.3, -0.4]);
        let y = AlgebraVec::new(vec![0.2, 2.0]);
        assert_eq!(m.bracket(&x, &y).unwrap().norm(), 0.0);
    }

    #[test]
    fn bracket_dimension_mismatch_is_usage_error() {
        let m = LieModel::su2();
        let err = m.bracket(&e(2, 0), &e(3, 1)).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                got: 2
            }
        ));
    }

    #[test]
    fn builtins_satisfy_invariants() {
        for name in LieModel::BUILTIN {
            let m = LieModel::by_name(name).unwrap();
            assert!(m.invariant_residuals().max() < 1e-12, "{name}");
        }
    }

    #[test]
    fn unknown_model_is_usage_error() {
        let err = LieModel::by_name("e8").unwrap_err();
        assert!(matches!(err, Error::Usage(msg) if msg.contains("su2")));
    }

    #[test]
    fn adjoint_by_identity_and_rotation() {
        let m = LieModel::su2();
        let y = AlgebraVec::new(vec![0.3, -1.2, 0.7]);
        let back = m.adjoint_action(&m.identity(), &y).unwrap();
        assert!((&back - &y).norm() < 1e-15);
        // Rodrigues oracle: conjugation by exp(t e3) rotates the (e1, e2) plane.
        for t in [0.3, 1.0, 2.5, -4.0] {
            let g = m.exp(&(&e(3, 2) * t));
            let ad = m.adjoint_action(&g, &e(3, 0)).unwrap();
            let expect = AlgebraVec::new(vec![t.cos(), t.sin(), 0.0]);
            assert!((&ad - &expect).norm() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn adjoint_rejects_non_unitary() {
        let m = LieModel::su2();
        let g = m.exp_alg(&AlgebraVec::zeros(3), &e(3, 0));
        assert!(matches!(
            m.adjoint_action(&g, &e(3, 1)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn torus_adjoint_is_trivial() {
        let m = LieModel::t2();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = m.random_group_point(&mut rng).unwrap();
        let y = AlgebraVec::new(vec![0.5, -3.0]);
        assert!((&m.adjoint_action(&g, &y).unwrap() - &y).norm() < 1e-15);
    }

    #[test]
    fn exponentials() {
        let m = LieModel::su2();
        let z = AlgebraVec::zeros(3);
        assert!((m.exp_alg(&z, &z).matrix() - CMat::identity(2, 2)).norm() < 1e-15);

        let u1 = LieModel::u1();
        let th = 0.83;
        let p = u1.exp_alg(&AlgebraVec::new(vec![th]), &AlgebraVec::zeros(1));
        assert!((p.matrix()[(0, 0)] - C64::from_polar(1.0, th)).norm() < 1e-15);

        // With e_j = -(i/2) σ_j the one-parameter subgroups have period 4π:
        // |Y| = 2π gives -1, |Y| = π gives -i n·σ.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let d = m.random_algebra(&mut rng, 1.0);
            let n = &d * (1.0 / d.norm());
            let g = m.exp_alg(&(&n * (2.0 * PI)), &z);
            assert!((g.matrix() + CMat::identity(2, 2)).norm() < 1e-12);
            let half = m.exp_alg(&(&n * PI), &z);
            let expect = m.to_matrix(&n) * C64::new(2.0, 0.0);
            assert!((half.matrix() - expect).norm() < 1e-12);
        }

        let y = m.random_algebra(&mut rng, 1.0);
        assert!(m.exp_alg(&y, &z).is_unitary(1e-12));
        let p = m.exp_alg(&z, &y);
        let herm = (p.matrix() - p.matrix().adjoint()).norm();
        assert!(herm < 1e-12);
        let eig = p.matrix().clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|l| *l > 0.0));
    }

    #[test]
    fn root_eigenvalues_of_ad() {
        let m = LieModel::su2();
        for y in [0.4, 1.0, -2.3] {
            let ad = m.ad_matrix(&m.torus_embed(&[y]));
            let mut im: Vec<f64> = ad.complex_eigenvalues().iter().map(|z| z.im).collect();
            im.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut expect = vec![-y.abs(), 0.0, y.abs()];
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in im.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn torus_conjugate_recovers_element() {
        let m = LieModel::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let y = m.random_algebra(&mut rng, 1.5);
            let (h, yt) = m.torus_conjugate(&y).unwrap();
            assert!((h.determinant() - C64::new(1.0, 0.0)).norm() < 1e-12);
            assert!((yt[0].abs() - y.norm()).abs() < 1e-12);
            let back = m.adjoint_action(&h, &m.torus_embed(&yt)).unwrap();
            assert!((&back - &y).norm() < 1e-12);
        }
    }

    #[test]
    fn complex_coordinates_split() {
        let m = LieModel::su2();
        let a = AlgebraVec::new(vec![0.1, 0.2, -0.3]);
        let b = AlgebraVec::new(vec![-1.0, 0.5, 0.25]);
        let mat = m.to_matrix(&a) + m.to_matrix(&b) * C64::new(0.0, 1.0);
        let (ra, rb) = m.complex_coords_of(&mat);
        assert!((&ra - &a).norm() < 1e-15);
        assert!((&rb - &b).norm() < 1e-15);
    }
}
