use crate::lie::{LieModel, RealRoot};
use crate::{CMat, Error, RMat, Result};

/// An element of `W(G, T)` acting on `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylElement {
    /// Orthogonal `r × r` matrix acting on torus coordinates.
    pub matrix: RMat,
    /// Indices into the positive roots; the element is the product of the
    /// corresponding reflections, leftmost applied last.
    pub word: Vec<usize>,
    /// A representative in the normalizer of `T`, when the model has one.
    pub representative: Option<CMat>,
}

impl WeylElement {
    pub fn act(&self, y_t: &[f64]) -> Vec<f64> {
        (0..self.matrix.nrows())
            .map(|i| {
                (0..self.matrix.ncols())
                    .map(|j| self.matrix[(i, j)] * y_t[j])
                    .sum()
            })
            .collect()
    }

    /// Image `α ∘ w⁻¹` of a root under `w`.
    pub fn act_on_root(&self, root: &RealRoot) -> RealRoot {
        // For orthogonal w, (α ∘ w⁻¹) has covector w α.
        RealRoot::new(self.act(&root.covector))
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let r = self.matrix.nrows();
        (&self.matrix - RMat::identity(r, r)).amax() <= tol
    }
}

pub fn weyl_determinant(w: &WeylElement) -> f64 {
    if w.matrix.nrows() == 0 {
        return 1.0;
    }
    w.matrix.determinant().signum()
}

const MAX_WORD_LENGTH: usize = 32;

fn reflection(root: &RealRoot) -> RMat {
    let r = root.covector.len();
    let a = nalgebra::DVector::from_column_slice(&root.covector);
    RMat::identity(r, r) - (&a * a.transpose()) * (2.0 / root.norm_sq())
}

/// Close the reflections in the positive roots under composition.
pub(crate) fn generate_weyl_group(model: &LieModel) -> Result<Vec<WeylElement>> {
    let r = model.rank();
    let positive = model.positive_roots();
    let reps = model.weyl_reps();
    let have_reps = reps.len() == positive.len();
    let gens: Vec<RMat> = positive.iter().map(reflection).collect();
    let mut elements = vec![WeylElement {
        matrix: RMat::identity(r, r),
        word: Vec::new(),
        representative: Some(CMat::identity(
            model.defining_rep_dim(),
            model.defining_rep_dim(),
        )),
    }];
    let mut frontier = vec![0usize];
    let mut length = 0;
    while !frontier.is_empty() {
        length += 1;
        if length > MAX_WORD_LENGTH {
            return Err(Error::Model(format!(
                "Weyl group of '{}' did not close within word length {MAX_WORD_LENGTH}",
                model.name()
            )));
        }
        let mut next = Vec::new();
        for &idx in &frontier {
            for (g, s) in gens.iter().enumerate() {
                let m = s * &elements[idx].matrix;
                if elements.iter().any(|e| (&e.matrix - &m).amax() < 1e-9) {
                    continue;
                }
                let mut word = vec![g];
                word.extend_from_slice(&elements[idx].word);
                let representative = match (&elements[idx].representative, have_reps) {
                    (Some(prev), true) => Some(&reps[g] * prev),
                    _ => None,
                };
                elements.push(WeylElement {
                    matrix: m,
                    word,
                    representative,
                });
                next.push(elements.len() - 1);
            }
        }
        frontier = next;
    }
    Ok(elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_group_is_trivial() {
        for m in [LieModel::u1(), LieModel::t2()] {
            let w = m.weyl_group().unwrap();
            assert_eq!(w.len(), 1);
            assert!(w[0].is_identity(0.0));
            assert_eq!(weyl_determinant(&w[0]), 1.0);
        }
    }

    #[test]
    fn su2_group_is_sign_flip() {
        let m = LieModel::su2();
        let w = m.weyl_group().unwrap();
        assert_eq!(w.len(), 2);
        let dets: Vec<f64> = w.iter().map(weyl_determinant).collect();
        assert_eq!(dets, vec![1.0, -1.0]);
        assert!((w[1].matrix[(0, 0)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn weyl_elements_permute_roots() {
        let m = LieModel::su2();
        for w in m.weyl_group().unwrap() {
            for root in m.roots() {
                let image = w.act_on_root(root);
                assert!(m.roots().iter().any(|r| r.approx_eq(&image, 1e-12)));
            }
        }
    }

    #[test]
    fn representative_normalizes_torus() {
        let m = LieModel::su2();
        for w in m.weyl_group().unwrap() {
            let n = crate::GroupPoint::new(w.representative.clone().unwrap());
            for y in [0.7, -1.9] {
                let image = m.adjoint_action(&n, &m.torus_embed(&[y])).unwrap();
                let expect = m.torus_embed(&w.act(&[y]));
                assert!((&image - &expect).norm() < 1e-12);
                assert!(m.off_torus_norm(&image) < 1e-12);
            }
        }
    }
}
