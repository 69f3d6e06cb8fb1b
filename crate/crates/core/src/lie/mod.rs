//! Desk-scale compact Lie groups: algebra arithmetic, exponentials, roots and
//! Weyl groups.
//!
//! Normalization used everywhere: for `su2` the basis is `e_j = -(i/2) σ_j` in
//! the defining representation with `<X, Y> = -2 tr(XY)`, so `{e_j}` is
//! orthonormal, `[e1, e2] = e3` cyclically, `t = span{e3}` and the single
//! positive real root is `α(y e3) = y`. Torus models use angles with period
//! `2π / scale` per coordinate.

mod analytic;
mod model;
mod model_file;
mod types;
mod weyl;

pub use analytic::{ad_function, ad_function_real, scalar_function, sinhc, AdFunction};
pub(crate) use model::special_unitary;
pub use model::{InvariantResiduals, LieModel, ModelKind, NORMALIZATION};
pub use model_file::parse_model_file;
pub use types::{AlgebraVec, GroupPoint, RealRoot};
pub use weyl::{weyl_determinant, WeylElement};
