//! Numerical workbench for the Kähler geometry, coherent-state transform and
//! singular symplectic reduction of `T*G` for small compact Lie groups.
//!
//! Every verification produces a [`CheckReport`]; the [`suite`] module strings
//! them together for the `quantlab` command-line tool.

pub mod coherent;
pub mod density;
pub mod error;
pub mod irrep;
pub mod kahler;
pub mod lie;
pub mod psh;
pub mod quadrature;
pub mod reduction;
pub mod report;
pub mod sampling;
pub mod stratum;
pub mod suite;

pub use error::{Error, Result};
pub use lie::{AlgebraVec, GroupPoint, LieModel, RealRoot, WeylElement};
pub use report::CheckReport;

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
