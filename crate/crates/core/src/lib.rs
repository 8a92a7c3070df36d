//! Positive eigenvectors of adjoints of cone-preserving operators on
//! finite-dimensional ordered normed spaces.
//!
//! The central device is the map `F_T(f) = (f + T^T f) / [f + T^T f](e)` on
//! the positive functionals normalized at a point `e` that dominates the unit
//! ball; its fixed points are the positive eigenvectors of `T^T`.

pub mod cone;
pub mod contraction;
pub mod error;
pub mod io;
pub mod krein;
pub mod l1;
pub mod linalg;
pub mod lp;
pub mod matrix_order;
pub mod norm;
pub mod oracle;
pub mod random;

pub use cone::{Cone, Tolerances};
pub use error::{Error, ErrorClass, Result};
pub use krein::{
    common_eigenvector, krein_map, plus_identity_transfer, solve_dual_eigenvector,
    CommutingFamily, DualEigenpair, Method, PositiveOperator,
};
pub use norm::NormTag;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
