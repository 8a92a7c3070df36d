//! Norm-one positive maps on `R^n` with a lattice norm: the cone generated by
//! the orthant and `e - B`, fixed points, and invariant faces.

mod face;
mod te;

pub use face::{
    compute_face, difference_quotient, dirder, dirder_closed_form, verify_face_theorem,
    FaceChecks, FaceData, FaceDescription, FaceKind, FaceReport, MonotoneSpace, MIN_PROBE_STEP,
    PROBE_HALVINGS,
};
pub use te::{
    build_te_dual, fixed_point_to_eigenvector, solve_te_eigenvector, te_membership, TeDual,
    TeMembership, NORM_ONE_TOL,
};
