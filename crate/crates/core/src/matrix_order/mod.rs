//! The matrix algebra `M_n`: PSD order with unit `I`, positive maps in
//! superoperator form, and singular-value majorization under pinching.

mod herm;
mod spectral;
mod superop;

pub use herm::{unit_dominates_sa_ball, HermMatrix, HERMITIAN_TOL, MAX_SA_BALL_DIM};
pub use spectral::{
    eig_function, face_psd, op_norm_dirder, peak_projector, pinch, pinch_majorization, psd_face,
    rank_one, EigFunction, PinchReport, PsdFaceMembership, MAJORIZATION_TOL, PEAK_TOL,
};
pub use superop::{
    adjoint_superop, consistency, fixed_state, is_positive_map, trace_pairing, unvec_row_major,
    vec_row_major, ConsistencyReport, FixedState, Positivity, SuperOp, CONSISTENCY_TOL, PSD_TOL,
};
