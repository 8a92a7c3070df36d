//! Independent checks: a dense eigensolver, seeded instance generators and
//! differential runs comparing the two.

mod dense;
mod differential;
mod generate;

pub use dense::{dense_dual_eigs, DenseSpectrum, RealEigenspace, IMAG_TOL, MAX_DENSE_DIM};
pub use differential::{
    differential_run, run_trial, Summary, TrialRecord, LAMBDA_REL_TOL, POSITIVITY_TRIALS,
};
pub use generate::{generate, Family, Instance, InstanceSpec, MAX_ATTEMPTS, MAX_PERTURBATION};
