//! Differential runs: each generated instance goes through the production
//! solver and the dense oracle, and the two are compared.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::dense::dense_dual_eigs;
use super::generate::{generate, Family, Instance, InstanceSpec};
use crate::cone::{Cone, Tolerances};
use crate::contraction::{solve_te_eigenvector, verify_face_theorem, MonotoneSpace};
use crate::error::Result;
use crate::krein::{
    common_eigenvector, solve_dual_eigenvector, CommutingFamily, PositiveOperator,
    DEFAULT_MAX_ITER,
};
use crate::l1::{criterion_implies_invariance, find_certificate_index, L1Matrix};
use crate::linalg;
use crate::matrix_order::{fixed_state, is_positive_map, SuperOp, PSD_TOL};
use crate::norm::NormTag;
use crate::random::trial_seed;

/// Relative agreement required between solver and oracle eigenvalues.
pub const LAMBDA_REL_TOL: f64 = 1e-6;
/// Sampled positivity trials per map.
pub const POSITIVITY_TRIALS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: u64,
    pub seed: u64,
    pub passed: bool,
    pub lambda_solver: Option<f64>,
    pub lambda_oracle: Option<f64>,
    pub rel_err: Option<f64>,
    pub residual: Option<f64>,
    /// Why the trial failed; empty on success.
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub family: Family,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub worst_rel_err: f64,
    pub worst_residual: f64,
    /// Index of the trial with the largest relative error.
    pub worst_index: Option<u64>,
    pub failures: Vec<TrialRecord>,
    pub records: Vec<TrialRecord>,
}

impl Summary {
    fn empty(family: Family, n: usize, seed: u64) -> Self {
        Summary {
            family,
            n,
            trials: 0,
            seed,
            passed: 0,
            failed: 0,
            worst_rel_err: 0.0,
            worst_residual: 0.0,
            worst_index: None,
            failures: Vec::new(),
            records: Vec::new(),
        }
    }

    fn push(&mut self, rec: TrialRecord) {
        self.trials += 1;
        if rec.passed {
            self.passed += 1;
        } else {
            self.failed += 1;
            self.failures.push(rec.clone());
        }
        if let Some(e) = rec.rel_err {
            if e > self.worst_rel_err || self.worst_index.is_none() {
                self.worst_rel_err = self.worst_rel_err.max(e);
                self.worst_index = Some(rec.index);
            }
        }
        if let Some(r) = rec.residual {
            self.worst_residual = self.worst_residual.max(r);
        }
        self.records.push(rec);
    }

    /// Combines summaries of disjoint trial sets of the same run; the result
    /// does not depend on grouping or order.
    pub fn merge(mut self, other: Summary) -> Summary {
        let mut records = std::mem::take(&mut self.records);
        records.extend(other.records);
        records.sort_by_key(|r| r.index);
        let mut out = Summary::empty(self.family, self.n, self.seed);
        for r in records {
            out.push(r);
        }
        out
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    /// The summary without per-trial records.
    pub fn brief(&self) -> Summary {
        Summary {
            records: Vec::new(),
            ..self.clone()
        }
    }
}

/// Runs `trials` instances of `family` at size `n`; trial `i` uses
/// [`trial_seed`]`(seed, i)`. Failures, including generation failures, are
/// recorded rather than returned.
pub fn differential_run(family: Family, n: usize, trials: usize, seed: u64) -> Summary {
    let records: Vec<TrialRecord> = (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial(family, n, i, trial_seed(seed, i)))
        .collect();
    let mut summary = Summary::empty(family, n, seed);
    for r in records {
        summary.push(r);
    }
    summary
}

/// One trial of a differential run.
pub fn run_trial(family: Family, n: usize, index: u64, seed: u64) -> TrialRecord {
    let mut rec = TrialRecord {
        index,
        seed,
        passed: false,
        lambda_solver: None,
        lambda_oracle: None,
        rel_err: None,
        residual: None,
        note: String::new(),
    };
    let spec = InstanceSpec { family, n, seed };
    let outcome = generate(&spec).and_then(|inst| check_instance(&inst, &mut rec));
    match outcome {
        Ok(()) => rec.passed = rec.note.is_empty(),
        Err(e) => rec.note = e.to_string(),
    }
    rec
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn fail(rec: &mut TrialRecord, note: impl Into<String>) {
    if rec.note.is_empty() {
        rec.note = note.into();
    }
}

fn check_instance(inst: &Instance, rec: &mut TrialRecord) -> Result<()> {
    let tol = Tolerances::default();
    match inst {
        Instance::NonnegOrthant { t } => {
            let n = t.nrows();
            let e = DVector::from_element(n, 1.0);
            let op = PositiveOperator::new(t.clone(), Cone::orthant(n), e, NormTag::Linf, &tol)?;
            let pair = solve_dual_eigenvector(&op, &tol, DEFAULT_MAX_ITER)?;
            let perron = linalg::spectral_radius(t)?;
            record_pair(rec, pair.lambda, perron, pair.residual, &tol);
            if pair.h.min() < -1e-12 {
                fail(rec, "h has a negative entry");
            }
            if (pair.h.sum() - 1.0).abs() > 1e-9 {
                fail(rec, "h(e) != 1");
            }
            check_spectrum(rec, t, pair.lambda, Some((&Cone::orthant(n), &op)))?;
        }
        Instance::L1Krein { t, .. } => {
            let n = t.nrows();
            let m = L1Matrix::new(t.clone())?;
            if find_certificate_index(&m, 0.0) != Some(0) {
                fail(rec, "certificate index is not the first");
            }
            if !criterion_implies_invariance(&m, 0, 1e-12)? {
                fail(rec, "a generator image leaves the cone");
            }
            let cone = Cone::l1_krein(n, 0)?;
            let mut e = DVector::zeros(n);
            e[0] = 1.0;
            let op = PositiveOperator::new(t.clone(), cone.clone(), e, NormTag::L1, &tol)?;
            let pair = solve_dual_eigenvector(&op, &tol, DEFAULT_MAX_ITER)?;
            let oracle = nearest_real(t, pair.lambda)?;
            record_pair(rec, pair.lambda, oracle, pair.residual, &tol);
            if !cone.dual_contains(&pair.h, &tol)? {
                fail(rec, "h is outside the dual cone");
            }
            check_spectrum(rec, t, pair.lambda, Some((&cone, &op)))?;
        }
        Instance::TeContraction { t, e } => {
            let n = t.nrows();
            let space = MonotoneSpace::new(n, NormTag::Linf)?;
            let report = verify_face_theorem(t, e, &space, &tol)?;
            if !report.checks.all_passed() {
                fail(rec, format!("face checks failed: {:?}", report.checks));
            }
            let pair = solve_te_eigenvector(t, e, &NormTag::Linf, &tol, DEFAULT_MAX_ITER)?;
            let oracle = nearest_real(t, pair.lambda)?;
            record_pair(rec, pair.lambda, oracle, pair.residual, &tol);
        }
        Instance::CommutingPair { a, b } => {
            let n = a.nrows();
            let e = DVector::from_element(n, 1.0);
            let mk = |m: &DMatrix<f64>| {
                PositiveOperator::new(m.clone(), Cone::orthant(n), e.clone(), NormTag::Linf, &tol)
            };
            let ctol = 1e-12 * (a.norm() * b.norm()).max(1.0);
            let family = CommutingFamily::new(vec![mk(a)?, mk(b)?], ctol)?;
            let common = common_eigenvector(&family, &tol, DEFAULT_MAX_ITER)?;
            let (la, lb) = (common.lambdas[0], common.lambdas[1]);
            let perron = linalg::spectral_radius(a)?;
            let worst = common.residuals.iter().copied().fold(0.0, f64::max);
            record_pair(rec, la, perron, worst, &tol);
            if rel(lb, la * la + la) > LAMBDA_REL_TOL {
                fail(rec, format!("lambda_b = {lb} but p(lambda_a) = {}", la * la + la));
            }
        }
        Instance::PositiveMap { phi } => {
            let verdict = is_positive_map(phi, POSITIVITY_TRIALS, rec.seed)?;
            if verdict.is_falsified() {
                fail(rec, "map falsified as positive");
                return Ok(());
            }
            let st = fixed_state(phi, tol.residual_tol, DEFAULT_MAX_ITER)?;
            let oracle = realified_spectral_radius(phi)?;
            record_pair(rec, st.lambda, oracle, st.residual, &tol);
            if st.rho.min_eigenvalue() < -PSD_TOL {
                fail(rec, format!("rho has eigenvalue {}", st.rho.min_eigenvalue()));
            }
            if (st.rho.trace() - 1.0).abs() > 1e-9 {
                fail(rec, format!("trace of rho is {}", st.rho.trace()));
            }
        }
    }
    Ok(())
}

fn record_pair(rec: &mut TrialRecord, solver: f64, oracle: f64, residual: f64, tol: &Tolerances) {
    let err = rel(solver, oracle);
    rec.lambda_solver = Some(solver);
    rec.lambda_oracle = Some(oracle);
    rec.rel_err = Some(err);
    rec.residual = Some(residual);
    if err > LAMBDA_REL_TOL {
        fail(rec, format!("lambda {solver} disagrees with oracle {oracle}"));
    }
    if residual > tol.residual_tol {
        fail(rec, format!("residual {residual:e} above {:e}", tol.residual_tol));
    }
}

/// The real eigenvalue of `t` closest to `lambda`.
fn nearest_real(t: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    let spec = dense_dual_eigs(t)?;
    Ok(spec
        .real
        .iter()
        .map(|s| s.lambda)
        .min_by(|a, b| (a - lambda).abs().total_cmp(&(b - lambda).abs()))
        .unwrap_or(f64::NAN))
}

/// The oracle spectrum has the solver's eigenvalue and a dual-cone
/// eigenvector exists.
fn check_spectrum(
    rec: &mut TrialRecord,
    t: &DMatrix<f64>,
    lambda: f64,
    cone: Option<(&Cone, &PositiveOperator)>,
) -> Result<()> {
    let spec = dense_dual_eigs(t)?;
    if !spec.has_real(lambda, LAMBDA_REL_TOL) {
        fail(rec, format!("lambda {lambda} not in the dense spectrum"));
    }
    if let Some((cone, op)) = cone {
        if spec
            .dual_cone_witness(cone, op.e(), &Tolerances::default())?
            .is_none()
        {
            fail(rec, "no dense eigenvector lies in the dual cone");
        }
    }
    Ok(())
}

/// Spectral radius of the action of `phi` as a real-linear map on `C^{n x n}`.
fn realified_spectral_radius(phi: &SuperOp) -> Result<f64> {
    let a = phi.action();
    let d = a.nrows();
    let m = DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z = a[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    linalg::spectral_radius(&m)
}
