//! Positive eigenvectors of adjoints by iterating
//! `F_T(f) = (f + T^T f) / [f + T^T f](e)` on the dual simplex
//! `S = {f in K* : f(e) = 1}`.
//!
//! Fixed points of `F_T` are exactly the eigenvectors of `T^T` in `S`. The
//! iteration is normalized power iteration of `I + T^T`; when it stalls a
//! dense eigensolve of `T^T` is searched for a dual-cone eigenvector.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cone::{dominates_ball, positivity_preserved, Cone, Tolerances};
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::norm::NormTag;

pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const MAX_FAMILY_SIZE: usize = 16;
/// Inverse-iteration steps applied after the fixed-point iteration converges.
pub const POLISH_STEPS: usize = 3;

/// A square matrix together with the cone it preserves and a point `e`
/// dominating the unit ball of the attached norm.
#[derive(Clone, Debug)]
pub struct PositiveOperator {
    matrix: DMatrix<f64>,
    cone: Cone,
    e: DVector<f64>,
    norm: NormTag,
    acknowledged: bool,
}

impl PositiveOperator {
    /// Checks positivity and ball domination before accepting the operator.
    pub fn new(
        matrix: DMatrix<f64>,
        cone: Cone,
        e: DVector<f64>,
        norm: NormTag,
        tol: &Tolerances,
    ) -> Result<Self> {
        let op = Self::acknowledged(matrix, cone, e, norm)?;
        let pos = positivity_preserved(&op.matrix, &op.cone, tol)?;
        if !pos.holds {
            let w = pos.witness.unwrap_or_default();
            return Err(Error::hypothesis(
                format!("operator does not preserve the {} cone", op.cone.kind()),
                w.iter().copied().collect(),
            ));
        }
        let dom = dominates_ball(&op.cone, &op.norm, &op.e, tol)?;
        if !dom.dominates {
            let w = dom.witness.unwrap_or_default();
            return Err(Error::hypothesis(
                "e does not dominate the unit ball: e - v leaves the cone",
                w.iter().copied().collect(),
            ));
        }
        Ok(PositiveOperator {
            acknowledged: false,
            ..op
        })
    }

    /// Accepts the hypotheses on the caller's word; only shapes are checked.
    pub fn acknowledged(
        matrix: DMatrix<f64>,
        cone: Cone,
        e: DVector<f64>,
        norm: NormTag,
    ) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        cone.validate()?;
        check_dim(cone.dim(), matrix.nrows())?;
        check_dim(cone.dim(), e.len())?;
        norm.validate(e.len())?;
        Ok(PositiveOperator {
            matrix,
            cone,
            e,
            norm,
            acknowledged: true,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn e(&self) -> &DVector<f64> {
        &self.e
    }

    pub fn norm(&self) -> &NormTag {
        &self.norm
    }

    pub fn dim(&self) -> usize {
        self.e.len()
    }

    /// `true` when the hypotheses were not verified.
    pub fn is_acknowledged(&self) -> bool {
        self.acknowledged
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FixedPoint,
    DenseFallback,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualEigenpair {
    pub lambda: f64,
    pub h: DVector<f64>,
    /// `||T^T h - lambda h||_inf`.
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
}

/// When to use the dense eigensolve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fallback {
    /// Only when the iteration does not converge.
    #[default]
    Auto,
    Off,
    /// Skip the iteration.
    Force,
}

fn residual(tt: &DMatrix<f64>, h: &DVector<f64>, lambda: f64) -> f64 {
    (tt * h - h * lambda).amax()
}

/// One step of `F_T`.
pub fn krein_map(op: &PositiveOperator, f: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(op.dim(), f.len())?;
    let g = f + op.matrix.tr_mul(f);
    let value = g.dot(&op.e);
    if !(value > 0.0) {
        return Err(Error::NonPositiveDenominator { value });
    }
    Ok(g / value)
}

pub fn solve_dual_eigenvector(
    op: &PositiveOperator,
    tol: &Tolerances,
    max_iter: usize,
) -> Result<DualEigenpair> {
    solve_with_fallback(op, tol, max_iter, Fallback::Auto)
}

pub fn solve_with_fallback(
    op: &PositiveOperator,
    tol: &Tolerances,
    max_iter: usize,
    fallback: Fallback,
) -> Result<DualEigenpair> {
    tol.validate()?;
    let start = op.cone.dual_seed(&op.e)?;
    solve_in_subspace(op, None, start, tol, max_iter, fallback)
}

/// Fixed-point iteration of `F_T` restricted to the span of `basis` (all of
/// `R^n` when `None`), followed by the dense search if allowed.
fn solve_in_subspace(
    op: &PositiveOperator,
    basis: Option<&DMatrix<f64>>,
    start: DVector<f64>,
    tol: &Tolerances,
    max_iter: usize,
    fallback: Fallback,
) -> Result<DualEigenpair> {
    let tt = op.matrix.transpose();
    let e = &op.e;
    let project = |v: DVector<f64>| match basis {
        Some(q) => q * q.tr_mul(&v),
        None => v,
    };
    let mut f = project(start);
    let at_e = f.dot(e);
    if !(at_e > 0.0) {
        return Err(Error::NonPositiveDenominator { value: at_e });
    }
    f /= at_e;

    let mut best = f64::INFINITY;
    if fallback != Fallback::Force {
        for it in 0..=max_iter {
            let tf = &tt * &f;
            let lambda = tf.dot(e);
            let r = (&tf - &f * lambda).amax();
            best = best.min(r);
            if r <= 0.5 * tol.residual_tol {
                if op.cone.dual_contains(&f, tol)? {
                    let (lambda, f, r) = polish(op, &tt, &project, lambda, f, r, tol)?;
                    return Ok(DualEigenpair {
                        lambda,
                        h: f,
                        residual: r,
                        iterations: it,
                        method: Method::FixedPoint,
                    });
                }
                break;
            }
            if it == max_iter {
                break;
            }
            let g = project(&f + tf);
            let value = g.dot(e);
            if !(value > 0.0) {
                return Err(Error::NonPositiveDenominator { value });
            }
            f = g / value;
        }
    }
    if fallback == Fallback::Off {
        return Err(Error::NoDualEigenvector {
            best_residual: best,
        });
    }
    let iterations = if fallback == Fallback::Force { 0 } else { max_iter };
    dense_search(op, &tt, basis, &f, tol, best).map(|(lambda, h, residual)| DualEigenpair {
        lambda,
        h,
        residual,
        iterations,
        method: Method::DenseFallback,
    })
}

/// A few steps of inverse iteration from a converged fixed point. A step is
/// kept only if it lowers the residual and stays in the dual cone.
fn polish(
    op: &PositiveOperator,
    tt: &DMatrix<f64>,
    project: &impl Fn(DVector<f64>) -> DVector<f64>,
    mut lambda: f64,
    mut f: DVector<f64>,
    mut r: f64,
    tol: &Tolerances,
) -> Result<(f64, DVector<f64>, f64)> {
    let e = &op.e;
    let n = f.len();
    for _ in 0..POLISH_STEPS {
        let shifted = tt - DMatrix::identity(n, n) * lambda;
        let Some(y) = shifted.lu().solve(&f) else { break };
        let y = project(y);
        let at_e = y.dot(e);
        if !(at_e.abs() > 0.0) || !y.iter().all(|v| v.is_finite()) {
            break;
        }
        let g = y / at_e;
        let tg = tt * &g;
        let mu = tg.dot(e);
        let rg = (&tg - &g * mu).amax();
        if !(rg < r) || !op.cone.dual_contains(&g, tol)? {
            break;
        }
        (lambda, f, r) = (mu, g, rg);
    }
    Ok((lambda, f, r))
}

/// Real eigenvalues of `T^T` (restricted to `basis`), largest first; the
/// first one with an eigenvector in the dual cone wins.
fn dense_search(
    op: &PositiveOperator,
    tt: &DMatrix<f64>,
    basis: Option<&DMatrix<f64>>,
    hint: &DVector<f64>,
    tol: &Tolerances,
    mut best: f64,
) -> Result<(f64, DVector<f64>, f64)> {
    let n = op.dim();
    let q = basis.cloned().unwrap_or_else(|| DMatrix::identity(n, n));
    let restricted = q.transpose() * tt * &q;
    let d = restricted.nrows();
    let scale = restricted.amax().max(1.0);
    for (lambda, _) in linalg::real_eigenvalue_clusters(&restricted, 1e-9, 1e-7)? {
        let shifted = &restricted - DMatrix::identity(d, d) * lambda;
        let mut ns = linalg::nullspace(&shifted, 1e-6 * scale);
        if ns.dim() == 0 {
            ns = linalg::nullspace(&shifted, ns.singular_values[0]);
        }
        let full = &q * &ns.basis;
        let Some(h) = dual_cone_candidate(&op.cone, &op.e, &full, hint)? else {
            continue;
        };
        let lam = (tt * &h).dot(&op.e);
        let r = residual(tt, &h, lam);
        best = best.min(r);
        if r <= tol.residual_tol && op.cone.dual_contains(&h, tol)? {
            return Ok((lam, h, r));
        }
    }
    Err(Error::NoDualEigenvector {
        best_residual: best,
    })
}

/// A vector in the column span of `basis` lying in the dual cone with
/// `h(e) = 1`, if one can be found.
pub(crate) fn dual_cone_candidate(
    cone: &Cone,
    e: &DVector<f64>,
    basis: &DMatrix<f64>,
    hint: &DVector<f64>,
) -> Result<Option<DVector<f64>>> {
    let d = basis.ncols();
    let normalize = |h: DVector<f64>| {
        let s = h.dot(e);
        (s.abs() > 1e-12 * h.amax().max(f64::MIN_POSITIVE)).then(|| h / s)
    };
    if d == 1 {
        return Ok(normalize(basis.column(0).into_owned()));
    }
    let Some(rows) = cone.dual_halfspaces() else {
        return Ok(normalize(basis * basis.tr_mul(hint)));
    };
    // max t  st  (B c) . a / |a| >= t,  (B c)(e) = 1,  t <= 1;  c and t free.
    let mut obj = vec![0.0; 2 * d];
    obj.extend([-1.0, 1.0]);
    let mut lp = LinearProgram::minimize(obj);
    for a in &rows {
        let s = a.amax();
        if s == 0.0 {
            continue;
        }
        let coef = basis.tr_mul(a) / s;
        let mut row: Vec<f64> = coef.iter().copied().collect();
        row.extend(coef.iter().map(|v| -v));
        row.extend([-1.0, 1.0]);
        lp.constraint(row, Relation::Ge, 0.0);
    }
    let be = basis.tr_mul(e);
    let mut row: Vec<f64> = be.iter().copied().collect();
    row.extend(be.iter().map(|v| -v));
    row.extend([0.0, 0.0]);
    lp.constraint(row, Relation::Eq, 1.0);
    let mut cap = vec![0.0; 2 * d];
    cap.extend([1.0, -1.0]);
    lp.constraint(cap, Relation::Le, 1.0);
    Ok(match lp.solve()? {
        LpOutcome::Optimal { x, .. } => {
            let c = DVector::from_fn(d, |i, _| x[i] - x[d + i]);
            Some(basis * c)
        }
        _ => None,
    })
}

/// Operators sharing a cone and dominating point that pairwise commute.
#[derive(Clone, Debug)]
pub struct CommutingFamily {
    operators: Vec<PositiveOperator>,
    commutator_tol: f64,
}

impl CommutingFamily {
    pub fn new(operators: Vec<PositiveOperator>, commutator_tol: f64) -> Result<Self> {
        if operators.is_empty() || operators.len() > MAX_FAMILY_SIZE {
            return Err(Error::InvalidInput(format!(
                "family size must be between 1 and {MAX_FAMILY_SIZE}, got {}",
                operators.len()
            )));
        }
        let first = &operators[0];
        for op in &operators[1..] {
            check_dim(first.dim(), op.dim())?;
            if op.cone != first.cone || op.e != first.e {
                return Err(Error::InvalidInput(
                    "operators in a family must share the cone and e".into(),
                ));
            }
        }
        for i in 0..operators.len() {
            for j in (i + 1)..operators.len() {
                let (a, b) = (&operators[i].matrix, &operators[j].matrix);
                let norm = (a * b - b * a).norm();
                if norm > commutator_tol {
                    return Err(Error::NotCommuting { i, j, norm });
                }
            }
        }
        Ok(CommutingFamily {
            operators,
            commutator_tol,
        })
    }

    pub fn operators(&self) -> &[PositiveOperator] {
        &self.operators
    }

    pub fn commutator_tol(&self) -> f64 {
        self.commutator_tol
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CommonEigenvector {
    pub h: DVector<f64>,
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Dimension of the intersected eigenspace after each operator.
    pub subspace_dims: Vec<usize>,
}

/// A common dual-cone eigenvector, found one operator at a time: each solve
/// runs inside the intersection of the eigenspaces found so far, which every
/// later operator leaves invariant because the family commutes.
pub fn common_eigenvector(
    family: &CommutingFamily,
    tol: &Tolerances,
    max_iter: usize,
) -> Result<CommonEigenvector> {
    tol.validate()?;
    let ops = &family.operators;
    let first = &ops[0];
    let n = first.dim();
    let mut h = first.cone.dual_seed(&first.e)?;
    let mut basis: Option<DMatrix<f64>> = None;
    let mut stacked = DMatrix::<f64>::zeros(0, n);
    let mut lambdas = Vec::new();
    let mut iterations = Vec::new();
    let mut subspace_dims = Vec::new();
    let scale = ops.iter().map(|o| o.matrix.amax()).fold(1.0, f64::max);
    let threshold = f64::max(1e-6 * scale, 100.0 * tol.residual_tol);

    for op in ops {
        let pair = solve_in_subspace(op, basis.as_ref(), h, tol, max_iter, Fallback::Auto)?;
        h = pair.h;
        lambdas.push(pair.lambda);
        iterations.push(pair.iterations);
        let block = DMatrix::identity(n, n) * pair.lambda - op.matrix.transpose();
        let rows = stacked.nrows();
        stacked = stacked.insert_rows(rows, n, 0.0);
        stacked.view_mut((rows, 0), (n, n)).copy_from(&block);
        let ns = linalg::nullspace(&stacked, threshold);
        if ns.dim() == 0 {
            return Err(Error::EmptyIntersection {
                smallest: ns.singular_values[0],
                threshold,
            });
        }
        subspace_dims.push(ns.dim());
        basis = Some(ns.basis);
    }

    let residuals: Vec<f64> = ops
        .iter()
        .zip(&lambdas)
        .map(|(op, &l)| residual(&op.matrix.transpose(), &h, l))
        .collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst > tol.residual_tol || !first.cone.dual_contains(&h, tol)? {
        return Err(Error::NoDualEigenvector {
            best_residual: worst,
        });
    }
    Ok(CommonEigenvector {
        h,
        lambdas,
        residuals,
        iterations,
        subspace_dims,
    })
}

/// Turns an eigenpair of `(I + T)^T` into one of `T^T`.
pub fn plus_identity_transfer(
    pair: &DualEigenpair,
    t: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<DualEigenpair> {
    check_dim(t.nrows(), pair.h.len())?;
    let lambda = pair.lambda - 1.0;
    let r = residual(&t.transpose(), &pair.h, lambda);
    if r > tol.residual_tol {
        return Err(Error::NoDualEigenvector { best_residual: r });
    }
    Ok(DualEigenpair {
        lambda,
        residual: r,
        ..pair.clone()
    })
}
