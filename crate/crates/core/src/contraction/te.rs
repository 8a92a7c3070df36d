//! The cone generated by the orthant and `e - B`, its dual, and the
//! eigenvector results for norm-one positive maps with `Te >= e`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cone::{positivity_preserved, Cone, Tolerances};
use crate::error::{check_dim, Error, Result};
use crate::krein::{self, DualEigenpair, PositiveOperator};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::norm::NormTag;

/// Cutting planes allowed for the Euclidean dual-norm constraint.
const MAX_CUTS: usize = 400;
/// Operators must have norm one to this accuracy.
pub const NORM_ONE_TOL: f64 = 1e-9;

/// `K* = {f >= 0 : f(e) >= ||f||_*}` for `K` generated by the orthant and
/// `e - B`.
#[derive(Clone, Debug)]
pub struct TeDual {
    e: DVector<f64>,
    norm: NormTag,
}

#[derive(Clone, Debug, Serialize)]
pub struct TeMembership {
    pub member: bool,
    /// `min f(x)` over normalized dual elements (`sum f = 1`).
    pub value: f64,
    /// A dual element with `f(x) < 0` when `x` is not a member.
    pub separating: Option<DVector<f64>>,
}

/// Validated dual description: `e >= 0`, `||e|| = 1`.
pub fn build_te_dual(e: &DVector<f64>, norm: &NormTag) -> Result<TeDual> {
    norm.validate(e.len())?;
    if e.iter().any(|&v| v < 0.0) || e.iter().all(|&v| v == 0.0) {
        return Err(Error::hypothesis(
            "e must be positive (non-negative and non-zero)",
            e.iter().copied().collect(),
        ));
    }
    let e_norm = norm.norm(e);
    if (e_norm - 1.0).abs() > NORM_ONE_TOL {
        return Err(Error::NotUnitNorm { norm: e_norm });
    }
    Ok(TeDual::new_unchecked(e.clone(), norm.clone()))
}

pub fn te_membership(x: &DVector<f64>, dual: &TeDual, tol: &Tolerances) -> Result<TeMembership> {
    dual.membership(x, tol)
}

impl TeDual {
    pub(crate) fn new_unchecked(e: DVector<f64>, norm: NormTag) -> Self {
        TeDual { e, norm }
    }

    pub fn e(&self) -> &DVector<f64> {
        &self.e
    }

    pub fn norm(&self) -> &NormTag {
        &self.norm
    }

    pub fn contains_functional(&self, f: &DVector<f64>, tol: f64) -> bool {
        f.iter().all(|&v| v >= -tol) && f.dot(&self.e) >= self.norm.dual_norm(f) - tol
    }

    /// Decide `x in K` by minimizing `f(x)` over `f in K*`, `sum f = 1`.
    pub fn membership(&self, x: &DVector<f64>, tol: &Tolerances) -> Result<TeMembership> {
        let n = self.e.len();
        check_dim(n, x.len())?;
        let threshold = -tol.membership_tol * x.amax();
        let e = &self.e;
        let mut lp = LinearProgram::minimize(x.iter().copied().collect());
        lp.constraint(vec![1.0; n], Relation::Eq, 1.0);
        match &self.norm {
            NormTag::Linf => {
                lp.constraint(e.iter().map(|v| v - 1.0).collect(), Relation::Ge, 0.0);
            }
            NormTag::WeightedSup { weights } => {
                let row = e.iter().zip(weights).map(|(v, w)| v - 1.0 / w).collect();
                lp.constraint(row, Relation::Ge, 0.0);
            }
            NormTag::L1 => {
                for i in 0..n {
                    let mut row: Vec<f64> = e.iter().copied().collect();
                    row[i] -= 1.0;
                    lp.constraint(row, Relation::Ge, 0.0);
                }
            }
            NormTag::L2 => {
                if (e.norm() - 1.0).abs() <= 1e-12 {
                    // Cauchy-Schwarz: K* is the ray through e, K the half-space <e, x> >= 0.
                    let value = e.dot(x) / e.sum();
                    let member = value >= threshold;
                    return Ok(TeMembership {
                        member,
                        value,
                        separating: (!member).then(|| e / e.sum()),
                    });
                }
            }
        }
        let mut cuts = 0;
        loop {
            let (f, value) = match lp.solve()? {
                LpOutcome::Optimal { x: f, objective } => (DVector::from_vec(f), objective),
                // K* = {0}: the cone is the whole space.
                LpOutcome::Infeasible => {
                    return Ok(TeMembership {
                        member: true,
                        value: f64::INFINITY,
                        separating: None,
                    })
                }
                LpOutcome::Unbounded => return Err(Error::Lp("membership LP unbounded".into())),
            };
            if value >= threshold {
                // The relaxation is already non-negative, so is the true minimum.
                return Ok(TeMembership {
                    member: true,
                    value,
                    separating: None,
                });
            }
            let f_norm = f.norm();
            let violated = matches!(self.norm, NormTag::L2) && f_norm > f.dot(e) + 1e-12;
            if !violated || cuts >= MAX_CUTS {
                return Ok(TeMembership {
                    member: false,
                    value,
                    separating: Some(f),
                });
            }
            // Cut: f(e) >= <u, f> with u = f / ||f||, valid since ||f||_2 >= <u, f>.
            let row = e.iter().zip(f.iter()).map(|(ev, fv)| ev - fv / f_norm).collect();
            lp.constraint(row, Relation::Ge, 0.0);
            cuts += 1;
        }
    }
}

pub(crate) fn check_nonnegative(t: &DMatrix<f64>, tol: f64) -> Result<()> {
    let scale = t.amax().max(1.0);
    for j in 0..t.ncols() {
        for i in 0..t.nrows() {
            if t[(i, j)] < -tol * scale {
                let mut w = DVector::zeros(t.ncols());
                w[j] = 1.0;
                return Err(Error::hypothesis(
                    format!("operator is not positive: entry ({}, {}) = {}", i + 1, j + 1, t[(i, j)]),
                    w.iter().copied().collect(),
                ));
            }
        }
    }
    Ok(())
}

/// Rejects operators whose norm is not one. Without this hypothesis the
/// conclusion fails: on sequence spaces a scaled left shift `a S` with
/// `a > 1` satisfies `Te >= e` for a suitable `e > 0` yet its adjoint has no
/// positive eigenvector.
pub(crate) fn check_norm_one(t: &DMatrix<f64>, norm: &NormTag) -> Result<()> {
    let op = norm.operator_norm(t);
    if (op - 1.0).abs() > NORM_ONE_TOL {
        let w = norm.operator_norm_witness(t);
        return Err(Error::hypothesis(
            format!(
                "operator norm is {op}, not 1; the norm-one hypothesis cannot be dropped \
                 (scaled left shifts are counterexamples)"
            ),
            w.iter().copied().collect(),
        ));
    }
    Ok(())
}

/// `Te >= e` coordinatewise; returns `max (Te - e)_i`.
pub(crate) fn check_te_ge_e(t: &DMatrix<f64>, e: &DVector<f64>, tol: f64) -> Result<f64> {
    let d = t * e - e;
    let i = d.imin();
    if d[i] < -tol {
        return Err(Error::hypothesis(
            format!("Te >= e fails at coordinate {}: (Te - e) = {}", i + 1, d[i]),
            d.iter().copied().collect(),
        ));
    }
    Ok(d.max())
}

/// Eigenvector of `T^T` in the dual of the cone generated by the orthant and
/// `e - B`, for `T >= 0` with `||T|| = 1` and `Te >= e`.
pub fn solve_te_eigenvector(
    t: &DMatrix<f64>,
    e: &DVector<f64>,
    norm: &NormTag,
    tol: &Tolerances,
    max_iter: usize,
) -> Result<DualEigenpair> {
    let n = e.len();
    if t.nrows() != t.ncols() {
        return Err(Error::InvalidInput("operator must be square".into()));
    }
    check_dim(n, t.nrows())?;
    norm.validate(n)?;
    check_nonnegative(t, tol.membership_tol)?;
    check_norm_one(t, norm)?;
    build_te_dual(e, norm)?;
    check_te_ge_e(t, e, tol.membership_tol)?;

    let cone = Cone::TeCone {
        e: e.clone(),
        norm: norm.clone(),
    };
    let verdict = positivity_preserved(t, &cone, tol)?;
    if !verdict.holds {
        let w = verdict.witness.unwrap_or_default();
        return Err(Error::hypothesis(
            "operator does not leave the cone generated by the orthant and e - B invariant",
            w.iter().copied().collect(),
        ));
    }
    let op = PositiveOperator::acknowledged(t.clone(), cone, e.clone(), norm.clone())?;
    krein::solve_dual_eigenvector(&op, tol, max_iter)
}

/// Eigenvector of `T^T` for a norm-one `T` with a unit fixed vector `e`.
///
/// `T` leaves `e + B` invariant, so it preserves the cone over `2e + B`
/// (apex of norm two). The result is rescaled to `h(e) = 1`.
pub fn fixed_point_to_eigenvector(
    t: &DMatrix<f64>,
    e: &DVector<f64>,
    norm: &NormTag,
    tol: &Tolerances,
    max_iter: usize,
) -> Result<DualEigenpair> {
    let n = e.len();
    if t.nrows() != t.ncols() {
        return Err(Error::InvalidInput("operator must be square".into()));
    }
    check_dim(n, t.nrows())?;
    norm.validate(n)?;
    let e_norm = norm.norm(e);
    if (e_norm - 1.0).abs() > NORM_ONE_TOL.max(tol.membership_tol) {
        return Err(Error::NotUnitNorm { norm: e_norm });
    }
    check_norm_one(t, norm)?;
    let moved = t * e - e;
    if norm.norm(&moved) > tol.residual_tol {
        return Err(Error::hypothesis(
            format!("e is not a fixed point: ||Te - e|| = {:e}", norm.norm(&moved)),
            moved.iter().copied().collect(),
        ));
    }
    let apex = e * 2.0;
    let cone = Cone::ShiftedBall {
        e: apex.clone(),
        norm: norm.clone(),
    };
    let op = PositiveOperator::acknowledged(t.clone(), cone, apex, norm.clone())?;
    let pair = krein::solve_dual_eigenvector(&op, tol, max_iter)?;
    let at_e = pair.h.dot(e);
    let h = &pair.h / at_e;
    let residual = (t.transpose() * &h - &h * pair.lambda).amax();
    Ok(DualEigenpair {
        h,
        residual,
        ..pair
    })
}
