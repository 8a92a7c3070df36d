//! Ball domination and positivity of a matrix with respect to a cone.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{Cone, Tolerances, LP_ENUMERATION_DIM};
use crate::error::{check_dim, Error, Result};
use crate::norm::{NormTag, MAX_ENUMERATION_DIM};
use crate::random;

const SAMPLED_PROBES: usize = 4096;
const PROBE_SEED: u64 = 0x5eed_c0de;

#[derive(Clone, Debug, Serialize)]
pub struct Domination {
    pub dominates: bool,
    /// `false` when the verdict rests on sampled ball points only.
    pub exhaustive: bool,
    pub probes: usize,
    /// A ball point `v` with `e - v` outside the cone.
    pub witness: Option<DVector<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityVerdict {
    pub holds: bool,
    /// `true` when every generator of the cone was checked.
    pub exact: bool,
    pub probes: usize,
    /// A cone element whose image leaves the cone.
    pub witness: Option<DVector<f64>>,
}

fn sphere_samples(norm: &NormTag, n: usize, count: usize) -> Vec<DVector<f64>> {
    let mut r = random::rng(PROBE_SEED ^ n as u64);
    (0..count)
        .filter_map(|_| {
            let v = random::normal_vector(&mut r, n);
            (norm.norm(&v) > 0.0).then(|| norm.normalize(&v))
        })
        .collect()
}

/// Does `e` dominate the unit ball, i.e. is `e - v` in the cone for every
/// `||v|| <= 1`? It suffices to test the extreme points of the ball.
pub fn dominates_ball(
    cone: &Cone,
    norm: &NormTag,
    e: &DVector<f64>,
    tol: &Tolerances,
) -> Result<Domination> {
    check_dim(cone.dim(), e.len())?;
    norm.validate(e.len())?;
    let e_norm = norm.norm(e);
    if (e_norm - 1.0).abs() > tol.membership_tol.max(1e-9) {
        return Err(Error::NotUnitNorm { norm: e_norm });
    }
    let n = e.len();

    if let Cone::TeCone { e: apex, norm: cone_norm } = cone {
        // e - B is part of the generating set by construction.
        if apex == e && cone_norm == norm {
            return Ok(Domination {
                dominates: true,
                exhaustive: true,
                probes: 0,
                witness: None,
            });
        }
    }
    if let (Cone::Orthant { .. }, NormTag::L2) = (cone, norm) {
        // e - v >= 0 on the Euclidean ball iff min_i e_i >= 1.
        let i = e.imin();
        let mut witness = DVector::zeros(n);
        witness[i] = 1.0;
        let dominates = e[i] >= 1.0 - tol.membership_tol;
        return Ok(Domination {
            dominates,
            exhaustive: true,
            probes: 0,
            witness: (!dominates).then_some(witness),
        });
    }

    let cap = match cone {
        Cone::Polyhedral { .. } | Cone::TeCone { .. } => LP_ENUMERATION_DIM,
        _ => MAX_ENUMERATION_DIM,
    };
    let (points, exhaustive) = match norm.ball_extreme_points(n, cap) {
        Some(p) => (p, true),
        None => (sphere_samples(norm, n, SAMPLED_PROBES), false),
    };
    let probes = points.len();
    for v in points {
        if !cone.contains(&(e - &v), tol)? {
            return Ok(Domination {
                dominates: false,
                exhaustive,
                probes,
                witness: Some(v),
            });
        }
    }
    Ok(Domination {
        dominates: true,
        exhaustive,
        probes,
        witness: None,
    })
}

/// Does `t` map the cone into itself? Decided on generators where the cone
/// has a finite generating set, by sampling otherwise.
pub fn positivity_preserved(
    t: &DMatrix<f64>,
    cone: &Cone,
    tol: &Tolerances,
) -> Result<PositivityVerdict> {
    let n = cone.dim();
    if t.nrows() != t.ncols() {
        return Err(Error::InvalidInput(format!(
            "operator must be square, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    check_dim(n, t.nrows())?;
    cone.validate()?;

    let (probes, exact) = match cone.generators() {
        Some(g) => (g, true),
        None => (sampled_members(cone), false),
    };
    let count = probes.len();
    for g in probes {
        if !cone.contains(&(t * &g), tol)? {
            return Ok(PositivityVerdict {
                holds: false,
                exact,
                probes: count,
                witness: Some(g),
            });
        }
    }
    Ok(PositivityVerdict {
        holds: true,
        exact,
        probes: count,
        witness: None,
    })
}

/// Members of cones without a usable generating set: rank-one `v v^T` for the
/// PSD cone, `e + u` (and orthant directions) for the Euclidean cones.
fn sampled_members(cone: &Cone) -> Vec<DVector<f64>> {
    let n = cone.dim();
    match cone {
        Cone::Psd { n: m } => {
            let mut r = random::rng(PROBE_SEED ^ 0x9);
            (0..SAMPLED_PROBES / 8)
                .map(|_| {
                    let v = random::normal_vector(&mut r, *m);
                    let p = &v * v.transpose();
                    DVector::from_row_slice(p.transpose().as_slice())
                })
                .collect()
        }
        Cone::ShiftedBall { e, norm } => sphere_samples(norm, n, SAMPLED_PROBES / 8)
            .into_iter()
            .map(|u| e + u)
            .collect(),
        Cone::TeCone { e, norm } => {
            let mut out: Vec<DVector<f64>> = (0..n)
                .map(|i| {
                    let mut v = DVector::zeros(n);
                    v[i] = 1.0;
                    v
                })
                .collect();
            out.extend(
                sphere_samples(norm, n, SAMPLED_PROBES / 8)
                    .into_iter()
                    .map(|u| e - u),
            );
            out
        }
        _ => Vec::new(),
    }
}
