//! A column criterion for matrices preserving `K_k = {x : x_k >= sum_{i != k} |x_i|}`
//! in `l1`, truncated to `n x n` blocks.
//!
//! `T(K_k) ⊆ K_k` iff for every `j != k` and both signs
//!
//! ```text
//! t_kk ± t_kj >= sum_{i != k} |t_ik ± t_ij|
//! ```
//!
//! which says exactly that `T(e_k ± e_j)` lies in `K_k`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Radius of the ball around `S = e_1 e_1^T` inside the cone of operators
/// preserving `K_1`.
pub const INTERIOR_RADIUS: f64 = 0.2;

/// A square block of an `l1` operator with its cached `l1 -> l1` norm
/// (largest absolute column sum).
#[derive(Clone, Debug, PartialEq)]
pub struct L1Matrix {
    entries: DMatrix<f64>,
    norm: f64,
}

fn column_sum_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl L1Matrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "expected a non-empty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        let norm = column_sum_norm(&entries);
        Ok(L1Matrix { entries, norm })
    }

    /// `s_11 = 1`, all other entries zero.
    pub fn corner(n: usize) -> Self {
        let mut s = DMatrix::zeros(n, n);
        s[(0, 0)] = 1.0;
        L1Matrix::new(s).expect("non-empty square")
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn recomputed_norm(&self) -> f64 {
        column_sum_norm(&self.entries)
    }
}

/// A failing instance of the criterion (indices zero-based).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TkkViolation {
    pub k: usize,
    pub j: usize,
    pub sign: char,
    pub lhs: f64,
    pub rhs: f64,
}

impl TkkViolation {
    /// The error form, with one-based indices.
    pub fn into_error(self) -> Error {
        Error::CriterionViolated {
            k: self.k + 1,
            j: self.j + 1,
            sign: self.sign,
            lhs: self.lhs,
            rhs: self.rhs,
        }
    }
}

/// First `(j, sign)` for which the criterion at `k` fails, if any.
pub fn tkk_violation(m: &L1Matrix, k: usize, tol: f64) -> Option<TkkViolation> {
    let t = &m.entries;
    let n = m.n();
    if k >= n {
        return Some(TkkViolation {
            k,
            j: k,
            sign: '+',
            lhs: f64::NAN,
            rhs: f64::NAN,
        });
    }
    if n == 1 {
        // No generators e_k ± e_j exist; K_k is the half-line x_k >= 0.
        return (t[(0, 0)] + tol < 0.0).then_some(TkkViolation {
            k,
            j: k,
            sign: '+',
            lhs: t[(0, 0)],
            rhs: 0.0,
        });
    }
    for j in (0..n).filter(|&j| j != k) {
        for (sign, s) in [('+', 1.0), ('-', -1.0)] {
            let lhs = t[(k, k)] + s * t[(k, j)];
            let rhs: f64 = (0..n)
                .filter(|&i| i != k)
                .map(|i| (t[(i, k)] + s * t[(i, j)]).abs())
                .sum();
            if lhs + tol < rhs {
                return Some(TkkViolation { k, j, sign, lhs, rhs });
            }
        }
    }
    None
}

/// Does `m` satisfy the column criterion at `k` (zero-based)?
pub fn satisfies_tkk(m: &L1Matrix, k: usize, tol: f64) -> bool {
    tkk_violation(m, k, tol).is_none()
}

/// Smallest `k` at which the criterion holds.
pub fn find_certificate_index(m: &L1Matrix, tol: f64) -> Option<usize> {
    (0..m.n()).find(|&k| satisfies_tkk(m, k, tol))
}

/// Applies `m` to every generator `e_k ± e_j` of `K_k` and checks that the
/// image stays in `K_k`. Errors if the criterion fails to begin with.
pub fn criterion_implies_invariance(m: &L1Matrix, k: usize, tol: f64) -> Result<bool> {
    if k >= m.n() {
        return Err(Error::InvalidInput(format!(
            "index {} out of range for dimension {}",
            k + 1,
            m.n()
        )));
    }
    if let Some(v) = tkk_violation(m, k, tol) {
        return Err(v.into_error());
    }
    Ok(generators_preserved(m.entries(), k, tol))
}

/// `T(e_k ± e_j)` in `K_k` for every `j != k` (just `T e_k` when `n = 1`).
pub fn generators_preserved(t: &DMatrix<f64>, k: usize, tol: f64) -> bool {
    let n = t.nrows();
    let unit = |i: usize| {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    };
    let in_cone = |x: DVector<f64>| {
        let rest: f64 = (0..n).filter(|&i| i != k).map(|i| x[i].abs()).sum();
        x[k] + tol >= rest
    };
    if n == 1 {
        return in_cone(t * unit(0));
    }
    (0..n).filter(|&j| j != k).all(|j| {
        in_cone(t * (unit(k) + unit(j))) && in_cone(t * (unit(k) - unit(j)))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InteriorReport {
    pub holds: bool,
    pub r_norm: f64,
    /// `1 - 2 ||R||`: lower bound on `t_11 ± t_1j`.
    pub lhs_lower_bound: f64,
    /// `2 ||R||`: upper bound on `sum_{i > 1} |t_i1 ± t_ij|`.
    pub rhs_upper_bound: f64,
    /// Observed `min (t_11 ± t_1j)`.
    pub lhs_min: f64,
    /// Observed `max sum_{i > 1} |t_i1 ± t_ij|`.
    pub rhs_max: f64,
}

/// For `||R|| < 1/5`, `S + R` satisfies the criterion at the first index;
/// both sides are bounded away from each other (`> 3/5` against `< 2/5`).
pub fn interior_perturbation(r: &L1Matrix, tol: f64) -> Result<InteriorReport> {
    if r.norm() >= INTERIOR_RADIUS {
        let j = (0..r.n())
            .max_by(|&a, &b| {
                let s = |c: usize| r.entries.column(c).iter().map(|v| v.abs()).sum::<f64>();
                s(a).total_cmp(&s(b))
            })
            .unwrap_or(0);
        return Err(Error::hypothesis(
            format!("perturbation norm {} is not below 1/5", r.norm()),
            r.entries.column(j).iter().copied().collect(),
        ));
    }
    let n = r.n();
    let t = L1Matrix::new(L1Matrix::corner(n).entries + &r.entries)?;
    let m = &t.entries;
    let (mut lhs_min, mut rhs_max) = (f64::INFINITY, 0.0f64);
    for j in 1..n {
        for s in [1.0, -1.0] {
            lhs_min = lhs_min.min(m[(0, 0)] + s * m[(0, j)]);
            rhs_max = rhs_max.max((1..n).map(|i| (m[(i, 0)] + s * m[(i, j)]).abs()).sum());
        }
    }
    Ok(InteriorReport {
        holds: satisfies_tkk(&t, 0, tol),
        r_norm: r.norm(),
        lhs_lower_bound: 1.0 - 2.0 * r.norm(),
        rhs_upper_bound: 2.0 * r.norm(),
        lhs_min,
        rhs_max,
    })
}
