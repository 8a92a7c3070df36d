//! Norms on `R^n` and their duals.
//!
//! Every norm here is a lattice norm (it depends only on `|x_i|` and is
//! monotone in each coordinate), so all of them are monotone with respect to
//! the orthant order.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ties closer than this (relative to the norm) are treated as equal when
/// locating the coordinates where a sup-type norm is attained.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// Largest dimension for which the `2^n` vertices of a sup-norm ball are
/// enumerated.
pub const MAX_ENUMERATION_DIM: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormTag {
    L1,
    Linf,
    /// `max_i w_i |x_i|`; the finite-dimensional AM-space renorming of a
    /// lattice with strong unit `(1/w_1, ..., 1/w_n)`.
    WeightedSup { weights: Vec<f64> },
    L2,
}

impl NormTag {
    /// Weighted sup norm for which `unit` (a strictly positive vector) has
    /// norm one and dominates the unit ball.
    pub fn strong_unit(unit: &DVector<f64>) -> Result<NormTag> {
        if unit.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
            return Err(Error::InvalidInput(
                "a strong unit must have strictly positive finite coordinates".into(),
            ));
        }
        Ok(NormTag::WeightedSup {
            weights: unit.iter().map(|u| 1.0 / u).collect(),
        })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let NormTag::WeightedSup { weights } = self {
            if weights.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: weights.len(),
                });
            }
            if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                return Err(Error::InvalidInput(
                    "weighted sup norm needs strictly positive finite weights".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormTag::L1 => "l1",
            NormTag::Linf => "linf",
            NormTag::WeightedSup { .. } => "weighted_sup",
            NormTag::L2 => "l2",
        }
    }

    /// Polyhedral norms have finitely many unit-ball extreme points and
    /// linear dual-norm descriptions on the positive orthant.
    pub fn is_polyhedral(&self) -> bool {
        !matches!(self, NormTag::L2)
    }

    fn weight(&self, i: usize) -> f64 {
        match self {
            NormTag::WeightedSup { weights } => weights[i],
            _ => 1.0,
        }
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        match self {
            NormTag::L1 => x.iter().map(|v| v.abs()).sum(),
            NormTag::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormTag::WeightedSup { weights } => x
                .iter()
                .zip(weights)
                .fold(0.0, |m, (v, w)| m.max(w * v.abs())),
            NormTag::L2 => x.norm(),
        }
    }

    pub fn dual_norm(&self, f: &DVector<f64>) -> f64 {
        match self {
            NormTag::L1 => f.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormTag::Linf => f.iter().map(|v| v.abs()).sum(),
            NormTag::WeightedSup { weights } => {
                f.iter().zip(weights).map(|(v, w)| v.abs() / w).sum()
            }
            NormTag::L2 => f.norm(),
        }
    }

    /// Indices where a sup-type norm of `x` is attained (up to [`TIE_TOL`]).
    /// For `L1`/`L2` every coordinate is returned.
    pub fn attaining_set(&self, x: &DVector<f64>) -> Vec<usize> {
        match self {
            NormTag::Linf | NormTag::WeightedSup { .. } => {
                let m = self.norm(x);
                (0..x.len())
                    .filter(|&i| self.weight(i) * x[i].abs() >= m - TIE_TOL * m.max(1.0))
                    .collect()
            }
            _ => (0..x.len()).collect(),
        }
    }

    /// A norming functional: `f(x) = ||x||` and `||f||_* = 1`. Ties in the
    /// sup norms are averaged, so the choice is symmetric. Returns zero for
    /// `x = 0`.
    pub fn support_functional(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = x.len();
        let mut f = DVector::zeros(n);
        if self.norm(x) == 0.0 {
            return f;
        }
        match self {
            NormTag::L1 => {
                for i in 0..n {
                    f[i] = if x[i] > 0.0 {
                        1.0
                    } else if x[i] < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                }
            }
            NormTag::Linf | NormTag::WeightedSup { .. } => {
                let set = self.attaining_set(x);
                let share = 1.0 / set.len() as f64;
                for &i in &set {
                    f[i] = x[i].signum() * self.weight(i) * share;
                }
            }
            NormTag::L2 => f = x / x.norm(),
        }
        f
    }

    /// Operator norm of `t` induced by this norm on both sides.
    pub fn operator_norm(&self, t: &DMatrix<f64>) -> f64 {
        match self {
            NormTag::L1 => (0..t.ncols())
                .map(|j| t.column(j).iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            NormTag::Linf | NormTag::WeightedSup { .. } => (0..t.nrows())
                .map(|i| {
                    self.weight(i)
                        * (0..t.ncols())
                            .map(|j| t[(i, j)].abs() / self.weight(j))
                            .sum::<f64>()
                })
                .fold(0.0, f64::max),
            NormTag::L2 => t.clone().singular_values().max(),
        }
    }

    /// A unit vector `x` with `||t x|| = ||t||` for the polyhedral norms; for
    /// `L2` the top right singular vector.
    pub fn operator_norm_witness(&self, t: &DMatrix<f64>) -> DVector<f64> {
        let n = t.ncols();
        match self {
            NormTag::L1 => {
                let j = (0..n)
                    .max_by(|&a, &b| {
                        let sa: f64 = t.column(a).iter().map(|v| v.abs()).sum();
                        let sb: f64 = t.column(b).iter().map(|v| v.abs()).sum();
                        sa.total_cmp(&sb)
                    })
                    .unwrap_or(0);
                let mut x = DVector::zeros(n);
                x[j] = 1.0;
                x
            }
            NormTag::Linf | NormTag::WeightedSup { .. } => {
                let i = (0..t.nrows())
                    .max_by(|&a, &b| {
                        let row = |r: usize| {
                            self.weight(r)
                                * (0..n).map(|j| t[(r, j)].abs() / self.weight(j)).sum::<f64>()
                        };
                        row(a).total_cmp(&row(b))
                    })
                    .unwrap_or(0);
                DVector::from_fn(n, |j, _| {
                    let s = if t[(i, j)] < 0.0 { -1.0 } else { 1.0 };
                    s / self.weight(j)
                })
            }
            NormTag::L2 => {
                let svd = t.clone().svd(false, true);
                let vt = svd.v_t.expect("requested v_t");
                let k = svd.singular_values.imax();
                vt.row(k).transpose()
            }
        }
    }

    /// Extreme points of the closed unit ball, when finitely many and not
    /// more than `2^cap` of them.
    pub fn ball_extreme_points(&self, n: usize, cap: usize) -> Option<Vec<DVector<f64>>> {
        match self {
            NormTag::L1 => {
                let mut out = Vec::with_capacity(2 * n);
                for i in 0..n {
                    for s in [1.0, -1.0] {
                        let mut v = DVector::zeros(n);
                        v[i] = s;
                        out.push(v);
                    }
                }
                Some(out)
            }
            NormTag::Linf | NormTag::WeightedSup { .. } => {
                if n > cap.min(MAX_ENUMERATION_DIM) {
                    return None;
                }
                let out = (0u64..1 << n)
                    .map(|mask| self.sign_vertex(n, mask))
                    .collect();
                Some(out)
            }
            NormTag::L2 => None,
        }
    }

    /// Vertex of the sup-norm ball whose sign pattern is given by `mask`
    /// (bit `i` set means coordinate `i` is negative).
    pub(crate) fn sign_vertex(&self, n: usize, mask: u64) -> DVector<f64> {
        DVector::from_fn(n, |i, _| {
            let s = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
            s / self.weight(i)
        })
    }

    /// Rescale a non-zero vector onto the unit sphere of this norm.
    pub fn normalize(&self, x: &DVector<f64>) -> DVector<f64> {
        x / self.norm(x)
    }
}
