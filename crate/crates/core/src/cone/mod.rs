//! Cones in `R^n`, their duals, and the constructions built from them.
//!
//! A [`Cone`] here is a wedge in the most permissive sense: closed under
//! addition and non-negative scaling. Whether it is also pointed is a
//! separate diagnostic ([`Cone::is_pointed`]).

mod checks;
mod gauge;
pub mod shifted;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::contraction::TeDual;
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::norm::NormTag;

pub use checks::{dominates_ball, positivity_preserved, Domination, PositivityVerdict};
pub use gauge::{w_gauge, GaugeNorm};

/// Numerical tolerances shared by the cone tests and the solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative slack in cone membership (`tol * ||x||`).
    pub membership_tol: f64,
    /// Bound on eigen-residuals `||T^T h - lambda h||_inf`.
    pub residual_tol: f64,
    /// First probe step of the directional-derivative descent.
    pub alpha_probe: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            membership_tol: 1e-9,
            residual_tol: 1e-8,
            alpha_probe: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn new(membership_tol: f64, residual_tol: f64, alpha_probe: f64) -> Result<Self> {
        let t = Tolerances {
            membership_tol,
            residual_tol,
            alpha_probe,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("membership_tol", self.membership_tol),
            ("residual_tol", self.residual_tol),
            ("alpha_probe", self.alpha_probe),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Largest `2^n` vertex enumeration attempted for cones whose membership test
/// is itself a linear program.
pub(crate) const LP_ENUMERATION_DIM: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub enum Cone {
    /// `{x : x_i >= 0}`.
    Orthant { n: usize },
    /// `{x : x_k >= sum_{i != k} |x_i|}` (`k` zero-based).
    L1Krein { n: usize, k: usize },
    /// Conic hull of finitely many generators.
    Polyhedral {
        n: usize,
        generators: Vec<DVector<f64>>,
    },
    /// `{a (e + x) : a >= 0, ||x|| <= 1}`.
    ShiftedBall { e: DVector<f64>, norm: NormTag },
    /// Closed cone generated by the orthant and `e - B`.
    TeCone { e: DVector<f64>, norm: NormTag },
    /// Positive semidefinite symmetric `n x n` matrices, stored row-major in
    /// `R^{n^2}`.
    Psd { n: usize },
}

impl Cone {
    pub fn orthant(n: usize) -> Cone {
        Cone::Orthant { n }
    }

    pub fn l1_krein(n: usize, k: usize) -> Result<Cone> {
        let c = Cone::L1Krein { n, k };
        c.validate()?;
        Ok(c)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Cone::Orthant { .. } => "orthant",
            Cone::L1Krein { .. } => "l1krein",
            Cone::Polyhedral { .. } => "polyhedral",
            Cone::ShiftedBall { .. } => "shifted_ball",
            Cone::TeCone { .. } => "te_cone",
            Cone::Psd { .. } => "psd",
        }
    }

    /// Dimension of the ambient space.
    pub fn dim(&self) -> usize {
        match self {
            Cone::Orthant { n } | Cone::L1Krein { n, .. } | Cone::Polyhedral { n, .. } => *n,
            Cone::ShiftedBall { e, .. } | Cone::TeCone { e, .. } => e.len(),
            Cone::Psd { n } => n * n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Cone::Orthant { n } | Cone::Psd { n } if *n == 0 => {
                Err(Error::InvalidInput("cone dimension must be positive".into()))
            }
            Cone::L1Krein { n, k } if *k >= *n => Err(Error::InvalidInput(format!(
                "l1krein index {} out of range for dimension {n}",
                k + 1
            ))),
            Cone::Polyhedral { n, generators } => {
                if generators.is_empty() {
                    return Err(Error::InvalidInput("polyhedral cone needs generators".into()));
                }
                for g in generators {
                    check_dim(*n, g.len())?;
                }
                Ok(())
            }
            Cone::ShiftedBall { e, norm } | Cone::TeCone { e, norm } => {
                norm.validate(e.len())?;
                if norm.norm(e) == 0.0 {
                    return Err(Error::ZeroApex);
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Is `x` in the cone, up to `tol.membership_tol * ||x||`?
    pub fn contains(&self, x: &DVector<f64>, tol: &Tolerances) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        self.validate()?;
        let t = tol.membership_tol;
        let scale = linalg::max_abs(x);
        Ok(match self {
            Cone::Orthant { .. } => x.iter().all(|&v| v >= -t * scale),
            Cone::L1Krein { k, .. } => {
                let rest: f64 = (0..x.len()).filter(|i| i != k).map(|i| x[i].abs()).sum();
                x[*k] + t * scale >= rest
            }
            Cone::Polyhedral { generators, .. } => polyhedral_contains(generators, x, t * scale)?,
            Cone::ShiftedBall { e, norm } => shifted::contains(x, e, norm, t * norm.norm(x)),
            Cone::TeCone { e, norm } => {
                TeDual::new_unchecked(e.clone(), norm.clone())
                    .membership(x, tol)?
                    .member
            }
            Cone::Psd { n } => {
                let m = DMatrix::from_row_slice(*n, *n, x.as_slice());
                let asym = (&m - m.transpose()).amax();
                asym <= t * scale.max(f64::MIN_POSITIVE)
                    && linalg::symmetric_eigenvalues(&m)[0] >= -t * scale
            }
        })
    }

    /// Is the functional `f` non-negative on the cone, up to
    /// `tol.membership_tol` (relative to the size of `f`)?
    pub fn dual_contains(&self, f: &DVector<f64>, tol: &Tolerances) -> Result<bool> {
        check_dim(self.dim(), f.len())?;
        self.validate()?;
        let t = tol.membership_tol * linalg::max_abs(f).max(f64::MIN_POSITIVE);
        Ok(match self {
            Cone::Orthant { .. } => f.iter().all(|&v| v >= -t),
            Cone::L1Krein { k, .. } => {
                let top = (0..f.len())
                    .filter(|i| i != k)
                    .map(|i| f[i].abs())
                    .fold(0.0, f64::max);
                f[*k] >= top - t
            }
            Cone::Polyhedral { generators, .. } => generators
                .iter()
                .all(|g| f.dot(g) >= -t * linalg::max_abs(g)),
            Cone::ShiftedBall { e, norm } => f.dot(e) >= norm.dual_norm(f) - t,
            Cone::TeCone { e, norm } => {
                f.iter().all(|&v| v >= -t) && f.dot(e) >= norm.dual_norm(f) - t
            }
            Cone::Psd { n } => {
                let m = DMatrix::from_row_slice(*n, *n, f.as_slice());
                linalg::symmetric_eigenvalues(&m)[0] >= -t
            }
        })
    }

    /// A finite generating set, for the cones that have a manageable one.
    pub fn generators(&self) -> Option<Vec<DVector<f64>>> {
        let n = self.dim();
        let unit = |i: usize| {
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            v
        };
        match self {
            Cone::Orthant { .. } => Some((0..n).map(unit).collect()),
            Cone::L1Krein { k, .. } => {
                if n == 1 {
                    return Some(vec![unit(0)]);
                }
                let ek = unit(*k);
                Some(
                    (0..n)
                        .filter(|i| i != k)
                        .flat_map(|i| [&ek + unit(i), &ek - unit(i)])
                        .collect(),
                )
            }
            Cone::Polyhedral { generators, .. } => Some(generators.clone()),
            Cone::ShiftedBall { e, norm } => {
                let ext = norm.ball_extreme_points(n, LP_ENUMERATION_DIM)?;
                Some(ext.into_iter().map(|v| e + v).collect())
            }
            Cone::TeCone { e, norm } => {
                let ext = norm.ball_extreme_points(n, LP_ENUMERATION_DIM)?;
                let mut gens: Vec<DVector<f64>> = (0..n).map(unit).collect();
                gens.extend(ext.into_iter().map(|v| e - v));
                Some(gens)
            }
            Cone::Psd { .. } => None,
        }
    }

    /// Finitely many `a` such that `f` is in the dual cone iff `a . f >= 0`
    /// for each of them, when such a list is manageable.
    pub fn dual_halfspaces(&self) -> Option<Vec<DVector<f64>>> {
        match self {
            Cone::TeCone { e, norm } => {
                let n = e.len();
                let mut rows: Vec<DVector<f64>> = (0..n)
                    .map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 }))
                    .collect();
                match norm {
                    NormTag::Linf => rows.push(e.map(|v| v - 1.0)),
                    NormTag::WeightedSup { weights } => {
                        rows.push(DVector::from_fn(n, |i, _| e[i] - 1.0 / weights[i]))
                    }
                    NormTag::L1 => {
                        for i in 0..n {
                            let mut r = e.clone();
                            r[i] -= 1.0;
                            rows.push(r);
                        }
                    }
                    NormTag::L2 => return None,
                }
                Some(rows)
            }
            _ => self.generators(),
        }
    }

    /// A strictly positive (where possible) functional on the cone, scaled so
    /// that it equals one at `e`. This is the deterministic starting point of
    /// the fixed-point iteration.
    pub fn dual_seed(&self, e: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), e.len())?;
        self.validate()?;
        let n = self.dim();
        let f = match self {
            Cone::Orthant { .. } => DVector::from_element(n, 1.0),
            Cone::L1Krein { k, .. } => {
                let mut f = DVector::zeros(n);
                f[*k] = 1.0;
                f
            }
            Cone::Polyhedral { generators, .. } => polyhedral_dual_seed(generators, e)?,
            Cone::ShiftedBall { e: apex, norm } | Cone::TeCone { e: apex, norm } => {
                norm.support_functional(apex)
            }
            Cone::Psd { n } => DVector::from_fn(n * n, |i, _| if i % (n + 1) == 0 { 1.0 } else { 0.0 }),
        };
        let at_e = f.dot(e);
        if !(at_e > 0.0) {
            return Err(Error::hypothesis(
                "no positive functional is positive at e; e is not an order unit for this cone",
                e.iter().copied().collect(),
            ));
        }
        Ok(f / at_e)
    }

    /// Pointedness (`K ∩ -K = {0}`), when decidable: `None` means unknown.
    pub fn is_pointed(&self) -> Option<bool> {
        match self {
            Cone::Orthant { .. } | Cone::L1Krein { .. } | Cone::Psd { .. } => Some(true),
            Cone::ShiftedBall { e, norm } if !norm.is_polyhedral() => Some(norm.norm(e) > 1.0),
            _ => {
                let gens = self.generators()?;
                // Pointed iff some f has f(g) >= 1 on every generator.
                let n = self.dim();
                let mut lp = LinearProgram::minimize(vec![0.0; 2 * n]);
                for g in &gens {
                    let mut row: Vec<f64> = g.iter().copied().collect();
                    row.extend(g.iter().map(|v| -v));
                    lp.constraint(row, Relation::Ge, 1.0);
                }
                match lp.solve() {
                    Ok(LpOutcome::Optimal { .. }) => Some(true),
                    Ok(_) => Some(false),
                    Err(_) => None,
                }
            }
        }
    }
}

/// `x` in cone(generators) iff the l1 residual LP
/// `min sum(r+ + r-) st G lambda + r+ - r- = x, lambda, r >= 0` reaches zero.
fn polyhedral_contains(generators: &[DVector<f64>], x: &DVector<f64>, slack: f64) -> Result<bool> {
    let n = x.len();
    let m = generators.len();
    let mut obj = vec![0.0; m];
    obj.extend(std::iter::repeat_n(1.0, 2 * n));
    let mut lp = LinearProgram::minimize(obj);
    for i in 0..n {
        let mut row: Vec<f64> = generators.iter().map(|g| g[i]).collect();
        row.extend((0..n).map(|j| if j == i { 1.0 } else { 0.0 }));
        row.extend((0..n).map(|j| if j == i { -1.0 } else { 0.0 }));
        lp.constraint(row, Relation::Eq, x[i]);
    }
    match lp.solve()? {
        LpOutcome::Optimal { objective, .. } => Ok(objective <= slack * n as f64 + 1e-12),
        other => Err(Error::Lp(format!("residual LP ended as {other:?}"))),
    }
}

/// Maximize `t` subject to `f(g) >= t` for every generator and `f(e) = 1`,
/// with `t <= 1` to keep the problem bounded.
fn polyhedral_dual_seed(generators: &[DVector<f64>], e: &DVector<f64>) -> Result<DVector<f64>> {
    let n = e.len();
    // Variables: f+ (n), f- (n), t+ , t-
    let mut obj = vec![0.0; 2 * n];
    obj.extend([-1.0, 1.0]);
    let mut lp = LinearProgram::minimize(obj);
    for g in generators {
        let scale = linalg::max_abs(g).max(f64::MIN_POSITIVE);
        let mut row: Vec<f64> = g.iter().map(|v| v / scale).collect();
        row.extend(g.iter().map(|v| -v / scale));
        row.extend([-1.0, 1.0]);
        lp.constraint(row, Relation::Ge, 0.0);
    }
    let mut row: Vec<f64> = e.iter().copied().collect();
    row.extend(e.iter().map(|v| -v));
    row.extend([0.0, 0.0]);
    lp.constraint(row, Relation::Eq, 1.0);
    let mut cap = vec![0.0; 2 * n];
    cap.extend([1.0, -1.0]);
    lp.constraint(cap, Relation::Le, 1.0);
    match lp.solve()? {
        LpOutcome::Optimal { x, .. } => Ok(DVector::from_fn(n, |i, _| x[i] - x[n + i])),
        _ => Err(Error::hypothesis(
            "the dual cone contains no functional that is positive at e",
            e.iter().copied().collect(),
        )),
    }
}
