use nalgebra::{Complex, DMatrix};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::random;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const MAX_SA_BALL_DIM: usize = 64;

/// A Hermitian matrix; the stored entries are exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMatrix {
    m: CMatrix,
}

impl HermMatrix {
    /// Accepts `m` if its anti-Hermitian part is below `1e-12` (relative),
    /// then symmetrizes.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let defect = linalg::hermiticity_defect(&m);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(m + m*) / 2`, whatever `m` is.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        HermMatrix {
            m: (m + m.adjoint()).map(|z| z * 0.5),
        }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(linalg::to_complex(m))
    }

    pub fn identity(n: usize) -> Self {
        HermMatrix {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        HermMatrix {
            m: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex::new(d[i], 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Largest `|eigenvalue|`.
    pub fn op_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }
}

/// Every self-adjoint `x` with `||x|| <= 1` satisfies `x <= I`. Checked on
/// `x = ±I` and `trials` random points of the ball.
pub fn unit_dominates_sa_ball(n: usize, trials: usize, seed: u64) -> Result<bool> {
    if n == 0 || n > MAX_SA_BALL_DIM {
        return Err(Error::InvalidInput(format!(
            "dimension must be between 1 and {MAX_SA_BALL_DIM}, got {n}"
        )));
    }
    let id = CMatrix::identity(n, n);
    let dominated = |x: &CMatrix| HermMatrix::hermitian_part(&(&id - x)).min_eigenvalue() >= -1e-10;
    if !dominated(&id) || !dominated(&(-&id)) {
        return Ok(false);
    }
    let mut r = random::rng(seed);
    for _ in 0..trials {
        let h = HermMatrix::hermitian_part(&random::hermitian(&mut r, n));
        let norm = h.op_norm();
        if norm == 0.0 {
            continue;
        }
        let radius: f64 = r.random_range(0.0..=1.0);
        let x = h.matrix().map(|z| z * (radius / norm));
        if !dominated(&x) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_fn(2, 2, |i, j| Complex::new((i + 2 * j) as f64, 0.0));
        assert!(HermMatrix::new(m).is_err());
    }

    #[test]
    fn unit_dominates_ball() {
        assert!(unit_dominates_sa_ball(8, 500, 1).unwrap());
        assert!(unit_dominates_sa_ball(65, 1, 1).is_err());
    }

    #[test]
    fn spectrum_helpers() {
        let d = HermMatrix::diagonal(&[3.0, -1.0]);
        assert_eq!(d.op_norm(), 3.0);
        assert_eq!(d.trace(), 2.0);
        assert!(!d.is_psd(0.0));
    }
}
