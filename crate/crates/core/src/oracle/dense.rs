//! Dense eigendecomposition of `T^T`, used as ground truth for the iterative
//! solvers.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::cone::{Cone, Tolerances};
use crate::error::{Error, Result};
use crate::krein::dual_cone_candidate;
use crate::linalg;

pub const MAX_DENSE_DIM: usize = 64;
/// Eigenvalues with `|Im| <= IMAG_TOL * scale` count as real.
pub const IMAG_TOL: f64 = 1e-9;

/// A real eigenvalue of `T^T` with an orthonormal basis of its (numerical)
/// eigenspace.
#[derive(Clone, Debug, Serialize)]
pub struct RealEigenspace {
    pub lambda: f64,
    /// Algebraic multiplicity as counted by clustering.
    pub multiplicity: usize,
    /// Eigenvectors, normalized by `sum h = 1` when the sum is not tiny and to
    /// unit length with a positive leading entry otherwise.
    pub vectors: Vec<DVector<f64>>,
    /// Largest `||T^T h - lambda h||_inf` over `vectors` (before normalization
    /// by the coordinate sum).
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DenseSpectrum {
    /// Every eigenvalue as `(re, im)`, sorted by descending real part.
    pub eigenvalues: Vec<(f64, f64)>,
    /// `true` at positions holding one member of a non-real conjugate pair.
    pub complex_flags: Vec<bool>,
    /// Real eigenvalues, largest first.
    pub real: Vec<RealEigenspace>,
    pub scale: f64,
}

fn normalize(h: DVector<f64>) -> DVector<f64> {
    let s = h.sum();
    if s.abs() > 1e-8 * h.norm() {
        return h / s;
    }
    let lead = h.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(1.0);
    let h = h.normalize();
    if lead < 0.0 {
        -h
    } else {
        h
    }
}

/// All eigenvalues of `t^T` and a basis of each real eigenspace.
pub fn dense_dual_eigs(t: &DMatrix<f64>) -> Result<DenseSpectrum> {
    let n = t.nrows();
    if n != t.ncols() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            n,
            t.ncols()
        )));
    }
    if n == 0 || n > MAX_DENSE_DIM {
        return Err(Error::InvalidInput(format!(
            "dimension must be between 1 and {MAX_DENSE_DIM}, got {n}"
        )));
    }
    let tt = t.transpose();
    let scale = tt.amax().max(f64::MIN_POSITIVE);
    let mut all: Vec<Complex<f64>> = linalg::eigenvalues(&tt)?;
    all.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let complex_flags = all
        .iter()
        .map(|z| z.im.abs() > IMAG_TOL * scale.max(1.0))
        .collect();

    let mut real = Vec::new();
    for (lambda, multiplicity) in linalg::real_eigenvalue_clusters(&tt, IMAG_TOL, 1e-7)? {
        let shifted = &tt - DMatrix::identity(n, n) * lambda;
        let mut ns = linalg::nullspace(&shifted, 1e-8 * scale.max(1.0));
        if ns.dim() == 0 {
            ns = linalg::nullspace(&shifted, ns.singular_values[0]);
        }
        let mut residual = 0.0f64;
        let vectors = ns
            .basis
            .column_iter()
            .map(|c| {
                let h = c.into_owned();
                let r = (&tt * &h - &h * lambda).amax();
                residual = residual.max(r);
                normalize(h)
            })
            .collect();
        real.push(RealEigenspace {
            lambda,
            multiplicity,
            vectors,
            residual,
        });
    }
    Ok(DenseSpectrum {
        eigenvalues: all.iter().map(|z| (z.re, z.im)).collect(),
        complex_flags,
        real,
        scale,
    })
}

impl DenseSpectrum {
    /// Largest real eigenvalue.
    pub fn top_real(&self) -> Option<f64> {
        self.real.first().map(|s| s.lambda)
    }

    /// Is `lambda` within `rel` (relative to `max(1, |lambda|)`) of some real
    /// eigenvalue?
    pub fn has_real(&self, lambda: f64, rel: f64) -> bool {
        self.real
            .iter()
            .any(|s| (s.lambda - lambda).abs() <= rel * lambda.abs().max(1.0))
    }

    /// Some real eigenspace contains a vector of the dual cone with
    /// `h(e) = 1`; returns that vector.
    pub fn dual_cone_witness(
        &self,
        cone: &Cone,
        e: &DVector<f64>,
        tol: &Tolerances,
    ) -> Result<Option<(f64, DVector<f64>)>> {
        for s in &self.real {
            let basis = DMatrix::from_columns(&s.vectors);
            let hint = cone.dual_seed(e).unwrap_or_else(|_| e.clone());
            if let Some(h) = dual_cone_candidate(cone, e, &basis, &hint)? {
                if cone.dual_contains(&h, tol)? {
                    return Ok(Some((s.lambda, h)));
                }
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn symmetric_two_by_two() {
        let s = dense_dual_eigs(&dmatrix![2.0, 1.0; 1.0, 2.0]).unwrap();
        assert_eq!(s.real.len(), 2);
        assert!((s.real[0].lambda - 3.0).abs() < 1e-12);
        assert!((s.real[0].vectors[0][0] - 0.5).abs() < 1e-12);
        assert!((s.real[1].lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_is_flagged_complex() {
        let s = dense_dual_eigs(&dmatrix![0.0, -1.0; 1.0, 0.0]).unwrap();
        assert!(s.real.is_empty());
        assert_eq!(s.complex_flags, vec![true, true]);
    }

    #[test]
    fn rejects_large_input() {
        assert!(dense_dual_eigs(&DMatrix::zeros(65, 65)).is_err());
    }
}
