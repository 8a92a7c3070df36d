//! Dense helpers shared by the solvers and the oracles.

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex<f64>>;

/// Orthonormal basis of the numerical null space of a matrix.
#[derive(Clone, Debug)]
pub struct NullSpace {
    /// `n x d`, orthonormal columns.
    pub basis: DMatrix<f64>,
    /// All singular values, ascending.
    pub singular_values: Vec<f64>,
}

impl NullSpace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Largest singular value that was treated as zero and the smallest one
    /// that was not; the gap between them is the conditioning of the split.
    pub fn split(&self) -> (Option<f64>, Option<f64>) {
        let d = self.dim();
        let kept = d.checked_sub(1).map(|i| self.singular_values[i]);
        let next = self.singular_values.get(d).copied();
        (kept, next)
    }
}

/// Null space of `a` by SVD: right singular vectors whose singular value is
/// at most `threshold`.
pub fn nullspace(a: &DMatrix<f64>, threshold: f64) -> NullSpace {
    let n = a.ncols();
    // nalgebra returns only min(rows, cols) right singular vectors.
    let padded = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let singular_values: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let keep: Vec<usize> = idx
        .iter()
        .copied()
        .filter(|&i| svd.singular_values[i] <= threshold)
        .collect();
    let mut basis = DMatrix::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        basis.set_column(c, &vt.row(i).transpose());
    }
    NullSpace {
        basis,
        singular_values,
    }
}

/// Eigenvalues of a general real square matrix via the real Schur form.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(Error::EigenNonConvergence)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Real eigenvalues of `m` (imaginary part at most `imag_tol * scale`),
/// clustered within `cluster_tol * scale` and sorted in decreasing order.
/// Each entry is `(representative value, algebraic multiplicity)`.
pub fn real_eigenvalue_clusters(
    m: &DMatrix<f64>,
    imag_tol: f64,
    cluster_tol: f64,
) -> Result<Vec<(f64, usize)>> {
    let scale = m.amax().max(1.0);
    let mut reals: Vec<f64> = eigenvalues(m)?
        .into_iter()
        .filter(|z| z.im.abs() <= imag_tol * scale)
        .map(|z| z.re)
        .collect();
    reals.sort_by(|a, b| b.total_cmp(a));
    let mut clusters: Vec<(f64, usize, f64)> = Vec::new();
    for v in reals {
        match clusters.last_mut() {
            Some((_, count, sum)) if (*sum / *count as f64 - v).abs() <= cluster_tol * scale => {
                *count += 1;
                *sum += v;
            }
            _ => clusters.push((v, 1, v)),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|(_, count, sum)| (sum / count as f64, count))
        .collect())
}

/// Spectral radius of a real square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigen-decomposition of a Hermitian matrix (the Hermitian part of `m` is
/// used), with eigenvalues ascending and eigenvectors as matching columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = SymmetricEigen::new(herm);
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Frobenius norm of the anti-Hermitian part.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm() * 0.5
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex::new(v, 0.0))
}

/// `max_i |x_i|`.
pub fn max_abs(x: &DVector<f64>) -> f64 {
    x.amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn nullspace_of_rank_one() {
        let a = dmatrix![1.0, -1.0; -1.0, 1.0];
        let ns = nullspace(&a, 1e-10);
        assert_eq!(ns.dim(), 1);
        let v = ns.basis.column(0);
        assert!((v[0] - v[1]).abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_wide_matrix_is_complete() {
        let a = dmatrix![1.0, 0.0, 0.0];
        assert_eq!(nullspace(&a, 1e-10).dim(), 2);
    }

    #[test]
    fn clusters_merge_repeated_eigenvalues() {
        let m = DMatrix::<f64>::identity(3, 3);
        let c = real_eigenvalue_clusters(&m, 1e-9, 1e-8).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].1, 3);
    }

    #[test]
    fn rotation_has_no_real_eigenvalues() {
        let m = dmatrix![0.0, -1.0; 1.0, 0.0];
        assert!(real_eigenvalue_clusters(&m, 1e-9, 1e-8).unwrap().is_empty());
        assert!((spectral_radius(&m).unwrap() - 1.0).abs() < 1e-12);
    }
}
