//! Linear maps on `M_n` in superoperator form.
//!
//! Matrices are vectorized row-major: `vec(X)[i n + j] = X_ij`. The action
//! matrix `A` satisfies `vec(Phi(X)) = A vec(X)`, and the Choi matrix is
//! `C = sum_ij E_ij ⊗ Phi(E_ij)`, i.e. `C[(i,k),(j,l)] = Phi(E_ij)_kl`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use super::herm::HermMatrix;
use crate::error::{check_dim, Error, Result};
use crate::krein::Method;
use crate::linalg::{self, CMatrix};
use crate::random;

pub const CONSISTENCY_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

type C64 = Complex<f64>;

pub fn vec_row_major(x: &CMatrix) -> DVector<C64> {
    DVector::from_iterator(x.len(), x.transpose().iter().copied())
}

pub fn unvec_row_major(v: &DVector<C64>, n: usize) -> CMatrix {
    CMatrix::from_row_slice(n, n, v.as_slice())
}

fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(n, n);
    e[(i, j)] = Complex::new(1.0, 0.0);
    e
}

/// Permutation with `swap * vec(X) = vec(X^T)`.
fn swap(n: usize) -> CMatrix {
    let mut p = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            p[(j * n + i, i * n + j)] = Complex::new(1.0, 0.0);
        }
    }
    p
}

/// `C[(i,k),(j,l)] = A[(k,l),(i,j)]`; the map is its own inverse.
fn reshuffle(m: &CMatrix, n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[(i * n + k, j * n + l)] = m[(k * n + l, i * n + j)];
                }
            }
        }
    }
    out
}

/// Inverse of [`reshuffle`]: action from Choi.
fn unreshuffle(c: &CMatrix, n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[(k * n + l, i * n + j)] = c[(i * n + k, j * n + l)];
                }
            }
        }
    }
    out
}

fn scale_of(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct SuperOp {
    n: usize,
    action: CMatrix,
    kraus: Option<Vec<CMatrix>>,
    choi: Option<CMatrix>,
}

impl SuperOp {
    /// Checks that every representation supplied describes the same map.
    pub fn new(
        n: usize,
        action: CMatrix,
        kraus: Option<Vec<CMatrix>>,
        choi: Option<CMatrix>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("matrix size must be positive".into()));
        }
        check_dim(n * n, action.nrows())?;
        check_dim(n * n, action.ncols())?;
        let scale = scale_of(&action);
        if let Some(ks) = &kraus {
            let from_kraus = Self::from_kraus(ks.clone())?;
            check_dim(n, from_kraus.n)?;
            if (&from_kraus.action - &action).camax() > CONSISTENCY_TOL * scale {
                return Err(Error::InvalidInput(
                    "Kraus operators disagree with the action matrix".into(),
                ));
            }
        }
        if let Some(c) = &choi {
            check_dim(n * n, c.nrows())?;
            check_dim(n * n, c.ncols())?;
            if (unreshuffle(c, n) - &action).camax() > CONSISTENCY_TOL * scale {
                return Err(Error::InvalidInput(
                    "Choi matrix disagrees with the action matrix".into(),
                ));
            }
        }
        Ok(SuperOp {
            n,
            action,
            kraus,
            choi,
        })
    }

    pub fn from_action(n: usize, action: CMatrix) -> Result<Self> {
        Self::new(n, action, None, None)
    }

    /// `Phi(X) = sum K X K*`.
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::InvalidInput("empty Kraus list".into()));
        };
        let n = first.nrows();
        if n == 0 {
            return Err(Error::InvalidInput("matrix size must be positive".into()));
        }
        let mut action = CMatrix::zeros(n * n, n * n);
        for k in &kraus {
            check_dim(n, k.nrows())?;
            check_dim(n, k.ncols())?;
            // vec(K X K*) = (K ⊗ conj K) vec(X) for row-major vec.
            action += k.kronecker(&k.map(|z| z.conj()));
        }
        Ok(SuperOp {
            n,
            action,
            kraus: Some(kraus),
            choi: None,
        })
    }

    pub fn from_choi(n: usize, choi: CMatrix) -> Result<Self> {
        check_dim(n * n, choi.nrows())?;
        check_dim(n * n, choi.ncols())?;
        let action = unreshuffle(&choi, n);
        Ok(SuperOp {
            n,
            action,
            kraus: None,
            choi: Some(choi),
        })
    }

    /// Superoperator of an arbitrary linear map given as a closure.
    pub fn from_fn(n: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        let mut action = CMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let image = f(&matrix_unit(n, i, j));
                check_dim(n, image.nrows())?;
                check_dim(n, image.ncols())?;
                action.set_column(i * n + j, &vec_row_major(&image));
            }
        }
        Self::from_action(n, action)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_action(n, CMatrix::identity(n * n, n * n)).expect("square")
    }

    pub fn transpose_map(n: usize) -> Self {
        Self::from_action(n, swap(n)).expect("square")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn action(&self) -> &CMatrix {
        &self.action
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    pub fn choi(&self) -> CMatrix {
        self.choi
            .clone()
            .unwrap_or_else(|| reshuffle(&self.action, self.n))
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        check_dim(self.n, x.nrows())?;
        check_dim(self.n, x.ncols())?;
        Ok(unvec_row_major(&(&self.action * vec_row_major(x)), self.n))
    }

    pub fn compose(&self, other: &SuperOp) -> Result<SuperOp> {
        check_dim(self.n, other.n)?;
        Self::from_action(self.n, &self.action * &other.action)
    }
}

/// `tr(X Y)`.
pub fn trace_pairing(x: &CMatrix, y: &CMatrix) -> C64 {
    (x * y).trace()
}

/// The adjoint under `tr(XY)`: `tr(Phi(X) Y) = tr(X Phi*(Y))`.
pub fn adjoint_superop(phi: &SuperOp) -> Result<SuperOp> {
    let n = phi.n;
    let p = swap(n);
    let action = &p * phi.action.transpose() * &p;
    let adj = SuperOp {
        n,
        action,
        kraus: phi
            .kraus
            .as_ref()
            .map(|ks| ks.iter().map(|k| k.adjoint()).collect()),
        choi: None,
    };
    let mut r = random::rng(0xad70 ^ n as u64);
    let scale = scale_of(&phi.action);
    for _ in 0..8 {
        let x = random::complex_normal_matrix(&mut r, n, n);
        let y = random::complex_normal_matrix(&mut r, n, n);
        let lhs = trace_pairing(&phi.apply(&x)?, &y);
        let rhs = trace_pairing(&x, &adj.apply(&y)?);
        let size = x.norm() * y.norm() * scale * (n * n) as f64;
        if (lhs - rhs).norm() > CONSISTENCY_TOL * size {
            return Err(Error::InvalidInput(format!(
                "trace-pairing identity fails by {:e}",
                (lhs - rhs).norm()
            )));
        }
    }
    Ok(adj)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Positivity {
    /// The Choi matrix is PSD, so the map is completely positive.
    CertifiedCp,
    /// No sampled rank-one projector was mapped outside the PSD cone.
    SampledPositive { trials: usize },
    /// `Phi(v v*)` is not PSD for this `v`.
    Falsified { witness: DVector<C64>, min_eigenvalue: f64 },
}

impl Positivity {
    pub fn name(&self) -> &'static str {
        match self {
            Positivity::CertifiedCp => "certified_cp",
            Positivity::SampledPositive { .. } => "sampled_positive",
            Positivity::Falsified { .. } => "falsified",
        }
    }

    pub fn is_falsified(&self) -> bool {
        matches!(self, Positivity::Falsified { .. })
    }
}

/// Image of `v v*`, with its Hermiticity defect.
fn image_of_projector(phi: &SuperOp, v: &DVector<C64>) -> Result<(HermMatrix, f64)> {
    let p = v * v.adjoint();
    let img = phi.apply(&p)?;
    Ok((HermMatrix::hermitian_part(&img), linalg::hermiticity_defect(&img)))
}

pub fn is_positive_map(phi: &SuperOp, trials: usize, seed: u64) -> Result<Positivity> {
    let n = phi.n;
    let scale = scale_of(&phi.action);
    let choi = HermMatrix::hermitian_part(&phi.choi());
    let choi_hermitian = linalg::hermiticity_defect(&phi.choi()) <= CONSISTENCY_TOL * scale;
    if choi_hermitian && choi.min_eigenvalue() >= -PSD_TOL * scale {
        return Ok(Positivity::CertifiedCp);
    }
    let mut r = random::rng(seed);
    let basis = (0..n).map(|i| {
        let mut v = DVector::zeros(n);
        v[i] = Complex::new(1.0, 0.0);
        v
    });
    let sampled = (0..trials).map(|_| {
        let v = random::complex_normal_vector(&mut r, n);
        let norm = v.norm();
        v / Complex::new(norm, 0.0)
    });
    let mut count = 0;
    for v in basis.collect::<Vec<_>>().into_iter().chain(sampled) {
        count += 1;
        let (img, defect) = image_of_projector(phi, &v)?;
        let min = img.min_eigenvalue();
        if defect > CONSISTENCY_TOL * scale || min < -PSD_TOL * scale {
            return Ok(Positivity::Falsified {
                witness: v,
                min_eigenvalue: min,
            });
        }
    }
    Ok(Positivity::SampledPositive { trials: count })
}

#[derive(Clone, Debug)]
pub struct FixedState {
    pub lambda: f64,
    pub rho: HermMatrix,
    /// `||Phi*(rho) - lambda rho||_F`.
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
}

/// Orthonormal basis of the Hermitian matrices under `Re tr(X* Y)`.
fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(matrix_unit(n, i, i));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut a = CMatrix::zeros(n, n);
            a[(i, j)] = Complex::new(s, 0.0);
            a[(j, i)] = Complex::new(s, 0.0);
            out.push(a);
            let mut b = CMatrix::zeros(n, n);
            b[(i, j)] = Complex::new(0.0, s);
            b[(j, i)] = Complex::new(0.0, -s);
            out.push(b);
        }
    }
    out
}

fn hs_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// A density matrix `rho` with `Phi*(rho) = lambda rho`, found by iterating
/// `rho <- (rho + Phi*(rho)) / (1 + tr Phi*(rho))` from `I/n`.
pub fn fixed_state(phi: &SuperOp, residual_tol: f64, max_iter: usize) -> Result<FixedState> {
    let n = phi.n;
    let adj = adjoint_superop(phi)?;
    let mut rho = CMatrix::identity(n, n).map(|z| z / n as f64);
    let mut best = f64::INFINITY;
    for it in 0..=max_iter {
        let img = adj.apply(&rho)?;
        let lambda = img.trace().re;
        let r = (&img - rho.map(|z| z * lambda)).norm();
        best = best.min(r);
        if r <= 0.5 * residual_tol {
            let rho = HermMatrix::hermitian_part(&rho);
            if rho.is_psd(PSD_TOL) {
                return Ok(FixedState {
                    lambda,
                    rho,
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
        let next = &rho + &img;
        let t = next.trace().re;
        if !(t > 0.0) {
            return Err(Error::NonPositiveDenominator { value: t });
        }
        rho = HermMatrix::hermitian_part(&next.map(|z| z / t)).into_matrix();
    }
    dense_fixed_state(&adj, &rho, residual_tol, best, max_iter)
}

/// Real eigenproblem of `Phi*` on the Hermitian matrices, largest real
/// eigenvalue first; accepts the first PSD eigenmatrix.
fn dense_fixed_state(
    adj: &SuperOp,
    hint: &CMatrix,
    residual_tol: f64,
    mut best: f64,
    iterations: usize,
) -> Result<FixedState> {
    let n = adj.n;
    let basis = hermitian_basis(n);
    let d = basis.len();
    let images: Vec<CMatrix> = basis
        .iter()
        .map(|b| adj.apply(b))
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(d, d, |a, b| hs_inner(&basis[a], &images[b]));
    let coords = |x: &CMatrix| DVector::from_fn(d, |a, _| hs_inner(&basis[a], x));
    let assemble = |c: &DVector<f64>| {
        basis
            .iter()
            .zip(c.iter())
            .fold(CMatrix::zeros(n, n), |acc, (b, &w)| acc + b.map(|z| z * w))
    };
    let scale = m.amax().max(1.0);
    for (lambda, _) in linalg::real_eigenvalue_clusters(&m, 1e-9, 1e-7)? {
        let shifted = &m - DMatrix::identity(d, d) * lambda;
        let mut ns = linalg::nullspace(&shifted, 1e-6 * scale);
        if ns.dim() == 0 {
            ns = linalg::nullspace(&shifted, ns.singular_values[0]);
        }
        let c = if ns.dim() == 1 {
            ns.basis.column(0).into_owned()
        } else {
            &ns.basis * ns.basis.tr_mul(&coords(hint))
        };
        let x = assemble(&c);
        let t = x.trace().re;
        if t.abs() < 1e-12 {
            continue;
        }
        let rho = HermMatrix::hermitian_part(&x.map(|z| z / t));
        let img = adj.apply(rho.matrix())?;
        let lam = img.trace().re;
        let r = (&img - rho.matrix().map(|z| z * lam)).norm();
        best = best.min(r);
        if r <= residual_tol && rho.is_psd(PSD_TOL) {
            return Ok(FixedState {
                lambda: lam,
                rho,
                residual: r,
                iterations,
                method: Method::DenseFallback,
            });
        }
    }
    Err(Error::NoDualEigenvector {
        best_residual: best,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub choi_vs_action: f64,
    pub kraus_vs_action: Option<f64>,
}

/// Largest entrywise disagreement between the stored representations.
pub fn consistency(phi: &SuperOp) -> Result<ConsistencyReport> {
    let choi_vs_action = (unreshuffle(&phi.choi(), phi.n) - &phi.action).camax();
    let kraus_vs_action = match &phi.kraus {
        Some(ks) => Some((SuperOp::from_kraus(ks.clone())?.action - &phi.action).camax()),
        None => None,
    };
    Ok(ConsistencyReport {
        choi_vs_action,
        kraus_vs_action,
    })
}
