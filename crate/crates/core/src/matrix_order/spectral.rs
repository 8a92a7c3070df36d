//! Generalized singular value function, pinching, and the operator-norm face.

use nalgebra::{Complex, DVector};
use serde::Serialize;

use super::herm::HermMatrix;
use crate::contraction::{FaceDescription, MIN_PROBE_STEP, PROBE_HALVINGS};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, CMatrix};

/// Partial sums of pinched singular values may exceed the originals by this.
pub const MAJORIZATION_TOL: f64 = 1e-10;
/// Eigenvalues of `e` this close to one count as attaining the norm.
pub const PEAK_TOL: f64 = 1e-9;

/// The step function `t -> mu(t, x)` for the standard trace on `M_n`: the
/// `i`-th largest singular value on `[i, i + 1)` and zero from `n` on.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigFunction {
    /// Singular values, non-increasing.
    pub values: Vec<f64>,
}

impl EigFunction {
    /// Left ends of the constancy intervals: `0, 1, ..., n`.
    pub fn breakpoints(&self) -> Vec<f64> {
        (0..=self.values.len()).map(|i| i as f64).collect()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::NAN;
        }
        self.values.get(t.floor() as usize).copied().unwrap_or(0.0)
    }

    /// `∫_0^a mu(t) dt`.
    pub fn integral(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        let whole = (a.floor() as usize).min(self.values.len());
        let head: f64 = self.values[..whole].iter().sum();
        head + (a - a.floor()) * self.eval(a)
    }

    /// `∫_0^∞ mu`, the trace norm.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn singular_values(x: &HermMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = x.eigenvalues().iter().map(|v| v.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn eig_function(x: &HermMatrix) -> EigFunction {
    EigFunction {
        values: singular_values(x),
    }
}

#[derive(Clone, Debug)]
pub struct PinchReport {
    pub pinched: HermMatrix,
    pub sigma_x: Vec<f64>,
    pub sigma_pinched: Vec<f64>,
    /// `max_m (sum_{j<=m} sigma_j(pinched) - sum_{j<=m} sigma_j(x))`.
    pub max_excess: f64,
    pub holds: bool,
}

fn check_partition(n: usize, partition: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; n];
    for block in partition {
        if block.is_empty() {
            return Err(Error::InvalidInput("partition has an empty block".into()));
        }
        for &i in block {
            if i >= n {
                return Err(Error::InvalidInput(format!(
                    "index {} out of range for size {n}",
                    i + 1
                )));
            }
            if seen[i] {
                return Err(Error::InvalidInput(format!("index {} repeated", i + 1)));
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidInput(format!("index {} not covered", i + 1)));
    }
    Ok(())
}

/// `sum_i P_i x P_i` for the coordinate projections of `partition`.
pub fn pinch(x: &HermMatrix, partition: &[Vec<usize>]) -> Result<HermMatrix> {
    let n = x.n();
    check_partition(n, partition)?;
    let mut block_of = vec![0; n];
    for (b, block) in partition.iter().enumerate() {
        for &i in block {
            block_of[i] = b;
        }
    }
    let m = x.matrix();
    let out = CMatrix::from_fn(n, n, |i, j| {
        if block_of[i] == block_of[j] {
            m[(i, j)]
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    Ok(HermMatrix::hermitian_part(&out))
}

/// Ky Fan dominance of the pinched singular values by the original ones.
pub fn pinch_majorization(x: &HermMatrix, partition: &[Vec<usize>]) -> Result<PinchReport> {
    let pinched = pinch(x, partition)?;
    let sigma_x = singular_values(x);
    let sigma_pinched = singular_values(&pinched);
    let mut max_excess = f64::NEG_INFINITY;
    let (mut a, mut b) = (0.0, 0.0);
    for (p, o) in sigma_pinched.iter().zip(&sigma_x) {
        a += p;
        b += o;
        max_excess = max_excess.max(a - b);
    }
    Ok(PinchReport {
        pinched,
        holds: max_excess <= MAJORIZATION_TOL,
        sigma_x,
        sigma_pinched,
        max_excess,
    })
}

/// Spectral projector of `e` onto its eigenvalues within [`PEAK_TOL`] of one.
pub fn peak_projector(e: &HermMatrix) -> CMatrix {
    let (values, vectors) = linalg::hermitian_eigen(e.matrix());
    let n = e.n();
    let mut p = CMatrix::zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        if (v - 1.0).abs() <= PEAK_TOL {
            let col = vectors.column(i);
            p += &col * col.adjoint();
        }
    }
    p
}

fn check_unit_psd(e: &HermMatrix) -> Result<()> {
    let ev = e.eigenvalues();
    let min = ev.first().copied().unwrap_or(0.0);
    if min < -super::superop::PSD_TOL {
        return Err(Error::hypothesis(
            format!("e is not positive semidefinite (eigenvalue {min})"),
            ev,
        ));
    }
    let top = e.op_norm();
    if (top - 1.0).abs() > PEAK_TOL {
        return Err(Error::NotUnitNorm { norm: top });
    }
    Ok(())
}

/// `(||e + a x|| - 1) / a` by dyadic descent from `alpha_probe`.
pub fn op_norm_dirder(e: &HermMatrix, x: &HermMatrix, alpha_probe: f64) -> Result<f64> {
    check_dim(e.n(), x.n())?;
    let q = |a: f64| {
        let m = e.matrix() + x.matrix().map(|z| z * a);
        (HermMatrix::hermitian_part(&m).op_norm() - 1.0) / a
    };
    let mut a = alpha_probe;
    let mut value = q(a);
    for _ in 0..PROBE_HALVINGS {
        if a * 0.5 < MIN_PROBE_STEP {
            break;
        }
        a *= 0.5;
        value = q(a);
    }
    Ok(value)
}

#[derive(Clone, Debug, Serialize)]
pub struct PsdFaceMembership {
    pub member: bool,
    /// `||P x P||`, the exact directional derivative.
    pub spectral: f64,
    /// Difference-quotient estimate of the same derivative.
    pub numeric: f64,
}

/// Membership of a PSD `x` in the face `{x >= 0 : P x P = 0}`, `P` the
/// projector onto the eigenvalue-one space of the unit-norm PSD `e`.
pub fn face_psd(
    e: &HermMatrix,
    x: &HermMatrix,
    tol: f64,
    alpha_probe: f64,
) -> Result<PsdFaceMembership> {
    check_dim(e.n(), x.n())?;
    check_unit_psd(e)?;
    if !x.is_psd(super::superop::PSD_TOL * x.op_norm().max(1.0)) {
        return Err(Error::InvalidInput("x must be positive semidefinite".into()));
    }
    let p = peak_projector(e);
    let pxp = HermMatrix::hermitian_part(&(&p * x.matrix() * &p));
    let spectral = pxp.op_norm();
    Ok(PsdFaceMembership {
        member: spectral <= tol,
        spectral,
        numeric: op_norm_dirder(e, x, alpha_probe)?,
    })
}

/// The face at `e` as a description; trivial when `P = I`.
pub fn psd_face(e: &HermMatrix) -> Result<FaceDescription> {
    check_unit_psd(e)?;
    let p = peak_projector(e);
    let rank = p.trace().re.round() as usize;
    Ok(FaceDescription::spectral(p, rank == e.n()))
}

/// `v` as a unit vector, `v v*` as a Hermitian matrix.
pub fn rank_one(v: &DVector<Complex<f64>>) -> HermMatrix {
    HermMatrix::hermitian_part(&(v * v.adjoint()))
}
