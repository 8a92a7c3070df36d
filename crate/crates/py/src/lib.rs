//! Python bindings: cones, positive operators, positive maps on `M_n`, and the
//! differential oracle. Indices are one-based, as in the JSON formats.

use krein_core::contraction::{self, MonotoneSpace};
use krein_core::io;
use krein_core::krein::{self as solver, CommonEigenvector};
use krein_core::l1::{self, L1Matrix};
use krein_core::linalg::CMatrix;
use krein_core::matrix_order::{self, HermMatrix, Positivity, SuperOp};
use krein_core::oracle::{self, Family};
use krein_core::{Cone, ErrorClass, NormTag, Tolerances};
use nalgebra::{Complex, DMatrix, DVector};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(krein, KreinError, PyException, "Base class for solver errors.");
create_exception!(krein, HypothesisError, KreinError, "A theorem hypothesis fails; see `.args[1]` for the witness.");
create_exception!(krein, DimensionError, KreinError, "Input shapes disagree.");
create_exception!(krein, SolverError, KreinError, "No answer within the iteration and fallback budget.");

fn err(e: krein_core::Error) -> PyErr {
    let msg = e.to_string();
    match e.class() {
        ErrorClass::InvalidInput => PyValueError::new_err(msg),
        ErrorClass::Dimension => DimensionError::new_err(msg),
        ErrorClass::Solver => SolverError::new_err(msg),
        ErrorClass::Hypothesis => {
            let witness = io::error_to_json(&e)["witness"].to_string();
            HypothesisError::new_err((msg, witness))
        }
    }
}

fn to_py<'py>(py: Python<'py>, x: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(x).map_err(|e| PyValueError::new_err(e.to_string()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(DimensionError::new_err("rows have different lengths"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn cmatrix(rows: Vec<Vec<Complex<f64>>>) -> PyResult<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(DimensionError::new_err("rows have different lengths"));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex<f64>>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn norm(name: &str) -> PyResult<NormTag> {
    io::norm_from_name(name).map_err(err)
}

fn one_based(k: usize, n: usize) -> PyResult<usize> {
    if k == 0 || k > n {
        return Err(PyValueError::new_err(format!("index {k} outside 1..={n}")));
    }
    Ok(k - 1)
}

fn tolerances(tol: f64, membership_tol: f64) -> PyResult<Tolerances> {
    Tolerances::new(membership_tol, tol, Tolerances::default().alpha_probe).map_err(err)
}

#[pyclass(name = "Cone", module = "krein", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCone {
    inner: Cone,
}

#[pymethods]
impl PyCone {
    #[staticmethod]
    fn orthant(n: usize) -> Self {
        PyCone {
            inner: Cone::orthant(n),
        }
    }

    /// `{x : x_k >= sum_{i != k} |x_i|}`.
    #[staticmethod]
    fn l1_krein(n: usize, k: usize) -> PyResult<Self> {
        let inner = Cone::l1_krein(n, one_based(k, n)?).map_err(err)?;
        Ok(PyCone { inner })
    }

    /// Positive semidefinite `n x n` real matrices, vectorized row-major.
    #[staticmethod]
    fn psd(n: usize) -> Self {
        PyCone {
            inner: Cone::Psd { n },
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v = io::parse_json(text).map_err(err)?;
        Ok(PyCone {
            inner: io::cone_from_json(&v).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        io::cone_to_json(&self.inner).to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[pyo3(signature = (x, membership_tol = 1e-9))]
    fn contains(&self, x: Vec<f64>, membership_tol: f64) -> PyResult<bool> {
        let tol = tolerances(1e-8, membership_tol)?;
        self.inner.contains(&DVector::from_vec(x), &tol).map_err(err)
    }

    #[pyo3(signature = (f, membership_tol = 1e-9))]
    fn dual_contains(&self, f: Vec<f64>, membership_tol: f64) -> PyResult<bool> {
        let tol = tolerances(1e-8, membership_tol)?;
        self.inner.dual_contains(&DVector::from_vec(f), &tol).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Cone({})", self.to_json())
    }
}

#[pyclass(name = "DualEigenpair", module = "krein", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyEigenpair {
    eigenvalue: f64,
    h: Vec<f64>,
    residual: f64,
    iterations: usize,
    method: String,
}

#[pymethods]
impl PyEigenpair {
    fn __repr__(&self) -> String {
        format!(
            "DualEigenpair(eigenvalue={}, h={:?}, residual={:e}, method={})",
            self.eigenvalue, self.h, self.residual, self.method
        )
    }
}

impl From<solver::DualEigenpair> for PyEigenpair {
    fn from(p: solver::DualEigenpair) -> Self {
        let j = io::EigenpairJson::from(&p);
        PyEigenpair {
            eigenvalue: j.lambda,
            h: j.h,
            residual: j.residual,
            iterations: j.iterations,
            method: serde_json::to_value(j.method)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
        }
    }
}

/// `T` together with a cone it preserves, a point `e` dominating the unit
/// ball, and the norm.
#[pyclass(name = "PositiveOperator", module = "krein", frozen)]
struct PyOperator {
    inner: solver::PositiveOperator,
}

#[pymethods]
impl PyOperator {
    #[new]
    #[pyo3(signature = (matrix, cone, e, norm = "linf", membership_tol = 1e-9))]
    fn new(
        matrix: Vec<Vec<f64>>,
        cone: &PyCone,
        e: Vec<f64>,
        norm: &str,
        membership_tol: f64,
    ) -> PyResult<Self> {
        let tol = tolerances(1e-8, membership_tol)?;
        let inner = solver::PositiveOperator::new(
            self::matrix(matrix)?,
            cone.inner.clone(),
            DVector::from_vec(e),
            self::norm(norm)?,
            &tol,
        )
        .map_err(err)?;
        Ok(PyOperator { inner })
    }

    /// One step `f -> (f + T^T f) / [f + T^T f](e)`.
    fn krein_map(&self, f: Vec<f64>) -> PyResult<Vec<f64>> {
        let g = solver::krein_map(&self.inner, &DVector::from_vec(f)).map_err(err)?;
        Ok(g.iter().copied().collect())
    }

    #[pyo3(signature = (tol = 1e-8, max_iter = 10_000))]
    fn solve(&self, py: Python<'_>, tol: f64, max_iter: usize) -> PyResult<PyEigenpair> {
        let t = tolerances(tol, 1e-9)?;
        let p = py
            .detach(|| solver::solve_dual_eigenvector(&self.inner, &t, max_iter))
            .map_err(err)?;
        Ok(p.into())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }
}

/// Common eigenvector of commuting operators; returns a dict.
#[pyfunction]
#[pyo3(signature = (operators, tol = 1e-8, max_iter = 10_000))]
fn common_eigenvector<'py>(
    py: Python<'py>,
    operators: Vec<PyRef<'py, PyOperator>>,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let ops: Vec<_> = operators.iter().map(|o| o.inner.clone()).collect();
    let ctol = 1e-12 * ops.iter().map(|o| o.matrix().norm().max(1.0)).product::<f64>();
    let t = tolerances(tol, 1e-9)?;
    let fam = solver::CommutingFamily::new(ops, ctol).map_err(err)?;
    let c: CommonEigenvector = solver::common_eigenvector(&fam, &t, max_iter).map_err(err)?;
    to_py(py, &io::CommonJson::from(&c))
}

/// First index `k` (one-based) at which the column criterion holds, or the
/// failing `(k, j, sign)` for the requested or first index.
#[pyfunction]
#[pyo3(signature = (matrix, k = None, tol = 1e-9))]
fn criterion<'py>(
    py: Python<'py>,
    matrix: Vec<Vec<f64>>,
    k: Option<usize>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let m = L1Matrix::new(self::matrix(matrix)?).map_err(err)?;
    let k = match k {
        Some(k) => one_based(k, m.n())?,
        None => match l1::find_certificate_index(&m, tol) {
            Some(k) => return to_py(py, &serde_json::json!({"certified": true, "k": k + 1})),
            None => 0,
        },
    };
    let v = match l1::tkk_violation(&m, k, tol) {
        None => serde_json::json!({"certified": true, "k": k + 1}),
        Some(v) => serde_json::json!({
            "certified": false,
            "witness": {"k": v.k + 1, "j": v.j + 1, "sign": v.sign.to_string(), "lhs": v.lhs, "rhs": v.rhs},
        }),
    };
    to_py(py, &v)
}

/// Face of the unit ball at `e`; with `matrix`, the face theorem report.
#[pyfunction]
#[pyo3(signature = (norm, e, matrix = None))]
fn face<'py>(
    py: Python<'py>,
    norm: &str,
    e: Vec<f64>,
    matrix: Option<Vec<Vec<f64>>>,
) -> PyResult<Bound<'py, PyAny>> {
    let norm = self::norm(norm)?;
    let e = DVector::from_vec(e);
    let tol = Tolerances::default();
    let v = match matrix {
        None => io::face_to_json(&contraction::compute_face(&norm, &e, &tol).map_err(err)?, None),
        Some(m) => {
            let space = MonotoneSpace::new(e.len(), norm).map_err(err)?;
            let rep = contraction::verify_face_theorem(&self::matrix(m)?, &e, &space, &tol)
                .map_err(err)?;
            io::face_to_json(&rep.face, Some(&rep))
        }
    };
    to_py(py, &v)
}

/// Eigenvector of `T^T` over the cone generated by the orthant and `e - B`.
#[pyfunction]
#[pyo3(signature = (matrix, e, norm = "linf", tol = 1e-8, max_iter = 10_000))]
fn te_solve(
    matrix: Vec<Vec<f64>>,
    e: Vec<f64>,
    norm: &str,
    tol: f64,
    max_iter: usize,
) -> PyResult<PyEigenpair> {
    let t = tolerances(tol, 1e-9)?;
    let p = contraction::solve_te_eigenvector(
        &self::matrix(matrix)?,
        &DVector::from_vec(e),
        &self::norm(norm)?,
        &t,
        max_iter,
    )
    .map_err(err)?;
    Ok(p.into())
}

/// A linear map on `M_n`.
#[pyclass(name = "SuperOp", module = "krein", frozen)]
struct PySuperOp {
    inner: SuperOp,
}

#[pymethods]
impl PySuperOp {
    #[staticmethod]
    fn from_kraus(kraus: Vec<Vec<Vec<Complex<f64>>>>) -> PyResult<Self> {
        let ks = kraus.into_iter().map(cmatrix).collect::<PyResult<Vec<_>>>()?;
        Ok(PySuperOp {
            inner: SuperOp::from_kraus(ks).map_err(err)?,
        })
    }

    /// Choi matrix in the row-major matrix-unit basis.
    #[staticmethod]
    fn from_choi(n: usize, choi: Vec<Vec<Complex<f64>>>) -> PyResult<Self> {
        Ok(PySuperOp {
            inner: SuperOp::from_choi(n, cmatrix(choi)?).map_err(err)?,
        })
    }

    /// `n^2 x n^2` matrix acting on row-major vectorizations.
    #[staticmethod]
    fn from_action(n: usize, action: Vec<Vec<Complex<f64>>>) -> PyResult<Self> {
        Ok(PySuperOp {
            inner: SuperOp::from_action(n, cmatrix(action)?).map_err(err)?,
        })
    }

    #[staticmethod]
    fn transpose_map(n: usize) -> Self {
        PySuperOp {
            inner: SuperOp::transpose_map(n),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn apply(&self, x: Vec<Vec<Complex<f64>>>) -> PyResult<Vec<Vec<Complex<f64>>>> {
        Ok(rows(&self.inner.apply(&cmatrix(x)?).map_err(err)?))
    }

    fn adjoint(&self) -> PyResult<Self> {
        Ok(PySuperOp {
            inner: matrix_order::adjoint_superop(&self.inner).map_err(err)?,
        })
    }

    fn choi(&self) -> Vec<Vec<Complex<f64>>> {
        rows(&self.inner.choi())
    }

    /// `"certified_cp"`, `"sampled_positive"` or `"falsified"`.
    #[pyo3(signature = (trials = 64, seed = 0))]
    fn positivity(&self, trials: usize, seed: u64) -> PyResult<String> {
        let p: Positivity = matrix_order::is_positive_map(&self.inner, trials, seed).map_err(err)?;
        Ok(p.name().to_string())
    }

    /// Density matrix `rho` with `Phi*(rho) = lambda rho`, as a dict.
    #[pyo3(signature = (tol = 1e-8, max_iter = 10_000))]
    fn fixed_state<'py>(
        &self,
        py: Python<'py>,
        tol: f64,
        max_iter: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let s = matrix_order::fixed_state(&self.inner, tol, max_iter).map_err(err)?;
        to_py(py, &io::FixedStateJson::from(&s))
    }
}

/// Ky Fan partial sums of the pinched singular values against the originals.
/// `partition` lists one-based index blocks.
#[pyfunction]
fn pinch_majorization<'py>(
    py: Python<'py>,
    x: Vec<Vec<Complex<f64>>>,
    partition: Vec<Vec<usize>>,
) -> PyResult<Bound<'py, PyAny>> {
    let x = HermMatrix::new(cmatrix(x)?).map_err(err)?;
    let n = x.n();
    let part = partition
        .iter()
        .map(|b| b.iter().map(|&i| one_based(i, n)).collect::<PyResult<Vec<_>>>())
        .collect::<PyResult<Vec<_>>>()?;
    let r = matrix_order::pinch_majorization(&x, &part).map_err(err)?;
    to_py(
        py,
        &serde_json::json!({
            "holds": r.holds,
            "max_excess": r.max_excess,
            "sigma_x": r.sigma_x,
            "sigma_pinched": r.sigma_pinched,
        }),
    )
}

/// Seeded solver-versus-oracle trials; a summary dict.
#[pyfunction]
#[pyo3(signature = (family, n, trials = 100, seed = 0, verbose = false))]
fn differential_run<'py>(
    py: Python<'py>,
    family: &str,
    n: usize,
    trials: usize,
    seed: u64,
    verbose: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let family: Family = family.parse().map_err(err)?;
    let s = py.detach(|| oracle::differential_run(family, n, trials, seed));
    to_py(py, &if verbose { s } else { s.brief() })
}

#[pymodule]
fn krein(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", krein_core::VERSION)?;
    m.add("KreinError", py.get_type::<KreinError>())?;
    m.add("HypothesisError", py.get_type::<HypothesisError>())?;
    m.add("DimensionError", py.get_type::<DimensionError>())?;
    m.add("SolverError", py.get_type::<SolverError>())?;
    m.add_class::<PyCone>()?;
    m.add_class::<PyEigenpair>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PySuperOp>()?;
    m.add_function(wrap_pyfunction!(common_eigenvector, m)?)?;
    m.add_function(wrap_pyfunction!(criterion, m)?)?;
    m.add_function(wrap_pyfunction!(face, m)?)?;
    m.add_function(wrap_pyfunction!(te_solve, m)?)?;
    m.add_function(wrap_pyfunction!(pinch_majorization, m)?)?;
    m.add_function(wrap_pyfunction!(differential_run, m)?)?;
    Ok(())
}
