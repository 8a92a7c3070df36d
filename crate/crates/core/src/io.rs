//! JSON forms of the inputs and outputs.
//!
//! * vectors: `[1.0, 2.0]`
//! * real matrices: arrays of rows, `[[2, 1], [1, 2]]`
//! * complex matrices: arrays of rows whose entries are `[re, im]` pairs or
//!   plain numbers
//! * norms: `"l1"`, `"linf"`, `"l2"` or `{"kind": "weighted_sup", "weights": [...]}`
//! * cones: `{"kind": "orthant", "n": 3}`, `{"kind": "l1krein", "n": 3, "k": 1}`
//!   (`k` one-based), `{"kind": "polyhedral", "generators": [[...], ...]}`,
//!   `{"kind": "shifted_ball" | "te_cone", "e": [...], "norm": ...}`,
//!   `{"kind": "psd", "n": 2}`
//! * Kraus operators: an array of complex matrices, or `{"kraus": [...]}`
//! * Choi matrices: `{"basis": "row_major_matrix_units", "n": 2, "matrix": ...}`
//!
//! Indices in output are one-based.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cone::Cone;
use crate::contraction::{FaceChecks, FaceDescription, FaceKind, FaceReport};
use crate::error::{Error, Result};
use crate::krein::{CommonEigenvector, DualEigenpair, Method};
use crate::linalg::CMatrix;
use crate::matrix_order::{FixedState, Positivity};
use crate::norm::NormTag;

pub const CHOI_BASIS: &str = "row_major_matrix_units";

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| bad(format!("malformed JSON: {e}")))
}

fn number(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(format!("{what}: expected a finite number, got {v}")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what}: expected an array, got {v}")))
}

fn index(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| bad(format!("{what}: expected a non-negative integer, got {v}")))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| bad(format!("missing field {key:?}")))
}

pub fn vector_from_json(v: &Value) -> Result<DVector<f64>> {
    let items = array(v, "vector")?;
    let xs = items
        .iter()
        .map(|x| number(x, "vector entry"))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(xs))
}

pub fn vector_to_json(x: &DVector<f64>) -> Value {
    json!(x.iter().collect::<Vec<_>>())
}

fn rows_of<'a>(v: &'a Value, what: &str) -> Result<(usize, usize, Vec<&'a Vec<Value>>)> {
    let rows = array(v, what)?;
    let rows: Vec<&Vec<Value>> = rows
        .iter()
        .map(|r| array(r, "matrix row"))
        .collect::<Result<_>>()?;
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some(r) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            expected: ncols,
            found: r.len(),
        });
    }
    Ok((rows.len(), ncols, rows))
}

pub fn matrix_from_json(v: &Value) -> Result<DMatrix<f64>> {
    let (nr, nc, rows) = rows_of(v, "matrix")?;
    let mut m = DMatrix::zeros(nr, nc);
    for (i, r) in rows.iter().enumerate() {
        for (j, x) in r.iter().enumerate() {
            m[(i, j)] = number(x, "matrix entry")?;
        }
    }
    Ok(m)
}

pub fn matrix_to_json(m: &DMatrix<f64>) -> Value {
    json!(m
        .row_iter()
        .map(|r| r.iter().copied().collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn complex_entry(v: &Value) -> Result<Complex<f64>> {
    if let Some(pair) = v.as_array() {
        if pair.len() != 2 {
            return Err(bad(format!("complex entry must be [re, im], got {v}")));
        }
        return Ok(Complex::new(
            number(&pair[0], "real part")?,
            number(&pair[1], "imaginary part")?,
        ));
    }
    Ok(Complex::new(number(v, "complex entry")?, 0.0))
}

pub fn cmatrix_from_json(v: &Value) -> Result<CMatrix> {
    let (nr, nc, rows) = rows_of(v, "complex matrix")?;
    let mut m = CMatrix::zeros(nr, nc);
    for (i, r) in rows.iter().enumerate() {
        for (j, x) in r.iter().enumerate() {
            m[(i, j)] = complex_entry(x)?;
        }
    }
    Ok(m)
}

pub fn cmatrix_to_json(m: &CMatrix) -> Value {
    json!(m
        .row_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

pub fn norm_from_json(v: &Value) -> Result<NormTag> {
    if let Some(s) = v.as_str() {
        return norm_from_name(s);
    }
    serde_json::from_value(v.clone()).map_err(|e| bad(format!("norm: {e}")))
}

pub fn norm_from_name(s: &str) -> Result<NormTag> {
    match s {
        "l1" => Ok(NormTag::L1),
        "linf" => Ok(NormTag::Linf),
        "l2" => Ok(NormTag::L2),
        other => Err(bad(format!(
            "unknown norm {other:?}; expected l1, linf, l2 or a weighted_sup object"
        ))),
    }
}

pub fn norm_to_json(norm: &NormTag) -> Value {
    serde_json::to_value(norm).expect("norms serialize")
}

pub fn cone_from_json(v: &Value) -> Result<Cone> {
    let kind = field(v, "kind")?
        .as_str()
        .ok_or_else(|| bad("cone kind must be a string"))?;
    let cone = match kind {
        "orthant" => Cone::Orthant {
            n: index(field(v, "n")?, "n")?,
        },
        "psd" => Cone::Psd {
            n: index(field(v, "n")?, "n")?,
        },
        "l1krein" => {
            let n = index(field(v, "n")?, "n")?;
            let k = index(field(v, "k")?, "k")?;
            if k == 0 {
                return Err(bad("l1krein index k is one-based"));
            }
            Cone::L1Krein { n, k: k - 1 }
        }
        "polyhedral" => {
            let generators = array(field(v, "generators")?, "generators")?
                .iter()
                .map(vector_from_json)
                .collect::<Result<Vec<_>>>()?;
            let n = match v.get("n") {
                Some(n) => index(n, "n")?,
                None => generators
                    .first()
                    .map(|g| g.len())
                    .ok_or_else(|| bad("polyhedral cone needs generators or n"))?,
            };
            Cone::Polyhedral { n, generators }
        }
        "shifted_ball" | "te_cone" => {
            let e = vector_from_json(field(v, "e")?)?;
            let norm = norm_from_json(field(v, "norm")?)?;
            if kind == "shifted_ball" {
                Cone::ShiftedBall { e, norm }
            } else {
                Cone::TeCone { e, norm }
            }
        }
        other => return Err(bad(format!("unknown cone kind {other:?}"))),
    };
    cone.validate()?;
    Ok(cone)
}

pub fn cone_to_json(cone: &Cone) -> Value {
    match cone {
        Cone::Orthant { n } => json!({"kind": "orthant", "n": n}),
        Cone::Psd { n } => json!({"kind": "psd", "n": n}),
        Cone::L1Krein { n, k } => json!({"kind": "l1krein", "n": n, "k": k + 1}),
        Cone::Polyhedral { n, generators } => json!({
            "kind": "polyhedral",
            "n": n,
            "generators": generators.iter().map(vector_to_json).collect::<Vec<_>>(),
        }),
        Cone::ShiftedBall { e, norm } | Cone::TeCone { e, norm } => json!({
            "kind": cone.kind(),
            "e": vector_to_json(e),
            "norm": norm_to_json(norm),
        }),
    }
}

pub fn kraus_from_json(v: &Value) -> Result<Vec<CMatrix>> {
    let list = match v.get("kraus") {
        Some(k) => k,
        None => v,
    };
    array(list, "kraus list")?
        .iter()
        .map(cmatrix_from_json)
        .collect()
}

/// `(n, matrix)` from a Choi document; the basis field must name row-major
/// matrix units when present.
pub fn choi_from_json(v: &Value) -> Result<(usize, CMatrix)> {
    let (m, basis) = match v.get("matrix") {
        Some(m) => (m, v.get("basis")),
        None => (v, None),
    };
    if let Some(b) = basis {
        if b.as_str() != Some(CHOI_BASIS) {
            return Err(bad(format!("choi basis must be {CHOI_BASIS:?}, got {b}")));
        }
    }
    let c = cmatrix_from_json(m)?;
    let n = match v.get("n") {
        Some(n) => index(n, "n")?,
        None => square_root_dim(c.nrows())?,
    };
    Ok((n, c))
}

pub fn choi_to_json(n: usize, c: &CMatrix) -> Value {
    json!({"basis": CHOI_BASIS, "n": n, "matrix": cmatrix_to_json(c)})
}

/// `(n, action)` for an `n^2 x n^2` action matrix on row-major vectorizations.
pub fn action_from_json(v: &Value) -> Result<(usize, CMatrix)> {
    let m = v.get("matrix").unwrap_or(v);
    let a = cmatrix_from_json(m)?;
    Ok((square_root_dim(a.nrows())?, a))
}

fn square_root_dim(d: usize) -> Result<usize> {
    let n = (d as f64).sqrt().round() as usize;
    if n * n != d || n == 0 {
        return Err(bad(format!("superoperator size {d} is not a positive square")));
    }
    Ok(n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenpairJson {
    pub lambda: f64,
    pub h: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
}

impl From<&DualEigenpair> for EigenpairJson {
    fn from(p: &DualEigenpair) -> Self {
        EigenpairJson {
            lambda: p.lambda,
            h: p.h.iter().copied().collect(),
            residual: p.residual,
            iterations: p.iterations,
            method: p.method,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonJson {
    pub h: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    pub subspace_dims: Vec<usize>,
}

impl From<&CommonEigenvector> for CommonJson {
    fn from(c: &CommonEigenvector) -> Self {
        CommonJson {
            h: c.h.iter().copied().collect(),
            lambdas: c.lambdas.clone(),
            residuals: c.residuals.clone(),
            iterations: c.iterations.clone(),
            subspace_dims: c.subspace_dims.clone(),
        }
    }
}

fn face_kind_name(kind: &FaceKind) -> &'static str {
    match kind {
        FaceKind::CoordinateZeroSet => "coordinate_zero_set",
        FaceKind::SpectralProjectionKernel => "spectral_projection_kernel",
        FaceKind::NumericSample => "numeric_sample",
    }
}

/// `{"kind", "zero_set" (one-based), "witnesses", "trivial", "note"}`, plus
/// `"checks"` and `"te_minus_e"` when a theorem report is given.
pub fn face_to_json(face: &FaceDescription, report: Option<&FaceReport>) -> Value {
    let mut v = json!({
        "kind": face_kind_name(&face.kind),
        "zero_set": face.zero_set().iter().map(|i| i + 1).collect::<Vec<_>>(),
        "witnesses": face.witnesses.iter().map(vector_to_json).collect::<Vec<_>>(),
        "trivial": face.trivial,
        "note": face.note,
    });
    if let Some(r) = report {
        v["checks"] = checks_to_json(&r.checks);
        v["te_minus_e"] = vector_to_json(&r.te_minus_e);
        v["e_normalized"] = vector_to_json(&r.e);
        v["all_passed"] = json!(r.checks.all_passed());
    }
    v
}

fn checks_to_json(c: &FaceChecks) -> Value {
    serde_json::to_value(c).expect("checks serialize")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedStateJson {
    pub lambda: f64,
    pub rho: Value,
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
    pub min_eigenvalue: f64,
    pub trace: f64,
}

impl From<&FixedState> for FixedStateJson {
    fn from(s: &FixedState) -> Self {
        FixedStateJson {
            lambda: s.lambda,
            rho: cmatrix_to_json(s.rho.matrix()),
            residual: s.residual,
            iterations: s.iterations,
            method: s.method,
            min_eigenvalue: s.rho.min_eigenvalue(),
            trace: s.rho.trace(),
        }
    }
}

pub fn positivity_to_json(p: &Positivity) -> Value {
    match p {
        Positivity::CertifiedCp => json!({"verdict": p.name()}),
        Positivity::SampledPositive { trials } => json!({"verdict": p.name(), "trials": trials}),
        Positivity::Falsified {
            witness,
            min_eigenvalue,
        } => json!({
            "verdict": p.name(),
            "witness": witness.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "min_eigenvalue": min_eigenvalue,
        }),
    }
}

/// JSON form of an error, with its class and any witness.
pub fn error_to_json(e: &Error) -> Value {
    let mut v = json!({
        "error": e.to_string(),
        "class": format!("{:?}", e.class()).to_lowercase(),
    });
    match e {
        Error::Hypothesis { witness, .. } => v["witness"] = json!(witness),
        Error::CriterionViolated {
            k,
            j,
            sign,
            lhs,
            rhs,
        } => {
            v["witness"] = json!({"k": k, "j": j, "sign": sign.to_string(), "lhs": lhs, "rhs": rhs})
        }
        _ => {}
    }
    v
}
