//! The face `E = {x >= 0 : d/da ||e + a x|| at 0+ equals 0}` of the positive
//! orthant and the invariance theorem for norm-one maps with `Te > e`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::te::{check_nonnegative, check_norm_one, check_te_ge_e, NORM_ONE_TOL};
use crate::cone::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::linalg::CMatrix;
use crate::norm::NormTag;
use crate::random;

/// Probe steps of the dyadic descent stop once they drop below this; smaller
/// steps lose more to cancellation in `||e + a x|| - 1` than they gain.
pub const MIN_PROBE_STEP: f64 = 1.0 / (1u64 << 26) as f64;
/// Number of halvings attempted from the initial probe step.
pub const PROBE_HALVINGS: usize = 20;

const SAMPLE_SEED: u64 = 0xface;
const SAMPLE_PAIRS: usize = 200;

/// `R^n` with a lattice norm and the coordinatewise order.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneSpace {
    pub n: usize,
    pub norm: NormTag,
}

impl MonotoneSpace {
    pub fn new(n: usize, norm: NormTag) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        norm.validate(n)?;
        Ok(MonotoneSpace { n, norm })
    }

    /// Samples ordered pairs `0 <= x <= y` and checks `||x|| <= ||y||`.
    pub fn check_monotone(&self, trials: usize, seed: u64) -> bool {
        let mut r = random::rng(seed);
        (0..trials).all(|_| {
            let x = random::uniform_vector(&mut r, self.n, 0.0, 1.0);
            let y = &x + random::uniform_vector(&mut r, self.n, 0.0, 1.0);
            self.norm.norm(&x) <= self.norm.norm(&y) * (1.0 + 1e-15)
        })
    }
}

/// `(||e + a x|| - 1) / a`.
pub fn difference_quotient(norm: &NormTag, e: &DVector<f64>, x: &DVector<f64>, a: f64) -> f64 {
    (norm.norm(&(e + x * a)) - 1.0) / a
}

fn check_unit(norm: &NormTag, e: &DVector<f64>) -> Result<()> {
    let e_norm = norm.norm(e);
    if (e_norm - 1.0).abs() > NORM_ONE_TOL {
        return Err(Error::NotUnitNorm { norm: e_norm });
    }
    Ok(())
}

/// One-sided derivative of the norm at the unit vector `e` in a positive
/// direction `x`, by dyadic descent of the difference quotient.
///
/// The quotient is nondecreasing in `a` (convexity), so the value at the
/// smallest step is the best available estimate of the limit.
pub fn dirder(norm: &NormTag, e: &DVector<f64>, x: &DVector<f64>, alpha_probe: f64) -> Result<f64> {
    check_dim(e.len(), x.len())?;
    norm.validate(e.len())?;
    check_unit(norm, e)?;
    if let Some(i) = x.iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "direction must be non-negative, coordinate {} is {}",
            i + 1,
            x[i]
        )));
    }
    if !(alpha_probe > 0.0) {
        return Err(Error::InvalidInput("alpha_probe must be positive".into()));
    }
    let mut a = alpha_probe;
    let mut q = difference_quotient(norm, e, x, a);
    for _ in 0..PROBE_HALVINGS {
        let next = a * 0.5;
        if next < MIN_PROBE_STEP {
            break;
        }
        a = next;
        q = difference_quotient(norm, e, x, a);
    }
    Ok(q)
}

/// Exact one-sided derivative of the norm at `e` in direction `x`.
pub fn dirder_closed_form(norm: &NormTag, e: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let e_norm = norm.norm(e);
    match norm {
        NormTag::Linf | NormTag::WeightedSup { .. } => {
            let w = |i: usize| match norm {
                NormTag::WeightedSup { weights } => weights[i],
                _ => 1.0,
            };
            norm.attaining_set(e)
                .into_iter()
                .map(|i| w(i) * e[i].signum() * x[i])
                .fold(f64::NEG_INFINITY, f64::max)
        }
        NormTag::L1 => e
            .iter()
            .zip(x.iter())
            .map(|(&ei, &xi)| if ei == 0.0 { xi.abs() } else { ei.signum() * xi })
            .sum(),
        NormTag::L2 => e.dot(x) / e_norm,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    CoordinateZeroSet,
    SpectralProjectionKernel,
    NumericSample,
}

#[derive(Clone, Debug)]
pub enum FaceData {
    /// Coordinates that vanish on the face (zero-based).
    ZeroSet(Vec<usize>),
    /// `x` is in the face iff `P x P = 0`.
    Projector(CMatrix),
}

#[derive(Clone, Debug)]
pub struct FaceDescription {
    pub kind: FaceKind,
    pub data: FaceData,
    /// Members of the face that generate it.
    pub witnesses: Vec<DVector<f64>>,
    /// `true` when the face is `{0}`.
    pub trivial: bool,
    pub note: Option<String>,
    norm: NormTag,
    e: DVector<f64>,
    alpha_probe: f64,
}

impl FaceDescription {
    pub fn zero_set(&self) -> &[usize] {
        match &self.data {
            FaceData::ZeroSet(z) => z,
            FaceData::Projector(_) => &[],
        }
    }

    pub(crate) fn spectral(projector: CMatrix, trivial: bool) -> Self {
        FaceDescription {
            kind: FaceKind::SpectralProjectionKernel,
            data: FaceData::Projector(projector),
            witnesses: Vec::new(),
            trivial,
            note: None,
            norm: NormTag::L2,
            e: DVector::zeros(0),
            alpha_probe: 0.0,
        }
    }

    /// Membership of a real vector in a face of the orthant.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        check_dim(self.e.len(), x.len())?;
        let s = x.amax().max(1.0);
        if x.iter().any(|&v| v < -tol * s) {
            return Ok(false);
        }
        match (&self.kind, &self.data) {
            (FaceKind::CoordinateZeroSet, FaceData::ZeroSet(z)) => {
                Ok(z.iter().all(|&i| x[i] <= tol * s))
            }
            (FaceKind::NumericSample, _) => {
                let p = x.map(|v| v.max(0.0));
                let d = dirder(&self.norm, &self.e, &p, self.alpha_probe)?;
                Ok(d <= numeric_threshold(tol, self.alpha_probe, &p))
            }
            _ => Err(Error::InvalidInput(
                "spectral faces act on matrices, not vectors".into(),
            )),
        }
    }
}

/// Allowance for the `O(a)` bias of the difference quotient of a smooth norm.
fn numeric_threshold(tol: f64, alpha_probe: f64, x: &DVector<f64>) -> f64 {
    let s = x.amax().max(1.0);
    tol.max(alpha_probe) * s * s
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// The face `E` at the unit vector `e >= 0`.
pub fn compute_face(norm: &NormTag, e: &DVector<f64>, tol: &Tolerances) -> Result<FaceDescription> {
    let n = e.len();
    norm.validate(n)?;
    check_unit(norm, e)?;
    if e.iter().any(|&v| v < 0.0) {
        return Err(Error::hypothesis(
            "e must be non-negative",
            e.iter().copied().collect(),
        ));
    }
    let (kind, zero_set) = match norm {
        NormTag::Linf | NormTag::WeightedSup { .. } => {
            (FaceKind::CoordinateZeroSet, norm.attaining_set(e))
        }
        _ => {
            // A face of the orthant is spanned by the unit vectors it contains.
            let mut z = Vec::new();
            for i in 0..n {
                let u = unit(n, i);
                if dirder(norm, e, &u, tol.alpha_probe)?
                    > numeric_threshold(tol.membership_tol, tol.alpha_probe, &u)
                {
                    z.push(i);
                }
            }
            (FaceKind::NumericSample, z)
        }
    };
    let witnesses: Vec<DVector<f64>> = (0..n)
        .filter(|i| !zero_set.contains(i))
        .map(|i| unit(n, i))
        .collect();
    let trivial = witnesses.is_empty();
    let note = trivial.then(|| {
        format!(
            "E = {{0}}: the {} norm increases strictly at e in every positive direction",
            norm.name()
        )
    });
    Ok(FaceDescription {
        kind,
        data: FaceData::ZeroSet(zero_set),
        witnesses,
        trivial,
        note,
        norm: norm.clone(),
        e: e.clone(),
        alpha_probe: tol.alpha_probe,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FaceChecks {
    /// `Te - e` lies in `E`.
    pub te_minus_e_in_face: bool,
    /// `T` maps the generators and sampled members of `E` into `E`.
    pub invariant: bool,
    /// Sums of sampled members stay in `E`.
    pub additive: bool,
    pub e_outside: bool,
    /// `min ||e - (x - y)||` over sampled `x, y` in `E`.
    pub separation_min: f64,
    /// `separation_min >= 1/3 - tol`.
    pub separation_ok: bool,
    /// `min (1 + a - ||e + a p||) / a` with `p = (x - y)+` and `a` chosen so
    /// that `||e + a p|| <= 1 + a/3`; each such value is at least `2/3` and
    /// bounds `||e - (x - y)||` from below.
    pub alpha_bound_min: f64,
    /// Every sampled pair satisfies `||e - (x - y)|| >= bound - tol`.
    pub alpha_bound_ok: bool,
    pub samples: usize,
}

impl FaceChecks {
    pub fn all_passed(&self) -> bool {
        self.te_minus_e_in_face
            && self.invariant
            && self.additive
            && self.e_outside
            && self.separation_ok
            && self.alpha_bound_ok
    }
}

#[derive(Clone, Debug)]
pub struct FaceReport {
    pub face: FaceDescription,
    /// `e` rescaled to norm one.
    pub e: DVector<f64>,
    pub te_minus_e: DVector<f64>,
    pub checks: FaceChecks,
}

fn sample_member(r: &mut impl Rng, face: &FaceDescription, n: usize) -> DVector<f64> {
    let mut x = DVector::zeros(n);
    for w in &face.witnesses {
        if r.random_bool(0.7) {
            x += w * r.random_range(0.0..3.0);
        }
    }
    x
}

/// Checks the conclusions of the invariant-face theorem for `T >= 0` with
/// `||T|| = 1` and `Te >= e`, `Te != e`.
pub fn verify_face_theorem(
    t: &DMatrix<f64>,
    e: &DVector<f64>,
    space: &MonotoneSpace,
    tol: &Tolerances,
) -> Result<FaceReport> {
    let n = space.n;
    if t.nrows() != t.ncols() {
        return Err(Error::InvalidInput("operator must be square".into()));
    }
    check_dim(n, t.nrows())?;
    check_dim(n, e.len())?;
    let norm = &space.norm;
    check_nonnegative(t, tol.membership_tol)?;
    check_norm_one(t, norm)?;
    if e.iter().any(|&v| v < 0.0) || e.iter().all(|&v| v == 0.0) {
        return Err(Error::hypothesis(
            "e must be positive (non-negative and non-zero)",
            e.iter().copied().collect(),
        ));
    }
    let e = norm.normalize(e);
    let growth = check_te_ge_e(t, &e, tol.membership_tol)?;
    if growth <= tol.membership_tol {
        return Err(Error::hypothesis(
            "Te = e; the face theorem needs Te > e",
            e.iter().copied().collect(),
        ));
    }

    let face = compute_face(norm, &e, tol)?;
    let mt = tol.membership_tol.max(1e-9);
    let te_minus_e = t * &e - &e;
    let te_minus_e_in_face = face.contains(&te_minus_e, mt)?;
    let e_outside = !face.contains(&e, mt)?;

    let mut invariant = true;
    for w in &face.witnesses {
        invariant &= face.contains(&(t * w), mt)?;
    }

    let mut r = random::rng(SAMPLE_SEED);
    let mut additive = true;
    let mut separation_min = f64::INFINITY;
    let mut alpha_bound_min = f64::INFINITY;
    let mut alpha_bound_ok = true;
    let samples = if face.trivial { 0 } else { SAMPLE_PAIRS };
    for _ in 0..samples {
        let x = sample_member(&mut r, &face, n);
        let y = sample_member(&mut r, &face, n);
        additive &= face.contains(&(&x + &y), mt)?;
        invariant &= face.contains(&(t * &x), mt)?;
        let d = &x - &y;
        let sep = norm.norm(&(&e - &d));
        separation_min = separation_min.min(sep);

        let p = d.map(|v| v.max(0.0));
        let mut a = 1.0;
        for _ in 0..80 {
            if norm.norm(&(&e + &p * a)) <= 1.0 + a / 3.0 {
                break;
            }
            a *= 0.5;
        }
        let bound = (1.0 + a - norm.norm(&(&e + &p * a))) / a;
        alpha_bound_min = alpha_bound_min.min(bound);
        alpha_bound_ok &= bound >= 2.0 / 3.0 - 1e-9 && sep >= bound - 1e-9;
    }
    let separation_ok = separation_min >= 1.0 / 3.0 - 1e-6;
    Ok(FaceReport {
        face,
        e,
        te_minus_e,
        checks: FaceChecks {
            te_minus_e_in_face,
            invariant,
            additive,
            e_outside,
            separation_min,
            separation_ok,
            alpha_bound_min,
            alpha_bound_ok,
            samples,
        },
    })
}
