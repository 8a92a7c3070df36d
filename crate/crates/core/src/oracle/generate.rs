//! Seeded generators of instances satisfying each family's hypotheses.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contraction::NORM_ONE_TOL;
use crate::error::{Error, Result};
use crate::l1::{find_certificate_index, L1Matrix, INTERIOR_RADIUS};
use crate::linalg::CMatrix;
use crate::matrix_order::SuperOp;
use crate::norm::NormTag;
use crate::random;

/// Retries before a family gives up.
pub const MAX_ATTEMPTS: usize = 32;
/// Largest `||R||` drawn for the perturbation family.
pub const MAX_PERTURBATION: f64 = 0.199;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    NonnegOrthant,
    L1kreinViaPerturbation,
    TeContraction,
    CommutingPair,
    PositiveMapKraus,
    PositiveMapTransposeComposed,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::NonnegOrthant,
        Family::L1kreinViaPerturbation,
        Family::TeContraction,
        Family::CommutingPair,
        Family::PositiveMapKraus,
        Family::PositiveMapTransposeComposed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::NonnegOrthant => "nonneg_orthant",
            Family::L1kreinViaPerturbation => "l1krein_via_perturbation",
            Family::TeContraction => "te_contraction",
            Family::CommutingPair => "commuting_pair",
            Family::PositiveMapKraus => "positive_map_kraus",
            Family::PositiveMapTransposeComposed => "positive_map_transpose_composed",
        }
    }

    /// Allowed `n` (inclusive).
    pub fn dim_range(self) -> (usize, usize) {
        match self {
            Family::NonnegOrthant | Family::L1kreinViaPerturbation => (1, 64),
            Family::TeContraction => (2, 12),
            Family::CommutingPair => (1, 32),
            Family::PositiveMapKraus | Family::PositiveMapTransposeComposed => (1, 8),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub enum Instance {
    /// Entrywise non-negative `t`.
    NonnegOrthant { t: DMatrix<f64> },
    /// `t = S + r` with `S = e_1 e_1^T` and `||r||_1 < 1/5`.
    L1Krein { t: DMatrix<f64>, r: DMatrix<f64> },
    /// `t >= 0`, `||t||_inf = 1`, `te >= e`, `te != e`.
    TeContraction { t: DMatrix<f64>, e: DVector<f64> },
    /// `a` and `b = a^2 + a`.
    CommutingPair { a: DMatrix<f64>, b: DMatrix<f64> },
    /// A positive map on `M_n`.
    PositiveMap { phi: SuperOp },
}

impl Instance {
    /// The real matrix of the instance, if it has one.
    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            Instance::NonnegOrthant { t }
            | Instance::L1Krein { t, .. }
            | Instance::TeContraction { t, .. } => Some(t),
            Instance::CommutingPair { a, .. } => Some(a),
            Instance::PositiveMap { .. } => None,
        }
    }
}

fn fail(attempts: usize, predicate: &str) -> Error {
    Error::GenerationFailed {
        attempts,
        predicate: predicate.to_string(),
    }
}

/// Deterministic in `spec`. Every instance is re-checked against its
/// family's preconditions before it is returned.
pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    let (lo, hi) = spec.family.dim_range();
    if spec.n < lo || spec.n > hi {
        return Err(Error::InvalidInput(format!(
            "{} needs {lo} <= n <= {hi}, got {}",
            spec.family, spec.n
        )));
    }
    let mut r = random::rng(spec.seed);
    let mut last = "";
    for _ in 0..MAX_ATTEMPTS {
        let (candidate, check) = match spec.family {
            Family::NonnegOrthant => draw_nonneg(&mut r, spec.n),
            Family::L1kreinViaPerturbation => draw_l1krein(&mut r, spec.n),
            Family::TeContraction => draw_te(&mut r, spec.n),
            Family::CommutingPair => draw_commuting(&mut r, spec.n),
            Family::PositiveMapKraus => draw_kraus(&mut r, spec.n, false)?,
            Family::PositiveMapTransposeComposed => draw_kraus(&mut r, spec.n, true)?,
        };
        match check {
            None => return Ok(candidate),
            Some(p) => last = p,
        }
    }
    Err(fail(MAX_ATTEMPTS, last))
}

type Draw = (Instance, Option<&'static str>);

fn draw_nonneg(r: &mut impl Rng, n: usize) -> Draw {
    let t = DMatrix::from_fn(n, n, |_, _| {
        if r.random_bool(0.2) {
            0.0
        } else {
            r.random_range(0.0..1.0)
        }
    });
    let bad = t.iter().any(|&v| v < 0.0).then_some("entrywise non-negative");
    (Instance::NonnegOrthant { t }, bad)
}

fn draw_l1krein(r: &mut impl Rng, n: usize) -> Draw {
    let radius = if r.random_bool(0.25) {
        MAX_PERTURBATION
    } else {
        r.random_range(0.0..MAX_PERTURBATION)
    };
    let raw = random::normal_matrix(r, n, n);
    let norm = raw
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let rm = if norm > 0.0 { raw * (radius / norm) } else { raw };
    let mut t = rm.clone();
    t[(0, 0)] += 1.0;
    let bad = match (L1Matrix::new(rm.clone()), L1Matrix::new(t.clone())) {
        (Ok(rl), Ok(tl)) => {
            if rl.norm() >= INTERIOR_RADIUS {
                Some("perturbation norm below 1/5")
            } else if find_certificate_index(&tl, 0.0) != Some(0) {
                Some("column criterion at the first index")
            } else {
                None
            }
        }
        _ => Some("finite square matrix"),
    };
    (Instance::L1Krein { t, r: rm }, bad)
}

fn stochastic_row(r: &mut impl Rng, support: &[usize], n: usize) -> DVector<f64> {
    let mut row = DVector::zeros(n);
    for &j in support {
        row[j] = r.random_range(0.05..1.0);
    }
    let s = row.sum();
    row / s
}

fn draw_te(r: &mut impl Rng, n: usize) -> Draw {
    let p = r.random_range(1..n);
    let mut peak: Vec<usize> = sample(r, n, p).into_vec();
    peak.sort_unstable();
    let all: Vec<usize> = (0..n).collect();
    let e = DVector::from_fn(n, |i, _| {
        if peak.contains(&i) {
            1.0
        } else {
            r.random_range(0.2..0.9)
        }
    });
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        let row = if peak.contains(&i) {
            stochastic_row(r, &peak, n)
        } else {
            let beta = e[i] + (1.0 - e[i]) * r.random_range(0.2..1.0);
            stochastic_row(r, &peak, n) * beta + stochastic_row(r, &all, n) * (1.0 - beta)
        };
        t.set_row(i, &row.transpose());
    }
    let growth = &t * &e - &e;
    let bad = if t.iter().any(|&v| v < 0.0) {
        Some("entrywise non-negative")
    } else if (NormTag::Linf.operator_norm(&t) - 1.0).abs() > 1e-12 {
        Some("operator norm one")
    } else if growth.min() < -1e-12 {
        Some("Te >= e")
    } else if growth.max() <= NORM_ONE_TOL {
        Some("Te != e")
    } else {
        None
    };
    (Instance::TeContraction { t, e }, bad)
}

fn draw_commuting(r: &mut impl Rng, n: usize) -> Draw {
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| r.random_range(0.1..1.0));
    let b = &a * &a + &a;
    let comm = (&a * &b - &b * &a).norm();
    let bad = (comm > 1e-12 * (a.norm() * b.norm()).max(1.0)).then_some("commutator below 1e-12");
    (Instance::CommutingPair { a, b }, bad)
}

fn draw_kraus(r: &mut impl Rng, n: usize, transpose: bool) -> Result<Draw> {
    let count = r.random_range(1..=n.max(2));
    let scale = 1.0 / ((n * count) as f64).sqrt();
    let ks: Vec<CMatrix> = (0..count)
        .map(|_| random::complex_normal_matrix(r, n, n).map(|z| z * scale))
        .collect();
    let cp = SuperOp::from_kraus(ks)?;
    let phi = if transpose {
        SuperOp::transpose_map(n).compose(&cp)?
    } else {
        cp
    };
    Ok((Instance::PositiveMap { phi }, None))
}
