//! Seeded randomness. Every random draw in the crate flows from an explicit
//! `u64` seed through [`rng`], so runs are reproducible bit for bit.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under master seed `master`. Independent of how
/// trials are scheduled.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn normal(r: &mut impl Rng) -> f64 {
    r.sample(StandardNormal)
}

pub fn normal_vector(r: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| normal(r))
}

pub fn uniform_vector(r: &mut impl Rng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| r.random_range(lo..hi))
}

pub fn normal_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| normal(r))
}

pub fn complex_normal_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| Complex::new(normal(r), normal(r)))
}

pub fn complex_normal_vector(r: &mut impl Rng, n: usize) -> DVector<Complex<f64>> {
    DVector::from_fn(n, |_, _| Complex::new(normal(r), normal(r)))
}

/// Random Hermitian matrix (GUE-like, unnormalized).
pub fn hermitian(r: &mut impl Rng, n: usize) -> CMatrix {
    let g = complex_normal_matrix(r, n, n);
    (&g + g.adjoint()).map(|z| z * 0.5)
}

/// Random positive semidefinite Hermitian matrix of rank at most `rank`.
pub fn psd(r: &mut impl Rng, n: usize, rank: usize) -> CMatrix {
    let g = complex_normal_matrix(r, n, rank.max(1));
    &g * g.adjoint()
}
