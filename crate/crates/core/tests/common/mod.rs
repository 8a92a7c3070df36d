//! Helpers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Lawson-Hanson non-negative least squares: `min ||a c - b||` over `c >= 0`.
/// Returns `(c, residual)`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let m = a.ncols();
    let mut x = DVector::<f64>::zeros(m);
    let mut passive = vec![false; m];
    let scale = a.amax().max(1.0) * b.amax().max(1.0);
    for _ in 0..3 * m + 10 {
        let w = a.tr_mul(&(b - a * &x));
        let pick = (0..m)
            .filter(|&j| !passive[j] && w[j] > 1e-13 * scale)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = pick else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..m).filter(|&i| passive[i]).collect();
            let sub = a.select_columns(&idx);
            let z = sub.svd(true, true).solve(b, 1e-14).expect("svd solve");
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &i) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - z[k]));
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z[k] - x[i]);
                if x[i] <= 1e-15 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let r = (a * &x - b).norm();
    (x, r)
}

/// Sign vectors of length `n`.
pub fn sign_vectors(n: usize) -> Vec<DVector<f64>> {
    (0..1usize << n)
        .map(|mask| DVector::from_fn(n, |i, _| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }))
        .collect()
}

pub fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Generators of the cone spanned by the orthant and `e - B`, listed from
/// the extreme points of the sup or `l1` ball.
pub fn te_generators(e: &DVector<f64>, l1: bool) -> DMatrix<f64> {
    let n = e.len();
    let mut cols: Vec<DVector<f64>> = (0..n).map(|i| unit(n, i)).collect();
    if l1 {
        for i in 0..n {
            cols.push(e - unit(n, i));
            cols.push(e + unit(n, i));
        }
    } else {
        cols.extend(sign_vectors(n).into_iter().map(|s| e - s));
    }
    DMatrix::from_columns(&cols)
}

/// Membership of `x` in the conic hull of the columns of `g`, with the
/// relative residual.
pub fn in_hull(g: &DMatrix<f64>, x: &DVector<f64>) -> (bool, f64) {
    let (_, r) = nnls(g, x);
    let rel = r / x.norm().max(1e-300);
    (rel <= 1e-8, rel)
}
