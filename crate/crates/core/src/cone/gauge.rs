//! The equivalent norm whose unit ball is `W = (C0 - e) ∩ (e - C0)`, where
//! `C0` is the cone spanned by `e + B`. In this norm `e` becomes a unit that
//! dominates the ball.

use nalgebra::DVector;
use serde::Serialize;

use super::shifted;
use crate::error::{check_dim, Error, Result};
use crate::norm::NormTag;

const BISECT_ITERS: usize = 200;

#[derive(Clone, Debug)]
pub struct GaugeNorm {
    e: DVector<f64>,
    norm: NormTag,
    e_norm: f64,
}

/// `e + x = a1 (e + x1)` and `e - x = a2 (e + x2)` with `||x1||, ||x2|| <= 1`.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub alpha1: f64,
    pub alpha2: f64,
    pub x1: DVector<f64>,
    pub x2: DVector<f64>,
}

impl GaugeNorm {
    pub fn new(e: DVector<f64>, norm: NormTag) -> Result<Self> {
        norm.validate(e.len())?;
        let e_norm = norm.norm(&e);
        if e_norm <= 1.0 {
            return Err(Error::NormTooSmall { norm: e_norm });
        }
        Ok(GaugeNorm { e, norm, e_norm })
    }

    pub fn e(&self) -> &DVector<f64> {
        &self.e
    }

    /// Upper bound on `alpha1 + alpha2` for points of `W`:
    /// `max(2, 2||e|| / (||e|| - 1))`.
    pub fn alpha_bound(&self) -> f64 {
        f64::max(2.0, 2.0 * self.e_norm / (self.e_norm - 1.0))
    }

    /// Constants `(c, C)` with `c ||x|| <= gauge(x) <= C ||x||`.
    pub fn sandwich(&self) -> (f64, f64) {
        let r = self.alpha_bound() * (self.e_norm + 1.0) + self.e_norm;
        (1.0 / r, 1.0)
    }

    /// Smallest `t >= 0` with `y + t e` in `C0`; at most `||y||`.
    fn shift_needed(&self, y: &DVector<f64>) -> f64 {
        let member = |t: f64| {
            let z = y + &self.e * t;
            shifted::contains(&z, &self.e, &self.norm, 1e-14 * self.norm.norm(&z))
        };
        if member(0.0) {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, self.norm.norm(y));
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if member(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Minkowski gauge of `W` at `x`.
    pub fn gauge(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.e.len(), x.len())?;
        if self.norm.norm(x) == 0.0 {
            return Ok(0.0);
        }
        // x / t in W  iff  x + t e in C0 and t e - x in C0.
        Ok(self.shift_needed(x).max(self.shift_needed(&-x)))
    }

    /// Coefficients of a point of `W` (gauge at most one, up to `tol`).
    pub fn decompose(&self, x: &DVector<f64>, tol: f64) -> Result<Decomposition> {
        check_dim(self.e.len(), x.len())?;
        let part = |y: DVector<f64>| -> Result<(f64, DVector<f64>)> {
            let scale = self.norm.norm(&y).max(1.0);
            // Smallest slack that works, so boundary points are not pushed
            // further out than roundoff requires.
            let (lo, _) = [0.0, 1e-15, 1e-13, 1e-11, 1e-9]
                .into_iter()
                .filter(|&s| s < tol)
                .chain([tol])
                .find_map(|s| shifted::alpha_range(&y, &self.e, &self.norm, s * scale))
                .ok_or_else(|| {
                    Error::InvalidInput("point lies outside the gauge unit ball".into())
                })?;
            let a = lo.max(f64::MIN_POSITIVE);
            Ok((a, &y / a - &self.e))
        };
        let (alpha1, x1) = part(&self.e + x)?;
        let (alpha2, x2) = part(&self.e - x)?;
        Ok(Decomposition {
            alpha1,
            alpha2,
            x1,
            x2,
        })
    }
}

/// Gauge of `W` at `x` for the apex `e` (which must have norm above one).
pub fn w_gauge(e: &DVector<f64>, norm: &NormTag, x: &DVector<f64>) -> Result<f64> {
    GaugeNorm::new(e.clone(), norm.clone())?.gauge(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use nalgebra::dvector;

    #[test]
    fn unit_and_zero() {
        let e = dvector![2.0, 0.5];
        for norm in [NormTag::Linf, NormTag::L1, NormTag::L2] {
            let g = GaugeNorm::new(e.clone(), norm.clone()).unwrap();
            assert!((g.gauge(&e).unwrap() - 1.0).abs() < 1e-9, "{norm:?}");
            assert_eq!(g.gauge(&DVector::zeros(2)).unwrap(), 0.0);
        }
    }

    #[test]
    fn small_apex_rejected() {
        assert!(matches!(
            w_gauge(&dvector![1.0, 0.0], &NormTag::Linf, &dvector![1.0, 1.0]),
            Err(Error::NormTooSmall { .. })
        ));
    }

    #[test]
    fn boundary_coefficients_respect_bound() {
        let e = dvector![2.0, 0.0];
        let g = GaugeNorm::new(e, NormTag::Linf).unwrap();
        assert_eq!(g.alpha_bound(), 4.0);
        let mut r = random::rng(11);
        for _ in 0..200 {
            let v = random::normal_vector(&mut r, 2);
            let x = &v / g.gauge(&v).unwrap();
            let d = g.decompose(&x, 1e-9).unwrap();
            assert!(d.alpha1 + d.alpha2 <= 4.0 + 1e-6, "{} {}", d.alpha1, d.alpha2);
            assert!(NormTag::Linf.norm(&d.x1) <= 1.0 + 1e-6);
            assert!(NormTag::Linf.norm(&d.x2) <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn sandwich_holds() {
        let e = dvector![1.5, -0.3, 0.2];
        let g = GaugeNorm::new(e, NormTag::L1).unwrap();
        let (c, upper) = g.sandwich();
        let mut r = random::rng(5);
        for _ in 0..200 {
            let x = random::normal_vector(&mut r, 3);
            let n = NormTag::L1.norm(&x);
            let v = g.gauge(&x).unwrap();
            assert!(c * n <= v * (1.0 + 1e-9) && v <= upper * n * (1.0 + 1e-9));
        }
    }
}
