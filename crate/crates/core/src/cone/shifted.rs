//! The cone spanned by a shifted ball, `{a (e + x) : a >= 0, ||x|| <= 1}`.
//!
//! `y` lies in it iff `g(a) = ||y - a e|| - a <= 0` for some `a >= 0`. `g` is
//! convex; for the polyhedral norms it is piecewise linear and its minimum
//! sits at a breakpoint, so it is found exactly by enumeration.

use nalgebra::DVector;

use crate::norm::NormTag;

const GOLDEN_ITERS: usize = 200;

fn gap(y: &DVector<f64>, e: &DVector<f64>, norm: &NormTag, a: f64) -> f64 {
    norm.norm(&(y - e * a)) - a
}

/// Minimizer and minimum of `g(a) = ||y - a e|| - a` over `a >= 0`. The
/// minimum is `-inf` when `||e|| < 1` (the cone is then the whole space).
pub fn min_gap(y: &DVector<f64>, e: &DVector<f64>, norm: &NormTag) -> (f64, f64) {
    let e_norm = norm.norm(e);
    if e_norm < 1.0 - 1e-15 {
        return (f64::INFINITY, f64::NEG_INFINITY);
    }
    match norm {
        NormTag::L2 => min_gap_l2(y, e, e_norm),
        _ => {
            let mut best = (0.0, gap(y, e, norm, 0.0));
            for a in breakpoints(y, e, norm) {
                let g = gap(y, e, norm, a);
                if g < best.1 {
                    best = (a, g);
                }
            }
            best
        }
    }
}

/// Breakpoints of the piecewise-linear `g`: zeros of each term and, for the
/// sup norms, crossings between pairs of terms.
fn breakpoints(y: &DVector<f64>, e: &DVector<f64>, norm: &NormTag) -> Vec<f64> {
    let n = y.len();
    let w = |i: usize| match norm {
        NormTag::WeightedSup { weights } => weights[i],
        _ => 1.0,
    };
    let mut out = Vec::new();
    let mut push = |num: f64, den: f64| {
        if den != 0.0 {
            let a = num / den;
            if a > 0.0 && a.is_finite() {
                out.push(a);
            }
        }
    };
    for i in 0..n {
        push(y[i], e[i]);
    }
    if matches!(norm, NormTag::Linf | NormTag::WeightedSup { .. }) {
        for i in 0..n {
            for j in (i + 1)..n {
                let (yi, yj) = (w(i) * y[i], w(j) * y[j]);
                let (ei, ej) = (w(i) * e[i], w(j) * e[j]);
                push(yi - yj, ei - ej);
                push(yi + yj, ei + ej);
            }
        }
    }
    out
}

fn min_gap_l2(y: &DVector<f64>, e: &DVector<f64>, e_norm: f64) -> (f64, f64) {
    let norm = NormTag::L2;
    let y_norm = y.norm();
    let near_unit = (e_norm - 1.0).abs() <= 1e-12;
    let hi = if near_unit {
        1e8 * (y_norm + 1.0)
    } else {
        2.0 * y_norm / (e_norm - 1.0)
    };
    let (a, g) = golden_section(|a| gap(y, e, &norm, a), 0.0, hi);
    let at_zero = gap(y, e, &norm, 0.0);
    let mut best = if at_zero <= g { (0.0, at_zero) } else { (a, g) };
    if near_unit {
        // lim_{a -> inf} ||y - a e|| - a = -<y, e> for a unit e.
        let limit = -y.dot(e) / e_norm;
        if limit < best.1 {
            best = (f64::INFINITY, limit);
        }
    }
    best
}

pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    let a = 0.5 * (lo + hi);
    (a, f(a))
}

/// Membership with slack: `||y - a e|| <= a + slack` for some `a >= 0`.
pub fn contains(y: &DVector<f64>, e: &DVector<f64>, norm: &NormTag, slack: f64) -> bool {
    if norm.norm(y) == 0.0 {
        return true;
    }
    min_gap(y, e, norm).1 <= slack
}

/// The interval of `a >= 0` with `||y - a e|| <= a + slack`, if non-empty.
/// The upper end is `+inf` when `||e|| <= 1`.
pub fn alpha_range(
    y: &DVector<f64>,
    e: &DVector<f64>,
    norm: &NormTag,
    slack: f64,
) -> Option<(f64, f64)> {
    let (a_star, g_star) = min_gap(y, e, norm);
    if g_star > slack {
        return None;
    }
    let g = |a: f64| gap(y, e, norm, a) - slack;
    let e_norm = norm.norm(e);
    if !a_star.is_finite() {
        // Minimum approached at infinity; the feasible set is a ray.
        let lo = if g(0.0) <= 0.0 {
            0.0
        } else {
            let mut hi = 1.0;
            while g(hi) > 0.0 && hi < 1e300 {
                hi *= 2.0;
            }
            bisect_root(&g, 0.0, hi)
        };
        return Some((lo, f64::INFINITY));
    }
    let lo = if g(0.0) <= 0.0 {
        0.0
    } else {
        bisect_root(&g, 0.0, a_star)
    };
    let hi = if e_norm <= 1.0 + 1e-15 {
        f64::INFINITY
    } else {
        let bound = a_star.max((norm.norm(y) + slack.max(0.0)) / (e_norm - 1.0)) * 1.0001 + 1e-300;
        bisect_root(&|a| -g(a), a_star, bound)
    };
    Some((lo, hi))
}

/// Root of `f` on `[lo, hi]` given `f(lo) > 0 >= f(hi)` (or the reverse sign
/// pattern when called with `-f`).
fn bisect_root(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let positive_at_lo = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == positive_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if positive_at_lo {
        hi
    } else {
        lo
    }
}
