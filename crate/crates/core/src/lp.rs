//! Small dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Problems are `min c.x` subject to linear rows and `x >= 0`. Sizes here are
//! tiny (tens of variables), so a full tableau is the simplest correct choice.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

impl LinearProgram {
    /// Minimize `objective . x` over `x >= 0`.
    pub fn minimize(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constraint(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.objective.len(), "constraint width");
        self.rows.push((coeffs, rel, rhs));
        self
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        let n = self.objective.len();
        let m = self.rows.len();

        // Column layout: [structural n | slack/surplus per inequality | artificial per row needing one | rhs]
        let n_slack = self
            .rows
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Eq)
            .count();
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = self.rows.clone();
        for (coeffs, rel, rhs) in rows.iter_mut() {
            if *rhs < 0.0 {
                coeffs.iter_mut().for_each(|c| *c = -*c);
                *rhs = -*rhs;
                *rel = match *rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let n_art = rows.iter().filter(|(_, rel, _)| *rel != Relation::Le).count();
        let width = n + n_slack + n_art;
        let mut t = Tableau {
            a: vec![vec![0.0; width + 1]; m],
            obj: vec![0.0; width + 1],
            basis: vec![0; m],
            width,
        };
        let mut slack = n;
        let mut art = n + n_slack;
        let art_start = art;
        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            t.a[i][..n].copy_from_slice(coeffs);
            t.a[i][width] = *rhs;
            match rel {
                Relation::Le => {
                    t.a[i][slack] = 1.0;
                    t.basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    t.a[i][slack] = -1.0;
                    slack += 1;
                    t.a[i][art] = 1.0;
                    t.basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    t.a[i][art] = 1.0;
                    t.basis[i] = art;
                    art += 1;
                }
            }
        }

        let scale = rows
            .iter()
            .map(|(c, _, r)| c.iter().fold(r.abs(), |m, v| m.max(v.abs())))
            .fold(1.0, f64::max);
        let eps = PIVOT_EPS * scale;

        // Phase 1: minimize the sum of artificials.
        if n_art > 0 {
            for i in 0..m {
                if t.basis[i] >= art_start {
                    for j in 0..=width {
                        if j < art_start || j == width {
                            t.obj[j] -= t.a[i][j];
                        }
                    }
                }
            }
            t.run(|_| true, eps)?;
            if -t.obj[width] > 1e-9 * scale {
                return Ok(LpOutcome::Infeasible);
            }
            // Drive remaining artificials out of the basis.
            let mut i = 0;
            while i < t.a.len() {
                if t.basis[i] >= art_start {
                    match (0..art_start).find(|&j| t.a[i][j].abs() > eps) {
                        Some(j) => t.pivot(i, j),
                        None => {
                            t.a.remove(i);
                            t.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }

        // Phase 2.
        t.obj = vec![0.0; width + 1];
        t.obj[..n].copy_from_slice(&self.objective);
        for i in 0..t.a.len() {
            let cb = t.obj[t.basis[i]];
            if cb != 0.0 {
                for j in 0..=width {
                    t.obj[j] -= cb * t.a[i][j];
                }
            }
        }
        if !t.run(|j| j < art_start, eps)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![0.0; n];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < n {
                x[b] = t.a[i][width];
            }
        }
        let objective = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpOutcome::Optimal { x, objective })
    }
}

struct Tableau {
    a: Vec<Vec<f64>>,
    /// Reduced costs; the last entry holds minus the objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pr) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pr;
                    }
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pr) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
        }
        self.basis[r] = c;
    }

    /// Returns `false` when the objective is unbounded below.
    fn run(&mut self, allowed: impl Fn(usize) -> bool, eps: f64) -> Result<bool> {
        let w = self.width;
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index improving column ...
            let Some(c) = (0..w).find(|&j| allowed(j) && self.obj[j] < -eps) else {
                return Ok(true);
            };
            // ... and lowest-index basic variable among minimum-ratio rows.
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.a.len() {
                let aic = self.a[i][c];
                if aic > eps {
                    let ratio = self.a[i][w] / aic;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - eps
                                || (ratio <= br + eps && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(Error::Lp(format!("no convergence within {MAX_PIVOTS} pivots")))
    }
}
