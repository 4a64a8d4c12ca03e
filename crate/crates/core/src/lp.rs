//! Dense two-phase simplex for small linear programs.
//!
//! Minimizes `c^T x` over `x >= 0` subject to rows of the form
//! `a^T x (<=|=|>=) b`. Bland's rule is used for pivot selection, so the
//! method terminates on degenerate problems. Intended for programs with a few
//! dozen variables and constraints.

use crate::error::{Error, Result};

const EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self { vars: objective.len(), objective, rows: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.vars, "constraint width");
        self.rows.push((coeffs, rel, rhs));
        self
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).solve(self)
    }
}

struct Tableau {
    m: usize,
    width: usize,
    // m constraint rows followed by the objective row; last column is the rhs
    t: Vec<f64>,
    basis: Vec<usize>,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.vars;
        let slacks = lp.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let mut norm: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
        for (a, rel, b) in &lp.rows {
            if *b < 0.0 {
                let flipped = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                norm.push((a.iter().map(|v| -v).collect(), flipped, -b));
            } else {
                norm.push((a.clone(), *rel, *b));
            }
        }
        let artificials = norm.iter().filter(|r| r.1 != Relation::Le).count();
        let artificial_start = n + slacks;
        let width = n + slacks + artificials + 1;
        let mut t = vec![0.0; (m + 1) * width];
        let mut basis = vec![0; m];
        let (mut s_col, mut a_col) = (n, artificial_start);
        for (i, (a, rel, b)) in norm.iter().enumerate() {
            let row = &mut t[i * width..(i + 1) * width];
            row[..n].copy_from_slice(a);
            row[width - 1] = *b;
            match rel {
                Relation::Le => {
                    row[s_col] = 1.0;
                    basis[i] = s_col;
                    s_col += 1;
                }
                Relation::Ge => {
                    row[s_col] = -1.0;
                    s_col += 1;
                    row[a_col] = 1.0;
                    basis[i] = a_col;
                    a_col += 1;
                }
                Relation::Eq => {
                    row[a_col] = 1.0;
                    basis[i] = a_col;
                    a_col += 1;
                }
            }
        }
        Self { m, width, t, basis, artificial_start }
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for k in 0..w {
            self.t[r * w + k] /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f != 0.0 {
                for k in 0..w {
                    self.t[i * w + k] -= f * pivot_row[k];
                }
            }
        }
        self.basis[r] = c;
    }

    /// Load `cost` (indexed by column) into the objective row as reduced costs.
    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.width;
        let obj = self.m * w;
        self.t[obj..obj + w].fill(0.0);
        for (c, &v) in cost.iter().enumerate() {
            self.t[obj + c] = v;
        }
        for i in 0..self.m {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for k in 0..w {
                    self.t[obj + k] -= cb * self.t[i * w + k];
                }
            }
        }
    }

    /// Bland's rule iterations over columns `< allowed`. `Ok(false)` on unbounded.
    fn run(&mut self, allowed: usize) -> Result<bool> {
        let limit = 50_000;
        for _ in 0..limit {
            let entering = (0..allowed).find(|&c| self.at(self.m, c) < -EPS);
            let Some(c) = entering else { return Ok(true) };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > EPS {
                    let ratio = self.at(i, self.width - 1) / a;
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => ratio < r - EPS || (ratio <= r + EPS && self.basis[i] < b),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = best else { return Ok(false) };
            self.pivot(r, c);
        }
        Err(Error::LpFailure("simplex iteration limit reached".into()))
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        let total = self.width - 1;
        if self.artificial_start < total {
            let mut phase1 = vec![0.0; total];
            phase1[self.artificial_start..].fill(1.0);
            self.set_objective(&phase1);
            self.run(total)?;
            let infeasibility = -self.at(self.m, self.width - 1);
            if infeasibility > 1e-7 {
                return Err(Error::LpFailure(format!("infeasible (phase one residual {infeasibility:.3e})")));
            }
            // drive remaining artificials out of the basis
            for i in 0..self.m {
                if self.basis[i] >= self.artificial_start {
                    if let Some(c) = (0..self.artificial_start).find(|&c| self.at(i, c).abs() > EPS) {
                        self.pivot(i, c);
                    }
                }
            }
        }
        self.set_objective(&lp.objective);
        if !self.run(self.artificial_start)? {
            return Err(Error::LpFailure("unbounded objective".into()));
        }
        let mut x = vec![0.0; lp.vars];
        for i in 0..self.m {
            if self.basis[i] < lp.vars {
                x[self.basis[i]] = self.at(i, self.width - 1);
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(vec![-3.0, -5.0]);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 4.0).constrain(vec![0.0, 2.0], Relation::Le, 12.0).constrain(
            vec![3.0, 2.0],
            Relation::Le,
            18.0,
        );
        let s = lp.solve().unwrap();
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y, x + y = 3, x >= 1, y >= 0.5 -> (2.5, 0.5), 3.5
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 3.0).constrain(vec![1.0, 0.0], Relation::Ge, 1.0).constrain(
            vec![0.0, 1.0],
            Relation::Ge,
            0.5,
        );
        let s = lp.solve().unwrap();
        assert!((s.objective - 3.5).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0).constrain(vec![1.0], Relation::Ge, 2.0);
        assert!(matches!(lp.solve(), Err(Error::LpFailure(_))));
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.constrain(vec![-1.0], Relation::Le, 1.0);
        assert!(matches!(lp.solve(), Err(Error::LpFailure(_))));
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // min x, -x <= -2 -> x = 2
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.constrain(vec![-1.0], Relation::Le, -2.0);
        assert!((lp.solve().unwrap().objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example for the largest-coefficient rule (Beale).
        let mut lp = LinearProgram::new(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.constrain(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .constrain(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .constrain(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective + 0.05).abs() < 1e-9);
    }
}
