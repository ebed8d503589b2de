//! Dense two-phase simplex for small standard-form linear programs:
//! minimize `c·x` subject to `A x = b`, `x ≥ 0`.
//!
//! Bland's rule is used for both the entering and leaving variable, so the
//! method terminates on degenerate problems (raffle LPs are highly degenerate).

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    /// `rows × (cols + 1)`, the last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (v, pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    fn reduced_costs(&self, cost: &[f64], allowed: usize) -> Vec<f64> {
        (0..allowed)
            .map(|j| {
                let z: f64 = self
                    .basis
                    .iter()
                    .zip(&self.t)
                    .map(|(&b, row)| cost[b] * row[j])
                    .sum();
                cost[j] - z
            })
            .collect()
    }

    /// Runs simplex iterations over columns `0..allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        for _ in 0..MAX_ITERATIONS {
            let rc = self.reduced_costs(cost, allowed);
            let Some(enter) = (0..allowed).find(|&j| rc[j] < -PIVOT_EPS) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.t.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_EPS {
                    let ratio = row[self.cols] / a;
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - PIVOT_EPS
                                || (ratio <= best + PIVOT_EPS && self.basis[r] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Err(Error::Lp("objective unbounded below".into())),
            }
        }
        Err(Error::Lp(format!(
            "no convergence in {MAX_ITERATIONS} iterations"
        )))
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.t)
            .map(|(&b, row)| cost[b] * row[self.cols])
            .sum()
    }
}

/// Solves `min c·x` subject to `a x = b`, `x ≥ 0`.
///
/// `feas_tol` bounds the phase-one residual accepted as feasible.
pub fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64], feas_tol: f64) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Lp("inconsistent dimensions".into()));
    }
    // Columns: n structural, then m artificial.
    let cols = n + m;
    let mut t = Vec::with_capacity(m);
    for (r, (row, &rhs)) in a.iter().zip(b).enumerate() {
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        let mut line = vec![0.0; cols + 1];
        for (v, x) in line.iter_mut().zip(row) {
            *v = sign * x;
        }
        line[n + r] = 1.0;
        line[cols] = sign * rhs;
        t.push(line);
    }
    let mut tab = Tableau {
        t,
        basis: (n..cols).collect(),
        cols,
    };

    let mut phase_one = vec![0.0; cols];
    phase_one[n..].iter_mut().for_each(|v| *v = 1.0);
    tab.optimize(&phase_one, cols)?;
    let infeasibility = tab.objective(&phase_one);
    if infeasibility > feas_tol {
        return Err(Error::Lp(format!(
            "infeasible (phase-one residual {infeasibility:e})"
        )));
    }

    // Drive artificials out of the basis; rows where that is impossible are
    // redundant and dropped.
    let mut r = 0;
    while r < tab.t.len() {
        if tab.basis[r] >= n {
            match (0..n).find(|&j| tab.t[r][j].abs() > PIVOT_EPS) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.t.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut cost = c.to_vec();
    cost.resize(cols, 0.0);
    tab.optimize(&cost, n)?;

    let mut x = vec![0.0; n];
    for (&bv, row) in tab.basis.iter().zip(&tab.t) {
        x[bv] = row[cols].max(0.0);
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_program() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let c = [-1.0, -1.0, 0.0, 0.0];
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let sol = minimize(&c, &a, &[4.0, 6.0], 1e-12).unwrap();
        assert!((sol.x[0] - 1.6).abs() < 1e-12);
        assert!((sol.x[1] - 1.2).abs() < 1e-12);
        assert!((sol.objective + 2.8).abs() < 1e-12);
    }

    #[test]
    fn infeasible_program() {
        // x + y = 1 and x + y = 2
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(minimize(&[0.0, 0.0], &a, &[1.0, 2.0], 1e-12).is_err());
    }

    #[test]
    fn unbounded_program() {
        // min -x s.t. x - y = 0
        let a = vec![vec![1.0, -1.0]];
        assert!(matches!(
            minimize(&[-1.0, 0.0], &a, &[0.0], 1e-12),
            Err(Error::Lp(_))
        ));
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![-1.0, 0.0]];
        let sol = minimize(&[0.0, 1.0], &a, &[1.0, 2.0, -1.0], 1e-12).unwrap();
        assert_eq!(sol.x, vec![1.0, 0.0]);
    }

    #[test]
    fn degenerate_program_terminates() {
        // Classic cycling example for the textbook largest-coefficient rule.
        let c = [-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0];
        let a = vec![
            vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
            vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let sol = minimize(&c, &a, &[0.0, 0.0, 1.0], 1e-12).unwrap();
        assert!((sol.objective + 0.05).abs() < 1e-12);
    }
}
