//! Reference transportation solver: dense two-phase tableau simplex with
//! Bland's rule. The transportation constraint matrix (and its extension by an
//! identity block of artificials) is totally unimodular, so every tableau
//! entry stays in {-1, 0, 1} and all arithmetic is exact in `i64`. A non-unit
//! pivot would contradict that and is reported as an error.

use crate::error::{Error, Result};

struct Tableau {
    rows: Vec<Vec<i64>>,
    rhs: Vec<i64>,
    basis: Vec<usize>,
    columns: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) -> Result<()> {
        let p = self.rows[r][j];
        if p != 1 && p != -1 {
            return Err(Error::Overflow("reference simplex (non-unit pivot)"));
        }
        if p == -1 {
            self.rows[r].iter_mut().for_each(|x| *x = -*x);
            self.rhs[r] = -self.rhs[r];
        }
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][j];
            if f != 0 {
                for (x, y) in self.rows[i].iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                self.rhs[i] -= f * pivot_rhs;
            }
        }
        self.basis[r] = j;
        Ok(())
    }

    fn reduced_costs(&self, cost: &[i64]) -> Vec<i64> {
        let mut reduced = cost.to_vec();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[r]];
            if cb != 0 {
                for (c, a) in reduced.iter_mut().zip(row) {
                    *c -= cb * a;
                }
            }
        }
        reduced
    }

    /// Bland's rule until optimal. `allowed` limits which columns may enter.
    fn optimize(&mut self, cost: &[i64], allowed: usize) -> Result<()> {
        loop {
            let reduced = self.reduced_costs(cost);
            let Some(j) = (0..allowed).find(|&j| reduced[j] < 0) else {
                return Ok(());
            };
            let mut best: Option<(usize, i64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][j];
                if a <= 0 {
                    continue;
                }
                if a != 1 {
                    return Err(Error::Overflow("reference simplex (non-unit entry)"));
                }
                let ratio = self.rhs[r];
                best = match best {
                    Some((br, bv)) if bv < ratio || (bv == ratio && self.basis[br] < self.basis[r]) => Some((br, bv)),
                    _ => Some((r, ratio)),
                };
            }
            let (r, _) = best.ok_or(Error::Overflow("reference simplex (unbounded)"))?;
            self.pivot(r, j)?;
        }
    }

    fn objective(&self, cost: &[i64]) -> i64 {
        self.basis.iter().zip(&self.rhs).map(|(&b, &x)| cost[b] * x).sum()
    }
}

/// Minimum of `Σ cost[i][j]·x[i][j]` over non-negative `x` with row sums
/// `supply` and column sums `demand` (equal totals).
pub(crate) fn solve_transportation(supply: &[i64], demand: &[i64], cost: &[Vec<i64>]) -> Result<i64> {
    let (a, b) = (supply.len(), demand.len());
    assert_eq!(supply.iter().sum::<i64>(), demand.iter().sum::<i64>());
    let structural = a * b;
    // The last column constraint is implied by the others.
    let m = a + b - 1;
    let columns = structural + m;
    let mut rows = vec![vec![0i64; columns]; m];
    let mut rhs = Vec::with_capacity(m);
    for i in 0..a {
        for j in 0..b {
            rows[i][i * b + j] = 1;
        }
        rhs.push(supply[i]);
    }
    for j in 0..b - 1 {
        for i in 0..a {
            rows[a + j][i * b + j] = 1;
        }
        rhs.push(demand[j]);
    }
    for (r, row) in rows.iter_mut().enumerate() {
        row[structural + r] = 1;
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: (structural..columns).collect(),
        columns,
    };

    let mut phase1 = vec![0i64; columns];
    phase1[structural..].iter_mut().for_each(|c| *c = 1);
    t.optimize(&phase1, t.columns)?;
    if t.objective(&phase1) != 0 {
        return Err(Error::Overflow("reference simplex (infeasible)"));
    }
    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= structural {
            match (0..structural).find(|&j| t.rows[r][j] != 0) {
                Some(j) => t.pivot(r, j)?,
                None => {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut phase2 = vec![0i64; columns];
    for i in 0..a {
        for j in 0..b {
            phase2[i * b + j] = cost[i][j];
        }
    }
    t.optimize(&phase2, structural)?;
    Ok(t.objective(&phase2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_instance() {
        // Supplies 20/30, demands 10/25/15.
        let cost = vec![vec![8, 6, 10], vec![9, 12, 13]];
        // Optimal: x12=20, x21=10, x22=5, x23=15 -> 120 + 90 + 60 + 195
        assert_eq!(solve_transportation(&[20, 30], &[10, 25, 15], &cost).unwrap(), 465);
    }

    #[test]
    fn single_cell() {
        assert_eq!(solve_transportation(&[4], &[4], &[vec![3]]).unwrap(), 12);
    }
}
