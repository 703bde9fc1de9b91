//! Dense phase-1 simplex over a generic scalar, used both in floating point
//! and in exact rational arithmetic.
//!
//! The constraint matrix is the 0/1 cut incidence matrix, so structural
//! columns arrive as sparse row-index lists. Equality constraints `A w = b`
//! with `w >= 0`, `b >= 0` get one artificial variable per row; phase 1
//! minimizes the artificial sum with Bland's rule (first negative reduced
//! cost enters, smallest basis index breaks ratio ties), which cannot cycle.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub(crate) trait LpScalar:
    Clone
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Reduced cost low enough to enter the basis.
    fn is_entering(&self) -> bool;
    /// Usable positive pivot, given the column's magnitude scale.
    fn is_positive_pivot(&self, column_scale: f64) -> bool;
    /// Rough size for pivot scaling; exact scalars may return 0.
    fn magnitude(&self) -> f64;
}

impl LpScalar for f64 {
    fn is_entering(&self) -> bool {
        *self < -1e-10
    }

    fn is_positive_pivot(&self, column_scale: f64) -> bool {
        *self > 1e-10 * column_scale.max(1.0)
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl LpScalar for BigRational {
    fn is_entering(&self) -> bool {
        *self < BigRational::zero()
    }

    fn is_positive_pivot(&self, _column_scale: f64) -> bool {
        *self > BigRational::zero()
    }

    fn magnitude(&self) -> f64 {
        0.0
    }
}

pub(crate) struct PhaseOneOutcome<S> {
    /// Remaining artificial mass; zero iff the system is feasible.
    pub objective: S,
    /// Structural variable values at the final basis.
    pub solution: Vec<S>,
    /// Dual vector `y` with `y^T b = objective` and `y^T A_j <= 0` for every
    /// structural column at optimality.
    pub duals: Vec<S>,
}

pub(crate) fn phase_one<S: LpScalar>(
    columns: &[Vec<usize>],
    b: &[S],
    max_iterations: usize,
) -> Result<PhaseOneOutcome<S>> {
    let m = b.len();
    let vars = columns.len();
    let rhs = vars + m;
    let width = vars + m + 1;

    let mut rows: Vec<Vec<S>> = (0..m)
        .map(|i| {
            let mut row = vec![S::zero(); width];
            row[vars + i] = S::one();
            row[rhs] = b[i].clone();
            row
        })
        .collect();
    for (j, col) in columns.iter().enumerate() {
        for &i in col {
            rows[i][j] = S::one();
        }
    }
    // Reduced costs after pricing out the artificial basis: structural
    // columns get minus their row count, artificials get zero.
    let mut cost = vec![S::zero(); width];
    for (j, col) in columns.iter().enumerate() {
        for _ in col {
            cost[j] = cost[j].clone() - S::one();
        }
    }
    for v in b {
        cost[rhs] = cost[rhs].clone() - v.clone();
    }
    let mut basis: Vec<usize> = (vars..vars + m).collect();

    for _ in 0..max_iterations {
        let entering = (0..vars + m).find(|&j| cost[j].is_entering());
        let Some(j) = entering else {
            let mut objective = S::zero();
            for (i, &var) in basis.iter().enumerate() {
                if var >= vars {
                    objective = objective + rows[i][rhs].clone();
                }
            }
            let solution = {
                let mut w = vec![S::zero(); vars];
                for (i, &var) in basis.iter().enumerate() {
                    if var < vars {
                        w[var] = rows[i][rhs].clone();
                    }
                }
                w
            };
            let duals = (0..m).map(|i| S::one() - cost[vars + i].clone()).collect();
            return Ok(PhaseOneOutcome { objective, solution, duals });
        };

        let column_scale = rows
            .iter()
            .map(|row| row[j].magnitude())
            .fold(0.0f64, f64::max);
        let mut leaving: Option<(usize, S)> = None;
        for (i, row) in rows.iter().enumerate() {
            if !row[j].is_positive_pivot(column_scale) {
                continue;
            }
            let ratio = row[rhs].clone() / row[j].clone();
            let better = match &leaving {
                None => true,
                Some((best_i, best_ratio)) => {
                    ratio < *best_ratio
                        || (ratio == *best_ratio && basis[i] < basis[*best_i])
                }
            };
            if better {
                leaving = Some((i, ratio));
            }
        }
        let Some((r, _)) = leaving else {
            // Phase 1 is bounded below by zero, so an unbounded ray means
            // the arithmetic broke down.
            return Err(Error::Solver(
                "phase-1 simplex found no admissible pivot".into(),
            ));
        };

        let pivot = rows[r][j].clone();
        for v in rows[r].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        rows[r][j] = S::one();
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let factor = row[j].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * p.clone();
            }
            row[j] = S::zero();
        }
        if !cost[j].is_zero() {
            let factor = cost[j].clone();
            for (v, p) in cost.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * p.clone();
            }
            cost[j] = S::zero();
        }
        basis[r] = j;
    }
    Err(Error::Solver(format!(
        "phase-1 simplex did not converge within {max_iterations} iterations"
    )))
}
