//! Dense tableau simplex for small problems of the form
//!
//! ```text
//! maximize    c . x
//! subject to  A x <= b,   x >= 0,   b >= 0
//! ```
//!
//! With a nonnegative right-hand side the slack basis is feasible, so no
//! phase one is needed. Bland's rule is used for pivoting, which rules out
//! cycling on degenerate vertices.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Solves the problem above. `a` is row-major with one row per constraint.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let nvars = c.len();
    let ncons = a.len();
    if b.len() != ncons {
        return Err(Error::DimensionMismatch(format!(
            "{} constraint rows but {} bounds",
            ncons,
            b.len()
        )));
    }
    if let Some(row) = a.iter().find(|r| r.len() != nvars) {
        return Err(Error::DimensionMismatch(format!(
            "constraint row has {} coefficients for {} variables",
            row.len(),
            nvars
        )));
    }
    if b.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Lp("right-hand side must be nonnegative".into()));
    }

    // Tableau: ncons rows of [A | I | b], objective row of reduced costs.
    let width = nvars + ncons + 1;
    let mut t = vec![vec![0.0; width]; ncons + 1];
    for (i, row) in a.iter().enumerate() {
        t[i][..nvars].copy_from_slice(row);
        t[i][nvars + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for (j, &cj) in c.iter().enumerate() {
        t[ncons][j] = -cj;
    }
    let mut basis: Vec<usize> = (nvars..nvars + ncons).collect();

    let max_pivots = 50 * (nvars + ncons + 1);
    for _ in 0..max_pivots {
        // Bland: lowest-index column with negative reduced cost.
        let Some(col) = (0..nvars + ncons).find(|&j| t[ncons][j] < -PIVOT_EPS) else {
            let mut x = vec![0.0; nvars];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < nvars {
                    x[bv] = t[i][width - 1];
                }
            }
            let value = t[ncons][width - 1];
            return Ok(LpSolution { x, value });
        };
        // Ratio test, ties broken by the lowest basic variable index.
        let mut pivot: Option<(usize, f64)> = None;
        for i in 0..ncons {
            let coef = t[i][col];
            if coef > PIVOT_EPS {
                let ratio = t[i][width - 1] / coef;
                let better = match pivot {
                    None => true,
                    Some((pi, pr)) => {
                        ratio < pr - PIVOT_EPS
                            || ((ratio - pr).abs() <= PIVOT_EPS && basis[i] < basis[pi])
                    }
                };
                if better {
                    pivot = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = pivot else {
            return Err(Error::Lp("objective is unbounded".into()));
        };
        let p = t[row][col];
        for v in t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        basis[row] = col;
    }
    Err(Error::Lp("pivot limit reached".into()))
}
