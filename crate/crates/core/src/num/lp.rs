//! Dense primal simplex for `max c·x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The origin is always feasible under `b >= 0`, so no phase one is needed.
//! Bland's rule picks entering and leaving variables, which rules out
//! cycling. Sized for the oracle's instances (a few hundred variables).

use crate::error::NumError;

const EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

/// Solves the LP. `a` is row-major, one row per constraint.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution, NumError> {
    let n = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(NumError::InvalidConfig("LP dimensions disagree".into()));
    }
    if b.iter().any(|&v| v < 0.0) {
        return Err(NumError::InvalidConfig("LP right-hand side must be non-negative".into()));
    }
    let width = n + m + 1;
    // rows 0..m are constraints, row m is the objective written as z - c·x = 0
    let mut t = vec![vec![0.0; width]; m + 1];
    for r in 0..m {
        t[r][..n].copy_from_slice(&a[r]);
        t[r][n + r] = 1.0;
        t[r][width - 1] = b[r];
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -EPS) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..m {
            let coef = t[r][enter];
            if coef > EPS {
                let ratio = t[r][width - 1] / coef;
                let better = ratio < best - EPS
                    || (ratio <= best + EPS && leave.is_some_and(|l| basis[r] < basis[l]));
                if better {
                    best = ratio.min(best);
                    leave = Some(r);
                }
            }
        }
        let Some(pr) = leave else {
            return Err(NumError::Unbounded);
        };
        let pivot = t[pr][enter];
        for v in t[pr].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = t[pr].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r != pr {
                let factor = row[enter];
                if factor != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
        }
        basis[pr] = enter;
    }

    let mut x = vec![0.0; n];
    for (r, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[r][width - 1];
        }
    }
    Ok(LpSolution { value: t[m][width - 1], x })
}
