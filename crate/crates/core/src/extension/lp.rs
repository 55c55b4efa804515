//! Dense tableau simplex for `max c·x` subject to `A x ≤ b`, `x ≥ 0`, `b ≥ 0`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Multipliers of the `A x ≤ b` rows.
    pub y: Vec<f64>,
    pub primal: f64,
    /// `b·y`, an upper bound on the optimum whenever `y` is dual feasible.
    pub dual: f64,
    pub pivots: usize,
    pub optimal: bool,
}

const EPS: f64 = 1e-11;

/// Solves the standard-form problem starting from the slack basis.
///
/// Pricing is Dantzig's rule, switching to Bland's rule after a run of
/// degenerate pivots so the method cannot cycle.
pub fn simplex_max(a: &[Vec<f64>], b: &[f64], c: &[f64], max_pivots: usize) -> Result<LpSolution> {
    let rows = a.len();
    let cols = c.len();
    if b.len() != rows || a.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid("LP dimensions disagree"));
    }
    if b.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("LP right-hand side must be nonnegative"));
    }
    let width = cols + rows + 1;
    let mut t = vec![0.0; (rows + 1) * width];
    for i in 0..rows {
        let row = &mut t[i * width..(i + 1) * width];
        row[..cols].copy_from_slice(&a[i]);
        row[cols + i] = 1.0;
        row[width - 1] = b[i];
    }
    {
        let obj = &mut t[rows * width..];
        for j in 0..cols {
            obj[j] = -c[j];
        }
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    let mut pivots = 0;
    let mut degenerate_run = 0;
    let mut optimal = false;

    while pivots < max_pivots {
        let obj = &t[rows * width..(rows + 1) * width];
        let bland = degenerate_run > 50;
        let entering = if bland {
            (0..width - 1).find(|&j| obj[j] < -EPS)
        } else {
            (0..width - 1)
                .filter(|&j| obj[j] < -EPS)
                .min_by(|&p, &q| obj[p].total_cmp(&obj[q]))
        };
        let Some(e) = entering else {
            optimal = true;
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let coef = t[i * width + e];
            if coef > EPS {
                let ratio = t[i * width + width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((l, ratio)) = leave else {
            return Err(Error::Degenerate("LP is unbounded".into()));
        };
        degenerate_run = if ratio.abs() <= EPS { degenerate_run + 1 } else { 0 };

        let pivot = t[l * width + e];
        for v in &mut t[l * width..(l + 1) * width] {
            *v /= pivot;
        }
        let pivot_row: Vec<f64> = t[l * width..(l + 1) * width].to_vec();
        for i in 0..=rows {
            if i == l {
                continue;
            }
            let factor = t[i * width + e];
            if factor != 0.0 {
                for (v, p) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        basis[l] = e;
        pivots += 1;
    }

    let mut x = vec![0.0; cols];
    for (i, &var) in basis.iter().enumerate() {
        if var < cols {
            x[var] = t[i * width + width - 1].max(0.0);
        }
    }
    let obj = &t[rows * width..];
    let y: Vec<f64> = (0..rows).map(|i| obj[cols + i].max(0.0)).collect();
    let primal = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    let dual = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
    Ok(LpSolution {
        x,
        y,
        primal,
        dual,
        pivots,
        optimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), value 36
        let a = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]];
        let s = simplex_max(&a, &[4.0, 12.0, 18.0], &[3.0, 5.0], 100).unwrap();
        assert!(s.optimal);
        assert!((s.primal - 36.0).abs() < 1e-12);
        assert!((s.dual - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        assert!((s.y[1] - 1.5).abs() < 1e-12 && (s.y[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        let a = vec![vec![1.0, -1.0]];
        assert!(simplex_max(&a, &[1.0], &[0.0, 1.0], 100).is_err());
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // several constraints meet at the origin
        let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0], vec![1.0, 1.0], vec![1.0, 0.0]];
        let s = simplex_max(&a, &[0.0, 0.0, 2.0, 5.0], &[1.0, 1.0], 100).unwrap();
        assert!(s.optimal);
        assert!((s.primal - 2.0).abs() < 1e-12);
    }
}
