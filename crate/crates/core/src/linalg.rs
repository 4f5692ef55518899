//! Dense least squares via Householder QR.
//!
//! The fitting problems here are small (at most a few hundred rows by ~51
//! columns), so a direct in-place factorization is plenty. The factorization
//! is reusable across right-hand sides, which is what the MSE profile needs
//! when it refits every year at the same basis size. Normal equations are
//! deliberately not used on this path; they serve as an independent oracle
//! in tests.

use crate::error::{Error, Result};

/// Householder QR of a tall column-major matrix, reusable for many
/// right-hand sides.
#[derive(Debug, Clone)]
pub(crate) struct QrFactor {
    nrows: usize,
    ncols: usize,
    /// R on and above the diagonal; below it, the tail of each reflector
    /// (head normalized to 1 and implied).
    data: Vec<f64>,
    tau: Vec<f64>,
    tol: f64,
}

impl QrFactor {
    /// Factor `a` (column-major, `nrows x ncols`, consumed in place).
    pub fn new(mut a: Vec<f64>, nrows: usize, ncols: usize) -> Result<Self> {
        if nrows * ncols != a.len() {
            return Err(Error::arg("QR dimension mismatch"));
        }
        if nrows < ncols {
            return Err(Error::arg(format!(
                "least squares needs at least as many rows as columns ({nrows} < {ncols})"
            )));
        }

        // Rank tolerance scaled by the largest column norm of the input.
        let mut max_norm = 0.0f64;
        for j in 0..ncols {
            let col = &a[j * nrows..(j + 1) * nrows];
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            max_norm = max_norm.max(norm);
        }
        let tol = f64::EPSILON * nrows.max(ncols) as f64 * max_norm;

        let mut tau = vec![0.0; ncols];
        for j in 0..ncols {
            let (head, tail) = a.split_at_mut((j + 1) * nrows);
            let col = &mut head[j * nrows + j..];
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm <= tol {
                return Err(Error::RankDeficient { column: j });
            }
            let alpha = if col[0] >= 0.0 { -norm } else { norm };
            let u0 = col[0] - alpha;
            // u0 = x0 + sign(x0)*norm, so |u0| >= norm > 0 here.
            let usq = col.iter().skip(1).map(|v| v * v).sum::<f64>() + u0 * u0;
            tau[j] = 2.0 * u0 * u0 / usq;
            // Normalize the reflector tail so its head is 1.
            col[0] = alpha;
            for v in col.iter_mut().skip(1) {
                *v /= u0;
            }

            let sub = nrows - j;
            let reflector = &head[j * nrows + j..];
            for c in (j + 1)..ncols {
                let target = &mut tail[(c - j - 1) * nrows + j..(c - j - 1) * nrows + j + sub];
                let mut w = target[0];
                for (v, t) in reflector.iter().zip(target.iter()).skip(1) {
                    w += v * t;
                }
                let s = tau[j] * w;
                target[0] -= s;
                for (t, v) in target.iter_mut().zip(reflector.iter()).skip(1) {
                    *t -= s * v;
                }
            }
        }

        Ok(QrFactor {
            nrows,
            ncols,
            data: a,
            tau,
            tol,
        })
    }

    /// Solve `min ||A x - y||_2` for one right-hand side.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.nrows {
            return Err(Error::arg("right-hand side length mismatch"));
        }
        let n = self.nrows;
        let mut rhs = y.to_vec();

        // Apply Q' to the right-hand side.
        for j in 0..self.ncols {
            let reflector = &self.data[j * n + j..(j + 1) * n];
            let ysub = &mut rhs[j..];
            let mut w = ysub[0];
            for (v, t) in reflector.iter().zip(ysub.iter()).skip(1) {
                w += v * t;
            }
            let s = self.tau[j] * w;
            ysub[0] -= s;
            for (t, v) in ysub.iter_mut().zip(reflector.iter()).skip(1) {
                *t -= s * v;
            }
        }

        // Back-substitution on R.
        let mut x = vec![0.0; self.ncols];
        for i in (0..self.ncols).rev() {
            let mut sum = rhs[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                sum -= self.data[j * n + i] * xj;
            }
            let r_ii = self.data[i * n + i];
            if r_ii.abs() <= self.tol {
                return Err(Error::RankDeficient { column: i });
            }
            x[i] = sum / r_ii;
        }
        Ok(x)
    }
}

/// One-shot convenience: factor and solve.
pub(crate) fn lstsq(a: Vec<f64>, nrows: usize, ncols: usize, y: &[f64]) -> Result<Vec<f64>> {
    QrFactor::new(a, nrows, ncols)?.solve(y)
}
