//! Odd-size Fourier basis on a fixed period, with exact derivatives.
//!
//! The basis is indexed `k = 1..=p` with `p` odd: `k = 1` is the constant
//! function, even `k` is `sin((k/2) omega t)`, and odd `k > 1` is
//! `cos(((k-1)/2) omega t)`. Derivatives are closed-form, not numeric.

use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// The default period in days: one non-leap year.
pub const DAYS_PER_YEAR: f64 = 365.0;

/// An odd-size Fourier basis with angular frequency `omega` (radians/day).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierBasis {
    p: usize,
    omega: f64,
}

impl FourierBasis {
    /// Basis with `p` functions (odd, >= 1) and the given angular frequency.
    pub fn new(p: usize, omega: f64) -> Result<Self> {
        if p == 0 || p.is_multiple_of(2) {
            return Err(Error::config(format!(
                "basis size must be an odd positive integer, got {p}"
            )));
        }
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::config(format!(
                "angular frequency must be positive and finite, got {omega}"
            )));
        }
        Ok(FourierBasis { p, omega })
    }

    /// Basis with `p` functions over an explicit period in days.
    pub fn with_period(p: usize, period: f64) -> Result<Self> {
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::config(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        FourierBasis::new(p, TAU / period)
    }

    /// The annual basis: period 365 days.
    pub fn annual(p: usize) -> Result<Self> {
        FourierBasis::with_period(p, DAYS_PER_YEAR)
    }

    /// Number of basis functions.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Angular frequency in radians per day.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Period in days (`2*pi / omega`).
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    /// Evaluate basis function `k` (1-based) or one of its first two
    /// derivatives at `t`.
    pub fn eval(&self, k: usize, t: f64, deriv: u8) -> Result<f64> {
        if k == 0 || k > self.p {
            return Err(Error::arg(format!(
                "basis index {k} out of range 1..={}",
                self.p
            )));
        }
        if deriv > 2 {
            return Err(Error::arg(format!(
                "derivative order {deriv} not supported (0, 1, or 2)"
            )));
        }
        if !t.is_finite() {
            return Err(Error::arg(format!("evaluation point must be finite, got {t}")));
        }
        Ok(self.eval_unchecked(k, t, deriv))
    }

    /// `eval` without argument validation; callers guarantee
    /// `1 <= k <= p` and `deriv <= 2`.
    pub(crate) fn eval_unchecked(&self, k: usize, t: f64, deriv: u8) -> f64 {
        if k == 1 {
            return if deriv == 0 { 1.0 } else { 0.0 };
        }
        // sin(a t) for even k, cos(a t) for odd k, with a = m * omega.
        let m = (k / 2) as f64;
        let a = m * self.omega;
        let at = a * t;
        if k.is_multiple_of(2) {
            match deriv {
                0 => at.sin(),
                1 => a * at.cos(),
                _ => -a * a * at.sin(),
            }
        } else {
            match deriv {
                0 => at.cos(),
                1 => -a * at.sin(),
                _ => -a * a * at.cos(),
            }
        }
    }

    /// Build the design matrix: one row per grid day, one column per basis
    /// function, entries evaluated at the requested derivative order.
    pub fn design_matrix(&self, grid: &[f64], deriv: u8) -> Result<DesignMatrix> {
        if grid.is_empty() {
            return Err(Error::arg("design matrix grid is empty"));
        }
        if deriv > 2 {
            return Err(Error::arg(format!(
                "derivative order {deriv} not supported (0, 1, or 2)"
            )));
        }
        if let Some(bad) = grid.iter().find(|t| !t.is_finite()) {
            return Err(Error::arg(format!("grid contains non-finite value {bad}")));
        }
        let n = grid.len();
        let mut data = vec![0.0; n * self.p];
        for k in 1..=self.p {
            let col = &mut data[(k - 1) * n..k * n];
            for (slot, &t) in col.iter_mut().zip(grid) {
                *slot = self.eval_unchecked(k, t, deriv);
            }
        }
        Ok(DesignMatrix {
            grid: grid.to_vec(),
            n_basis: self.p,
            data,
        })
    }
}

/// Basis values tabulated over a grid, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    grid: Vec<f64>,
    n_basis: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    /// Number of rows (grid points).
    pub fn nrows(&self) -> usize {
        self.grid.len()
    }

    /// Number of columns (basis functions).
    pub fn ncols(&self) -> usize {
        self.n_basis
    }

    /// The evaluation grid.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Entry at (row, col), zero-based.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.grid.len() + row]
    }

    /// One column as a slice.
    pub fn column(&self, col: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[col * n..(col + 1) * n]
    }

    /// Multiply by a coefficient vector: `y = X c`.
    pub fn mul_vec(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.n_basis, "coefficient length mismatch");
        let n = self.grid.len();
        let mut out = vec![0.0; n];
        for (j, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(self.column(j)) {
                *o += c * x;
            }
        }
        out
    }

    /// Column-major raw storage (length `nrows * ncols`).
    pub(crate) fn into_raw(self) -> Vec<f64> {
        self.data
    }
}
