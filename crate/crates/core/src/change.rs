//! Relative-change curves between a baseline block mean and later block
//! means: pointwise (target - baseline) / baseline.

use crate::error::{Error, Result};
use crate::stats::GridFunction;

/// A dimensionless change fraction per day (-0.30 means a 30% decline).
/// Days where the baseline is within the guard threshold of zero are
/// undefined rather than evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeCurve {
    grid: Vec<f64>,
    values: Vec<Option<f64>>,
    baseline_label: String,
    target_label: String,
}

impl ChangeCurve {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `None` marks days where the baseline was too close to zero.
    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn baseline_label(&self) -> &str {
        &self.baseline_label
    }

    pub fn target_label(&self) -> &str {
        &self.target_label
    }

    /// Smallest defined value, if any day is defined.
    pub fn min_value(&self) -> Option<f64> {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }

    /// CSV with undefined days written as `NA`. With `as_percent`, values
    /// are scaled by 100.
    pub fn to_csv(&self, as_percent: bool) -> String {
        let unit = if as_percent { "percent" } else { "fraction" };
        let mut out = format!(
            "# baseline={} target={} unit={}\nday,change\n",
            self.baseline_label, self.target_label, unit
        );
        for (d, v) in self.grid.iter().zip(&self.values) {
            match v {
                Some(x) => {
                    let value = if as_percent { 100.0 * x } else { *x };
                    out.push_str(&format!("{d},{value}\n"));
                }
                None => out.push_str(&format!("{d},NA\n")),
            }
        }
        out
    }
}

/// Pointwise relative change of `target` against `baseline` on a shared
/// grid. Days with `|baseline| <= epsilon` come back undefined.
pub fn percentage_change(
    baseline: &GridFunction,
    target: &GridFunction,
    epsilon: f64,
) -> Result<ChangeCurve> {
    if !baseline.same_grid(target) {
        return Err(Error::arg("grid mismatch in percentage change"));
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::arg(format!(
            "guard threshold must be non-negative, got {epsilon}"
        )));
    }
    let values: Vec<Option<f64>> = baseline
        .values()
        .iter()
        .zip(target.values())
        .map(|(&b, &t)| {
            if b.abs() <= epsilon {
                None
            } else {
                Some((t - b) / b)
            }
        })
        .collect();
    Ok(ChangeCurve {
        grid: baseline.grid().to_vec(),
        values,
        baseline_label: baseline.label().to_string(),
        target_label: target.label().to_string(),
    })
}

/// Default guard threshold in million km².
pub const DEFAULT_EPSILON: f64 = 1e-6;
