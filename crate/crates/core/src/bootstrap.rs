//! Percentile bootstrap of block mean functions.
//!
//! For a block of n curves: draw n curves with replacement, take their
//! pointwise mean, repeat B times, then report the pointwise mean of the B
//! bootstrap means, their pointwise sample variance, and the empirical
//! (1-level)/2 and (1+level)/2 quantiles as the band.
//!
//! Reproducibility contract: replicate r draws from ChaCha8 stream r of the
//! given seed, so results are byte-identical at any degree of parallelism.
//! Multi-block runs derive one seed per block with [`block_seed`], making
//! them independent of block scheduling as well. Quantiles interpolate
//! linearly between order statistics (the common "type 7" rule).

use crate::error::{Error, Result};
use crate::smooth::CurveEnsemble;
use crate::stats::GridFunction;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Pointwise percentile band around a block's bootstrap mean function.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceBand {
    grid: Vec<f64>,
    lower: Vec<f64>,
    center: Vec<f64>,
    upper: Vec<f64>,
    level: f64,
    b_samples: usize,
    seed: u64,
    label: String,
}

impl ConfidenceBand {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Pointwise mean of the B bootstrap mean functions.
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn b_samples(&self) -> usize {
        self.b_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Block tag, e.g. "1979-1996".
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Four-column CSV with a metadata comment line.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# level={} B={} seed={} years={}\nday,lower,center,upper\n",
            self.level, self.b_samples, self.seed, self.label
        );
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.grid[i], self.lower[i], self.center[i], self.upper[i]
            ));
        }
        out
    }
}

/// Derive the seed for block `index` of a multi-block run from a base seed.
pub fn block_seed(base: u64, index: usize) -> u64 {
    base ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Linear interpolation between order statistics of pre-sorted data.
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

// One replicate: mean of n rows of `values` drawn with replacement using
// stream `replicate` of `seed`.
fn replicate_mean(values: &[Vec<f64>], seed: u64, replicate: u64) -> Vec<f64> {
    let n = values.len();
    let g = values[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    let mut mean = vec![0.0; g];
    for _ in 0..n {
        let pick = rng.random_range(0..n);
        for (m, v) in mean.iter_mut().zip(&values[pick]) {
            *m += v;
        }
    }
    let inv = 1.0 / n as f64;
    for m in &mut mean {
        *m *= inv;
    }
    mean
}

// All B bootstrap mean functions, replicate index preserved.
fn bootstrap_means(
    block: &CurveEnsemble,
    b_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if b_samples == 0 {
        return Err(Error::arg("bootstrap sample count must be at least 1"));
    }
    let values = block.values_matrix()?;

    #[cfg(feature = "parallel")]
    let means: Vec<Vec<f64>> = (0..b_samples as u64)
        .into_par_iter()
        .map(|r| replicate_mean(&values, seed, r))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let means: Vec<Vec<f64>> = (0..b_samples as u64)
        .map(|r| replicate_mean(&values, seed, r))
        .collect();

    Ok(means)
}

/// Band plus bootstrap variance from one set of replicates.
pub fn bootstrap_summary(
    block: &CurveEnsemble,
    b_samples: usize,
    level: f64,
    seed: u64,
) -> Result<(ConfidenceBand, GridFunction)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::arg(format!(
            "confidence level must be in (0,1), got {level}"
        )));
    }
    let means = bootstrap_means(block, b_samples, seed)?;
    let g = block.grid().len();
    let b = means.len();

    // Pointwise mean of the replicates, summed in replicate order.
    let mut center = vec![0.0; g];
    for row in &means {
        for (c, v) in center.iter_mut().zip(row) {
            *c += v;
        }
    }
    for c in &mut center {
        *c /= b as f64;
    }

    // Pointwise sample variance of the replicates.
    let mut variance = vec![0.0; g];
    if b > 1 {
        for row in &means {
            for ((v, c), x) in variance.iter_mut().zip(&center).zip(row) {
                let d = x - c;
                *v += d * d;
            }
        }
        for v in &mut variance {
            *v /= (b - 1) as f64;
        }
    }

    // Pointwise empirical quantiles.
    let q_lo = (1.0 - level) / 2.0;
    let q_hi = (1.0 + level) / 2.0;
    let mut lower = vec![0.0; g];
    let mut upper = vec![0.0; g];
    let mut column = vec![0.0; b];
    for j in 0..g {
        for (slot, row) in column.iter_mut().zip(&means) {
            *slot = row[j];
        }
        column.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite bootstrap means"));
        lower[j] = percentile_sorted(&column, q_lo);
        upper[j] = percentile_sorted(&column, q_hi);
    }

    let (start, end) = block.year_span();
    let label = format!("{start}-{end}");
    let band = ConfidenceBand {
        grid: block.grid().to_vec(),
        lower,
        center,
        upper,
        level,
        b_samples,
        seed,
        label: label.clone(),
    };
    let var = GridFunction::new(
        block.grid().to_vec(),
        variance,
        format!("bootstrap variance {label}"),
    )?;
    Ok((band, var))
}

/// The pointwise percentile band of the B bootstrap mean functions.
pub fn bootstrap_band(
    block: &CurveEnsemble,
    b_samples: usize,
    level: f64,
    seed: u64,
) -> Result<ConfidenceBand> {
    Ok(bootstrap_summary(block, b_samples, level, seed)?.0)
}

/// The pointwise sample variance of the B bootstrap mean functions.
pub fn bootstrap_variance(
    block: &CurveEnsemble,
    b_samples: usize,
    seed: u64,
) -> Result<GridFunction> {
    // Level does not influence the variance path.
    Ok(bootstrap_summary(block, b_samples, 0.5, seed)?.1)
}

/// Per-day band intersection: positive values are overlap widths, negative
/// values are gap magnitudes, zero means the bands just touch.
pub fn band_overlap(a: &ConfidenceBand, b: &ConfidenceBand) -> Result<GridFunction> {
    if a.grid != b.grid {
        return Err(Error::arg("band overlap requires a shared grid"));
    }
    if a.level != b.level {
        return Err(Error::arg(format!(
            "band overlap requires equal levels ({} vs {})",
            a.level, b.level
        )));
    }
    let values: Vec<f64> = (0..a.grid.len())
        .map(|i| a.upper[i].min(b.upper[i]) - a.lower[i].max(b.lower[i]))
        .collect();
    GridFunction::new(
        a.grid.clone(),
        values,
        format!("overlap {} vs {}", a.label, b.label),
    )
}
