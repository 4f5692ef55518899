//! Pointwise mean and variance functions over curve ensembles, block
//! grouping, mean differences, and extrema summaries.

use crate::error::{Error, Result};
use crate::partition::BlockPartition;
use crate::smooth::CurveEnsemble;

/// A sampled function over a day grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    label: String,
}

impl GridFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::arg(format!(
                "grid length {} != value length {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.is_empty() {
            return Err(Error::arg("grid function is empty"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::arg(format!("non-finite value {bad} in grid function")));
        }
        Ok(GridFunction {
            grid,
            values,
            label: label.into(),
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.grid == other.grid
    }

    /// Two-column CSV with the label as a leading comment.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\nday,value\n", self.label);
        for (d, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{d},{v}\n"));
        }
        out
    }
}

/// Extreme values, their day windows, and the grid-average level.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremaSummary {
    pub min_value: f64,
    pub max_value: f64,
    /// Inclusive day window around the minimizing day.
    pub min_day_window: (u16, u16),
    /// Inclusive day window around the maximizing day.
    pub max_day_window: (u16, u16),
    /// Average of the function over the grid.
    pub mean_level: f64,
}

/// Pointwise average of the ensemble's curves on its grid.
pub fn mean_function(ensemble: &CurveEnsemble) -> Result<GridFunction> {
    let values = ensemble.values_matrix()?;
    let n = values.len() as f64;
    let g = ensemble.grid().len();
    let mut mean = vec![0.0; g];
    for row in &values {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let (start, end) = ensemble.year_span();
    GridFunction::new(ensemble.grid().to_vec(), mean, format!("mean {start}-{end}"))
}

/// Pointwise sample variance (divisor N-1) of the ensemble's curves.
pub fn variance_function(ensemble: &CurveEnsemble) -> Result<GridFunction> {
    let n = ensemble.n_curves();
    if n < 2 {
        return Err(Error::arg(format!(
            "variance needs at least 2 curves, got {n}"
        )));
    }
    let values = ensemble.values_matrix()?;
    let g = ensemble.grid().len();
    let mut mean = vec![0.0; g];
    for row in &values {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut var = vec![0.0; g];
    for row in &values {
        for ((v, m), x) in var.iter_mut().zip(&mean).zip(row) {
            let d = x - m;
            *v += d * d;
        }
    }
    for v in &mut var {
        *v /= (n - 1) as f64;
    }
    let (start, end) = ensemble.year_span();
    GridFunction::new(
        ensemble.grid().to_vec(),
        var,
        format!("variance {start}-{end}"),
    )
}

/// Split an ensemble into contiguous sub-ensembles along a partition.
///
/// The partition must cover the ensemble's year span exactly.
pub fn group_by_blocks(
    ensemble: &CurveEnsemble,
    partition: &BlockPartition,
) -> Result<Vec<CurveEnsemble>> {
    let (start, end) = ensemble.year_span();
    if !partition.covers(start, end) {
        let (ps, pe) = partition.span();
        return Err(Error::arg(format!(
            "partition {ps}-{pe} does not cover ensemble years {start}-{end}"
        )));
    }
    partition
        .blocks()
        .iter()
        .map(|range| ensemble.slice_years(range.start, range.end))
        .collect()
}

/// Pointwise difference `a - b` on a shared grid.
pub fn mean_difference(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    if !a.same_grid(b) {
        return Err(Error::arg("grid mismatch in mean difference"));
    }
    let values: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    GridFunction::new(
        a.grid().to_vec(),
        values,
        format!("({}) - ({})", a.label(), b.label()),
    )
}

/// Locate the extrema of `f` on its grid. Ties go to the smallest day; the
/// reported windows extend `window_radius` days to each side, clamped to
/// [1, 365].
pub fn extrema_summary(f: &GridFunction, window_radius: u16) -> ExtremaSummary {
    let mut min_idx = 0;
    let mut max_idx = 0;
    for (i, &v) in f.values().iter().enumerate() {
        if v < f.values()[min_idx] {
            min_idx = i;
        }
        if v > f.values()[max_idx] {
            max_idx = i;
        }
    }
    let window = |idx: usize| -> (u16, u16) {
        let day = f.grid()[idx].round().clamp(1.0, 365.0) as u16;
        (
            day.saturating_sub(window_radius).max(1),
            (day + window_radius).min(365),
        )
    };
    let mean_level = f.values().iter().sum::<f64>() / f.len() as f64;
    ExtremaSummary {
        min_value: f.values()[min_idx],
        max_value: f.values()[max_idx],
        min_day_window: window(min_idx),
        max_day_window: window(max_idx),
        mean_level,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::FourierBasis;
    use crate::smooth::{default_day_grid, FourierCurve};
    use std::f64::consts::TAU;

    fn ensemble_from_coeffs(coeffs: &[Vec<f64>], start_year: i32) -> CurveEnsemble {
        let basis = FourierBasis::annual(coeffs[0].len()).unwrap();
        let curves: Vec<FourierCurve> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| FourierCurve::new(basis, c.clone(), start_year + i as i32).unwrap())
            .collect();
        CurveEnsemble::new(curves, default_day_grid()).unwrap()
    }

    #[test]
    fn mean_of_identical_curves_is_that_curve() {
        let ens = ensemble_from_coeffs(&vec![vec![4.0, 1.0, 2.0]; 5], 1990);
        let mean = mean_function(&ens).unwrap();
        let expect = ens.curves()[0].values_on(ens.grid()).unwrap();
        for (m, e) in mean.values().iter().zip(&expect) {
            assert!((m - e).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_is_linear_in_level_shift() {
        // Curves f and f+2 average to f+1.
        let f = vec![6.0, 1.5, -0.5];
        let mut g = f.clone();
        g[0] += 2.0;
        let ens = ensemble_from_coeffs(&[f.clone(), g], 1990);
        let mean = mean_function(&ens).unwrap();
        let basis = FourierBasis::annual(3).unwrap();
        let fc = FourierCurve::new(basis, f, 1990).unwrap();
        for (day, m) in ens.grid().iter().zip(mean.values()) {
            assert!((m - (fc.eval(*day) + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_is_linear_in_curve_combinations() {
        // mean over curves (2 f_i + 3 g_i) equals 2 mean(F) + 3 mean(G).
        let f_rows = [
            vec![5.0, 1.0, 0.5, 0.2, -0.1],
            vec![6.0, 0.5, 0.7, -0.2, 0.3],
            vec![4.5, 1.2, 0.4, 0.1, 0.0],
        ];
        let g_rows = [
            vec![2.0, -0.5, 1.5, 0.4, 0.2],
            vec![3.0, 0.8, -0.7, 0.6, -0.3],
            vec![2.5, 0.2, 0.9, -0.1, 0.4],
        ];
        let combined: Vec<Vec<f64>> = f_rows
            .iter()
            .zip(&g_rows)
            .map(|(f, g)| f.iter().zip(g).map(|(a, b)| 2.0 * a + 3.0 * b).collect())
            .collect();
        let mf = mean_function(&ensemble_from_coeffs(&f_rows, 1990)).unwrap();
        let mg = mean_function(&ensemble_from_coeffs(&g_rows, 1990)).unwrap();
        let mh = mean_function(&ensemble_from_coeffs(&combined, 1990)).unwrap();
        for ((h, f), g) in mh.values().iter().zip(mf.values()).zip(mg.values()) {
            assert!((h - (2.0 * f + 3.0 * g)).abs() < 1e-10);
        }
    }

    #[test]
    fn variance_of_identical_curves_is_zero() {
        let ens = ensemble_from_coeffs(&vec![vec![4.0, 1.0, 2.0]; 4], 1990);
        let var = variance_function(&ens).unwrap();
        assert!(var.values().iter().all(|&v| v.abs() < 1e-20));
    }

    #[test]
    fn variance_of_constant_shift_pair_is_two() {
        let f = vec![6.0, 1.5, -0.5];
        let mut g = f.clone();
        g[0] += 2.0;
        let ens = ensemble_from_coeffs(&[f, g], 1990);
        let var = variance_function(&ens).unwrap();
        for &v in var.values() {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn variance_requires_two_curves() {
        let ens = ensemble_from_coeffs(&[vec![1.0, 0.0, 0.0]], 1990);
        assert!(variance_function(&ens).is_err());
    }

    #[test]
    fn variance_is_translation_invariant() {
        let rows = [
            vec![5.0, 1.0, 0.5, 0.2, -0.1],
            vec![6.0, 0.5, 0.7, -0.2, 0.3],
            vec![4.5, 1.2, 0.4, 0.1, 0.0],
        ];
        let ens = ensemble_from_coeffs(&rows, 1990);
        let var = variance_function(&ens).unwrap();
        let shifted: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let mut s = r.clone();
                s[0] += 3.25;
                s[2] -= 1.0;
                s
            })
            .collect();
        let ens2 = ensemble_from_coeffs(&shifted, 1990);
        let var2 = variance_function(&ens2).unwrap();
        for (a, b) in var.values().iter().zip(var2.values()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(var.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn block_means_average_to_full_mean() {
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|i| vec![5.0 + i as f64 * 0.3, 1.0, 0.5 - 0.1 * i as f64])
            .collect();
        let ens = ensemble_from_coeffs(&rows, 1990);
        let partition = BlockPartition::from_sizes(1990, &[3, 4]).unwrap();
        let blocks = group_by_blocks(&ens, &partition).unwrap();
        let full = mean_function(&ens).unwrap();
        let m0 = mean_function(&blocks[0]).unwrap();
        let m1 = mean_function(&blocks[1]).unwrap();
        for ((f, a), b) in full.values().iter().zip(m0.values()).zip(m1.values()) {
            let weighted = (3.0 * a + 4.0 * b) / 7.0;
            assert!((f - weighted).abs() < 1e-10);
        }
    }

    #[test]
    fn grouping_sizes_and_mismatch() {
        let rows = vec![vec![1.0, 0.0, 0.0]; 37];
        let ens = ensemble_from_coeffs(&rows, 1979);
        let partition = BlockPartition::decades(1979);
        let blocks = group_by_blocks(&ens, &partition).unwrap();
        let sizes: Vec<usize> = blocks.iter().map(|b| b.n_curves()).collect();
        assert_eq!(sizes, vec![13, 12, 12]);

        let t2 = BlockPartition::even_blocks(1979, 37, 2).unwrap();
        let blocks = group_by_blocks(&ens, &t2).unwrap();
        assert_eq!(blocks[0].n_curves(), 18);
        assert_eq!(blocks[1].n_curves(), 19);

        let single = BlockPartition::single(1979, 2015).unwrap();
        assert_eq!(group_by_blocks(&ens, &single).unwrap().len(), 1);

        let wrong = BlockPartition::even_blocks(1980, 36, 2).unwrap();
        assert!(group_by_blocks(&ens, &wrong).is_err());
    }

    #[test]
    fn mean_difference_basics() {
        let g: Vec<f64> = (1..=10).map(f64::from).collect();
        let a = GridFunction::new(g.clone(), vec![5.0; 10], "a").unwrap();
        let b = GridFunction::new(g.clone(), vec![2.0; 10], "b").unwrap();
        let d = mean_difference(&a, &b).unwrap();
        assert!(d.values().iter().all(|&v| (v - 3.0).abs() < 1e-15));
        let zero = mean_difference(&a, &a).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let other = GridFunction::new(vec![1.0, 2.0], vec![0.0, 0.0], "c").unwrap();
        assert!(mean_difference(&a, &other).is_err());
    }

    #[test]
    fn extrema_of_cosine() {
        let grid = default_day_grid();
        let values: Vec<f64> = grid.iter().map(|&t| (TAU * t / 365.0).cos()).collect();
        let f = GridFunction::new(grid, values, "cos").unwrap();
        let s = extrema_summary(&f, 2);
        // cos(2*pi*t/365) peaks exactly at t=365 on this grid; the trough is
        // at 182.5 and ties resolve to the smaller day 182.
        assert_eq!(s.max_day_window, (363, 365));
        assert_eq!(s.min_day_window, (180, 184));
        assert!((s.max_value - 1.0).abs() < 1e-12);
        assert!(s.min_value > -1.0 && s.min_value < -0.999);

        // Brute-force scan agreement.
        let brute_max = f
            .values()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(s.max_value, brute_max);
    }

    #[test]
    fn extrema_of_constant_function() {
        let g: Vec<f64> = (1..=365).map(f64::from).collect();
        let f = GridFunction::new(g, vec![3.5; 365], "const").unwrap();
        let s = extrema_summary(&f, 2);
        assert_eq!(s.min_value, 3.5);
        assert_eq!(s.max_value, 3.5);
        assert_eq!(s.mean_level, 3.5);
        // Ties break to the smallest day.
        assert_eq!(s.min_day_window, (1, 3));
        assert_eq!(s.max_day_window, (1, 3));
    }

    #[test]
    fn grid_function_rejects_bad_input() {
        assert!(GridFunction::new(vec![1.0], vec![1.0, 2.0], "x").is_err());
        assert!(GridFunction::new(vec![], vec![], "x").is_err());
        assert!(GridFunction::new(vec![1.0], vec![f64::NAN], "x").is_err());
    }

    #[test]
    fn csv_shape() {
        let f = GridFunction::new(vec![1.0, 2.0], vec![0.5, 0.25], "demo").unwrap();
        assert_eq!(f.to_csv(), "# demo\nday,value\n1,0.5\n2,0.25\n");
    }
}
