//! Per-year Fourier fits by (weighted) least squares, MSE profiles over the
//! basis size, and the first-difference flatness rule that picks it.

use crate::basis::FourierBasis;
use crate::error::{Error, Result};
use crate::ingest::{Dataset, RawYearSeries};
use crate::linalg::QrFactor;
use std::collections::HashMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// The default evaluation grid: integer days 1..=365.
pub fn default_day_grid() -> Vec<f64> {
    (1..=365).map(f64::from).collect()
}

/// A smoothed year: coefficients over a Fourier basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCurve {
    basis: FourierBasis,
    coeffs: Vec<f64>,
    year: i32,
}

impl FourierCurve {
    pub fn new(basis: FourierBasis, coeffs: Vec<f64>, year: i32) -> Result<Self> {
        if coeffs.len() != basis.p() {
            return Err(Error::arg(format!(
                "coefficient vector length {} does not match basis size {}",
                coeffs.len(),
                basis.p()
            )));
        }
        Ok(FourierCurve {
            basis,
            coeffs,
            year,
        })
    }

    pub fn basis(&self) -> &FourierBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    /// Evaluate the smooth function at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| c * self.basis.eval_unchecked(idx + 1, t, 0))
            .sum()
    }

    /// Evaluate the curve (deriv 0) or an exact derivative (1 or 2) at `t`.
    pub fn eval_deriv(&self, t: f64, deriv: u8) -> Result<f64> {
        if deriv > 2 {
            return Err(Error::arg(format!(
                "derivative order {deriv} not supported (0, 1, or 2)"
            )));
        }
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| c * self.basis.eval_unchecked(idx + 1, t, deriv))
            .sum())
    }

    /// Evaluate on a whole grid.
    pub fn values_on(&self, grid: &[f64]) -> Result<Vec<f64>> {
        Ok(self.basis.design_matrix(grid, 0)?.mul_vec(&self.coeffs))
    }
}

/// Smoothed curves for consecutive years on a shared basis and grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEnsemble {
    basis: FourierBasis,
    curves: Vec<FourierCurve>,
    grid: Vec<f64>,
}

impl CurveEnsemble {
    /// Years must be strictly increasing and every curve must share one basis.
    pub fn new(curves: Vec<FourierCurve>, grid: Vec<f64>) -> Result<Self> {
        let first = curves
            .first()
            .ok_or_else(|| Error::arg("curve ensemble is empty"))?;
        let basis = *first.basis();
        for c in &curves {
            if c.basis() != &basis {
                return Err(Error::arg("ensemble curves use different bases"));
            }
        }
        for pair in curves.windows(2) {
            if pair[1].year() <= pair[0].year() {
                return Err(Error::arg("ensemble years must be strictly increasing"));
            }
        }
        if grid.is_empty() {
            return Err(Error::arg("ensemble grid is empty"));
        }
        Ok(CurveEnsemble {
            basis,
            curves,
            grid,
        })
    }

    pub fn basis(&self) -> &FourierBasis {
        &self.basis
    }

    pub fn curves(&self) -> &[FourierCurve] {
        &self.curves
    }

    pub fn n_curves(&self) -> usize {
        self.curves.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Inclusive (first, last) year covered.
    pub fn year_span(&self) -> (i32, i32) {
        (
            self.curves.first().expect("non-empty").year(),
            self.curves.last().expect("non-empty").year(),
        )
    }

    /// The same curves on a different evaluation grid.
    pub fn with_grid(&self, grid: Vec<f64>) -> Result<CurveEnsemble> {
        CurveEnsemble::new(self.curves.clone(), grid)
    }

    /// A contiguous sub-ensemble for the year range, sharing the grid.
    pub fn slice_years(&self, start: i32, end: i32) -> Result<CurveEnsemble> {
        let picked: Vec<FourierCurve> = self
            .curves
            .iter()
            .filter(|c| c.year() >= start && c.year() <= end)
            .cloned()
            .collect();
        CurveEnsemble::new(picked, self.grid.clone())
    }

    /// Evaluate every curve on the shared grid; row `i` is curve `i`.
    pub fn values_matrix(&self) -> Result<Vec<Vec<f64>>> {
        let design = self.basis.design_matrix(&self.grid, 0)?;
        Ok(self
            .curves
            .iter()
            .map(|c| design.mul_vec(c.coeffs()))
            .collect())
    }

    /// Coefficient-wise mean of all curves (the mean function stays in the
    /// Fourier span). Tagged with the first year of the ensemble.
    pub fn mean_curve(&self) -> FourierCurve {
        let p = self.basis.p();
        let n = self.curves.len() as f64;
        let mut coeffs = vec![0.0; p];
        for curve in &self.curves {
            for (acc, &c) in coeffs.iter_mut().zip(curve.coeffs()) {
                *acc += c;
            }
        }
        for c in &mut coeffs {
            *c /= n;
        }
        FourierCurve {
            basis: self.basis,
            coeffs,
            year: self.curves[0].year(),
        }
    }
}

/// Fit one year by (weighted) least squares on its observed days.
///
/// With `weights == None` this is ordinary least squares. Weights must be
/// strictly positive and one per sample.
pub fn fit_year(
    series: &RawYearSeries,
    basis: &FourierBasis,
    weights: Option<&[f64]>,
) -> Result<FourierCurve> {
    let n = series.len();
    let p = basis.p();
    if n < p {
        return Err(Error::UnderdeterminedFit {
            year: series.year(),
            n_samples: n,
            n_basis: p,
        });
    }
    let grid = series.day_grid();
    let design = basis.design_matrix(&grid, 0)?;
    let mut data = design.into_raw();
    let mut y = series.areas().to_vec();

    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::arg(format!(
                "weight count {} does not match sample count {n}",
                w.len()
            )));
        }
        if let Some(bad) = w.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::arg(format!(
                "weights must be positive and finite, got {bad}"
            )));
        }
        let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
        for col in 0..p {
            for (slot, s) in data[col * n..(col + 1) * n].iter_mut().zip(&sw) {
                *slot *= s;
            }
        }
        for (slot, s) in y.iter_mut().zip(&sw) {
            *slot *= s;
        }
    }

    let coeffs = crate::linalg::lstsq(data, n, p, &y)?;
    FourierCurve::new(*basis, coeffs, series.year())
}

/// Fit every year of a dataset on one basis; evaluation grid defaults to
/// integer days 1..=365.
pub fn fit_ensemble(
    dataset: &Dataset,
    basis: &FourierBasis,
    grid: Option<Vec<f64>>,
) -> Result<CurveEnsemble> {
    let years = dataset.years();

    #[cfg(feature = "parallel")]
    let fits: Vec<Result<FourierCurve>> = years
        .par_iter()
        .map(|series| fit_year(series, basis, None))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let fits: Vec<Result<FourierCurve>> = years
        .iter()
        .map(|series| fit_year(series, basis, None))
        .collect();

    let mut curves = Vec::with_capacity(years.len());
    for (series, fit) in years.iter().zip(fits) {
        curves.push(fit.map_err(|e| Error::FitContext {
            year: series.year(),
            p: basis.p(),
            source: Box::new(e),
        })?);
    }
    CurveEnsemble::new(curves, grid.unwrap_or_else(default_day_grid))
}

/// Mean squared residual of a fitted curve over the series' own days.
pub fn residual_mse(series: &RawYearSeries, curve: &FourierCurve) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::arg("cannot compute residual MSE of an empty series"));
    }
    let sum: f64 = series
        .days()
        .iter()
        .zip(series.areas())
        .map(|(&day, &area)| {
            let r = area - curve.eval(f64::from(day));
            r * r
        })
        .sum();
    Ok(sum / series.len() as f64)
}

/// Average residual MSE per basis size, with first differences.
#[derive(Debug, Clone, PartialEq)]
pub struct MseProfile {
    p_values: Vec<usize>,
    mse_hat: Vec<f64>,
    first_diff: Vec<f64>,
    skipped: Vec<(i32, usize)>,
}

impl MseProfile {
    fn new(p_values: Vec<usize>, mse_hat: Vec<f64>, skipped: Vec<(i32, usize)>) -> Self {
        let first_diff = mse_hat.windows(2).map(|w| w[1] - w[0]).collect();
        MseProfile {
            p_values,
            mse_hat,
            first_diff,
            skipped,
        }
    }

    pub fn p_values(&self) -> &[usize] {
        &self.p_values
    }

    pub fn mse_hat(&self) -> &[f64] {
        &self.mse_hat
    }

    /// `first_diff[i] = mse_hat[i+1] - mse_hat[i]`.
    pub fn first_diff(&self) -> &[f64] {
        &self.first_diff
    }

    /// Years skipped (with the p at which they lacked samples).
    pub fn skipped(&self) -> &[(i32, usize)] {
        &self.skipped
    }

    pub fn len(&self) -> usize {
        self.p_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_values.is_empty()
    }

    /// Two-column-ish CSV: `p,mse_hat,first_diff` (NA on the last row).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,mse_hat,first_diff\n");
        for (i, (&p, &m)) in self.p_values.iter().zip(&self.mse_hat).enumerate() {
            match self.first_diff.get(i) {
                Some(d) => out.push_str(&format!("{p},{m},{d}\n")),
                None => out.push_str(&format!("{p},{m},NA\n")),
            }
        }
        out
    }
}

/// The default candidate set: odd integers 1..=51.
pub fn default_p_values() -> Vec<usize> {
    (1..=51).step_by(2).collect()
}

/// Fit every year at every candidate basis size and average the residual
/// MSEs with equal weight per year, in ascending year order.
///
/// Years with too few samples for a given `p` are skipped and recorded
/// rather than failing the profile.
pub fn mse_profile(dataset: &Dataset, p_values: &[usize], period: f64) -> Result<MseProfile> {
    if p_values.is_empty() {
        return Err(Error::arg("no candidate basis sizes"));
    }
    for pair in p_values.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::arg("candidate basis sizes must be strictly increasing"));
        }
    }
    if let Some(&bad) = p_values.iter().find(|p| **p == 0 || p.is_multiple_of(2)) {
        return Err(Error::config(format!(
            "candidate basis sizes must be odd, got {bad}"
        )));
    }

    let mut mse_hat = Vec::with_capacity(p_values.len());
    let mut skipped = Vec::new();
    for &p in p_values {
        let basis = FourierBasis::with_period(p, period)?;

        // Years sharing a day grid share one QR factorization.
        let mut factors: HashMap<&[u16], QrFactor> = HashMap::new();
        let mut sum = 0.0;
        let mut used = 0usize;
        for series in dataset.years() {
            if series.len() < p {
                skipped.push((series.year(), p));
                continue;
            }
            let factor = match factors.get(series.days()) {
                Some(f) => f,
                None => {
                    let design = basis.design_matrix(&series.day_grid(), 0)?;
                    let f = QrFactor::new(design.into_raw(), series.len(), p).map_err(|e| {
                        Error::FitContext {
                            year: series.year(),
                            p,
                            source: Box::new(e),
                        }
                    })?;
                    factors.entry(series.days()).or_insert(f)
                }
            };
            let coeffs = factor.solve(series.areas()).map_err(|e| Error::FitContext {
                year: series.year(),
                p,
                source: Box::new(e),
            })?;
            let curve = FourierCurve::new(basis, coeffs, series.year())?;
            sum += residual_mse(series, &curve)?;
            used += 1;
        }
        if used == 0 {
            return Err(Error::arg(format!(
                "no year has enough samples for p={p}"
            )));
        }
        mse_hat.push(sum / used as f64);
    }

    Ok(MseProfile::new(p_values.to_vec(), mse_hat, skipped))
}

/// Outcome of the basis-count selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSelection {
    /// The selected (odd) basis size.
    pub p: usize,
    /// False when no size met the flatness rule and the largest candidate
    /// was returned instead.
    pub converged: bool,
}

/// Pick the smallest p after which the MSE profile is flat: every later
/// first difference must have magnitude at most `flatness_tol * mse_hat(p)`.
///
/// Falls back to the largest candidate (flagged) when nothing qualifies.
pub fn select_basis_count(profile: &MseProfile, flatness_tol: f64) -> Result<BasisSelection> {
    if profile.len() < 3 {
        return Err(Error::arg(
            "basis selection needs at least 3 profile entries",
        ));
    }
    if !flatness_tol.is_finite() || flatness_tol < 0.0 {
        return Err(Error::arg(format!(
            "flatness tolerance must be non-negative, got {flatness_tol}"
        )));
    }
    let mse = profile.mse_hat();
    let diffs = profile.first_diff();
    for i in 0..profile.len() - 1 {
        let threshold = flatness_tol * mse[i];
        if diffs[i..].iter().all(|d| d.abs() <= threshold) {
            return Ok(BasisSelection {
                p: profile.p_values()[i],
                converged: true,
            });
        }
    }
    Ok(BasisSelection {
        p: *profile.p_values().last().expect("non-empty"),
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{synthesize_ensemble, Region, SamplingPattern, SyntheticConfig};

    fn series_from_curve(basis: &FourierBasis, coeffs: &[f64], days: &[u16], year: i32) -> RawYearSeries {
        let samples: Vec<(u16, f64)> = days
            .iter()
            .map(|&d| {
                let t = f64::from(d);
                let v: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(idx, &c)| c * basis.eval_unchecked(idx + 1, t, 0))
                    .sum();
                (d, v)
            })
            .collect();
        RawYearSeries::new(year, samples).unwrap()
    }

    #[test]
    fn exact_recovery_of_in_span_data() {
        let basis = FourierBasis::annual(5).unwrap();
        let truth = [9.0, 1.5, -2.0, 0.3, 0.7];
        let days: Vec<u16> = (1..=365).collect();
        let series = series_from_curve(&basis, &truth, &days, 1990);
        let fit = fit_year(&series, &basis, None).unwrap();
        for (a, b) in fit.coeffs().iter().zip(&truth) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_series_loads_only_the_constant() {
        let basis = FourierBasis::annual(11).unwrap();
        let days: Vec<u16> = (1..=365).collect();
        let samples: Vec<(u16, f64)> = days.iter().map(|&d| (d, 7.0)).collect();
        let series = RawYearSeries::new(2000, samples).unwrap();
        let fit = fit_year(&series, &basis, None).unwrap();
        assert!((fit.coeffs()[0] - 7.0).abs() < 1e-8);
        for &c in &fit.coeffs()[1..] {
            assert!(c.abs() < 1e-8);
        }
    }

    // Independent oracle: solve the weighted normal equations by Gaussian
    // elimination.
    #[allow(clippy::needless_range_loop)]
    fn normal_equations_fit(
        series: &RawYearSeries,
        basis: &FourierBasis,
        weights: Option<&[f64]>,
    ) -> Vec<f64> {
        let n = series.len();
        let p = basis.p();
        let grid = series.day_grid();
        let x = basis.design_matrix(&grid, 0).unwrap();
        let w: Vec<f64> = match weights {
            Some(w) => w.to_vec(),
            None => vec![1.0; n],
        };
        let mut g = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        for i in 0..p {
            for j in 0..p {
                let mut s = 0.0;
                for r in 0..n {
                    s += w[r] * x.get(r, i) * x.get(r, j);
                }
                g[i * p + j] = s;
            }
            let mut s = 0.0;
            for r in 0..n {
                s += w[r] * x.get(r, i) * series.areas()[r];
            }
            rhs[i] = s;
        }
        for col in 0..p {
            let mut piv = col;
            for r in (col + 1)..p {
                if g[r * p + col].abs() > g[piv * p + col].abs() {
                    piv = r;
                }
            }
            if piv != col {
                for c in 0..p {
                    g.swap(col * p + c, piv * p + c);
                }
                rhs.swap(col, piv);
            }
            let d = g[col * p + col];
            for r in (col + 1)..p {
                let f = g[r * p + col] / d;
                for c in col..p {
                    g[r * p + c] -= f * g[col * p + c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
        let mut out = vec![0.0; p];
        for i in (0..p).rev() {
            let mut s = rhs[i];
            for j in (i + 1)..p {
                s -= g[i * p + j] * out[j];
            }
            out[i] = s / g[i * p + i];
        }
        out
    }

    #[test]
    fn alternate_day_fit_matches_normal_equations() {
        let cfg = SyntheticConfig {
            region: Region::Arctic,
            start_year: 1980,
            truth: vec![11.0, 2.5, 3.0, -0.8, 0.6, 0.2, -0.3],
            offsets: vec![0.0],
            noise_sd: 0.3,
            seed: 424242,
            pattern: SamplingPattern::AlternateDays,
        };
        let ds = synthesize_ensemble(&cfg).unwrap();
        let series = &ds.years()[0];
        assert_eq!(series.len(), 183);
        let basis = FourierBasis::annual(21).unwrap();
        let qr = fit_year(series, &basis, None).unwrap();
        let oracle = normal_equations_fit(series, &basis, None);
        for (a, b) in qr.coeffs().iter().zip(&oracle) {
            let scale = b.abs().max(1e-3);
            assert!((a - b).abs() < 1e-6 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn weighted_fit_matches_weighted_normal_equations() {
        let cfg = SyntheticConfig {
            region: Region::Arctic,
            start_year: 1985,
            truth: vec![10.0, 1.0, 2.0],
            offsets: vec![0.0],
            noise_sd: 0.2,
            seed: 9,
            pattern: SamplingPattern::Daily,
        };
        let ds = synthesize_ensemble(&cfg).unwrap();
        let series = &ds.years()[0];
        let basis = FourierBasis::annual(3).unwrap();
        let weights: Vec<f64> = (0..series.len())
            .map(|i| 0.5 + (i % 7) as f64 * 0.25)
            .collect();
        let fit = fit_year(series, &basis, Some(&weights)).unwrap();
        let oracle = normal_equations_fit(series, &basis, Some(&weights));
        for (a, b) in fit.coeffs().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-6 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn uniform_weights_reproduce_unweighted_fit() {
        let cfg = SyntheticConfig {
            region: Region::Antarctic,
            start_year: 1990,
            truth: vec![12.0, -1.0, 4.0, 0.5, 0.1],
            offsets: vec![0.0],
            noise_sd: 0.4,
            seed: 55,
            pattern: SamplingPattern::Daily,
        };
        let ds = synthesize_ensemble(&cfg).unwrap();
        let series = &ds.years()[0];
        let basis = FourierBasis::annual(5).unwrap();
        let plain = fit_year(series, &basis, None).unwrap();
        let weighted = fit_year(series, &basis, Some(&vec![1.0; series.len()])).unwrap();
        for (a, b) in plain.coeffs().iter().zip(weighted.coeffs()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn underdetermined_fit_is_an_error() {
        let basis = FourierBasis::annual(21).unwrap();
        let series =
            RawYearSeries::new(2001, (1..=10).map(|d| (d as u16, 5.0)).collect()).unwrap();
        assert!(matches!(
            fit_year(&series, &basis, None),
            Err(Error::UnderdeterminedFit { .. })
        ));
    }

    #[test]
    fn nonpositive_weight_is_an_error() {
        let basis = FourierBasis::annual(3).unwrap();
        let series =
            RawYearSeries::new(2001, (1..=10).map(|d| (d as u16, 5.0)).collect()).unwrap();
        let mut w = vec![1.0; 10];
        w[3] = 0.0;
        assert!(fit_year(&series, &basis, Some(&w)).is_err());
    }

    #[test]
    fn residual_mse_basics() {
        let basis = FourierBasis::annual(3).unwrap();
        let days: Vec<u16> = (1..=50).collect();
        let truth = [4.0, 1.0, 0.5];
        let series = series_from_curve(&basis, &truth, &days, 1999);
        let curve = FourierCurve::new(basis, truth.to_vec(), 1999).unwrap();
        assert!(residual_mse(&series, &curve).unwrap() < 1e-24);

        // Shift every observation by r: the MSE against the clean curve is r^2.
        let shifted = RawYearSeries::new(
            1999,
            series
                .days()
                .iter()
                .zip(series.areas())
                .map(|(&d, &a)| (d, a + 0.25))
                .collect(),
        )
        .unwrap();
        let mse = residual_mse(&shifted, &curve).unwrap();
        assert!((mse - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn residual_orthogonality() {
        let cfg = SyntheticConfig {
            region: Region::Arctic,
            start_year: 1979,
            truth: vec![10.0, 2.0, 1.0, 0.4, -0.6],
            offsets: vec![0.0],
            noise_sd: 0.5,
            seed: 77,
            pattern: SamplingPattern::Daily,
        };
        let ds = synthesize_ensemble(&cfg).unwrap();
        let series = &ds.years()[0];
        let basis = FourierBasis::annual(9).unwrap();
        let fit = fit_year(series, &basis, None).unwrap();
        let design = basis.design_matrix(&series.day_grid(), 0).unwrap();
        let fitted = design.mul_vec(fit.coeffs());
        let resid: Vec<f64> = series
            .areas()
            .iter()
            .zip(&fitted)
            .map(|(y, f)| y - f)
            .collect();
        let ynorm = series.areas().iter().map(|v| v * v).sum::<f64>().sqrt();
        for k in 0..9 {
            let dot: f64 = design.column(k).iter().zip(&resid).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-7 * ynorm, "column {k}: {dot}");
        }
    }

    #[test]
    fn nested_spans_mse_non_increasing() {
        let cfg = SyntheticConfig {
            region: Region::Arctic,
            start_year: 1979,
            truth: vec![11.0, 3.0, 2.0, 1.0, -0.5, 0.3, 0.2],
            offsets: vec![0.0, 0.1, -0.1],
            noise_sd: 0.3,
            seed: 1234,
            pattern: SamplingPattern::Daily,
        };
        let ds = synthesize_ensemble(&cfg).unwrap();
        let series = &ds.years()[0];
        let p_values: Vec<usize> = (1..=25).step_by(2).collect();
        let mut prev = f64::INFINITY;
        for &p in &p_values {
            let basis = FourierBasis::annual(p).unwrap();
            let fit = fit_year(series, &basis, None).unwrap();
            let mse = residual_mse(series, &fit).unwrap();
            assert!(mse <= prev + 1e-10, "p={p}: {mse} > {prev}");
            prev = mse;
        }
    }

    #[test]
    fn profile_nesting_hits_zero_at_span() {
        // A single year lying exactly in the p=7 span.
        let basis7 = FourierBasis::annual(7).unwrap();
        let truth = [8.0, 1.0, 2.0, -1.0, 0.5, 0.25, -0.75];
        let days: Vec<u16> = (1..=365).collect();
        let series = series_from_curve(&basis7, &truth, &days, 1995);
        let ds = Dataset::new(Region::Arctic, vec![series]).unwrap();
        let profile = mse_profile(&ds, &[5, 7, 9], 365.0).unwrap();
        assert!(profile.mse_hat()[0] > 1e-6);
        assert!(profile.mse_hat()[1] < 1e-16);
        assert!(profile.mse_hat()[2] < 1e-16);
    }

    #[test]
    fn profile_skips_short_years() {
        let basis = FourierBasis::annual(3).unwrap();
        let full = series_from_curve(&basis, &[5.0, 1.0, 0.5], &(1..=365).collect::<Vec<_>>(), 1990);
        let short = RawYearSeries::new(1991, (1..=5).map(|d| (d as u16, 5.0)).collect()).unwrap();
        let ds = Dataset::new(Region::Arctic, vec![full, short]).unwrap();
        let profile = mse_profile(&ds, &[3, 7, 9], 365.0).unwrap();
        assert!(profile.skipped().contains(&(1991, 7)));
        assert!(profile.skipped().contains(&(1991, 9)));
        assert!(!profile.skipped().contains(&(1991, 3)));
    }

    #[test]
    fn profile_handles_mixed_day_grids() {
        // Alternate-day and daily years in one dataset: the cached
        // factorizations must not leak across grids.
        let basis = FourierBasis::annual(5).unwrap();
        let truth = [9.0, 2.0, 1.0, 0.3, -0.2];
        let sparse = series_from_curve(
            &basis,
            &truth,
            &(1..=365).step_by(2).map(|d| d as u16).collect::<Vec<_>>(),
            1986,
        );
        let dense = series_from_curve(&basis, &truth, &(1..=365).collect::<Vec<_>>(), 1987);
        let ds = Dataset::new(Region::Arctic, vec![sparse.clone(), dense.clone()]).unwrap();
        let profile = mse_profile(&ds, &[3, 5, 7], 365.0).unwrap();

        for (i, &p) in [3usize, 5, 7].iter().enumerate() {
            let b = FourierBasis::annual(p).unwrap();
            let manual = (residual_mse(&sparse, &fit_year(&sparse, &b, None).unwrap()).unwrap()
                + residual_mse(&dense, &fit_year(&dense, &b, None).unwrap()).unwrap())
                / 2.0;
            assert!(
                (profile.mse_hat()[i] - manual).abs() <= 1e-15 * manual.max(1e-300),
                "p={p}: {} vs {manual}",
                profile.mse_hat()[i]
            );
        }
        // The truth lies in the p=5 span: both larger fits are exact.
        assert!(profile.mse_hat()[1] < 1e-16);
        assert!(profile.mse_hat()[2] < 1e-16);
    }

    #[test]
    fn profile_rejects_even_p() {
        let basis = FourierBasis::annual(3).unwrap();
        let s = series_from_curve(&basis, &[5.0, 1.0, 0.5], &(1..=30).collect::<Vec<_>>(), 1990);
        let ds = Dataset::new(Region::Arctic, vec![s]).unwrap();
        assert!(mse_profile(&ds, &[3, 4], 365.0).is_err());
        assert!(mse_profile(&ds, &[5, 3], 365.0).is_err());
    }

    fn profile_from(mse: &[f64]) -> MseProfile {
        let p_values: Vec<usize> = (0..mse.len()).map(|i| 2 * i + 1).collect();
        MseProfile::new(p_values, mse.to_vec(), Vec::new())
    }

    #[test]
    fn selection_rule_on_hand_profile() {
        // Hand evaluation: only from the 3rd entry on are all later first
        // differences within 1% of the level there.
        let profile = profile_from(&[10.0, 2.0, 1.0, 0.999, 0.9989, 0.9988]);
        let sel = select_basis_count(&profile, 0.01).unwrap();
        assert_eq!(sel.p, profile.p_values()[2]);
        assert!(sel.converged);
    }

    #[test]
    fn selection_on_flat_profile_picks_smallest() {
        let profile = profile_from(&[1.0, 1.0, 1.0, 1.0]);
        let sel = select_basis_count(&profile, 0.01).unwrap();
        assert_eq!(sel.p, 1);
        assert!(sel.converged);
    }

    #[test]
    fn selection_flags_non_convergence() {
        let profile = profile_from(&[100.0, 50.0, 25.0]);
        let sel = select_basis_count(&profile, 0.01).unwrap();
        assert_eq!(sel.p, 5);
        assert!(!sel.converged);
    }

    #[test]
    fn selection_requires_three_entries() {
        let profile = profile_from(&[1.0, 1.0]);
        assert!(select_basis_count(&profile, 0.01).is_err());
    }

    #[test]
    fn zero_noise_ensemble_recovers_truth() {
        let cfg = SyntheticConfig {
            region: Region::Arctic,
            start_year: 1979,
            truth: vec![11.0, 2.0, 3.0, 0.5, -0.4, 0.2, 0.1, -0.3, 0.05],
            offsets: vec![0.0; 6],
            noise_sd: 0.0,
            seed: 3,
            pattern: SamplingPattern::Daily,
        };
        let ds = synthesize_ensemble(&cfg).unwrap();
        let basis = FourierBasis::annual(cfg.truth.len()).unwrap();
        let ens = fit_ensemble(&ds, &basis, None).unwrap();
        for curve in ens.curves() {
            for (a, b) in curve.coeffs().iter().zip(&cfg.truth) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn mean_curve_is_coefficient_mean() {
        let basis = FourierBasis::annual(3).unwrap();
        let c1 = FourierCurve::new(basis, vec![1.0, 2.0, 3.0], 1990).unwrap();
        let c2 = FourierCurve::new(basis, vec![3.0, 0.0, 1.0], 1991).unwrap();
        let ens = CurveEnsemble::new(vec![c1, c2], default_day_grid()).unwrap();
        assert_eq!(ens.mean_curve().coeffs(), &[2.0, 1.0, 2.0]);
    }

    #[test]
    fn ensemble_rejects_mixed_bases_and_unsorted_years() {
        let b3 = FourierBasis::annual(3).unwrap();
        let b5 = FourierBasis::annual(5).unwrap();
        let c1 = FourierCurve::new(b3, vec![1.0, 0.0, 0.0], 1990).unwrap();
        let c2 = FourierCurve::new(b5, vec![1.0; 5], 1991).unwrap();
        assert!(CurveEnsemble::new(vec![c1.clone(), c2], default_day_grid()).is_err());
        let c3 = FourierCurve::new(b3, vec![1.0, 0.0, 0.0], 1989).unwrap();
        assert!(CurveEnsemble::new(vec![c1, c3], default_day_grid()).is_err());
    }
}
