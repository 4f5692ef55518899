//! Browser demo bindings: three interactive views over a deterministic
//! synthetic dataset shaped like the seasonal sea-ice cycle.
//!
//! Each `*_demo` export returns a standalone SVG document as a string; the
//! page swaps it into the DOM. The `*_impl` functions carry the logic and
//! stay testable on native targets.

use fdband_core::plot::{bands_chart, phase_chart, LineChart, Series};
use fdband_core::{
    block_seed, bootstrap_band, fit_year, group_by_blocks, phase_curve, residual_mse,
    synthesize_ensemble, BlockPartition, CurveEnsemble, FourierBasis, PhasePair, Region,
    SamplingPattern, SyntheticConfig,
};
use std::str::FromStr;
use wasm_bindgen::prelude::*;

const SVG_W: u32 = 720;
const SVG_H: u32 = 440;

// Seasonal ground truth (annual basis, p = 7): level, a March-peaked
// fundamental, and a second harmonic.
fn truth() -> Vec<f64> {
    let omega = std::f64::consts::TAU / 365.0;
    let (level, a1, t_max, a2, t2) = (11.5, 4.4, 64.0, 0.9, 30.0);
    vec![
        level,
        a1 * (omega * t_max).sin(),
        a1 * (omega * t_max).cos(),
        a2 * (2.0 * omega * t2).sin(),
        a2 * (2.0 * omega * t2).cos(),
        0.0,
        0.0,
    ]
}

fn synthetic(
    n_years: usize,
    seed: u64,
    noise_sd: f64,
    decline: f64,
    alternate: bool,
) -> Result<fdband_core::Dataset, String> {
    let offsets: Vec<f64> = (0..n_years)
        .map(|i| {
            if n_years <= 1 {
                0.0
            } else {
                -decline * i as f64 / (n_years - 1) as f64
            }
        })
        .collect();
    let cfg = SyntheticConfig {
        region: Region::Arctic,
        start_year: 1979,
        truth: truth(),
        offsets,
        noise_sd,
        seed,
        pattern: if alternate {
            SamplingPattern::AlternateDays
        } else {
            SamplingPattern::Daily
        },
    };
    synthesize_ensemble(&cfg).map_err(|e| e.to_string())
}

fn fit_all(dataset: &fdband_core::Dataset, p: usize) -> Result<CurveEnsemble, String> {
    let basis = FourierBasis::annual(p).map_err(|e| e.to_string())?;
    fdband_core::fit_ensemble(dataset, &basis, None).map_err(|e| e.to_string())
}

fn smooth_demo_impl(
    seed: u32,
    noise_pct: u32,
    p: u32,
    alternate: bool,
) -> Result<String, String> {
    let p = p as usize;
    if p == 0 || p.is_multiple_of(2) {
        return Err("basis size must be odd".to_string());
    }
    let noise_sd = noise_pct as f64 / 100.0;
    let dataset = synthetic(1, seed as u64, noise_sd, 0.0, alternate)?;
    let series = &dataset.years()[0];
    let basis = FourierBasis::annual(p).map_err(|e| e.to_string())?;
    let curve = fit_year(series, &basis, None).map_err(|e| e.to_string())?;
    let mse = residual_mse(series, &curve).map_err(|e| e.to_string())?;

    let grid = fdband_core::default_day_grid();
    let fitted = curve.values_on(&grid).map_err(|e| e.to_string())?;
    let truth_basis = FourierBasis::annual(7).map_err(|e| e.to_string())?;
    let truth_curve = fdband_core::FourierCurve::new(truth_basis, truth(), 1979)
        .map_err(|e| e.to_string())?;
    let truth_values = truth_curve.values_on(&grid).map_err(|e| e.to_string())?;

    let mut chart = LineChart::new(
        format!("Least-squares fit, p={p}, residual MSE {mse:.4}"),
        "day of year",
        "area (million km^2)",
    );
    chart.push(
        Series::line(
            format!("observations (n={})", series.len()),
            series.day_grid(),
            series.areas().to_vec(),
            "#9aa5b1",
        )
        .with_markers()
        .hidden_from_legend(),
    );
    chart.push(Series::line("truth", grid.clone(), truth_values, "seagreen").dashed());
    chart.push(Series::line(format!("fit (p={p})"), grid, fitted, "crimson"));
    Ok(chart.to_svg(SVG_W, SVG_H))
}

fn bands_demo_impl(
    t: u32,
    b_samples: u32,
    seed: u32,
    level_pct: u32,
    decline_tenths: u32,
) -> Result<String, String> {
    let t = t as usize;
    let level = level_pct as f64 / 100.0;
    if !(level > 0.0 && level < 1.0) {
        return Err("level must be between 1 and 99 percent".to_string());
    }
    let decline = decline_tenths as f64 / 10.0;
    let dataset = synthetic(37, seed as u64, 0.3, decline, false)?;
    let ensemble = fit_all(&dataset, 7)?;
    let partition = BlockPartition::even_blocks(1979, 37, t).map_err(|e| e.to_string())?;
    let blocks = group_by_blocks(&ensemble, &partition).map_err(|e| e.to_string())?;
    let mut bands = Vec::new();
    for (i, block) in blocks.iter().enumerate() {
        bands.push(
            bootstrap_band(
                block,
                b_samples as usize,
                level,
                block_seed(seed as u64, (t << 8) | i),
            )
            .map_err(|e| e.to_string())?,
        );
    }
    let refs: Vec<&fdband_core::ConfidenceBand> = bands.iter().collect();
    let chart = bands_chart(
        &format!("{level_pct}% bootstrap bands, {t} blocks, B={b_samples}, decline {decline:.1}"),
        &refs,
    );
    Ok(chart.to_svg(SVG_W, SVG_H))
}

fn phase_demo_impl(pair: &str, seed: u32, decline_tenths: u32) -> Result<String, String> {
    let pair = PhasePair::from_str(pair).map_err(|e| e.to_string())?;
    let decline = decline_tenths as f64 / 10.0;
    let dataset = synthetic(37, seed as u64, 0.3, decline, false)?;
    let ensemble = fit_all(&dataset, 7)?;
    let partition = BlockPartition::decades(1979);
    let blocks = group_by_blocks(&ensemble, &partition).map_err(|e| e.to_string())?;
    let curves = blocks
        .iter()
        .map(phase_curve)
        .collect::<fdband_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let refs: Vec<&fdband_core::PhaseCurve> = curves.iter().collect();
    let chart = phase_chart(
        &format!("Decade phase planes, decline {decline:.1}"),
        &refs,
        pair,
    );
    Ok(chart.to_svg(SVG_W, SVG_H))
}

/// One noisy synthetic year with its least-squares fit at basis size `p`.
/// Returns a standalone SVG; the title reports the residual MSE.
#[wasm_bindgen]
pub fn smooth_demo(seed: u32, noise_pct: u32, p: u32, alternate: bool) -> Result<String, JsError> {
    smooth_demo_impl(seed, noise_pct, p, alternate).map_err(|m| JsError::new(&m))
}

/// Bootstrap confidence bands over `t` blocks of a declining 37-year
/// synthetic ensemble.
#[wasm_bindgen]
pub fn bands_demo(
    t: u32,
    b_samples: u32,
    seed: u32,
    level_pct: u32,
    decline_tenths: u32,
) -> Result<String, JsError> {
    bands_demo_impl(t, b_samples, seed, level_pct, decline_tenths).map_err(|m| JsError::new(&m))
}

/// Phase-plane curves of the decade mean functions; pair is one of
/// "area-velocity", "area-acceleration", "velocity-acceleration".
#[wasm_bindgen]
pub fn phase_demo(pair: &str, seed: u32, decline_tenths: u32) -> Result<String, JsError> {
    phase_demo_impl(pair, seed, decline_tenths).map_err(|m| JsError::new(&m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demos_render_svg() {
        let svg = smooth_demo_impl(7, 30, 21, false).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>"));
        let svg = bands_demo_impl(3, 200, 1, 95, 25).unwrap();
        assert!(svg.contains("stroke-dasharray"));
        let svg = phase_demo_impl("area-velocity", 1, 25).unwrap();
        assert!(svg.contains("Jan"));
    }

    #[test]
    fn demos_reject_bad_arguments() {
        assert!(smooth_demo_impl(1, 10, 4, false).is_err());
        assert!(bands_demo_impl(2, 100, 1, 0, 0).is_err());
        assert!(phase_demo_impl("bogus", 1, 0).is_err());
    }

    #[test]
    fn demo_is_deterministic() {
        assert_eq!(
            smooth_demo_impl(3, 40, 11, true).unwrap(),
            smooth_demo_impl(3, 40, 11, true).unwrap()
        );
    }
}
