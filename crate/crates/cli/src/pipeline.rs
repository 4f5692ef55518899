//! The pipeline runner: ingest, smooth, stats, bands, phase, change, and
//! figure emission, with a JSON manifest describing every file written.
//!
//! Reproducibility: the band for block `i` of a `t`-block partition uses
//! `block_seed(seed, (t << 8) | i)`; everything else is deterministic given
//! the config, so identical config and seed give byte-identical outputs.

use crate::config::{parse_partition_spec, resolve_partition, RunConfig};
use crate::CliError;
use fdband_core::plot::{bands_chart, change_chart, curves_chart, mse_charts, phase_chart, LineChart, Series};
use fdband_core::{
    block_seed, bootstrap_summary, band_overlap, extrema_summary, fit_ensemble, group_by_blocks,
    mean_difference, mean_function, mse_profile, percentage_change, phase_curve,
    select_basis_count, serialize_canonical_csv, variance_function, BlockPartition, CurveEnsemble,
    Dataset, FourierBasis, GridFunction, PhasePair, Region, SamplingPattern, SyntheticConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fs;
use std::path::PathBuf;

/// One emitted file: path relative to the output directory, the operation
/// that produced it, and its parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestEntry {
    pub path: String,
    pub op: String,
    pub params: Value,
}

/// The run manifest written as `manifest.json`. It lists every other file
/// in the output directory; the manifest itself is not an entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub region: String,
    pub years: (i32, i32),
    pub basis_count: usize,
    pub selection: Option<SelectionInfo>,
    pub files: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionInfo {
    pub p: usize,
    pub converged: bool,
}

pub const MANIFEST_NAME: &str = "manifest.json";

const SVG_W: u32 = 760;
const SVG_H: u32 = 480;

// Collects written files so a failed run can remove its partial outputs.
struct Emitter {
    root: PathBuf,
    written: Vec<PathBuf>,
    entries: Vec<ManifestEntry>,
}

impl Emitter {
    fn new(root: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&root).map_err(|e| CliError::io("create output directory", e))?;
        Ok(Emitter {
            root,
            written: Vec::new(),
            entries: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, op: &str, params: Value, content: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, content).map_err(|e| CliError::io(&format!("write {name}"), e))?;
        self.written.push(path);
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            op: op.to_string(),
            params,
        });
        Ok(())
    }

    fn cleanup(&self) {
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

// Evenly spaced hues for many-series overlays (raw and smoothed spaghetti).
fn hue_color(i: usize, n: usize) -> String {
    let h = (i * 360) / n.max(1);
    format!("hsl({h},70%,40%)")
}

/// Run the configured pipeline, writing artifacts and the manifest into the
/// output directory. Partial outputs are removed on failure.
pub fn run_pipeline(config: &RunConfig) -> Result<(Manifest, Vec<String>), CliError> {
    config.validate()?;
    let mut emitter = Emitter::new(config.resolved_out_dir())?;
    match run_stages(config, &mut emitter) {
        Ok((manifest, notes)) => Ok((manifest, notes)),
        Err(e) => {
            emitter.cleanup();
            Err(e)
        }
    }
}

fn run_stages(
    config: &RunConfig,
    emitter: &mut Emitter,
) -> Result<(Manifest, Vec<String>), CliError> {
    let mut notes = Vec::new();
    let region = config.region_parsed()?;
    let prefix = region.to_string();

    // Ingest.
    let text = fs::read_to_string(&config.input)
        .map_err(|e| CliError::io(&format!("read {}", config.input.display()), e))?;
    let mut dataset = fdband_core::parse_canonical_csv(&text, region)
        .map_err(|e| CliError::from_core("ingest", e))?;
    if let Some((a, b)) = config.years {
        dataset = dataset
            .restrict_years(a, b)
            .map_err(|e| CliError::from_core("ingest", e))?;
    }
    let span = dataset.year_span();
    notes.push(format!(
        "loaded {} years {}-{} ({})",
        dataset.n_years(),
        span.0,
        span.1,
        prefix
    ));

    if config.emits("raw") {
        emitter.write(
            &format!("{prefix}_raw.csv"),
            "ingest",
            json!({"input": config.input.display().to_string(), "years": [span.0, span.1]}),
            &serialize_canonical_csv(&dataset),
        )?;
        if config.svg {
            let mut chart = LineChart::new(
                format!("Raw daily area, {prefix} {}-{}", span.0, span.1),
                "day of year",
                "area (million km^2)",
            );
            let n = dataset.n_years();
            for (i, series) in dataset.years().iter().enumerate() {
                chart.push(
                    Series::line(
                        "",
                        series.day_grid(),
                        series.areas().to_vec(),
                        &hue_color(i, n),
                    )
                    .hidden_from_legend(),
                );
            }
            emitter.write(
                &format!("{prefix}_raw.svg"),
                "emit_svg",
                json!({"figure": "raw"}),
                &chart.to_svg(SVG_W, SVG_H),
            )?;
        }
    }

    // Basis selection.
    let mut selection = None;
    let p_values: Vec<usize> = (config.p_min..=config.p_max).step_by(2).collect();
    let need_profile = config.emits("mse") || config.basis_count.is_none();
    let profile = if need_profile {
        Some(
            mse_profile(&dataset, &p_values, fdband_core::DAYS_PER_YEAR)
                .map_err(|e| CliError::from_core("mse_profile", e))?,
        )
    } else {
        None
    };
    if let Some(profile) = &profile {
        if config.emits("mse") {
            emitter.write(
                &format!("{prefix}_mse_profile.csv"),
                "mse_profile",
                json!({"p_values": p_values, "skipped": profile.skipped().len()}),
                &profile.to_csv(),
            )?;
            if config.svg {
                let (mse, diff) = mse_charts(profile);
                emitter.write(
                    &format!("{prefix}_mse.svg"),
                    "emit_svg",
                    json!({"figure": "mse"}),
                    &mse.to_svg(SVG_W, SVG_H),
                )?;
                emitter.write(
                    &format!("{prefix}_mse_diff.svg"),
                    "emit_svg",
                    json!({"figure": "mse_diff"}),
                    &diff.to_svg(SVG_W, SVG_H),
                )?;
            }
        }
    }
    let basis_count = match config.basis_count {
        Some(p) => p,
        None => {
            let profile = profile.as_ref().expect("profile computed for selection");
            let sel = select_basis_count(profile, config.flatness_tol)
                .map_err(|e| CliError::from_core("select_basis_count", e))?;
            selection = Some(SelectionInfo {
                p: sel.p,
                converged: sel.converged,
            });
            notes.push(format!(
                "selected basis count p={}{}",
                sel.p,
                if sel.converged {
                    ""
                } else {
                    " (did not converge; largest candidate)"
                }
            ));
            sel.p
        }
    };

    // Smooth.
    let basis = FourierBasis::annual(basis_count).map_err(|e| CliError::from_core("smooth", e))?;
    let ensemble =
        fit_ensemble(&dataset, &basis, None).map_err(|e| CliError::from_core("smooth", e))?;
    if config.emits("smoothed") {
        let mut coeffs_csv = String::from("year");
        for k in 1..=basis_count {
            coeffs_csv.push_str(&format!(",c{k}"));
        }
        coeffs_csv.push('\n');
        for curve in ensemble.curves() {
            coeffs_csv.push_str(&curve.year().to_string());
            for c in curve.coeffs() {
                coeffs_csv.push_str(&format!(",{c}"));
            }
            coeffs_csv.push('\n');
        }
        emitter.write(
            &format!("{prefix}_coefficients.csv"),
            "fit_ensemble",
            json!({"p": basis_count}),
            &coeffs_csv,
        )?;

        let values = ensemble
            .values_matrix()
            .map_err(|e| CliError::from_core("smooth", e))?;
        let mut long_csv = String::from("year,day,value\n");
        for (curve, row) in ensemble.curves().iter().zip(&values) {
            for (day, v) in ensemble.grid().iter().zip(row) {
                long_csv.push_str(&format!("{},{day},{v}\n", curve.year()));
            }
        }
        emitter.write(
            &format!("{prefix}_smoothed.csv"),
            "fit_ensemble",
            json!({"p": basis_count}),
            &long_csv,
        )?;
        if config.svg {
            let mut chart = LineChart::new(
                format!("Smoothed curves (p={basis_count}), {prefix}"),
                "day of year",
                "area (million km^2)",
            );
            let n = ensemble.n_curves();
            for (i, row) in values.iter().enumerate() {
                chart.push(
                    Series::line("", ensemble.grid().to_vec(), row.clone(), &hue_color(i, n))
                        .hidden_from_legend(),
                );
            }
            emitter.write(
                &format!("{prefix}_smoothed.svg"),
                "emit_svg",
                json!({"figure": "smoothed"}),
                &chart.to_svg(SVG_W, SVG_H),
            )?;
        }
    }

    // Stats partition drives stats, phase, and change.
    let stats_spec = parse_partition_spec(&config.stats_partition)?;
    let stats_partition = resolve_partition(&stats_spec, span.0, dataset.n_years())?;
    let stats_blocks = group_by_blocks(&ensemble, &stats_partition)
        .map_err(|e| CliError::from_core("stats", e))?;

    if config.emits("stats") {
        run_stats_stage(config, emitter, &prefix, &ensemble, &stats_partition, &stats_blocks, &mut notes)?;
    }

    if config.emits("bands") {
        run_bands_stage(config, emitter, &prefix, &ensemble, span, &mut notes)?;
    }

    if config.emits("phase") {
        run_phase_stage(config, emitter, &prefix, &stats_blocks)?;
    }

    if config.emits("change") {
        run_change_stage(config, emitter, &prefix, &stats_blocks, &mut notes)?;
    }

    // Manifest.
    let mut files = emitter.entries.clone();
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        config: config.clone(),
        region: prefix,
        years: span,
        basis_count,
        selection,
        files,
    };
    let manifest_json =
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = emitter.root.join(MANIFEST_NAME);
    fs::write(&path, manifest_json).map_err(|e| CliError::io("write manifest", e))?;
    emitter.written.push(path);

    Ok((manifest, notes))
}

fn run_stats_stage(
    config: &RunConfig,
    emitter: &mut Emitter,
    prefix: &str,
    ensemble: &CurveEnsemble,
    partition: &BlockPartition,
    blocks: &[CurveEnsemble],
    notes: &mut Vec<String>,
) -> Result<(), CliError> {
    let stage = |e| CliError::from_core("stats", e);

    let mean_all = mean_function(ensemble).map_err(stage)?;
    emitter.write(
        &format!("{prefix}_mean_all.csv"),
        "mean_function",
        json!({"years": mean_all.label()}),
        &mean_all.to_csv(),
    )?;

    let mut block_means = Vec::new();
    let mut block_vars = Vec::new();
    let mut extrema = serde_json::Map::new();
    let all_summary = extrema_summary(&mean_all, 2);
    extrema.insert(
        "all".to_string(),
        json!({
            "years": format!("{}-{}", ensemble.year_span().0, ensemble.year_span().1),
            "min_value": all_summary.min_value,
            "max_value": all_summary.max_value,
            "min_day_window": all_summary.min_day_window,
            "max_day_window": all_summary.max_day_window,
            "mean_level": all_summary.mean_level,
        }),
    );
    notes.push(format!(
        "{prefix} all-years mean level {:.2} million km^2",
        all_summary.mean_level
    ));

    for (block, range) in blocks.iter().zip(partition.blocks()) {
        let label = range.to_string();
        let mean = mean_function(block).map_err(stage)?.with_label(label.clone());
        emitter.write(
            &format!("{prefix}_mean_{label}.csv"),
            "mean_function",
            json!({"block": label}),
            &mean.to_csv(),
        )?;
        let s = extrema_summary(&mean, 2);
        extrema.insert(
            label.clone(),
            json!({
                "min_value": s.min_value,
                "max_value": s.max_value,
                "min_day_window": s.min_day_window,
                "max_day_window": s.max_day_window,
                "mean_level": s.mean_level,
            }),
        );
        notes.push(format!(
            "{prefix} {label}: min {:.2}, max {:.2} million km^2",
            s.min_value, s.max_value
        ));
        block_means.push(mean);

        if block.n_curves() >= 2 {
            let var = variance_function(block).map_err(stage)?.with_label(label.clone());
            emitter.write(
                &format!("{prefix}_variance_{label}.csv"),
                "variance_function",
                json!({"block": label}),
                &var.to_csv(),
            )?;
            block_vars.push(var);
        }
    }

    let mut diffs = Vec::new();
    for pair in block_means.windows(2) {
        let d = mean_difference(&pair[0], &pair[1]).map_err(stage)?;
        let name = format!(
            "{prefix}_mean_diff_{}_minus_{}.csv",
            pair[0].label(),
            pair[1].label()
        );
        emitter.write(
            &name,
            "mean_difference",
            json!({"earlier": pair[0].label(), "later": pair[1].label()}),
            &d.to_csv(),
        )?;
        diffs.push(d);
    }

    emitter.write(
        &format!("{prefix}_extrema.json"),
        "extrema_summary",
        json!({"window_radius": 2}),
        &(serde_json::to_string_pretty(&Value::Object(extrema)).expect("extrema json") + "\n"),
    )?;

    if config.svg {
        let mut refs: Vec<&GridFunction> = block_means.iter().collect();
        refs.push(&mean_all);
        let mut colors: Vec<&str> = fdband_core::plot::block_palette(block_means.len());
        colors.push("gray");
        emitter.write(
            &format!("{prefix}_means.svg"),
            "emit_svg",
            json!({"figure": "means"}),
            &curves_chart(
                &format!("Block mean functions, {prefix}"),
                "day of year",
                "area (million km^2)",
                &refs,
                Some(&colors),
            )
            .to_svg(SVG_W, SVG_H),
        )?;
        if !block_vars.is_empty() {
            let refs: Vec<&GridFunction> = block_vars.iter().collect();
            emitter.write(
                &format!("{prefix}_variances.svg"),
                "emit_svg",
                json!({"figure": "variances"}),
                &curves_chart(
                    &format!("Block variance functions, {prefix}"),
                    "day of year",
                    "variance",
                    &refs,
                    None,
                )
                .to_svg(SVG_W, SVG_H),
            )?;
        }
        if !diffs.is_empty() {
            let refs: Vec<&GridFunction> = diffs.iter().collect();
            emitter.write(
                &format!("{prefix}_mean_diffs.svg"),
                "emit_svg",
                json!({"figure": "mean_diffs"}),
                &curves_chart(
                    &format!("Consecutive block mean differences, {prefix}"),
                    "day of year",
                    "difference (million km^2)",
                    &refs,
                    Some(&["black", "red", "blue", "green"]),
                )
                .to_svg(SVG_W, SVG_H),
            )?;
        }
    }
    Ok(())
}

fn run_bands_stage(
    config: &RunConfig,
    emitter: &mut Emitter,
    prefix: &str,
    ensemble: &CurveEnsemble,
    span: (i32, i32),
    notes: &mut Vec<String>,
) -> Result<(), CliError> {
    let stage = |e| CliError::from_core("bands", e);
    for spec_text in &config.band_partitions {
        let spec = parse_partition_spec(spec_text)?;
        let partition = resolve_partition(&spec, span.0, ensemble.n_curves())?;
        let blocks = group_by_blocks(ensemble, &partition).map_err(stage)?;
        let t = partition.n_blocks();
        let tag = sanitize(spec_text);

        let mut bands = Vec::new();
        for (i, block) in blocks.iter().enumerate() {
            let seed = block_seed(config.seed, (t << 8) | i);
            let (band, variance) =
                bootstrap_summary(block, config.b_samples, config.level, seed).map_err(stage)?;
            let label = band.label().to_string();
            emitter.write(
                &format!("{prefix}_band_{tag}_{label}.csv"),
                "bootstrap_band",
                json!({"B": config.b_samples, "level": config.level, "seed": seed, "block": label}),
                &band.to_csv(),
            )?;
            emitter.write(
                &format!("{prefix}_bootvar_{tag}_{label}.csv"),
                "bootstrap_variance",
                json!({"B": config.b_samples, "seed": seed, "block": label}),
                &variance.to_csv(),
            )?;
            bands.push(band);
        }

        for pair in bands.windows(2) {
            let overlap = band_overlap(&pair[0], &pair[1]).map_err(stage)?;
            let disjoint = overlap.values().iter().filter(|v| **v < 0.0).count();
            let frac = disjoint as f64 / overlap.values().len() as f64;
            notes.push(format!(
                "{prefix} {tag}: bands {} vs {} disjoint on {:.0}% of days",
                pair[0].label(),
                pair[1].label(),
                100.0 * frac
            ));
            emitter.write(
                &format!(
                    "{prefix}_overlap_{tag}_{}_vs_{}.csv",
                    pair[0].label(),
                    pair[1].label()
                ),
                "band_overlap",
                json!({"a": pair[0].label(), "b": pair[1].label()}),
                &overlap.to_csv(),
            )?;
        }

        if config.svg {
            let refs: Vec<&fdband_core::ConfidenceBand> = bands.iter().collect();
            emitter.write(
                &format!("{prefix}_bands_{tag}.svg"),
                "emit_svg",
                json!({"figure": "bands", "partition": spec_text}),
                &bands_chart(
                    &format!("{}% bootstrap bands ({tag}), {prefix}", config.level * 100.0),
                    &refs,
                )
                .to_svg(SVG_W, SVG_H),
            )?;
        }
    }
    Ok(())
}

fn run_phase_stage(
    config: &RunConfig,
    emitter: &mut Emitter,
    prefix: &str,
    blocks: &[CurveEnsemble],
) -> Result<(), CliError> {
    let stage = |e| CliError::from_core("phase", e);
    let mut curves = Vec::new();
    for block in blocks {
        let pc = phase_curve(block).map_err(stage)?;
        emitter.write(
            &format!("{prefix}_phase_{}.csv", pc.label()),
            "phase_curve",
            json!({"block": pc.label()}),
            &pc.to_csv(),
        )?;
        emitter.write(
            &format!("{prefix}_phase_{}_anchors.json", pc.label()),
            "phase_curve",
            json!({"block": pc.label(), "kind": "month_anchors"}),
            &(pc.anchors_json() + "\n"),
        )?;
        curves.push(pc);
    }
    if config.svg {
        let refs: Vec<&fdband_core::PhaseCurve> = curves.iter().collect();
        for pair in config.phase_pairs_parsed()? {
            let name = match pair {
                PhasePair::AreaVelocity => "area_velocity",
                PhasePair::AreaAcceleration => "area_acceleration",
                PhasePair::VelocityAcceleration => "velocity_acceleration",
            };
            emitter.write(
                &format!("{prefix}_phase_{name}.svg"),
                "emit_svg",
                json!({"figure": "phase", "pair": name}),
                &phase_chart(&format!("Phase plane ({name}), {prefix}"), &refs, pair)
                    .to_svg(SVG_W, SVG_H),
            )?;
        }
    }
    Ok(())
}

fn run_change_stage(
    config: &RunConfig,
    emitter: &mut Emitter,
    prefix: &str,
    blocks: &[CurveEnsemble],
    notes: &mut Vec<String>,
) -> Result<(), CliError> {
    let stage = |e| CliError::from_core("change", e);
    if blocks.len() < 2 {
        notes.push(format!(
            "{prefix} change: need at least two blocks, skipping"
        ));
        return Ok(());
    }
    let baseline = {
        let (s, e) = blocks[0].year_span();
        mean_function(&blocks[0])
            .map_err(stage)?
            .with_label(format!("{s}-{e}"))
    };
    let mut curves = Vec::new();
    for block in &blocks[1..] {
        let (s, e) = block.year_span();
        let target = mean_function(block)
            .map_err(stage)?
            .with_label(format!("{s}-{e}"));
        let change = percentage_change(&baseline, &target, fdband_core::DEFAULT_EPSILON)
            .map_err(stage)?;
        if let Some(min) = change.min_value() {
            notes.push(format!(
                "{prefix} change {} vs {}: minimum {:.1}%",
                target.label(),
                baseline.label(),
                100.0 * min
            ));
        }
        emitter.write(
            &format!(
                "{prefix}_change_{}_vs_{}.csv",
                target.label(),
                baseline.label()
            ),
            "percentage_change",
            json!({"baseline": baseline.label(), "target": target.label(), "percent": config.percent}),
            &change.to_csv(config.percent),
        )?;
        curves.push(change);
    }
    if config.svg && !curves.is_empty() {
        let refs: Vec<&fdband_core::ChangeCurve> = curves.iter().collect();
        emitter.write(
            &format!("{prefix}_change.svg"),
            "emit_svg",
            json!({"figure": "change"}),
            &change_chart(
                &format!("Relative change vs {}, {prefix}", baseline.label()),
                &refs,
                config.percent,
            )
            .to_svg(SVG_W, SVG_H),
        )?;
    }
    Ok(())
}

/// A deterministic synthetic dataset shaped like the seasonal sea-ice cycle:
/// an annual level around 11.5 with a March-peaked fundamental for the
/// arctic-like shape, or a September-peaked one for the antarctic-like
/// shape, plus optional per-year linear decline.
pub fn synthetic_dataset(
    region: Region,
    start_year: i32,
    n_years: usize,
    seed: u64,
    noise_sd: f64,
    total_decline: f64,
    pattern: SamplingPattern,
) -> Result<Dataset, CliError> {
    let truth = synthetic_truth(region);
    let offsets: Vec<f64> = (0..n_years)
        .map(|i| {
            if n_years <= 1 {
                0.0
            } else {
                -total_decline * i as f64 / (n_years - 1) as f64
            }
        })
        .collect();
    let cfg = SyntheticConfig {
        region,
        start_year,
        truth,
        offsets,
        noise_sd,
        seed,
        pattern,
    };
    fdband_core::synthesize_ensemble(&cfg).map_err(|e| CliError::from_core("synth", e))
}

/// Ground-truth coefficients for the synthetic shapes (annual basis, p=7).
pub fn synthetic_truth(region: Region) -> Vec<f64> {
    let omega = std::f64::consts::TAU / 365.0;
    // Fundamental peaked at t_max with amplitude a1, plus a second harmonic.
    let (level, a1, t_max, a2, t2) = match region {
        Region::Arctic => (11.5, 4.4, 64.0, 0.9, 30.0),
        Region::Antarctic => (11.8, 7.3, 265.0, 0.8, 210.0),
    };
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_truth_peaks_in_the_right_season() {
        let basis = FourierBasis::annual(7).unwrap();
        let eval = |coeffs: &[f64], t: f64| -> f64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c * basis.eval(i + 1, t, 0).unwrap())
                .sum()
        };
        let arctic = synthetic_truth(Region::Arctic);
        assert!(eval(&arctic, 64.0) > eval(&arctic, 250.0));
        let antarctic = synthetic_truth(Region::Antarctic);
        assert!(eval(&antarctic, 265.0) > eval(&antarctic, 60.0));
        // Stays positive even with a few units of decline.
        for day in 1..=365 {
            assert!(eval(&arctic, day as f64) > 3.5);
            assert!(eval(&antarctic, day as f64) > 3.0);
        }
    }

    #[test]
    fn sanitize_keeps_safe_characters() {
        assert_eq!(sanitize("t2"), "t2");
        assert_eq!(sanitize("even:5"), "even_5");
        assert_eq!(sanitize("1979-1991,1992-2015"), "1979-1991_1992-2015");
    }
}
