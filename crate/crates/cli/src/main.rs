use clap::{Args, Parser, Subcommand};
use fdband_cli::config::EMIT_FAMILIES;
use fdband_cli::{run_pipeline, CliError, RunConfig};
use fdband_core::{Region, SamplingPattern};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

/// Functional-data analysis of daily annual series: Fourier smoothing,
/// block mean functions, percentile bootstrap confidence bands, phase-plane
/// curves, and relative-change measures.
#[derive(Parser)]
#[command(name = "fdband", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert an NSIDC-style daily export to the canonical year,day,area CSV.
    ConvertNsidc {
        /// NSIDC CSV input (Year, Month, Day, Extent/Area columns).
        input: PathBuf,
        /// Canonical CSV output path.
        output: PathBuf,
    },
    /// Generate a deterministic synthetic canonical CSV for experimentation.
    Synth(SynthArgs),
    /// Fit per-year curves; emits coefficients and smoothed values.
    Smooth(CommonArgs),
    /// Profile the residual MSE over basis sizes and pick one.
    SelectBasis(CommonArgs),
    /// Mean/variance functions, block mean differences, extrema summary.
    Stats(CommonArgs),
    /// Bootstrap confidence bands per block partition.
    Bands(CommonArgs),
    /// Phase-plane curves (area, velocity, acceleration) per block.
    Phase(CommonArgs),
    /// Relative change of later block means against the first block.
    Change(CommonArgs),
    /// The full pipeline: every requested figure family plus the manifest.
    Report(CommonArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "arctic")]
    region: String,
    #[arg(long, default_value_t = 1979)]
    start_year: i32,
    /// Number of years to generate.
    #[arg(long, default_value_t = 37)]
    n_years: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Observation noise standard deviation (million km^2).
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    /// Total linear decline from the first to the last year (million km^2).
    #[arg(long, default_value_t = 0.0)]
    decline: f64,
    /// Sampling pattern: daily or alternate.
    #[arg(long, default_value = "daily")]
    pattern: String,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Canonical CSV input.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Region: arctic or antarctic.
    #[arg(long)]
    region: Option<String>,
    /// Restrict to an inclusive year range, e.g. 1979-2015.
    #[arg(long)]
    years: Option<String>,
    /// Fixed odd basis size; omit to select via the MSE profile.
    #[arg(long)]
    basis_count: Option<usize>,
    #[arg(long)]
    p_min: Option<usize>,
    #[arg(long)]
    p_max: Option<usize>,
    /// Flatness tolerance of the selection rule.
    #[arg(long)]
    flatness_tol: Option<f64>,
    /// Partition for stats/phase/change: t2..t9, even:N, decades, bands3,
    /// single, or explicit ranges 1979-1991,1992-2003,...
    #[arg(long)]
    partition: Option<String>,
    /// Comma-separated partitions for bands (default t2,t3,t4,t5).
    #[arg(long)]
    band_partitions: Option<String>,
    /// Phase-plane pair for SVG output: all, area-velocity (av),
    /// area-acceleration (aa), or velocity-acceleration (va).
    #[arg(long)]
    pair: Option<String>,
    /// Bootstrap replicate count B.
    #[arg(long, short = 'B')]
    b_samples: Option<usize>,
    /// Band coverage level in (0,1).
    #[arg(long)]
    level: Option<f64>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default $FDBAND_OUT_DIR, then ./fdband-out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated figure families to emit; each one of:
    /// raw, smoothed, mse, stats, bands, phase, change.
    #[arg(long)]
    emit: Option<String>,
    /// Skip SVG rendering, emitting only CSV/JSON data.
    #[arg(long)]
    no_svg: bool,
    /// Format change curves in percent instead of fractions.
    #[arg(long)]
    percent: bool,
}

impl CommonArgs {
    fn build_config(&self, default_emit: &[&str]) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(&format!("read {}", path.display()), e))?;
                RunConfig::from_json(&text)?
            }
            None => {
                let input = self.input.clone().ok_or_else(|| {
                    CliError::Config("--input is required (or provide --config)".into())
                })?;
                let region = self.region.clone().unwrap_or_else(|| "arctic".to_string());
                RunConfig::new(input, &region)
            }
        };
        // Subcommand scope beats the config file's emit list; an explicit
        // --emit beats both.
        cfg.emit = default_emit.iter().map(|s| s.to_string()).collect();

        if let Some(input) = &self.input {
            cfg.input = input.clone();
        }
        if let Some(region) = &self.region {
            cfg.region = region.clone();
        }
        if let Some(years) = &self.years {
            let (a, b) = years
                .split_once('-')
                .ok_or_else(|| CliError::Config(format!("bad year range {years:?}")))?;
            let a: i32 = a
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad year {a:?}")))?;
            let b: i32 = b
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad year {b:?}")))?;
            cfg.years = Some((a, b));
        }
        if let Some(p) = self.basis_count {
            cfg.basis_count = Some(p);
        }
        if let Some(v) = self.p_min {
            cfg.p_min = v;
        }
        if let Some(v) = self.p_max {
            cfg.p_max = v;
        }
        if let Some(v) = self.flatness_tol {
            cfg.flatness_tol = v;
        }
        if let Some(v) = &self.partition {
            cfg.stats_partition = v.clone();
        }
        if let Some(v) = &self.band_partitions {
            cfg.band_partitions = v.split(',').map(|s| s.trim().to_string()).collect();
        }
        if let Some(v) = &self.pair {
            cfg.phase_pair = v.clone();
        }
        if let Some(v) = self.b_samples {
            cfg.b_samples = v;
        }
        if let Some(v) = self.level {
            cfg.level = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out_dir {
            cfg.out_dir = Some(v.clone());
        }
        if let Some(v) = &self.emit {
            cfg.emit = v.split(',').map(|s| s.trim().to_string()).collect();
        }
        if self.no_svg {
            cfg.svg = false;
        }
        if self.percent {
            cfg.percent = true;
        }
        Ok(cfg)
    }
}

fn run_with_emit(args: &CommonArgs, default_emit: &[&str]) -> Result<(), CliError> {
    let cfg = args.build_config(default_emit)?;
    let (manifest, notes) = run_pipeline(&cfg)?;
    for note in &notes {
        println!("{note}");
    }
    println!(
        "wrote {} files to {} (see {})",
        manifest.files.len(),
        cfg.resolved_out_dir().display(),
        fdband_cli::pipeline::MANIFEST_NAME
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ConvertNsidc { input, output } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| CliError::io(&format!("read {}", input.display()), e))?;
            let canonical = fdband_core::nsidc_to_canonical(&text)
                .map_err(|e| CliError::from_core("convert-nsidc", e))?;
            std::fs::write(&output, &canonical)
                .map_err(|e| CliError::io(&format!("write {}", output.display()), e))?;
            println!(
                "wrote {} data rows to {}",
                canonical.lines().count().saturating_sub(1),
                output.display()
            );
            Ok(())
        }
        Command::Synth(args) => {
            let region =
                Region::from_str(&args.region).map_err(|e| CliError::Config(e.to_string()))?;
            let pattern = match args.pattern.as_str() {
                "daily" => SamplingPattern::Daily,
                "alternate" => SamplingPattern::AlternateDays,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown pattern {other:?} (daily or alternate)"
                    )))
                }
            };
            let dataset = fdband_cli::pipeline::synthetic_dataset(
                region,
                args.start_year,
                args.n_years,
                args.seed,
                args.noise,
                args.decline,
                pattern,
            )?;
            let csv = fdband_core::serialize_canonical_csv(&dataset);
            std::fs::write(&args.out, &csv)
                .map_err(|e| CliError::io(&format!("write {}", args.out.display()), e))?;
            println!(
                "wrote {} synthetic years to {}",
                dataset.n_years(),
                args.out.display()
            );
            Ok(())
        }
        Command::Smooth(args) => run_with_emit(&args, &["raw", "smoothed"]),
        Command::SelectBasis(args) => run_with_emit(&args, &["mse"]),
        Command::Stats(args) => run_with_emit(&args, &["stats"]),
        Command::Bands(args) => run_with_emit(&args, &["bands"]),
        Command::Phase(args) => run_with_emit(&args, &["phase"]),
        Command::Change(args) => run_with_emit(&args, &["change"]),
        Command::Report(args) => run_with_emit(&args, &EMIT_FAMILIES),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fdband: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
