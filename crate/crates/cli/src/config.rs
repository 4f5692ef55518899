//! Run configuration: JSON config file, flag overrides (flags win), and
//! partition specs.

use fdband_core::{BlockPartition, Region};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FDBAND_OUT_DIR";

fn default_p_min() -> usize {
    1
}
fn default_p_max() -> usize {
    51
}
fn default_flatness_tol() -> f64 {
    0.01
}
fn default_stats_partition() -> String {
    "decades".to_string()
}
fn default_phase_pair() -> String {
    "all".to_string()
}
fn default_band_partitions() -> Vec<String> {
    vec!["t2".into(), "t3".into(), "t4".into(), "t5".into()]
}
fn default_b_samples() -> usize {
    5000
}
fn default_level() -> f64 {
    0.95
}
fn default_seed() -> u64 {
    42
}
fn default_emit() -> Vec<String> {
    EMIT_FAMILIES.iter().map(|s| s.to_string()).collect()
}
fn default_svg() -> bool {
    true
}

/// The figure families `emit` may name.
pub const EMIT_FAMILIES: [&str; 7] = [
    "raw", "smoothed", "mse", "stats", "bands", "phase", "change",
];

/// Everything a pipeline run needs; also echoed into the manifest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Canonical CSV input path.
    pub input: PathBuf,
    /// "arctic" or "antarctic".
    pub region: String,
    /// Optional inclusive year restriction, e.g. [1979, 2015].
    #[serde(default)]
    pub years: Option<(i32, i32)>,
    /// Fixed basis size; when absent the MSE selection rule chooses one.
    #[serde(default)]
    pub basis_count: Option<usize>,
    /// Smallest candidate basis size for selection.
    #[serde(default = "default_p_min")]
    pub p_min: usize,
    /// Largest candidate basis size for selection.
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    /// Relative flatness tolerance of the selection rule.
    #[serde(default = "default_flatness_tol")]
    pub flatness_tol: f64,
    /// Partition used for mean/variance/difference/phase/change analysis.
    #[serde(default = "default_stats_partition")]
    pub stats_partition: String,
    /// Partitions used for bootstrap bands.
    #[serde(default = "default_band_partitions")]
    pub band_partitions: Vec<String>,
    /// Which phase-plane pair to render as SVG: "all", "area-velocity",
    /// "area-acceleration", or "velocity-acceleration" (aliases av/aa/va).
    #[serde(default = "default_phase_pair")]
    pub phase_pair: String,
    /// Bootstrap replicate count B.
    #[serde(default = "default_b_samples")]
    pub b_samples: usize,
    /// Band coverage level in (0,1).
    #[serde(default = "default_level")]
    pub level: f64,
    /// Base RNG seed; block seeds derive from it.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory; falls back to $FDBAND_OUT_DIR, then "fdband-out".
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Figure families to emit.
    #[serde(default = "default_emit")]
    pub emit: Vec<String>,
    /// Render SVG figures alongside the CSV data.
    #[serde(default = "default_svg")]
    pub svg: bool,
    /// Format change curves as percent instead of fractions.
    #[serde(default)]
    pub percent: bool,
}

impl RunConfig {
    pub fn new(input: PathBuf, region: &str) -> Self {
        RunConfig {
            input,
            region: region.to_string(),
            years: None,
            basis_count: None,
            p_min: default_p_min(),
            p_max: default_p_max(),
            flatness_tol: default_flatness_tol(),
            stats_partition: default_stats_partition(),
            band_partitions: default_band_partitions(),
            phase_pair: default_phase_pair(),
            b_samples: default_b_samples(),
            level: default_level(),
            seed: default_seed(),
            out_dir: None,
            emit: default_emit(),
            svg: default_svg(),
            percent: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn region_parsed(&self) -> Result<Region, CliError> {
        Region::from_str(&self.region).map_err(|e| CliError::Config(e.to_string()))
    }

    /// The output directory after env-var and default fallback.
    pub fn resolved_out_dir(&self) -> PathBuf {
        if let Some(dir) = &self.out_dir {
            return dir.clone();
        }
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir);
            }
        }
        PathBuf::from("fdband-out")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.region_parsed()?;
        if let Some(p) = self.basis_count {
            if p == 0 || p.is_multiple_of(2) {
                return Err(CliError::Config(format!(
                    "basis_count must be odd, got {p}"
                )));
            }
        }
        if self.p_min.is_multiple_of(2) || self.p_max.is_multiple_of(2) || self.p_min > self.p_max {
            return Err(CliError::Config(format!(
                "selection range must be odd..odd with p_min <= p_max, got {}..{}",
                self.p_min, self.p_max
            )));
        }
        if self.b_samples == 0 {
            return Err(CliError::Config("b_samples must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::Config(format!(
                "level must be in (0,1), got {}",
                self.level
            )));
        }
        if let Some((a, b)) = self.years {
            if a > b {
                return Err(CliError::Config(format!("bad year range {a}-{b}")));
            }
        }
        for family in &self.emit {
            if !EMIT_FAMILIES.contains(&family.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown emit family {family:?} (expected one of {EMIT_FAMILIES:?})"
                )));
            }
        }
        parse_partition_spec(&self.stats_partition)?;
        for s in &self.band_partitions {
            parse_partition_spec(s)?;
        }
        self.phase_pairs_parsed()?;
        Ok(())
    }

    /// The phase pairs to render, resolved from `phase_pair`.
    pub fn phase_pairs_parsed(&self) -> Result<Vec<fdband_core::PhasePair>, CliError> {
        use fdband_core::PhasePair;
        if self.phase_pair.trim().eq_ignore_ascii_case("all") {
            return Ok(vec![
                PhasePair::AreaVelocity,
                PhasePair::AreaAcceleration,
                PhasePair::VelocityAcceleration,
            ]);
        }
        PhasePair::from_str(&self.phase_pair)
            .map(|p| vec![p])
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn emits(&self, family: &str) -> bool {
        self.emit.iter().any(|f| f == family)
    }
}

/// A partition spec before it meets a concrete year span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionSpec {
    /// Near-equal blocks, smaller first.
    Even(usize),
    /// The (13,12,12) decade split of a 37-year span.
    Decades,
    /// The (12,11,14) band split of a 37-year span.
    Bands3,
    /// One block covering everything.
    Single,
    /// Explicit inclusive ranges.
    Explicit(Vec<(i32, i32)>),
}

/// Accepts `t2`..`t9`, `even:N`, `decades`, `bands3`, `single`, or explicit
/// ranges like `1979-1991,1992-2003,2004-2015`.
pub fn parse_partition_spec(text: &str) -> Result<PartitionSpec, CliError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(CliError::Config("empty partition spec".into()));
    }
    match s {
        "decades" => return Ok(PartitionSpec::Decades),
        "bands3" => return Ok(PartitionSpec::Bands3),
        "single" => return Ok(PartitionSpec::Single),
        _ => {}
    }
    if let Some(rest) = s.strip_prefix('t') {
        if let Ok(t) = rest.parse::<usize>() {
            if t >= 1 {
                return Ok(PartitionSpec::Even(t));
            }
        }
    }
    if let Some(rest) = s.strip_prefix("even:") {
        let t: usize = rest
            .parse()
            .map_err(|_| CliError::Config(format!("bad block count in {s:?}")))?;
        if t >= 1 {
            return Ok(PartitionSpec::Even(t));
        }
        return Err(CliError::Config("block count must be positive".into()));
    }
    // Explicit ranges.
    let mut ranges = Vec::new();
    for part in s.split(',') {
        let (a, b) = part
            .split_once('-')
            .ok_or_else(|| CliError::Config(format!("bad partition spec {s:?}")))?;
        let start: i32 = a
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad year {a:?} in partition")))?;
        let end: i32 = b
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad year {b:?} in partition")))?;
        ranges.push((start, end));
    }
    Ok(PartitionSpec::Explicit(ranges))
}

/// Resolve a spec against a concrete year span.
pub fn resolve_partition(
    spec: &PartitionSpec,
    start_year: i32,
    n_years: usize,
) -> Result<BlockPartition, CliError> {
    let numeric = |e: fdband_core::Error| CliError::Config(e.to_string());
    match spec {
        PartitionSpec::Even(t) => {
            BlockPartition::even_blocks(start_year, n_years, *t).map_err(numeric)
        }
        PartitionSpec::Decades => {
            if n_years != 37 {
                return Err(CliError::Config(format!(
                    "the decades preset expects a 37-year span, got {n_years} years"
                )));
            }
            Ok(BlockPartition::decades(start_year))
        }
        PartitionSpec::Bands3 => {
            if n_years != 37 {
                return Err(CliError::Config(format!(
                    "the bands3 preset expects a 37-year span, got {n_years} years"
                )));
            }
            Ok(BlockPartition::bands_t3(start_year))
        }
        PartitionSpec::Single => {
            BlockPartition::single(start_year, start_year + n_years as i32 - 1).map_err(numeric)
        }
        PartitionSpec::Explicit(ranges) => {
            let blocks = ranges
                .iter()
                .map(|&(a, b)| fdband_core::YearRange::new(a, b))
                .collect::<Result<Vec<_>, _>>()
                .map_err(numeric)?;
            BlockPartition::new(blocks).map_err(numeric)
        }
    }
}
