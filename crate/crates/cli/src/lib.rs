//! Library side of the `fdband` command-line tool: configuration, the
//! pipeline runner, and the output manifest. The binary is a thin clap
//! wrapper over this.

pub mod config;
pub mod pipeline;

pub use config::{parse_partition_spec, resolve_partition, PartitionSpec, RunConfig};
pub use pipeline::{run_pipeline, Manifest, ManifestEntry};

/// CLI-level error classes, mapped onto exit codes: config errors exit 2,
/// input/parse and other I/O errors exit 3, numeric failures exit 4.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Input(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    /// Classify a core error into a CLI error, prefixed with the pipeline
    /// stage that raised it.
    pub fn from_core(stage: &str, e: fdband_core::Error) -> Self {
        use fdband_core::Error as E;
        let msg = format!("{stage}: {e}");
        match e {
            E::Parse { .. } | E::DuplicateDay { .. } | E::EmptyDataset => CliError::Input(msg),
            E::Config(_) => CliError::Config(msg),
            E::UnderdeterminedFit { .. }
            | E::RankDeficient { .. }
            | E::InvalidArgument(_)
            | E::FitContext { .. } => CliError::Numeric(msg),
        }
    }

    pub fn io(stage: &str, e: std::io::Error) -> Self {
        CliError::Input(format!("{stage}: {e}"))
    }
}
