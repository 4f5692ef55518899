//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while parsing, fitting, or resampling.
#[derive(Debug, Error)]
pub enum Error {
    /// A malformed row in a CSV input, with its 1-based line number.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Two rows claimed the same (year, day) slot.
    #[error("duplicate sample for year {year}, day {day}")]
    DuplicateDay { year: i32, day: u16 },

    /// The input contained no data rows at all.
    #[error("input contains no data rows")]
    EmptyDataset,

    /// An invalid configuration value (bad basis size, negative noise, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Fewer observations than basis functions; the fit has no unique solution.
    #[error("year {year}: {n_samples} samples cannot determine {n_basis} coefficients")]
    UnderdeterminedFit {
        year: i32,
        n_samples: usize,
        n_basis: usize,
    },

    /// The design matrix lost rank (degenerate sample grid).
    #[error("design matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },

    /// A bad argument to a numeric routine (empty grid, mismatched grids, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A fit inside a larger computation failed; carries the (year, p) context.
    #[error("fit failed for year {year} at p={p}: {source}")]
    FitContext {
        year: i32,
        p: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
