//! Functional data analysis of daily annual series.
//!
//! Each year of daily observations is smoothed into a Fourier-basis curve by
//! least squares; ensembles of yearly curves then yield mean and variance
//! functions, decade-block means with percentile bootstrap confidence bands,
//! phase-plane (derivative) curves, and relative-change measures.
//!
//! The pipeline end to end:
//!
//! 1. [`ingest`]: parse `year,day,area` CSVs (sparse years and leap days
//!    handled) or synthesize ensembles from a known truth.
//! 2. [`basis`] + [`smooth`]: fit per-year curves, profile the residual MSE
//!    over basis sizes, and select the size where the profile flattens.
//! 3. [`stats`]: mean/variance functions, block grouping, extrema summaries.
//! 4. [`bootstrap`]: percentile bands of block mean functions, reproducible
//!    at any parallelism.
//! 5. [`phase`]: analytic velocity/acceleration and phase-plane curves.
//! 6. [`change`]: relative change of later blocks against a baseline.
//! 7. [`plot`]: deterministic SVG renderings of every figure family.

pub mod basis;
pub mod bootstrap;
pub mod change;
pub mod error;
pub mod ingest;
mod linalg;
pub mod partition;
pub mod phase;
pub mod plot;
pub mod smooth;
pub mod stats;

pub use basis::{DesignMatrix, FourierBasis, DAYS_PER_YEAR};
pub use bootstrap::{
    band_overlap, block_seed, bootstrap_band, bootstrap_summary, bootstrap_variance,
    ConfidenceBand,
};
pub use change::{percentage_change, ChangeCurve, DEFAULT_EPSILON};
pub use error::{Error, Result};
pub use ingest::{
    is_leap_year, nsidc_to_canonical, parse_canonical_csv, serialize_canonical_csv,
    synthesize_ensemble, Dataset, RawYearSeries, Region, SamplingPattern, SyntheticConfig,
};
pub use partition::{BlockPartition, YearRange};
pub use phase::{
    differentiate, phase_curve, phase_curve_of, zero_crossings, PhaseCurve, PhasePair,
};
pub use smooth::{
    default_day_grid, default_p_values, fit_ensemble, fit_year, mse_profile, residual_mse,
    select_basis_count, BasisSelection, CurveEnsemble, FourierCurve, MseProfile,
};
pub use stats::{
    extrema_summary, group_by_blocks, mean_difference, mean_function, variance_function,
    ExtremaSummary, GridFunction,
};
