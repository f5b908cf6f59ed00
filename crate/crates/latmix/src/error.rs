//! Error types shared across the pipeline stages.

use thiserror::Error;

/// Problem definition and input-data errors.
#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("config schema error: {0}")]
    Schema(String),
    #[error("infeasible mixture: sum of lower bounds {sum_lower} exceeds 1")]
    InfeasibleLowers { sum_lower: f64 },
    #[error("infeasible mixture: sum of upper bounds {sum_upper} is below 1")]
    InfeasibleUppers { sum_upper: f64 },
    #[error("partition error: {0}")]
    Partition(String),
    #[error("component bounds for '{name}' invalid: lower {lower}, upper {upper}")]
    BadBounds { name: String, lower: f64, upper: f64 },
    #[error("data error: {0}")]
    Data(String),
    #[error("missing column '{0}' in experiment data")]
    MissingColumn(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Failures of the conditioned sampler for one bound permutation.
#[derive(Debug, Error)]
pub enum SamplerError {
    /// No single-component mixture can exist unless 1 lies inside the bounds.
    #[error("no feasible single-component mixture: 1 is outside [{lower}, {upper}]")]
    InfeasibleDim1 { lower: f64, upper: f64 },
    /// More rows were rejected than the configured allowance.
    #[error("rejection overflow: accepted {accepted} of {n_samp}, allowed at most {max_rej} rejections")]
    RejectionOverflow {
        accepted: usize,
        n_samp: usize,
        max_rej: usize,
    },
    /// The pairing loop exhausted its iteration cap below the rejection floor.
    #[error("infeasible permutation: matched {matched} of {n_samp} after {iterations} iterations (floor {floor})")]
    InfeasiblePermutation {
        matched: usize,
        n_samp: usize,
        floor: usize,
        iterations: usize,
    },
    #[error("dimension {0} not supported by the conditioned sampler (1..=4)")]
    UnsupportedDimension(usize),
    #[error("invalid sampler config: {0}")]
    BadConfig(String),
}

/// Permutation-driver errors.
#[derive(Debug, Error)]
pub enum DriverError {
    #[error("dimension {0} exceeds 4; partition the problem into subproblems first")]
    DimensionTooLarge(usize),
    #[error("dimension must be at least 1")]
    DimensionZero,
    #[error("no feasible samples from any permutation")]
    AggregateInfeasible,
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

/// Selection-stage errors.
#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("requested {requested} rows but only {available} candidates")]
    NotEnoughCandidates { requested: usize, available: usize },
    #[error("dimension mismatch: {left} vs {right} columns")]
    DimensionMismatch { left: usize, right: usize },
}

/// Metric-evaluation errors.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("design entry {value} at ({row}, {col}) is outside [0, 1]")]
    OutOfCube { value: f64, row: usize, col: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("need at least 2 non-degenerate columns for a 2-D projection, got {0}")]
    DegenerateProjection(usize),
    #[error("dimension mismatch: {left} vs {right} columns")]
    DimensionMismatch { left: usize, right: usize },
}

/// Top-level pipeline error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("pipeline error: {0}")]
    Pipeline(String),
}
