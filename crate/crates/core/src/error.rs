use thiserror::Error;

/// One rejected row of an input file.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestProblem {
    /// 1-based line number in the source file (the header is line 1).
    pub line: usize,
    pub reason: String,
}

impl std::fmt::Display for IngestProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller broke an interface contract (mismatched dimensions,
    /// non-increasing stage indices, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input file could not be ingested; every offending line is listed.
    #[error("ingestion error in {path}: {}", format_problems(.problems))]
    Ingest {
        path: String,
        problems: Vec<IngestProblem>,
    },

    /// Not enough data (or degenerate data) for an estimator.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// A collapse/misfit metric could not be evaluated.
    #[error("metric error: {0}")]
    Metric(String),

    /// A regression or EM fit could not be carried out as requested.
    #[error("fit error: {0}")]
    Fit(String),

    /// The quadrature inversion did not reach the requested accuracy.
    /// Carries the achieved bounds so callers can report them.
    #[error(
        "oracle accuracy error: normalization off by {norm_error:.3e} (tol {norm_tol:.1e}), \
         most negative density {min_density:.3e} (tol -{neg_tol:.1e})"
    )]
    OracleAccuracy {
        norm_error: f64,
        norm_tol: f64,
        min_density: f64,
        neg_tol: f64,
    },

    /// An exponent scan produced no usable grid point.
    #[error("scan error: {0}")]
    Scan(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn format_problems(problems: &[IngestProblem]) -> String {
    problems
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
