use thiserror::Error;

/// Errors raised anywhere in the sampling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate simplex: |det| = {abs_det:e} is below tolerance")]
    DegenerateSimplex { abs_det: f64 },

    #[error("not a bounded polytope: {0}")]
    NotBounded(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("inconsistent facet incidence: {0}")]
    InconsistentIncidence(String),

    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error(
        "polytope too thin for rejection sampling: {accepted} of {proposals} proposals accepted"
    )]
    TooThin { accepted: u64, proposals: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidArgument(msg.into())
    }

    /// True for errors caused by malformed input files or I/O rather than geometry.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Self::Io(_) | Self::Json(_) | Self::Csv(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
