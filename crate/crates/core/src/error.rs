use thiserror::Error;

/// Which argument of a two-argument operation an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Argument {
    First,
    Second,
    Mixture,
}

impl std::fmt::Display for Argument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Argument::First => f.write_str("first"),
            Argument::Second => f.write_str("second"),
            Argument::Mixture => f.write_str("mixture"),
        }
    }
}

/// Coarse classification used by front ends to map errors to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input or parameters, detected before numerical work.
    Validation,
    /// A numerical precondition failed on otherwise valid input.
    Numerical,
    /// Parameter selection found no usable candidate.
    Infeasible,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error(
        "symmetric eigensolver did not converge after {sweeps} iterations \
         (off-diagonal norm {off_diagonal:e}, frobenius norm {frobenius:e}, \
         diagonal ratio {diagonal_ratio:e})"
    )]
    EigenNoConvergence {
        sweeps: usize,
        off_diagonal: f64,
        frobenius: f64,
        diagonal_ratio: f64,
    },

    #[error("eigenvalue {eigenvalue:e} is not above the floor {floor:e}")]
    NegativeEigenvalueBelowFloor { eigenvalue: f64, floor: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} < -{tolerance:e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{argument} covariance is singular (smallest eigenvalue {eigenvalue:e})")]
    SingularCovariance { argument: Argument, eigenvalue: f64 },

    #[error("{argument} covariance has numerical rank {rank} < k = {k}")]
    RankDeficient { k: usize, rank: usize, argument: Argument },

    #[error("divergence evaluated to {value:e}, beyond round-off tolerance {tolerance:e}")]
    NumericalInconsistency { value: f64, tolerance: f64 },

    #[error("distance family `{0}` needs samples, not Gaussian summaries")]
    UnsupportedForSummaries(String),

    #[error("sample has {n} observations; at least 2 are required")]
    TooFewObservations { n: usize },

    #[error("sample size {n} too small for k = {k}; need n >= k + 2")]
    SampleTooSmall { n: usize, k: usize },

    #[error("energy exponent {0} outside (0, 2]")]
    BadExponent(f64),

    #[error("sampling scheme infeasible: {0}")]
    SchemeInfeasible(String),

    #[error("empty input")]
    EmptyInput,

    #[error("no parameter in the selection grid could be evaluated")]
    AllParametersInfeasible,

    #[error("{failed} of {total} pseudo-pair distance evaluations failed (limit 10%): {last}")]
    TooManyFailures { failed: usize, total: usize, last: String },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            DimensionMismatch { .. }
            | NonFinite
            | NotSquare { .. }
            | InvalidParameter(_)
            | UnsupportedForSummaries(_)
            | TooFewObservations { .. }
            | SampleTooSmall { .. }
            | BadExponent(_)
            | SchemeInfeasible(_)
            | EmptyInput => ErrorKind::Validation,
            EigenNoConvergence { .. }
            | NegativeEigenvalueBelowFloor { .. }
            | NotPsd { .. }
            | SingularCovariance { .. }
            | RankDeficient { .. }
            | NumericalInconsistency { .. }
            | TooManyFailures { .. } => ErrorKind::Numerical,
            AllParametersInfeasible => ErrorKind::Infeasible,
        }
    }

    /// Variant name, for machine-readable reports.
    pub fn name(&self) -> &'static str {
        use Error::*;
        match self {
            DimensionMismatch { .. } => "DimensionMismatch",
            NonFinite => "NonFinite",
            NotSquare { .. } => "NotSquare",
            EigenNoConvergence { .. } => "EigenNoConvergence",
            NegativeEigenvalueBelowFloor { .. } => "NegativeEigenvalueBelowFloor",
            NotPsd { .. } => "NotPsd",
            InvalidParameter(_) => "InvalidParameter",
            SingularCovariance { .. } => "SingularCovariance",
            RankDeficient { .. } => "RankDeficient",
            NumericalInconsistency { .. } => "NumericalInconsistency",
            UnsupportedForSummaries(_) => "UnsupportedForSummaries",
            TooFewObservations { .. } => "TooFewObservations",
            SampleTooSmall { .. } => "SampleTooSmall",
            BadExponent(_) => "BadExponent",
            SchemeInfeasible(_) => "SchemeInfeasible",
            EmptyInput => "EmptyInput",
            AllParametersInfeasible => "AllParametersInfeasible",
            TooManyFailures { .. } => "TooManyFailures",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
