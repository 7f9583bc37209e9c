//! Error taxonomy shared by all solvers.

/// Failure modes of the numerical pipeline.
///
/// `Domain` and `Config` indicate bad inputs; the remaining variants indicate
/// that a numerically meaningful computation could not be completed. The
/// command-line driver maps the former to exit code 1 and the latter to 2.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid run configuration (ladders, output selection, ...).
    #[error("config error: {0}")]
    Config(String),
    /// A computed quantity failed an internal consistency bound.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// An iteration exhausted its budget before reaching tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// The quadrature grid cannot resolve the requested scale.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// The operator K_T + λV stays nonnegative for all probed temperatures.
    #[error("no transition: {0}")]
    NoTransition(String),
    /// A truncation (mode cutoff, outer radius) did not converge.
    #[error("cutoff error: {0}")]
    Cutoff(String),
}

impl Error {
    /// Short stable label used in sweep records and CSV status columns.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain_error",
            Error::Config(_) => "config_error",
            Error::Numerical(_) => "numerical_error",
            Error::Convergence(_) => "convergence_error",
            Error::Resolution(_) => "resolution_error",
            Error::NoTransition(_) => "no_transition",
            Error::Cutoff(_) => "cutoff_error",
        }
    }

    /// True for errors caused by invalid input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
