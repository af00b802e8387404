use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("symmetric eigensolver did not converge")]
    EigenNoConvergence,

    #[error("{0} requires a Dirichlet (open) box")]
    DirichletRequired(&'static str),

    #[error("{0} requires a periodic box")]
    PeriodicRequired(&'static str),

    #[error("{0} requires T > 0")]
    ZeroTemperature(&'static str),

    #[error("Fermi level {mu} lies within the degeneracy threshold of eigenvalue {energy}")]
    FermiLevelOnEigenvalue { mu: f64, energy: f64 },

    #[error("invalid bins: {0}")]
    InvalidBins(String),

    #[error("adaptive quadrature did not reach tolerance (estimated error {estimate:e})")]
    QuadratureNoConvergence { estimate: f64 },

    #[error("propagation drift {drift:e} exceeds tolerance {tolerance:e}")]
    UnitarityDrift { drift: f64, tolerance: f64 },

    #[error("linear-response fit rejected: {0}")]
    FitRejected(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
