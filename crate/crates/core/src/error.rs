use thiserror::Error;

/// Errors raised by the numerical engines.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature on [{lo}, {hi}] exhausted {limit} subdivisions without meeting tolerance (estimated error {estimate:e})")]
    SubdivisionLimit {
        lo: f64,
        hi: f64,
        limit: usize,
        estimate: f64,
    },

    #[error("non-finite sample {value} at t = {at}")]
    NonFiniteSample { at: f64, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("step {step} does not divide t_max = {t_max}")]
    StepMismatch { step: f64, t_max: f64 },

    #[error(
        "periodicity violated for {what}: deviation {deviation:e} at t = {at} exceeds {tol:e}"
    )]
    PeriodicityViolation {
        what: String,
        at: f64,
        deviation: f64,
        tol: f64,
    },

    #[error("period contraction e^a(T) = {ratio} is not in (0, 1); lambda must be negative and the mean of rho positive")]
    NonContracting { ratio: f64 },

    #[error("sufficient conditions for a periodic limit not verified: {0}")]
    ConditionsNotVerified(String),

    #[error("matrix has a complex eigenvalue pair {re} ± {im}i")]
    ComplexSpectrum { re: f64, im: f64 },

    #[error("matrix is defective or nearly so (eigenvector condition estimate {condition:e})")]
    DefectiveMatrix { condition: f64 },

    #[error("eigenvalue {value} is not strictly negative")]
    NonNegativeEigenvalue { value: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("mode {index}: {source}")]
    Mode {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by the mathematical regime rather than by input plumbing.
    pub fn is_math_domain(&self) -> bool {
        match self {
            Error::NonContracting { .. }
            | Error::ComplexSpectrum { .. }
            | Error::DefectiveMatrix { .. }
            | Error::NonNegativeEigenvalue { .. } => true,
            Error::Mode { source, .. } => source.is_math_domain(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
