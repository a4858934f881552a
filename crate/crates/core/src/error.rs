use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped by [`ErrorClass`] so front ends can map them onto
/// stable exit codes without matching every variant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {requested} exceeds the embedded direction-number table (capacity {capacity})")]
    Capacity { requested: usize, capacity: usize },

    #[error("precision error: {0}")]
    Precision(String),

    #[error("index {index} is out of range for {bits}-bit generator matrices")]
    IndexOutOfRange { index: u64, bits: u32 },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("partition error: {0}")]
    Partition(String),

    #[error("resource guard: {0}")]
    Resource(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("statistic is zero at m = {m}; cannot take its logarithm")]
    ZeroStatistic { m: u32 },

    #[error("evaluation failed at point index {index}: {source}")]
    Evaluation {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification of an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input or violated precondition.
    Validation,
    /// A size guard tripped.
    Resource,
    /// A numerical procedure failed to reach its tolerance.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Resource(_) => ErrorClass::Resource,
            Error::NonConvergence(_) | Error::ZeroStatistic { .. } => ErrorClass::Numerical,
            Error::Evaluation { source, .. } => source.class(),
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
