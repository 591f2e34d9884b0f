use thiserror::Error;

/// Errors raised by the surrogate-modelling pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PceError {
    #[error("invalid distribution parameters: {0}")]
    InvalidDistribution(String),

    #[error("value {value} outside the distribution support")]
    ValueOutOfSupport { value: f64 },

    #[error("value {value} outside the support of input variable {variable}")]
    OutOfSupport { variable: usize, value: f64 },

    #[error("sample {row}: value {value} outside the support of input variable {variable}")]
    SampleOutOfSupport { row: usize, variable: usize, value: f64 },

    #[error("sample {row}, variable {column}: standardized value {value} outside the polynomial domain")]
    OutsidePolynomialDomain { row: usize, column: usize, value: f64 },

    #[error("unit-cube coordinate {0} not in the open interval (0, 1)")]
    UnitOutOfRange(f64),

    #[error("basis of dimension {dimension} and degree {degree} is too large to enumerate")]
    BasisTooLarge { dimension: usize, degree: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("least-squares system is singular (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("underdetermined system: {rows} samples for {columns} coefficients")]
    Underdetermined { rows: usize, columns: usize },

    #[error("sample {index} has leverage {leverage}, leave-one-out error undefined")]
    DegenerateLeverage { index: usize, leverage: f64 },

    #[error("corrected error undefined for {terms} terms and {samples} samples")]
    CorrectionUndefined { terms: usize, samples: usize },

    #[error("reference responses have zero variance")]
    ZeroVariance,

    #[error("training failed: {0}")]
    TrainingFailed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("benchmark domain error: {0}")]
    BenchmarkDomain(String),
}

pub type Result<T, E = PceError> = std::result::Result<T, E>;
