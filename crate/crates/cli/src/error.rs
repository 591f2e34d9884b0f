use std::fmt;

use sparse_pce::PceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Data => "data",
            ErrorKind::Numerical => "numerical",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Config, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Data, message: message.into() }
    }

    /// One-line JSON object for the error stream.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": self.kind.label(),
            "exit_code": self.kind.exit_code(),
            "message": self.message,
        })
        .to_string()
    }

    pub fn context(self, prefix: impl fmt::Display) -> Self {
        Self { kind: self.kind, message: format!("{prefix}: {}", self.message) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind.label(), self.message)
    }
}

impl From<PceError> for CliError {
    fn from(e: PceError) -> Self {
        use PceError::*;
        let kind = match e {
            InvalidDistribution(_) | BasisTooLarge { .. } | InvalidArgument(_) => ErrorKind::Config,
            ValueOutOfSupport { .. }
            | OutOfSupport { .. }
            | SampleOutOfSupport { .. }
            | OutsidePolynomialDomain { .. }
            | UnitOutOfRange(_)
            | DimensionMismatch { .. }
            | BenchmarkDomain(_) => ErrorKind::Data,
            Singular { .. }
            | Underdetermined { .. }
            | DegenerateLeverage { .. }
            | CorrectionUndefined { .. }
            | ZeroVariance
            | TrainingFailed(_) => ErrorKind::Numerical,
        };
        Self { kind, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
