use thiserror::Error;

/// Crate-wide error type. The CLI maps variants onto exit codes, so the
/// split between config and runtime errors is load-bearing.
#[derive(Debug, Error)]
pub enum Error {
    /// Config file could not be read.
    #[error("cannot read config {path}: {source}")]
    ConfigIo {
        path: String,
        source: std::io::Error,
    },

    /// Config document is not valid JSON. Message carries line/column.
    #[error("config parse error: {0}")]
    ConfigParse(String),

    /// Config document parsed but failed validation. `key` is the full
    /// key path, e.g. "datacenter.soc_min".
    #[error("invalid config at {key}: {message}")]
    ConfigInvalid { key: String, message: String },

    /// A state variable left the representable range during integration.
    #[error("numeric divergence in {field} at t = {t} s")]
    NumericDivergence { field: &'static str, t: f64 },

    /// Scenario or sweep input that cannot be run (bad grid of values,
    /// zero droop split, non-integral step count).
    #[error("cannot run scenario: {0}")]
    Scenario(String),

    /// Small-signal model with d + k_dc = 0 has no finite steady state.
    #[error("unbounded response: d + k_dc = 0")]
    UnboundedResponse,

    /// Output file I/O failure.
    #[error("cannot write {path}: {source}")]
    OutputIo {
        path: String,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for config problems, 3 for
    /// runtime failures. Usage errors (1) never reach this type.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigIo { .. }
            | Error::ConfigParse(_)
            | Error::ConfigInvalid { .. } => 2,
            Error::NumericDivergence { .. }
            | Error::Scenario(_)
            | Error::UnboundedResponse
            | Error::OutputIo { .. } => 3,
        }
    }
}
