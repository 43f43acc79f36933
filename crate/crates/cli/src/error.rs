use serde::Serialize;
use thiserror::Error;

/// Failures surfaced to the user, each with a fixed process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Parse(String),

    #[error("invalid portfolio: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("{0}")]
    Numerical(String),

    #[error("{} table cell(s) deviate from the published values", .0.len())]
    Mismatch(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Mismatch(_) => 5,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::Mismatch(_) => "golden_mismatch",
        }
    }

    fn details(&self) -> &[String] {
        match self {
            CliError::Validation(d) | CliError::Mismatch(d) => d,
            _ => &[],
        }
    }

    /// Machine-readable form written to standard error.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            code: i32,
            message: String,
            details: &'a [String],
        }
        #[derive(Serialize)]
        struct Envelope<'a> {
            error: Body<'a>,
        }
        let env = Envelope {
            error: Body {
                kind: self.kind(),
                code: self.exit_code(),
                message: self.to_string(),
                details: self.details(),
            },
        };
        serde_json::to_string(&env).unwrap_or_else(|_| format!("{{\"error\":{{\"code\":{}}}}}", self.exit_code()))
    }
}

impl From<pitcap_core::Error> for CliError {
    fn from(e: pitcap_core::Error) -> Self {
        use pitcap_core::Error as E;
        match e {
            E::Validation(v) => CliError::Validation(v),
            E::Config(_) | E::Unsupported(_) | E::Dimension { .. } => CliError::Config(e.to_string()),
            E::Domain(_) | E::Capacity { .. } | E::Degenerate(_) | E::InfeasibleScenario { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
