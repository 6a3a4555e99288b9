//! Scenario-driven front end for the networked SIS cap controller: build
//! graphs, classify regimes, run simulations, reproduce the built-in scale
//! experiments, and sweep parameters.

pub mod commands;
pub mod output;
pub mod scenario;

/// Worker-count cap for parallel sweeps.
pub const THREADS_ENV: &str = "EPINETCTL_THREADS";

/// Command-level failures mapped to process exit codes by `main`.
#[derive(Debug)]
pub enum CliError {
    /// Invalid scenario (exit 2); names the offending field.
    Scenario { field: String, message: String },
    /// Filesystem trouble (exit 3).
    Io(std::io::Error),
    /// A controlled run violated its caps (exit 4): a defect signal, the
    /// mathematics says this cannot happen.
    InvarianceFailure { max_cap_violation: f64, max_negativity: f64 },
    /// Anything else from the core library (exit 1).
    Core(epinet::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Scenario { field, message } => {
                write!(f, "invalid scenario: field `{field}`: {message}")
            }
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::InvarianceFailure {
                max_cap_violation,
                max_negativity,
            } => write!(
                f,
                "cap invariance violated in a controlled run \
                 (max cap violation {max_cap_violation:.3e}, max negativity {max_negativity:.3e})"
            ),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<epinet::Error> for CliError {
    fn from(e: epinet::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario { .. } => 2,
            CliError::Io(_) => 3,
            CliError::InvarianceFailure { .. } => 4,
            CliError::Core(_) => 1,
        }
    }
}
