use thiserror::Error;

/// Errors shared by all epinet modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not draw a strongly connected network in {attempts} attempts")]
    Disconnected { attempts: usize },

    #[error("matrix is not irreducible (support graph not strongly connected)")]
    NotIrreducible,

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("wrong regime: spectral abscissa {abscissa:.6} is not positive")]
    WrongRegime { abscissa: f64 },

    #[error("non-finite state at t = {time} in component {component}")]
    NonFiniteState { time: f64, component: usize },

    #[error("adaptive step size underflow at t = {time}")]
    StepSizeUnderflow { time: f64 },

    #[error("equilibrium component {index} is zero; relative deviation undefined")]
    ZeroEquilibriumComponent { index: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
