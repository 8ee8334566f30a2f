use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid construction or configuration parameters.
    #[error("configuration: {0}")]
    Config(String),

    /// Inputs outside an operation's domain (dimension mismatch, bad ranges).
    #[error("domain: {0}")]
    Domain(String),

    /// An ODE or quadrature failed to reach the requested tolerance.
    #[error("integration: {0}")]
    Integration(String),

    /// Monte Carlo noise swamps the quantity being estimated.
    #[error("insufficient precision: estimate {estimate:.6e} with stderr {stderr:.6e}")]
    InsufficientPrecision { estimate: f64, stderr: f64 },

    /// A coherent-state frame is numerically degenerate.
    #[error("ill-conditioned frame: condition estimate {condition:.3e}")]
    IllConditionedFrame { condition: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
