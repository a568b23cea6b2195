use thiserror::Error;

/// Errors raised by the model, DPP and analysis layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("point outside the open parameter domain: {0}")]
    Domain(String),
    #[error("matrix is rank deficient (smallest/largest singular value {ratio:e})")]
    Rank { ratio: f64 },
    #[error("invalid projection kernel: {0}")]
    Kernel(String),
    #[error("invalid dimensions: {0}")]
    Dimension(String),
    #[error("no real critical point in the solution set")]
    NoRealSolution,
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),
}

/// Failures of the numerical solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("Jacobian is numerically singular (condition estimate {0:e})")]
    SingularJacobian(f64),
    #[error("Newton iteration diverged after {0} iterations")]
    Diverged(usize),
    #[error("path tracking failed at t = {t}: step size fell below minimum")]
    PathFailure { t: f64 },
    #[error("path ran into a pole of the rational system at t = {t}")]
    PoleHit { t: f64 },
    #[error("could not construct a start pair: {0}")]
    SeedFailure(String),
    #[error("model error: {0}")]
    Model(#[from] ModelError),
}
