use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument lies outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A complex evaluation touched the branch cut of a principal power/log.
    #[error("branch cut contact: {0}")]
    BranchCut(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    QuadNoConverge { achieved: f64, requested: f64 },

    /// A value violated an internal consistency bound (signals a numerical bug,
    /// never silently clipped).
    #[error("numerical consistency violation: {0}")]
    Numerical(String),

    /// Tabulated-function misuse (empty grid, evaluation outside the domain, ...).
    #[error("tabulation error: {0}")]
    Tabulation(String),

    /// Linear solve inside a marching scheme became singular.
    #[error("singular solve: {0}")]
    SingularSolve(String),

    /// Requested feature combination is not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
