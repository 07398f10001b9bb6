use thiserror::Error;

/// Errors raised by the solvers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `s` is outside the window `[0, coupling/lambda)` where the scalar ground state exists.
    #[error("s = {s} is outside the existence window 0 <= s < {bound} (coupling/lambda)")]
    ExistenceWindow { s: f64, bound: f64 },

    /// Two profiles that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The radial grid is too short to resolve the exponential tail.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// Shooting could not bracket the initial value.
    #[error("shooting bracket not found on u(0) in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    /// Newton iteration did not reach the requested tolerance.
    #[error("newton did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    /// The linearization is numerically singular.
    #[error("singular jacobian (near bifurcation)")]
    SingularJacobian,

    /// A root finder failed.
    #[error("root finding failed: {0}")]
    NoRoot(String),
}

impl Error {
    /// True for errors caused by invalid inputs rather than solver breakdown.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::ExistenceWindow { .. } | Error::GridMismatch(_) | Error::Truncation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
