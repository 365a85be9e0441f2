use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Caller broke a documented precondition (mismatched jet orders, bad dimensions).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A jet with vanishing constant term was inverted. In the recursions this
    /// means an energy denominator vanished.
    #[error("singular jet: constant term is zero")]
    SingularJet,

    #[error("invalid model: {field}: {reason}")]
    InvalidModel { field: String, reason: String },

    /// Input outside the region where an operation is defined (e.g. a series
    /// evaluated beyond its radius of convergence).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e}, matrix norm {norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64, norm: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("degenerate levels {i} and {j}: |E_i - E_j| = {gap:e} is below the floor {floor:e}")]
    Degeneracy { i: usize, j: usize, gap: f64, floor: f64 },

    #[error("eigenvector continuation failed: best overlap with the initial state is {overlap:.3} (< 0.5)")]
    Continuation { overlap: f64 },

    /// A quantity that must be real came out with a sizable imaginary part.
    #[error("consistency error: Im({field}) = {imag:e} exceeds {limit:e}")]
    Consistency { field: String, imag: f64, limit: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidModel { field: field.to_string(), reason: reason.into() }
    }
}
