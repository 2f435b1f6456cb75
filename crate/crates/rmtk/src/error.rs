use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge: error estimate {error:.3e} above tolerance {tol:.3e}")]
    QuadratureFailure { error: f64, tol: f64 },

    #[error("jet holds {have} coefficients, pole order needs {need}")]
    InsufficientJetOrder { have: usize, need: usize },

    #[error("arguments {x_p} and {x_q} closer than the degeneracy floor {floor:e}")]
    DegenerateArguments { x_p: f64, x_q: f64, floor: f64 },

    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,

    #[error("matrix has odd dimension {0}")]
    OddDimension(usize),

    #[error("quaternion matrix is not self-dual")]
    SelfDualityViolated,

    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),

    #[error("need at least {min} samples, got {got}")]
    InsufficientSamples { min: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
