use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator side {side} exceeds the dense cap of {cap}")]
    CapExceeded { side: usize, cap: usize },

    /// Raised by the L-fold constructors; the closed-form priors never need the operators.
    #[error("{copies}-fold operator would have side {side} (cap {cap}); priors-only mode is available")]
    FoldTooLarge {
        copies: usize,
        side: usize,
        cap: usize,
    },

    #[error("eigensolver did not converge on a {0}x{0} matrix")]
    EigenNonConvergence(usize),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("ensemble is not invariant under partial transposition (max residual {0:.3e})")]
    NotPtInvariant(f64),

    #[error("ensemble states are not orthogonal (Tr(rho0 rho1) = {0:.3e})")]
    NotOrthogonal(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("certificate hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("malformed ensemble document: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
