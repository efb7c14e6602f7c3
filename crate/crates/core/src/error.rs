use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix data: {0}")]
    InvalidData(String),

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("Hermitian eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("map is not completely positive (minimum Choi eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("invalid Kraus rank {rank} for a channel M_{d} -> M_{r}")]
    InvalidRank { rank: usize, d: usize, r: usize },

    #[error("matrix is not an element of S({d}, {r})")]
    NotInOperatorSystem { d: usize, r: usize },

    #[error("not a superchannel: {0}")]
    NotSuperchannel(String),

    #[error("matrix is not {kind} (defect {defect:.3e})")]
    NotUnitary { kind: &'static str, defect: f64 },

    #[error("linear system residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("post-processing channel failed CPTP certification: {0}")]
    PostNotCptp(String),

    #[error("inconsistent affine constraints (residual {residual:.3e})")]
    InconsistentConstraints { residual: f64 },

    #[error("invalid QSC action: {0}")]
    InvalidQsc(String),

    #[error("constraint spanning element {index} is not Hermitian")]
    NonHermitianSpan { index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("problem too large: {unknowns} real unknowns exceeds the cap of {cap}")]
    SizeCap { unknowns: usize, cap: usize },
}

pub type Result<X> = std::result::Result<X, Error>;
