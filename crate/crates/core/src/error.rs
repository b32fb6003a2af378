use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Which diagonal block of the spectral-folding inner product is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// `L_SS`, rows and columns of the sampled set.
    Sampled,
    /// `L_ScSc`, rows and columns of the complement.
    Complement,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::Sampled => f.write_str("L_SS"),
            Block::Complement => f.write_str("L_ScSc"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("not positive definite: pivot {pivot:e} at row {row}")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("eigensolver did not converge within {iterations} iterations (eigenvalue {index})")]
    NoConvergence { index: usize, iterations: usize },

    #[error("eigen decomposition failed accuracy contract: residual {residual:e} (limit {residual_limit:e}), orthonormality error {orthonormality:e}")]
    AccuracyContract {
        residual: f64,
        residual_limit: f64,
        orthonormality: f64,
    },

    #[error("spectrum is not symmetric about 1 (max deviation {max_deviation:e})")]
    FoldingViolated { max_deviation: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("inadmissible partition, block {block} is singular: {diagnostic}")]
    InadmissiblePartition { block: Block, diagnostic: String },

    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty bandlimited subspace (no eigenvalue below 1)")]
    EmptyBandlimitedSubspace,

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("undefined SNR: reference signal has zero energy on the evaluation set")]
    UndefinedSnr,
}
