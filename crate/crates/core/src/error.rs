//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by constructors, numeric preconditions and scan configs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A matrix that was required to be hermitian is not, within tolerance.
    #[error("matrix is not hermitian (max |m - m†| = {defect:.3e})")]
    NonHermitianInput { defect: f64 },

    /// A matrix that was required to be unitary is not, within tolerance.
    #[error("matrix is not unitary (max |UU† - I| = {defect:.3e})")]
    NonUnitary { defect: f64 },

    /// A candidate density matrix violates hermiticity, unit trace or positivity.
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// A MEMS / source-state parameter outside its valid range.
    #[error("gamma = {gamma} outside valid range [{min}, {max}]")]
    GammaOutOfRange { gamma: f64, min: f64, max: f64 },

    /// A purity outside the valid range for the requested operation.
    #[error("purity = {mu} outside valid range [{min}, {max}]")]
    PurityOutOfRange { mu: f64, min: f64, max: f64 },

    /// A sampler was asked for a purity no state of the family can have.
    #[error("target purity = {mu} unreachable (valid range [{min}, {max}])")]
    UnreachablePurity { mu: f64, min: f64, max: f64 },

    /// A scan configuration fails validation.
    #[error("invalid scan config: {0}")]
    ConfigInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
