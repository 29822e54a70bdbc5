//! Error taxonomy shared by all modules.

use num_complex::Complex64 as C64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Precondition violation on user-supplied input.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An eigensolver or linear solve failed to produce usable output.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A resolvent was requested at a point of the spectrum that was not
    /// excluded from it.
    #[error("resolvent singularity at z = {z}: eigenvalue {eigenvalue} within tolerance ({context})")]
    Singularity {
        z: C64,
        eigenvalue: C64,
        context: String,
    },

    /// An eigenvalue cluster could not be separated into one-dimensional
    /// biorthogonal eigenspaces.
    #[error("defective (non-diagonalizable) eigenvalue cluster near {cluster}: {detail}")]
    Defective { cluster: C64, detail: String },

    /// A unique object (steady state) was requested but the null space is
    /// degenerate.
    #[error("degenerate null space: {0}")]
    Degeneracy(String),

    /// The laser parameters heat the motion instead of cooling it; the
    /// stationary phonon distribution does not exist.
    #[error("heating regime: gamma_S = A- - A+ = {gamma_s:.6e} <= 0 (A+ = {a_plus:.6e}, A- = {a_minus:.6e})")]
    HeatingRegime {
        a_plus: f64,
        a_minus: f64,
        gamma_s: f64,
    },

    /// The Fock-space truncation is too small for the requested accuracy.
    #[error("truncation too small: {0}")]
    Truncation(String),
}
