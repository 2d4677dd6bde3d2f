//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by lattice, sampling, evaluation and I/O operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("field/lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inverse transform input is not Hermitian: imaginary residue {residue:.3e} exceeds {limit:.3e} of the norm")]
    NotHermitian { residue: f64, limit: f64 },

    #[error("the site law has no Lebesgue density (gaussian_var = 0)")]
    NoDensity,

    #[error("partition order {0} out of supported range {1}..={2}")]
    OrderOutOfRange(usize, usize, usize),

    #[error("moment table incomplete: missing subset mask {0:#b}")]
    IncompleteTable(u32),

    #[error("momentum within {tol:.1e} of the mass shell: k^2 - m^2 = {offset:.3e}")]
    ShellSingularity { offset: f64, tol: f64 },

    #[error("momenta do not sum to zero: max component residue {0:.3e}")]
    MomentumConstraint(f64),

    #[error("evaluation point outside the operation's domain: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimated error {err:.3e} after {evals} evaluations (target {target:.3e})")]
    QuadratureNonConvergence { err: f64, evals: usize, target: f64 },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("sidecar metadata error at {path}: {reason}")]
    Sidecar { path: String, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
