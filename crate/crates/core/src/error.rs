use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid dimensions or violated parameter constraints.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Operator indices inconsistent with the polynomial context.
    #[error("structure error: {0}")]
    Structure(String),

    /// A point sits on a pole of the Hamiltonians.
    #[error("singularity: {0}")]
    Singularity(String),

    /// The Hamiltonian maps a basis element outside the requested subspace.
    #[error("H_{hamiltonian} maps {source_index} to {target_index}, outside the subspace")]
    OutOfSpace {
        hamiltonian: usize,
        source_index: String,
        target_index: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Point outside the integration chamber or the series disc.
    #[error("domain error: {0}")]
    Domain(String),

    /// Divergent exponent window or a quadrature that failed to stabilize.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Adaptive step control collapsed, typically near a pole.
    #[error("propagation failed at s = {s} on segment {segment}: {message}")]
    Propagation {
        segment: usize,
        s: f64,
        message: String,
    },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singularity(_) | Error::Convergence(_) | Error::Propagation { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
