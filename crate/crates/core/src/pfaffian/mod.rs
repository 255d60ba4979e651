//! Restriction of the Hamiltonians to invariant subspaces and the resulting
//! Pfaffian system `κ ∂_i c = M_i(z) c`.
//!
//! Matrices use the convention `(M_i)_{A,B}` = coefficient of `q^A` in
//! `H_i q^B`: columns are inputs, rows are outputs, and the coefficient vector
//! of `Ψ = Σ_A c_A q^A` is acted on from the left.

mod matrix;
mod system;
mod transport;

pub use matrix::Matrix;
pub use system::{
    central_difference, flatness_residual, restrict, restrict_operator, FlatnessResidual,
    PfaffianSystem, Space,
};
pub use transport::{
    monodromy_like_transport, propagate, StepStats, Tolerances, Transport, ZPath, POLE_GUARD,
};
