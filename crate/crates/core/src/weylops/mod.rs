//! The Weyl algebra `W_{L,N}` acting on polynomials, and the Hamiltonians.
//!
//! Generators `q_m^{(i)}` act by multiplication and `p_m^{(i)}` by
//! `ħ ∂/∂q_m^{(i)}`, so `[p_m^{(j)}, q_n^{(i)}] = δ_{mn} δ_{ij} ħ`. Operators
//! are kept as written (no normal ordering) and applied right factor first.

mod checks;
mod expr;
mod hamiltonian;
mod params;

pub use checks::{
    ahat_commutator_check, ahat_sweep, braid_residual, canonical_commutation_residual,
    commutator_residual, degree_raise, garnier_example, garnier_example_residual,
    leading_coefficient_residual, operator_commutator_residual, probes_up_to, AhatSweep,
    GarnierForm,
};
pub use expr::{ActionCache, OperatorExpr};
pub use hamiltonian::{ahat_entry, exchange_sum, hamiltonian, omega, HamiltonianParts};
pub use params::{check_admissible, sample_parameters, sample_z, Parameters, SampleOptions};
