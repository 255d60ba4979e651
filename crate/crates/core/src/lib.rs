//! Quantum isomonodromic Hamiltonians on polynomial spaces.
//!
//! The crate builds the commuting Hamiltonians `H_1, ..., H_N` of the quantized
//! Garnier-type systems as operators on polynomials in `q_m^{(i)}`, restricts
//! them to finite invariant subspaces, and checks that hypergeometric integrals
//! solve the resulting Schrödinger (Pfaffian) system `κ ∂_i c = M_i(z) c`.
//!
//! - [`polyalg`]: multi-indices, bases, polynomial arithmetic.
//! - [`weylops`]: Weyl-algebra operators, the Hamiltonians, exact identity checks.
//! - [`pfaffian`]: matrices `M_i(z)`, flatness, ODE transport along paths.
//! - [`hypint`]: integral solutions, the series oracle, the cohomology Pfaffian.

pub mod error;
pub mod hypint;
pub mod pfaffian;
pub mod polyalg;
pub mod scalar;
pub mod weylops;

pub use error::{Error, Result};
pub use scalar::{Complex, Rational, Scalar, ScalarKind};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/overview.md")]
pub struct BookOverview;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/hamiltonians.md")]
pub struct BookHamiltonians;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/pfaffian.md")]
pub struct BookPfaffian;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/integrals.md")]
pub struct BookIntegrals;
