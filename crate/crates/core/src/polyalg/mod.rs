//! Multi-index combinatorics and polynomial arithmetic.
//!
//! A monomial `q^A = Π_{m,i} (q_m^{(i)})^{A_{m,i}}` is keyed by its exponent
//! matrix [`MultiIndex`]. The bases of the two invariant subspaces come from
//! [`enumerate_basis`] (total degree `<= M`) and [`enumerate_basis_ft`]
//! (per-level degree `<= T_m`), both in graded-lex order.

mod basis;
mod multi_index;
mod polynomial;

pub use basis::{binomial, enumerate_basis, enumerate_basis_ft, index_lookup};
pub use multi_index::MultiIndex;
pub use polynomial::Polynomial;
