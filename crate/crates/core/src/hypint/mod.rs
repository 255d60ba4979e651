//! Hypergeometric integral solutions of the Schrödinger system.
//!
//! For `κ_0 - Σ θ_i = M` the coefficients of an integral
//! `Ψ_M = Σ_A q^A ∫ U φ_A` over a twisted cycle solve `κ ∂_i c = M_i(z) c`.
//! Here the cycle is an explicit chamber ([`Chamber`]): the ordered simplex
//! per copy, or for `L >= 3`, `M = 2` one copy below `1` and the other
//! between `1` and `1/z_1`. The integrals are computed by cubature on the
//! unit cube after the substitution `t_k = t_{k-1} u_k`. The module also carries the series oracle for
//! `N = 1`, the Pfaffian matrix read off the cohomology computation, and the
//! rational identities used there.

mod chamber;
mod cohomology;
mod dictionary;
mod integral;
mod lemmas;
mod quadrature;
mod residual;
mod series;

pub use chamber::{Block, Chamber, ChamberPoint, Interval};
pub use cohomology::{
    compare_with_operator, pfaffian_from_cohomology, CohomologyAgreement, CohomologyForm,
};
pub use dictionary::{
    dictionary_m, dictionary_m1, parameters_for_m, parameters_for_m1, ExponentsM, ExponentsM1,
};
pub use integral::{
    eval_psi1, eval_psi1_f64, eval_psim, eval_psim_f64, eval_psim_on, eval_psim_unsymmetrized,
    forms_m1, weight_m1, IntegralEstimate, PhiIndexData, MAX_TENSOR_DIM,
};
pub use lemmas::{lemma_identity_check, random_lemma_point, LemmaId, LemmaPoint};
pub use quadrature::{
    gauss_jacobi, integrate, tanh_sinh, AxisRule, CubatureResult, CubeIntegrand, QuadratureSpec,
    Scheme,
};
pub use residual::{pde_residual, PdeResidual};
pub use series::{
    cube_exponents, series_psi1, series_ratio_closed_form, series_term_ratios, SeriesEstimate,
};
