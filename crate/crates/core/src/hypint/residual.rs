use crate::error::{Error, Result};
use crate::pfaffian::{PfaffianSystem, Space};
use crate::scalar::Scalar;
use crate::weylops::Parameters;

use super::dictionary::real;
use super::integral::{eval_psi1_f64, eval_psim_f64, real_z, IntegralEstimate};
use super::quadrature::QuadratureSpec;

/// How well quadrature coefficients satisfy `κ ∂_i c = M_i(z) c`.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeResidual {
    pub i: usize,
    /// `‖κ Δ_h c - M_i c‖₂ / ‖M_i c‖₂` with a fourth-order central difference `Δ_h`.
    pub residual: f64,
    pub step: f64,
    /// Largest quadrature error estimate over the five evaluations.
    pub quadrature_change: f64,
    pub coefficients: Vec<f64>,
}

/// Finite-difference check that the integral with `m` copies solves the
/// Schrödinger system in direction `z_i` (1-based) at a real point `z`.
///
/// `m = 1` uses the single-copy forms with `γ_n` on every level; `m >= 2`
/// uses the symmetrized forms.
pub fn pde_residual<S: Scalar>(
    params: &Parameters<S>,
    z: &[S],
    i: usize,
    m: u32,
    quad: &QuadratureSpec,
    step: f64,
) -> Result<PdeResidual> {
    if i == 0 || i > params.n {
        return Err(Error::Parameter(format!(
            "direction i = {i} outside 1..={}",
            params.n
        )));
    }
    if !(step > 0.0) {
        return Err(Error::Parameter(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let zf = real_z(z, params.n)?;
    let eval = |point: &[f64]| -> Result<IntegralEstimate> {
        if m == 1 {
            eval_psi1_f64(params, point, quad)
        } else {
            eval_psim_f64(params, point, m, quad)
        }
    };
    let shifted = |k: f64| {
        let mut p = zf.clone();
        p[i - 1] += k * step;
        p
    };
    let center = eval(&zf)?;
    let mut change = center.relative_change;
    let mut side = Vec::with_capacity(4);
    for k in [-2.0, -1.0, 1.0, 2.0] {
        let e = eval(&shifted(k))?;
        change = change.max(e.relative_change);
        side.push(e.values);
    }
    let dim = center.values.len();
    let deriv: Vec<f64> = (0..dim)
        .map(|r| (side[0][r] - 8.0 * side[1][r] + 8.0 * side[2][r] - side[3][r]) / (12.0 * step))
        .collect();

    let sys = PfaffianSystem::new(params, Space::Total(m))?;
    if sys.basis() != center.basis.as_slice() {
        return Err(Error::Structure(
            "integral and Pfaffian bases differ".into(),
        ));
    }
    let mi = sys.matrix_at(i, z)?;
    let kappa = real(&params.planck, "planck")?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (r, d) in deriv.iter().enumerate().take(dim) {
        let mut mc = 0.0;
        for (c, v) in center.values.iter().enumerate() {
            mc += real(mi.get(r, c), "M_i entry")? * v;
        }
        num += (kappa * d - mc).powi(2);
        den += mc * mc;
    }
    if den == 0.0 {
        return Err(Error::Convergence(
            "M_i c vanishes; relative residual undefined".into(),
        ));
    }
    Ok(PdeResidual {
        i,
        residual: (num / den).sqrt(),
        step,
        quadrature_change: change,
        coefficients: center.values,
    })
}
