use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::polyalg::{enumerate_basis, MultiIndex};
use crate::scalar::Scalar;
use crate::weylops::Parameters;

use super::dictionary::{dictionary_m1, real, ExponentsM1};

/// Power-series values of the single-copy coefficients for `N = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesEstimate {
    pub basis: Vec<MultiIndex>,
    pub values: Vec<f64>,
    /// Highest power of `z` summed.
    pub order: usize,
    /// Bound on the omitted tail of each coefficient (infinite if the
    /// geometric bound does not apply).
    pub tail_bound: Vec<f64>,
    /// Per-axis exponents `(a_j, b_j)` of `c_∅`'s integrand on the cube at `z = 0`.
    pub exponents: Vec<(f64, f64)>,
}

/// `(a_j, b_j)` with `a_j = Σ_{n>=j} α_n/κ - Σ_{n>j} γ_n/κ - 1` and
/// `b_j = -γ_j/κ - 1`: the integrand of `c_∅` at `z = 0` after
/// `t_j = t_{j-1} u_j` is `Π u_j^{a_j} (1 - u_j)^{b_j}`.
pub fn cube_exponents(e: &ExponentsM1<f64>) -> Vec<(f64, f64)> {
    let k = e.planck;
    let levels = e.alpha.len();
    (1..=levels)
        .map(|j| {
            let a: f64 = e.alpha[j - 1..].iter().sum::<f64>() / k
                - e.gamma[j..].iter().sum::<f64>() / k
                - 1.0;
            (a, -e.gamma[j - 1] / k - 1.0)
        })
        .collect()
}

/// One coefficient: `sign · Σ_k (s)_k / k! z^k Π_j B(a_j + k + 1, b_j + 1)`.
struct Coefficient {
    s: f64,
    axes: Vec<(f64, f64)>,
    sign: f64,
}

impl Coefficient {
    /// Terms `k = 0..=order + 1`; the last one is the first omitted term.
    fn terms(&self, z: f64, order: usize) -> Vec<f64> {
        let ln_base: f64 = self
            .axes
            .iter()
            .map(|&(a, b)| ln_beta(a + 1.0, b + 1.0))
            .sum();
        let mut out = Vec::with_capacity(order + 2);
        let mut coef = 1.0; // (s)_k z^k / k!
        let mut ln_ratio = 0.0; // Σ ln Π B(a+k+1, b+1)/B(a+1, b+1)
        for k in 0..=order + 1 {
            out.push(self.sign * coef * (ln_base + ln_ratio).exp());
            let kf = k as f64;
            coef *= (self.s + kf) * z / (kf + 1.0);
            ln_ratio += self
                .axes
                .iter()
                .map(|&(a, b)| ((a + kf + 1.0) / (a + b + kf + 2.0)).ln())
                .sum::<f64>();
        }
        out
    }

    /// `T_{k+1} / T_k`, a rational function of `k` of degree `L` over degree `L`.
    fn ratio(&self, z: f64, k: usize) -> f64 {
        let kf = k as f64;
        z * (self.s + kf) / (kf + 1.0)
            * self
                .axes
                .iter()
                .map(|&(a, b)| (a + kf + 1.0) / (a + b + kf + 2.0))
                .product::<f64>()
    }

    /// Geometric tail bound after summing `k <= order`.
    fn tail(&self, z: f64, order: usize, first_omitted: f64) -> f64 {
        // Each Beta ratio lies in (0, 1) since a + k + 1 > 0 and b + 1 > 0;
        // |s + k|/(k + 1) tends to 1 and is monotone once k > |s|.
        let start = order + 1;
        let stop = start + self.s.abs().ceil() as usize + 2;
        let sup = (start..=stop)
            .map(|k| (self.s + k as f64).abs() / (k as f64 + 1.0))
            .fold(1.0f64, f64::max);
        let rho = z.abs() * sup;
        if rho < 1.0 {
            first_omitted.abs() / (1.0 - rho)
        } else {
            f64::INFINITY
        }
    }
}

fn coefficients<S: Scalar>(
    params: &Parameters<S>,
) -> Result<(Vec<MultiIndex>, Vec<Coefficient>, Vec<(f64, f64)>)> {
    if params.n != 1 {
        return Err(Error::Unsupported(format!(
            "the series oracle needs N = 1, got N = {}",
            params.n
        )));
    }
    let e = dictionary_m1(params)?.to_f64()?;
    let axes = cube_exponents(&e);
    for (j, &(a, b)) in axes.iter().enumerate() {
        if !(a > -1.0 && b > -1.0) {
            return Err(Error::Convergence(format!(
                "axis {}: exponents ({a}, {b}) outside the convergence window (need > -1)",
                j + 1
            )));
        }
    }
    let s = e.beta[0] / e.planck;
    let basis = enumerate_basis(params.l, 1, 1)?;
    let coefs = basis
        .iter()
        .map(|idx| match (1..params.l).find(|&n| idx.get(n, 1) == 1) {
            None => Coefficient {
                s,
                axes: axes.clone(),
                sign: 1.0,
            },
            Some(n) => Coefficient {
                s: s + 1.0,
                axes: axes
                    .iter()
                    .enumerate()
                    .map(|(j, &(a, b))| {
                        let j = j + 1;
                        (
                            a + f64::from(u8::from(j < n)),
                            b + f64::from(u8::from(j == n)),
                        )
                    })
                    .collect(),
                sign: -1.0,
            },
        })
        .collect();
    Ok((basis, coefs, axes))
}

/// Coefficients `(c_∅, c_{(n,1)})` of the single-copy integral as power
/// series in `z`, summed through `z^order`.
///
/// Expanding `(1 - z t_{L-1})^{-β/κ}` turns every coefficient into a sum of
/// Beta-function products: `c_∅ = Σ_k (β/κ)_k/k! z^k Π_j B(a_j + k + 1, b_j + 1)`,
/// and `c_{(n,1)}` the same with `β/κ + 1`, `a_j + 1` for `j < n`, `b_n + 1`
/// and an overall minus sign.
pub fn series_psi1<S: Scalar>(
    params: &Parameters<S>,
    z: &S,
    order: usize,
) -> Result<SeriesEstimate> {
    let zf = real(z, "z")?;
    if !(zf.abs() < 1.0) {
        return Err(Error::Domain(format!("series needs |z| < 1, got {zf}")));
    }
    let (basis, coefs, axes) = coefficients(params)?;
    let mut values = Vec::with_capacity(coefs.len());
    let mut tail_bound = Vec::with_capacity(coefs.len());
    for c in &coefs {
        let terms = c.terms(zf, order);
        values.push(terms[..=order].iter().sum());
        tail_bound.push(c.tail(zf, order, terms[order + 1]));
    }
    Ok(SeriesEstimate {
        basis,
        values,
        order,
        tail_bound,
        exponents: axes,
    })
}

/// Successive term ratios `T_{k+1}/T_k` of `c_∅`'s series for `k < count`,
/// read off the summed terms.
pub fn series_term_ratios<S: Scalar>(
    params: &Parameters<S>,
    z: &S,
    count: usize,
) -> Result<Vec<f64>> {
    let zf = real(z, "z")?;
    let (_, coefs, _) = coefficients(params)?;
    let t = coefs[0].terms(zf, count);
    Ok((0..count).map(|k| t[k + 1] / t[k]).collect())
}

/// Closed-form `T_{k+1}/T_k` of `c_∅`'s series:
/// `z (β/κ + k)/(k + 1) Π_j (a_j + k + 1)/(a_j + b_j + k + 2)`.
pub fn series_ratio_closed_form<S: Scalar>(params: &Parameters<S>, z: &S, k: usize) -> Result<f64> {
    let zf = real(z, "z")?;
    let (_, coefs, _) = coefficients(params)?;
    Ok(coefs[0].ratio(zf, k))
}
