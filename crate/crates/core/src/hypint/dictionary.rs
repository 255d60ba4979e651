use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};
use crate::weylops::Parameters;

/// Exponents of the single-copy weight
/// `U(t) = Π t_n^{α_n/κ} Π_i (1 - z_i t_{L-1})^{-β_i/κ} Π_n (t_{n-1} - t_n)^{-γ_n/κ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentsM1<S> {
    pub alpha: Vec<S>,
    pub beta: Vec<S>,
    pub gamma: Vec<S>,
    pub planck: S,
}

/// Exponents of the `M`-copy weight; a single `γ` sits on `(1 - t_1^{(a)})`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentsM<S> {
    pub alpha: Vec<S>,
    pub beta: Vec<S>,
    pub gamma: S,
    pub planck: S,
    pub m: u32,
}

fn require_resonance<S: Scalar>(params: &Parameters<S>, m: u32) -> Result<()> {
    let r = params.resonance();
    if !r.approx_eq(&S::from_i64(m as i64)) {
        return Err(Error::Parameter(format!(
            "constraint kappa_0 - sum(theta_i) = {m} violated: got {}",
            r.render()
        )));
    }
    Ok(())
}

/// `α_n = e_{n+1} - e_n + κ_{n+1}`, `β_i = -θ_i`, `γ_n = κ_n` with
/// `e_L = e_0`, `κ_L = 1`. Needs `κ_0 - Σ θ_i = 1`.
pub fn dictionary_m1<S: Scalar>(params: &Parameters<S>) -> Result<ExponentsM1<S>> {
    require_resonance(params, 1)?;
    let l = params.l;
    let e = |k: usize| params.e[k % l].clone();
    let kappa = |k: usize| {
        if k == l {
            S::one()
        } else {
            params.kappa[k].clone()
        }
    };
    Ok(ExponentsM1 {
        alpha: (1..l).map(|n| e(n + 1) - e(n) + kappa(n + 1)).collect(),
        beta: params.theta[1..].iter().map(|t| -t.clone()).collect(),
        gamma: (1..l).map(|n| params.kappa[n].clone()).collect(),
        planck: params.planck.clone(),
    })
}

/// `α_n = e_{n+1} - e_n + 1`, `β_i = -θ_i`, `γ = κ_1 + M - 1`.
/// Needs `κ_0 - Σ θ_i = M` and `κ_n = 1` for `2 <= n <= L-1`.
pub fn dictionary_m<S: Scalar>(params: &Parameters<S>, m: u32) -> Result<ExponentsM<S>> {
    if m == 0 {
        return Err(Error::Parameter("M must be at least 1".into()));
    }
    require_resonance(params, m)?;
    let l = params.l;
    for n in 2..l {
        if !params.kappa[n].approx_eq(&S::one()) {
            return Err(Error::Parameter(format!(
                "constraint kappa_{n} = 1 violated: got {}",
                params.kappa[n].render()
            )));
        }
    }
    let e = |k: usize| params.e[k % l].clone();
    Ok(ExponentsM {
        alpha: (1..l).map(|n| e(n + 1) - e(n) + S::one()).collect(),
        beta: params.theta[1..].iter().map(|t| -t.clone()).collect(),
        gamma: params.kappa[1].clone() + S::from_i64(m as i64 - 1),
        planck: params.planck.clone(),
        m,
    })
}

/// Solves `e_1` from `Σ e = (L-1)/2` given the consecutive differences.
fn e_from_differences<S: Scalar>(l: usize, diffs: &[S]) -> Vec<S> {
    // e_{n+1} = e_n + diffs[n-1] for n = 1..L-2, e_0 = e_1 + Σ diffs_{all} (cyclic).
    let mut offsets = vec![S::zero(); l];
    for n in 1..l - 1 {
        offsets[n + 1] = offsets[n].clone() + diffs[n - 1].clone();
    }
    offsets[0] = diffs.iter().fold(S::zero(), |a, d| a + d.clone());
    let base = (S::from_ratio(l as i64 - 1, 2) - sum(&offsets)) / S::from_i64(l as i64);
    offsets.into_iter().map(|o| o + base.clone()).collect()
}

/// Parameters whose [`dictionary_m1`] image is `exps` (the map is a bijection
/// once the linear constraints are imposed).
pub fn parameters_for_m1<S: Scalar>(exps: &ExponentsM1<S>, hbar: S) -> Result<Parameters<S>> {
    let l = exps.alpha.len() + 1;
    let n = exps.beta.len();
    if exps.gamma.len() != l - 1 {
        return Err(Error::Parameter("alpha and gamma lengths differ".into()));
    }
    let theta: Vec<S> = exps.beta.iter().map(|b| -b.clone()).collect();
    let mut kappa = vec![S::one() + sum(&theta)];
    kappa.extend(exps.gamma.iter().cloned());
    // e_{n+1} - e_n = α_n - κ_{n+1}, κ_L = 1
    let diffs: Vec<S> = (1..l)
        .map(|k| {
            let next = if k + 1 == l {
                S::one()
            } else {
                kappa[k + 1].clone()
            };
            exps.alpha[k - 1].clone() - next
        })
        .collect();
    let e = e_from_differences(l, &diffs);
    Parameters::new(l, n, e, kappa, theta, hbar, exps.planck.clone())
}

/// Parameters whose [`dictionary_m`] image is `exps`.
pub fn parameters_for_m<S: Scalar>(exps: &ExponentsM<S>, hbar: S) -> Result<Parameters<S>> {
    let l = exps.alpha.len() + 1;
    let n = exps.beta.len();
    let theta: Vec<S> = exps.beta.iter().map(|b| -b.clone()).collect();
    let mut kappa = vec![S::from_i64(exps.m as i64) + sum(&theta)];
    kappa.push(exps.gamma.clone() - S::from_i64(exps.m as i64 - 1));
    kappa.extend((2..l).map(|_| S::one()));
    let diffs: Vec<S> = exps.alpha.iter().map(|a| a.clone() - S::one()).collect();
    let e = e_from_differences(l, &diffs);
    Parameters::new(l, n, e, kappa, theta, hbar, exps.planck.clone())
}

/// Real value of a scalar, rejecting a nonzero imaginary part.
pub(crate) fn real<S: Scalar>(x: &S, what: &str) -> Result<f64> {
    let c = x.to_complex();
    if c.im != 0.0 {
        return Err(Error::Domain(format!(
            "{what} must be real for quadrature, got {}",
            x.render()
        )));
    }
    Ok(c.re)
}

impl<S: Scalar> ExponentsM1<S> {
    /// Float copy for quadrature; fails on complex exponents.
    pub fn to_f64(&self) -> Result<ExponentsM1<f64>> {
        let v = |xs: &[S], w: &str| xs.iter().map(|x| real(x, w)).collect::<Result<Vec<_>>>();
        Ok(ExponentsM1 {
            alpha: v(&self.alpha, "alpha")?,
            beta: v(&self.beta, "beta")?,
            gamma: v(&self.gamma, "gamma")?,
            planck: real(&self.planck, "planck")?,
        })
    }
}

impl<S: Scalar> ExponentsM<S> {
    pub fn to_f64(&self) -> Result<ExponentsM<f64>> {
        let v = |xs: &[S], w: &str| xs.iter().map(|x| real(x, w)).collect::<Result<Vec<_>>>();
        Ok(ExponentsM {
            alpha: v(&self.alpha, "alpha")?,
            beta: v(&self.beta, "beta")?,
            gamma: real(&self.gamma, "gamma")?,
            planck: real(&self.planck, "planck")?,
            m: self.m,
        })
    }
}
