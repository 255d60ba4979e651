use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};

/// Which cubature rule to use on the unit cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Tensor product of Gauss–Jacobi rules whose weights absorb the
    /// per-axis endpoint powers `u^a (1-u)^b`.
    GaussJacobiTensor,
    /// Tensor product of tanh-sinh (double exponential) rules.
    TanhSinhTensor,
    /// Plain Monte Carlo on the double-exponential transformed cube.
    MonteCarlo,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::GaussJacobiTensor => "gauss_jacobi_tensor",
            Scheme::TanhSinhTensor => "tanh_sinh_tensor",
            Scheme::MonteCarlo => "monte_carlo",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "gauss_jacobi_tensor" | "gauss_jacobi" => Ok(Scheme::GaussJacobiTensor),
            "tanh_sinh_tensor" | "tanh_sinh" => Ok(Scheme::TanhSinhTensor),
            "monte_carlo" | "mc" => Ok(Scheme::MonteCarlo),
            other => Err(Error::Parameter(format!(
                "unknown quadrature scheme `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    /// Nodes per axis for the tensor rules; the doubled rule is used as the
    /// convergence reference.
    pub nodes_per_axis: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl QuadratureSpec {
    pub fn gauss_jacobi(nodes_per_axis: usize) -> Self {
        Self {
            scheme: Scheme::GaussJacobiTensor,
            nodes_per_axis,
            mc_samples: 0,
            seed: 0,
        }
    }

    pub fn tanh_sinh(nodes_per_axis: usize) -> Self {
        Self {
            scheme: Scheme::TanhSinhTensor,
            nodes_per_axis,
            mc_samples: 0,
            seed: 0,
        }
    }

    pub fn monte_carlo(mc_samples: usize, seed: u64) -> Self {
        Self {
            scheme: Scheme::MonteCarlo,
            nodes_per_axis: 4,
            mc_samples,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 4 {
            return Err(Error::Parameter(format!(
                "nodes_per_axis must be at least 4, got {}",
                self.nodes_per_axis
            )));
        }
        if self.scheme == Scheme::MonteCarlo && self.mc_samples == 0 {
            return Err(Error::Parameter("monte_carlo needs mc_samples > 0".into()));
        }
        Ok(())
    }
}

/// A vector-valued integrand on the open unit cube.
///
/// Coordinates come in pairs `(u, 1-u)` computed independently, so factors
/// vanishing at either end keep full relative precision.
pub trait CubeIntegrand: Sync {
    fn dim(&self) -> usize;

    fn outputs(&self) -> usize;

    /// Endpoint powers `(a_k, b_k)` of `u_k^{a_k} (1-u_k)^{b_k}` that the
    /// Gauss–Jacobi weights absorb; the integrand divided by them must be smooth.
    fn axis_exponents(&self) -> Vec<(f64, f64)>;

    /// Adds `exp(ln_scale) * f(u)` to `out`.
    fn accumulate(&self, u: &[f64], ubar: &[f64], ln_scale: f64, out: &mut [f64]);
}

/// Nodes and weights of a one-dimensional rule on `(0, 1)`.
#[derive(Clone, Debug)]
pub struct AxisRule {
    pub u: Vec<f64>,
    pub ubar: Vec<f64>,
    pub ln_w: Vec<f64>,
}

impl AxisRule {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Gauss–Jacobi rule for `∫_0^1 u^a (1-u)^b g(u) du` via Golub–Welsch.
///
/// Returned weights include the weight function, so `Σ w_k g(u_k)` approximates the integral.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<AxisRule> {
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::Convergence(format!(
            "endpoint exponents ({a}, {b}) are not integrable (need both > -1)"
        )));
    }
    if n == 0 {
        return Err(Error::Parameter(
            "Gauss–Jacobi rule needs at least one node".into(),
        ));
    }
    // Monic Jacobi recurrence on [-1, 1] with weight (1-x)^al (1+x)^be, al = b, be = a,
    // mapped to [0, 1] by u = (1 + x) / 2.
    let (al, be) = (b, a);
    let s = al + be;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let x = if k == 0 {
            (be - al) / (s + 2.0)
        } else {
            let kk = k as f64;
            (be * be - al * al) / ((2.0 * kk + s) * (2.0 * kk + s + 2.0))
        };
        *d = 0.5 * (1.0 + x);
    }
    for (j, o) in off.iter_mut().enumerate() {
        let k = (j + 1) as f64;
        let b2 = if j == 0 {
            4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + s).powi(2) * (3.0 + s))
        } else {
            4.0 * k * (k + al) * (k + be) * (k + s)
                / ((2.0 * k + s).powi(2) * (2.0 * k + s + 1.0) * (2.0 * k + s - 1.0))
        };
        *o = 0.5 * b2.sqrt();
    }
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = diag[k];
        if k + 1 < n {
            jm[(k, k + 1)] = off[k];
            jm[(k + 1, k)] = off[k];
        }
    }
    let eig = SymmetricEigen::new(jm);
    let ln_mu0 = ln_beta(a + 1.0, b + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], ln_mu0 + 2.0 * v0.abs().ln())
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rule = AxisRule {
        u: Vec::with_capacity(n),
        ubar: Vec::with_capacity(n),
        ln_w: Vec::with_capacity(n),
    };
    for (x, lw) in pairs {
        if !(x > 0.0 && x < 1.0) || !lw.is_finite() {
            return Err(Error::Convergence(format!(
                "Gauss–Jacobi node {x} left (0, 1) for exponents ({a}, {b}) with {n} nodes"
            )));
        }
        rule.u.push(x);
        rule.ubar.push(1.0 - x);
        rule.ln_w.push(lw);
    }
    Ok(rule)
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Half-width of the tanh-sinh window so that the weight times a worst-case
/// endpoint power `ε^{margin}` has decayed below `e^{-40}`.
fn tanh_sinh_half_width(margin: f64) -> f64 {
    // The lower clamp keeps e^{-π sinh T} above the subnormal range.
    let margin = margin.clamp(0.07, 1.0);
    (40.0 / (std::f64::consts::PI * margin)).asinh()
}

/// Coordinates for a tanh-sinh abscissa `τ`: `u = 1 / (1 + e^{-π sinh τ})`.
fn tanh_sinh_point(tau: f64) -> (f64, f64, f64) {
    let x = std::f64::consts::PI * tau.sinh();
    let ln_u = -softplus(-x);
    let ln_ubar = -softplus(x);
    // du/dτ = π cosh τ · u (1 - u)
    let ln_jac = (std::f64::consts::PI * tau.cosh()).ln() + ln_u + ln_ubar;
    (ln_u, ln_ubar, ln_jac)
}

/// Tanh-sinh rule on `(0, 1)` with `n` nodes (`n` odd keeps `u = 1/2` as a node).
///
/// `margin` is the smallest `1 + exponent` expected at either endpoint and
/// sets the truncation window.
pub fn tanh_sinh(n: usize, margin: f64) -> AxisRule {
    let n = n.max(3);
    let t = tanh_sinh_half_width(margin);
    let h = 2.0 * t / (n - 1) as f64;
    let mut rule = AxisRule {
        u: Vec::with_capacity(n),
        ubar: Vec::with_capacity(n),
        ln_w: Vec::with_capacity(n),
    };
    for k in 0..n {
        let tau = -t + h * k as f64;
        let (ln_u, ln_ubar, ln_jac) = tanh_sinh_point(tau);
        rule.u.push(ln_u.exp());
        rule.ubar.push(ln_ubar.exp());
        rule.ln_w.push(h.ln() + ln_jac);
    }
    rule
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

/// Pairwise (tree) sum of equal-length vectors in index order.
fn pairwise_sum(mut parts: Vec<Vec<f64>>, width: usize) -> Vec<f64> {
    if parts.is_empty() {
        return vec![0.0; width];
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap()
}

/// Tensor-product rule. `subtract_weights` removes the Gauss–Jacobi weight
/// function from the integrand (it is already inside `ln_w`).
fn tensor_sum<F: CubeIntegrand>(f: &F, rules: &[AxisRule], subtract_weights: bool) -> Vec<f64> {
    let d = rules.len();
    let outputs = f.outputs();
    let exps = if subtract_weights {
        f.axis_exponents()
    } else {
        vec![(0.0, 0.0); d]
    };
    let total: usize = rules.iter().map(AxisRule::len).product();
    if d == 0 {
        let mut out = vec![0.0; outputs];
        f.accumulate(&[], &[], 0.0, &mut out);
        return out;
    }
    let inner: usize = total / rules[0].len();
    let blocks: Vec<Vec<f64>> = (0..rules[0].len())
        .into_par_iter()
        .map(|k0| {
            let mut acc = vec![Compensated::default(); outputs];
            let mut scratch = vec![0.0; outputs];
            let mut u = vec![0.0; d];
            let mut ub = vec![0.0; d];
            let mut digits = vec![0usize; d];
            digits[0] = k0;
            for flat in 0..inner {
                let mut rem = flat;
                for ax in (1..d).rev() {
                    digits[ax] = rem % rules[ax].len();
                    rem /= rules[ax].len();
                }
                let mut ln_scale = 0.0;
                for ax in 0..d {
                    let k = digits[ax];
                    u[ax] = rules[ax].u[k];
                    ub[ax] = rules[ax].ubar[k];
                    ln_scale += rules[ax].ln_w[k];
                    if subtract_weights {
                        let (a, b) = exps[ax];
                        ln_scale -= a * u[ax].ln() + b * ub[ax].ln();
                    }
                }
                scratch.iter_mut().for_each(|x| *x = 0.0);
                f.accumulate(&u, &ub, ln_scale, &mut scratch);
                for (a, x) in acc.iter_mut().zip(&scratch) {
                    a.add(*x);
                }
            }
            acc.into_iter().map(Compensated::value).collect()
        })
        .collect();
    pairwise_sum(blocks, outputs)
}

/// Result of a cubature with its error estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct CubatureResult {
    pub values: Vec<f64>,
    /// Max over components of `|I_fine - I_coarse| / max(|I_fine|, tiny)` for
    /// tensor rules; the largest relative standard error for Monte Carlo.
    pub relative_change: f64,
    /// Points in the reported rule (fine rule for tensors).
    pub evaluations: usize,
}

fn relative_change(fine: &[f64], coarse: &[f64]) -> f64 {
    let scale = fine
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    fine.iter()
        .zip(coarse)
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max)
}

fn rules_for<F: CubeIntegrand>(f: &F, spec: &QuadratureSpec, n: usize) -> Result<Vec<AxisRule>> {
    let exps = f.axis_exponents();
    match spec.scheme {
        Scheme::GaussJacobiTensor => exps.iter().map(|&(a, b)| gauss_jacobi(n, a, b)).collect(),
        Scheme::TanhSinhTensor => Ok(exps
            .iter()
            .map(|&(a, b)| tanh_sinh(n, (1.0 + a).min(1.0 + b)))
            .collect()),
        Scheme::MonteCarlo => unreachable!(),
    }
}

/// Tensor rule at `n` nodes per axis, without any error estimate.
pub fn tensor_rule<F: CubeIntegrand>(f: &F, spec: &QuadratureSpec, n: usize) -> Result<Vec<f64>> {
    let rules = rules_for(f, spec, n)?;
    Ok(tensor_sum(
        f,
        &rules,
        spec.scheme == Scheme::GaussJacobiTensor,
    ))
}

const MC_BLOCK: usize = 4096;

/// Monte Carlo on the double-exponential transformed cube. Each block of
/// samples draws from its own ChaCha8 stream, so results do not depend on
/// the thread count.
fn monte_carlo<F: CubeIntegrand>(f: &F, spec: &QuadratureSpec) -> CubatureResult {
    let d = f.dim();
    let outputs = f.outputs();
    let halves: Vec<f64> = f
        .axis_exponents()
        .iter()
        .map(|&(a, b)| tanh_sinh_half_width((1.0 + a).min(1.0 + b)))
        .collect();
    let ln_box: f64 = halves.iter().map(|t| (2.0 * t).ln()).sum();
    let samples = spec.mc_samples;
    let nblocks = samples.div_ceil(MC_BLOCK);
    let blocks: Vec<(Vec<f64>, Vec<f64>)> = (0..nblocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(blk as u64);
            let count = MC_BLOCK.min(samples - blk * MC_BLOCK);
            let mut sum = vec![Compensated::default(); outputs];
            let mut sq = vec![0.0; outputs];
            let mut scratch = vec![0.0; outputs];
            let mut u = vec![0.0; d];
            let mut ub = vec![0.0; d];
            for _ in 0..count {
                let mut ln_scale = ln_box;
                for ax in 0..d {
                    let xi: f64 = rng.random();
                    let tau = -halves[ax] + 2.0 * halves[ax] * xi;
                    let (ln_u, ln_ubar, ln_jac) = tanh_sinh_point(tau);
                    u[ax] = ln_u.exp();
                    ub[ax] = ln_ubar.exp();
                    ln_scale += ln_jac;
                }
                scratch.iter_mut().for_each(|x| *x = 0.0);
                f.accumulate(&u, &ub, ln_scale, &mut scratch);
                for k in 0..outputs {
                    sum[k].add(scratch[k]);
                    sq[k] += scratch[k] * scratch[k];
                }
            }
            (sum.into_iter().map(Compensated::value).collect(), sq)
        })
        .collect();
    let (sums, squares): (Vec<_>, Vec<_>) = blocks.into_iter().unzip();
    let total = pairwise_sum(sums, outputs);
    let total_sq = pairwise_sum(squares, outputs);
    let nf = samples as f64;
    let mean: Vec<f64> = total.iter().map(|s| s / nf).collect();
    let stderr: Vec<f64> = mean
        .iter()
        .zip(&total_sq)
        .map(|(m, s2)| ((s2 / nf - m * m).max(0.0) / nf).sqrt())
        .collect();
    let scale = mean
        .iter()
        .fold(0.0f64, |a, x| a.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    CubatureResult {
        relative_change: stderr.iter().fold(0.0, |a, s| f64::max(a, s / scale)),
        values: mean,
        evaluations: samples,
    }
}

/// Integrates `f` over the unit cube. Tensor rules are evaluated at `n` and
/// `2n` nodes per axis and the finer value is returned with the relative change.
pub fn integrate<F: CubeIntegrand>(f: &F, spec: &QuadratureSpec) -> Result<CubatureResult> {
    spec.validate()?;
    for (k, &(a, b)) in f.axis_exponents().iter().enumerate() {
        if !(a > -1.0 && b > -1.0) {
            return Err(Error::Convergence(format!(
                "axis {}: endpoint exponents ({a}, {b}) outside the convergence window (need > -1)",
                k + 1
            )));
        }
    }
    if spec.scheme == Scheme::MonteCarlo {
        return Ok(monte_carlo(f, spec));
    }
    let n = spec.nodes_per_axis;
    let coarse = tensor_rule(f, spec, n)?;
    let fine_n = match spec.scheme {
        Scheme::TanhSinhTensor => 2 * n - 1,
        _ => 2 * n,
    };
    let fine = tensor_rule(f, spec, fine_n)?;
    if fine.iter().any(|x| !x.is_finite()) {
        return Err(Error::Convergence(
            "quadrature produced a non-finite value".into(),
        ));
    }
    Ok(CubatureResult {
        relative_change: relative_change(&fine, &coarse),
        evaluations: fine_n.pow(f.dim() as u32),
        values: fine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta;

    struct Monomial {
        a: f64,
        b: f64,
        k: i32,
    }

    impl CubeIntegrand for Monomial {
        fn dim(&self) -> usize {
            1
        }
        fn outputs(&self) -> usize {
            1
        }
        fn axis_exponents(&self) -> Vec<(f64, f64)> {
            vec![(self.a, self.b)]
        }
        fn accumulate(&self, u: &[f64], ub: &[f64], ln_scale: f64, out: &mut [f64]) {
            let ln = self.a * u[0].ln() + self.b * ub[0].ln() + ln_scale;
            out[0] += ln.exp() * u[0].powi(self.k);
        }
    }

    #[test]
    fn gauss_jacobi_integrates_polynomials_exactly() {
        for &(a, b) in &[(0.0, 0.0), (-0.5, 0.3), (1.7, -0.9), (-0.95, -0.95)] {
            let rule = gauss_jacobi(8, a, b).unwrap();
            for k in 0..15 {
                let approx: f64 = (0..rule.len())
                    .map(|j| rule.ln_w[j].exp() * rule.u[j].powi(k))
                    .sum();
                let exact = beta(a + 1.0 + k as f64, b + 1.0);
                assert!(
                    (approx - exact).abs() <= 1e-12 * exact,
                    "{a} {b} {k}: {approx} {exact}"
                );
            }
        }
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        let f = Monomial {
            a: -0.7,
            b: -0.4,
            k: 2,
        };
        let got = integrate(&f, &QuadratureSpec::tanh_sinh(81)).unwrap();
        let exact = beta(-0.7 + 3.0, 0.6);
        assert!((got.values[0] - exact).abs() < 1e-11 * exact);
        assert!(got.relative_change < 1e-9);
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let f = Monomial {
            a: -0.5,
            b: 0.5,
            k: 1,
        };
        let spec = QuadratureSpec::monte_carlo(20_000, 7);
        let a = integrate(&f, &spec).unwrap();
        let b = integrate(&f, &spec).unwrap();
        assert_eq!(a, b);
        let exact = beta(1.5, 1.5);
        assert!((a.values[0] - exact).abs() < 5.0 * a.relative_change * exact + 1e-12);
    }

    #[test]
    fn divergent_window_is_rejected() {
        let f = Monomial {
            a: -1.0,
            b: 0.0,
            k: 0,
        };
        let err = integrate(&f, &QuadratureSpec::gauss_jacobi(8)).unwrap_err();
        assert!(matches!(err, Error::Convergence(_)));
    }
}
