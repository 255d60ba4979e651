use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::polyalg::{enumerate_basis, MultiIndex};
use crate::scalar::Scalar;
use crate::weylops::Parameters;

use super::chamber::{Chamber, ChamberPoint, Interval};
use super::dictionary::{dictionary_m, dictionary_m1, real, ExponentsM, ExponentsM1};
use super::quadrature::{integrate, CubeIntegrand, QuadratureSpec, Scheme};

/// Largest number of integration variables handled by tensor rules.
pub const MAX_TENSOR_DIM: usize = 6;

/// Per-basis-element data of the symmetrized form `φ_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiIndexData {
    pub index: MultiIndex,
    pub a0: u32,
    /// `M! / (A_0! Π A_{n,i}!)`.
    pub multinomial: u64,
    /// `(-1)^{M - A_0}`.
    pub sign: i64,
    /// `copy_forms[a-1]` is `Some((n, i))` when copy `a` carries `f_n^{(i)}`,
    /// `None` when it carries `f_0`.
    pub copy_forms: Vec<Option<(usize, usize)>>,
}

impl PhiIndexData {
    pub fn new(index: &MultiIndex, m: u32) -> Result<Self> {
        let a0 = index
            .complement(m)
            .ok_or_else(|| Error::Parameter(format!("index {index} has degree above M = {m}")))?;
        let multinomial = index
            .multinomial(m)
            .and_then(|v| v.to_u64())
            .ok_or_else(|| Error::Parameter("multinomial coefficient overflow".into()))?;
        let mut copy_forms = vec![None; m as usize];
        for i in 1..=index.times() {
            for n in 1..=index.levels() {
                let start = index.segment_end(n - 1, i) as usize;
                let end = index.segment_end(n, i) as usize;
                for slot in &mut copy_forms[start..end] {
                    *slot = Some((n, i));
                }
            }
        }
        Ok(Self {
            index: index.clone(),
            a0,
            multinomial,
            sign: if (m - a0).is_multiple_of(2) { 1 } else { -1 },
            copy_forms,
        })
    }

    pub fn coefficient(&self) -> f64 {
        (self.sign * self.multinomial as i64) as f64
    }
}

/// One factor of the weight or of a form. Variables are `(n, a)`, level `n`
/// of copy `a`; level 0 is the constant `t_0 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Factor {
    /// `t_v`.
    Var((usize, usize)),
    /// `t_v - t_w`.
    Diff((usize, usize), (usize, usize)),
    /// `1 - z_i t_v` (0-based `i`).
    OneMinusZ(usize, (usize, usize)),
}

/// Real weight exponents shared by the one- and many-copy integrands.
#[derive(Clone, Debug)]
struct Weight {
    l: usize,
    m: usize,
    /// `α_n / κ`.
    alpha: Vec<f64>,
    /// `-β_i / κ`.
    beta: Vec<f64>,
    /// `-γ_n / κ` on `(t_{n-1}^{(a)} - t_n^{(a)})`.
    gamma: Vec<f64>,
    /// `2/κ` on same-level pairs and `-1/κ` on mixed-copy adjacent-level pairs.
    diag: f64,
    cross: f64,
}

impl Weight {
    fn single(e: &ExponentsM1<f64>) -> Self {
        let k = e.planck;
        Self {
            l: e.alpha.len() + 1,
            m: 1,
            alpha: e.alpha.iter().map(|a| a / k).collect(),
            beta: e.beta.iter().map(|b| -b / k).collect(),
            gamma: e.gamma.iter().map(|g| -g / k).collect(),
            diag: 2.0 / k,
            cross: -1.0 / k,
        }
    }

    fn copies(e: &ExponentsM<f64>) -> Self {
        let k = e.planck;
        let l = e.alpha.len() + 1;
        let mut gamma = vec![-1.0 / k; l - 1];
        gamma[0] = -e.gamma / k;
        Self {
            l,
            m: e.m as usize,
            alpha: e.alpha.iter().map(|a| a / k).collect(),
            beta: e.beta.iter().map(|b| -b / k).collect(),
            gamma,
            diag: 2.0 / k,
            cross: -1.0 / k,
        }
    }

    /// `U` as a list of factors with exponents.
    fn factors(&self) -> Vec<(Factor, f64)> {
        let (l, m) = (self.l, self.m);
        let mut out = Vec::new();
        for a in 1..=m {
            for n in 1..l {
                out.push((Factor::Var((n, a)), self.alpha[n - 1]));
            }
            for (i, &b) in self.beta.iter().enumerate() {
                out.push((Factor::OneMinusZ(i, (l - 1, a)), b));
            }
            out.push((Factor::Diff((0, a), (1, a)), self.gamma[0]));
        }
        for n in 1..l {
            for a in 1..=m {
                for b in a + 1..=m {
                    out.push((Factor::Diff((n, a), (n, b)), self.diag));
                }
                if n + 1 < l {
                    for b in 1..=m {
                        let c = if a == b { self.gamma[n] } else { self.cross };
                        out.push((Factor::Diff((n, a), (n + 1, b)), c));
                    }
                }
            }
        }
        out
    }
}

/// All elements of `𝔖_M^{L-1}`, each as `perm[n-1][a-1] = σ_n(a)` (1-based values).
fn level_permutations(levels: usize, m: usize) -> Vec<Vec<Vec<usize>>> {
    fn perms(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for j in k..items.len() {
            items.swap(k, j);
            perms(items, k + 1, out);
            items.swap(k, j);
        }
    }
    let mut single = Vec::new();
    perms(&mut (1..=m).collect(), 0, &mut single);
    single.sort();
    let mut all: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(all.len() * single.len());
        for prefix in &all {
            for s in &single {
                let mut p = prefix.clone();
                p.push(s.clone());
                next.push(p);
            }
        }
        all = next;
    }
    all
}

/// Index of the largest `z_i`; the upper interval ends at its inverse.
fn pinned(z: &[f64]) -> usize {
    let mut k = 0;
    for (i, &v) in z.iter().enumerate() {
        if v > z[k] {
            k = i;
        }
    }
    k
}

/// `U · φ_A` for every `A` at once.
struct FormIntegrand {
    chamber: Chamber,
    weight: Vec<(Factor, f64)>,
    z: Vec<f64>,
    pin: usize,
    phis: Vec<PhiIndexData>,
    /// Per basis element, the denominators of each symmetrized term.
    terms: Vec<Vec<Vec<Factor>>>,
    exponents: Vec<(f64, f64)>,
}

impl FormIntegrand {
    fn new(
        weight: &Weight,
        chamber: Chamber,
        z: Vec<f64>,
        basis: &[MultiIndex],
        perms: &[Vec<Vec<usize>>],
    ) -> Result<Self> {
        if chamber.l != weight.l || chamber.copies() != weight.m {
            return Err(Error::Parameter(format!(
                "chamber hosts L = {}, M = {} but the integrand has L = {}, M = {}",
                chamber.l,
                chamber.copies(),
                weight.l,
                weight.m
            )));
        }
        let phis = basis
            .iter()
            .map(|b| PhiIndexData::new(b, weight.m as u32))
            .collect::<Result<Vec<_>>>()?;
        let terms = phis
            .iter()
            .map(|phi| {
                perms
                    .iter()
                    .map(|sigma| form_denominators(weight.l, phi, sigma))
                    .collect()
            })
            .collect();
        let mut out = Self {
            chamber,
            weight: weight.factors(),
            pin: pinned(&z),
            z,
            phis,
            terms,
            exponents: Vec::new(),
        };
        out.exponents = out.endpoint_exponents();
        Ok(out)
    }

    /// Adds the endpoint behaviour of `factor^c` to per-block tables: `s[p]`
    /// is the power of `x_p`, `adj[p]` the power of `1 - x_p/x_{p-1}`.
    fn tabulate(&self, f: Factor, c: f64, s: &mut [Vec<f64>], adj: &mut [Vec<f64>]) {
        match f {
            Factor::Var((n, a)) => {
                let (k, p) = self.chamber.locate(n, a);
                if self.chamber.blocks[k].interval == Interval::Lower {
                    s[k][p] += c;
                }
            }
            Factor::Diff((n, a), (m, b)) => {
                let (ka, pa) = self.chamber.locate(n, a);
                let (kb, pb) = self.chamber.locate(m, b);
                let k = if pa == 0 {
                    kb
                } else if pb == 0 || ka == kb {
                    ka
                } else {
                    return;
                };
                let (lo, hi) = (pa.min(pb), pa.max(pb));
                s[k][lo] += c;
                if hi == lo + 1 {
                    adj[k][hi] += c;
                }
            }
            Factor::OneMinusZ(i, (n, a)) => {
                let (k, p) = self.chamber.locate(n, a);
                if self.chamber.blocks[k].interval == Interval::Upper && i == self.pin {
                    s[k][p] += c;
                }
            }
        }
    }

    /// Worst endpoint powers over all terms: the power of `u_k` as `u_k -> 0`
    /// and of `1 - u_k` as `u_k -> 1`, the other coordinates held generic.
    fn endpoint_exponents(&self) -> Vec<(f64, f64)> {
        let sizes: Vec<usize> = self
            .chamber
            .blocks
            .iter()
            .map(|b| b.copies * (self.chamber.l - 1))
            .collect();
        let mut s: Vec<Vec<f64>> = sizes.iter().map(|&k| vec![0.0; k + 1]).collect();
        let mut adj = s.clone();
        for &(f, c) in &self.weight {
            self.tabulate(f, c, &mut s, &mut adj);
        }
        // Jacobian x_0 x_1 ... x_{K-1}.
        for (blk, &k) in s.iter_mut().zip(&sizes) {
            for v in &mut blk[1..k] {
                *v += 1.0;
            }
        }
        let mut worst = vec![(f64::INFINITY, f64::INFINITY); self.chamber.dim()];
        for term in self.terms.iter().flatten() {
            let mut ts = s.clone();
            let mut ta = adj.clone();
            for &f in term {
                self.tabulate(f, -1.0, &mut ts, &mut ta);
            }
            let mut axis = 0;
            for (blk, &k) in sizes.iter().enumerate() {
                for p in 1..=k {
                    let a_p: f64 = ts[blk][p..].iter().sum();
                    worst[axis].0 = worst[axis].0.min(a_p);
                    worst[axis].1 = worst[axis].1.min(ta[blk][p]);
                    axis += 1;
                }
            }
        }
        worst
    }

    /// Signed value and `ln |·|` of a factor.
    fn factor(&self, p: &ChamberPoint, f: Factor) -> (f64, f64) {
        match f {
            Factor::Var((n, a)) => (p.t(n, a), p.ln_t(n, a)),
            Factor::Diff(v, w) => p.diff(v, w),
            Factor::OneMinusZ(i, (n, a)) => p.one_minus_zt(self.z[i], self.z[self.pin], n, a),
        }
    }
}

/// Denominators of `Π_a f^{(a)}` for one term of `φ_A` under `σ`: copy `a`
/// takes `(t_{n-1} - t_n)` on every level except the one its form skips, the
/// matching `(1 - z_i t_{L-1})`, and `t_{L-1}`.
fn form_denominators(l: usize, phi: &PhiIndexData, sigma: &[Vec<usize>]) -> Vec<Factor> {
    let var = |n: usize, a: usize| {
        if n == 0 {
            (0, a)
        } else {
            (n, sigma[n - 1][a - 1])
        }
    };
    let mut out = Vec::new();
    for (a, form) in phi.copy_forms.iter().enumerate() {
        let a = a + 1;
        for lev in 1..l {
            if form.map(|(n, _)| n) != Some(lev) {
                out.push(Factor::Diff(var(lev - 1, a), var(lev, a)));
            }
        }
        if let Some((_, i)) = form {
            out.push(Factor::OneMinusZ(i - 1, var(l - 1, a)));
        }
        out.push(Factor::Var(var(l - 1, a)));
    }
    out
}

impl CubeIntegrand for FormIntegrand {
    fn dim(&self) -> usize {
        self.chamber.dim()
    }

    fn outputs(&self) -> usize {
        self.phis.len()
    }

    fn axis_exponents(&self) -> Vec<(f64, f64)> {
        self.exponents.clone()
    }

    fn accumulate(&self, u: &[f64], ubar: &[f64], ln_scale: f64, out: &mut [f64]) {
        let p = self.chamber.point(self.z[self.pin], u, ubar);
        let ln_u: f64 = self
            .weight
            .iter()
            .map(|&(f, c)| {
                if c == 0.0 {
                    0.0
                } else {
                    c * self.factor(&p, f).1
                }
            })
            .sum();
        let base = (ln_u + p.ln_jacobian() + ln_scale).exp();
        if base == 0.0 || !base.is_finite() {
            return;
        }
        for (k, phi) in self.phis.iter().enumerate() {
            let sym: f64 = self.terms[k]
                .iter()
                .map(|term| {
                    term.iter()
                        .map(|&f| 1.0 / self.factor(&p, f).0)
                        .product::<f64>()
                })
                .sum();
            out[k] += base * phi.coefficient() * sym;
        }
    }
}

/// Coefficients of an integral solution over a basis, with quadrature diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralEstimate {
    pub basis: Vec<MultiIndex>,
    pub values: Vec<f64>,
    pub relative_change: f64,
    pub evaluations: usize,
    pub scheme: Scheme,
    /// Endpoint exponents `(a_k, b_k)` of the substituted integrand per axis.
    pub exponents: Vec<(f64, f64)>,
}

pub(crate) fn real_z<S: Scalar>(z: &[S], n: usize) -> Result<Vec<f64>> {
    let zf = z.iter().map(|x| real(x, "z")).collect::<Result<Vec<_>>>()?;
    check_real_z(&zf, n)
}

fn check_real_z(zf: &[f64], n: usize) -> Result<Vec<f64>> {
    if zf.len() != n {
        return Err(Error::Parameter(format!(
            "expected {n} coordinates z_i, got {}",
            zf.len()
        )));
    }
    for (k, &v) in zf.iter().enumerate() {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!(
                "quadrature needs real z in (0, 1); z_{} = {v}",
                k + 1
            )));
        }
    }
    Ok(zf.to_vec())
}

fn run(f: &FormIntegrand, quad: &QuadratureSpec) -> Result<IntegralEstimate> {
    if quad.scheme != Scheme::MonteCarlo && f.dim() > MAX_TENSOR_DIM {
        return Err(Error::Unsupported(format!(
            "tensor quadrature in {} dimensions (limit {MAX_TENSOR_DIM}); use monte_carlo",
            f.dim()
        )));
    }
    let r = integrate(f, quad)?;
    Ok(IntegralEstimate {
        basis: f.phis.iter().map(|p| p.index.clone()).collect(),
        values: r.values,
        relative_change: r.relative_change,
        evaluations: r.evaluations,
        scheme: quad.scheme,
        exponents: f.exponents.clone(),
    })
}

fn single_copy_integrand<S: Scalar>(params: &Parameters<S>, zf: &[f64]) -> Result<FormIntegrand> {
    let exps = dictionary_m1(params)?.to_f64()?;
    let zf = check_real_z(zf, params.n)?;
    let basis = enumerate_basis(params.l, params.n, 1)?;
    let identity = vec![vec![vec![1]; params.l - 1]];
    FormIntegrand::new(
        &Weight::single(&exps),
        Chamber::ordered(params.l, 1)?,
        zf,
        &basis,
        &identity,
    )
}

fn copies_integrand<S: Scalar>(
    params: &Parameters<S>,
    zf: &[f64],
    m: u32,
    chamber: Chamber,
    perms: &[Vec<Vec<usize>>],
) -> Result<FormIntegrand> {
    let exps = dictionary_m(params, m)?.to_f64()?;
    let zf = check_real_z(zf, params.n)?;
    let basis = enumerate_basis(params.l, params.n, m)?;
    FormIntegrand::new(&Weight::copies(&exps), chamber, zf, &basis, perms)
}

/// Coefficients `(c_∅, c_{(n,i)})` of the single-copy integral
/// `∫ U (φ_0 - Σ φ_n^{(i)} q_n^{(i)})` over the chamber `1 > t_1 > ... > t_{L-1} > 0`.
///
/// Entries follow the basis order of `enumerate_basis(L, N, 1)`, so
/// `c_{(n,i)} = -∫ U φ_n^{(i)}`.
pub fn eval_psi1<S: Scalar>(
    params: &Parameters<S>,
    z: &[S],
    quad: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    run(&single_copy_integrand(params, &real_z(z, params.n)?)?, quad)
}

/// [`eval_psi1`] at a real point given as floats.
pub fn eval_psi1_f64<S: Scalar>(
    params: &Parameters<S>,
    z: &[f64],
    quad: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    run(&single_copy_integrand(params, z)?, quad)
}

/// Coefficients `c_A = ∫ U φ_A` of the `M`-copy integral over
/// [`Chamber::default_for`], with `φ_A` symmetrized over `𝔖_M^{L-1}`.
///
/// Each copy in `φ_A` carries the full single-copy form, including its
/// `1/t_{L-1}`.
pub fn eval_psim<S: Scalar>(
    params: &Parameters<S>,
    z: &[S],
    m: u32,
    quad: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    eval_psim_f64(params, &real_z(z, params.n)?, m, quad)
}

/// [`eval_psim`] at a real point given as floats.
pub fn eval_psim_f64<S: Scalar>(
    params: &Parameters<S>,
    z: &[f64],
    m: u32,
    quad: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    eval_psim_on(
        params,
        z,
        m,
        Chamber::default_for(params.l, m as usize)?,
        quad,
    )
}

/// [`eval_psim`] over a chosen chamber.
pub fn eval_psim_on<S: Scalar>(
    params: &Parameters<S>,
    z: &[f64],
    m: u32,
    chamber: Chamber,
    quad: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    let perms = level_permutations(params.l - 1, m as usize);
    run(&copies_integrand(params, z, m, chamber, &perms)?, quad)
}

/// Same integral as [`eval_psim`] over the single-block chamber, assembled
/// from the unsymmetrized integrand over each permuted chamber `σ(Δ)` mapped
/// back onto `Δ`.
///
/// Used to check the symmetrization: the total equals the symmetrized
/// integral and, when the integrand is symmetric, `|𝔖_M^{L-1}|` times the
/// ordered-chamber integral.
pub fn eval_psim_unsymmetrized<S: Scalar>(
    params: &Parameters<S>,
    z: &[S],
    m: u32,
    quad: &QuadratureSpec,
) -> Result<(IntegralEstimate, usize)> {
    let zf = real_z(z, params.n)?;
    let perms = level_permutations(params.l - 1, m as usize);
    let mut total: Option<IntegralEstimate> = None;
    for sigma in &perms {
        let f = copies_integrand(
            params,
            &zf,
            m,
            Chamber::ordered(params.l, m as usize)?,
            std::slice::from_ref(sigma),
        )?;
        let part = run(&f, quad)?;
        total = Some(match total {
            None => part,
            Some(mut acc) => {
                for (a, b) in acc.values.iter_mut().zip(&part.values) {
                    *a += b;
                }
                acc.relative_change = acc.relative_change.max(part.relative_change);
                acc.evaluations += part.evaluations;
                acc
            }
        });
    }
    Ok((total.expect("at least one permutation"), perms.len()))
}

/// `U(t)` of the single-copy integral at a chamber point `t = (t_1, ..., t_{L-1})`.
pub fn weight_m1(t: &[f64], z: &[f64], exps: &ExponentsM1<f64>) -> Result<f64> {
    let w = Weight::single(exps);
    let ch = Chamber::ordered(w.l, 1)?;
    if z.len() != exps.beta.len() {
        return Err(Error::Parameter("z and beta lengths differ".into()));
    }
    let levels: Vec<Vec<f64>> = t.iter().map(|&x| vec![x]).collect();
    let (u, ub) = ch.cube_coordinates(&levels)?;
    for &zi in z {
        if zi * t[t.len() - 1] >= 1.0 {
            return Err(Error::Domain(format!("1 - z t_{{L-1}} <= 0 for z = {zi}")));
        }
    }
    let p = ch.point(1.0, &u, &ub);
    let ln_u: f64 = w
        .factors()
        .iter()
        .map(|&(f, c)| {
            let ln = match f {
                Factor::Var((n, a)) => p.ln_t(n, a),
                Factor::Diff(v, x) => p.diff(v, x).1,
                Factor::OneMinusZ(i, (n, a)) => p.one_minus_zt(z[i], 1.0, n, a).1,
            };
            if c == 0.0 {
                0.0
            } else {
                c * ln
            }
        })
        .sum();
    Ok(ln_u.exp())
}

/// Densities of the single-copy forms at `t` against `dt_1 ∧ ... ∧ dt_{L-1}`:
/// `φ_0` and `phi[n-1][i-1] = φ_n^{(i)}`.
pub fn forms_m1(t: &[f64], z: &[f64]) -> Result<(f64, Vec<Vec<f64>>)> {
    let l = t.len() + 1;
    let ch = Chamber::ordered(l, 1)?;
    let levels: Vec<Vec<f64>> = t.iter().map(|&x| vec![x]).collect();
    ch.cube_coordinates(&levels)?;
    let prev = |n: usize| if n == 1 { 1.0 } else { t[n - 2] };
    let last = t[l - 2];
    let all: f64 = (1..l).map(|n| 1.0 / (prev(n) - t[n - 1])).product();
    let phi0 = all / last;
    let phi = (1..l)
        .map(|n| {
            z.iter()
                .map(|zi| all * (prev(n) - t[n - 1]) / ((1.0 - zi * last) * last))
                .collect()
        })
        .collect();
    Ok((phi0, phi))
}
