use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polyalg::{enumerate_basis, MultiIndex, Polynomial};
use crate::scalar::{max_by_magnitude, Scalar};

use super::hamiltonian::{ahat_entry, omega};
use super::{hamiltonian, ActionCache, OperatorExpr, Parameters};

type Op<S> = OperatorExpr<S>;

/// All monomials of degree `<= max_degree`, the default probe set.
pub fn probes_up_to(params: &Parameters<impl Scalar>, max_degree: u32) -> Vec<MultiIndex> {
    enumerate_basis(params.l, params.n, max_degree).expect("parameters carry valid dimensions")
}

/// Largest coefficient of `(a b - b a) q^A` over the probes.
pub fn operator_commutator_residual<S: Scalar>(
    a: &Op<S>,
    b: &Op<S>,
    params: &Parameters<S>,
    probes: &[MultiIndex],
) -> Result<S> {
    let mut ca = ActionCache::new(a, params)?;
    let mut cb = ActionCache::new(b, params)?;
    let mut worst = S::zero();
    for idx in probes {
        let ab = ca.apply(&cb.on_monomial(idx).clone());
        let ba = cb.apply(&ca.on_monomial(idx).clone());
        worst = max_by_magnitude(worst, (&ab - &ba).max_coefficient());
    }
    Ok(worst)
}

/// Largest coefficient of `[H_i, H_j] q^A` over the probes.
pub fn commutator_residual<S: Scalar>(
    i: usize,
    j: usize,
    params: &Parameters<S>,
    z: &[S],
    probes: &[MultiIndex],
) -> Result<S> {
    let hi = hamiltonian(i, params, z)?;
    if i == j {
        return Ok(S::zero());
    }
    let hj = hamiltonian(j, params, z)?;
    operator_commutator_residual(&hi, &hj, params, probes)
}

/// Residual of the `Â`-entry commutation relation
/// `[Â^{(i)}_{m,n}, Â^{(j)}_{m',n'}] / ħ = δ_{ij}(δ_{n,m'} Â^{(i)}_{m,n'} - δ_{n',m} Â^{(i)}_{m',n})`
/// on the probes, for one quadruple of entries.
pub fn ahat_commutator_check<S: Scalar>(
    i: usize,
    j: usize,
    entries: (usize, usize, usize, usize),
    params: &Parameters<S>,
    probes: &[MultiIndex],
) -> Result<S> {
    let (m, n, m2, n2) = entries;
    let a = ahat_entry::<S>(i, m, n);
    let b = ahat_entry::<S>(j, m2, n2);
    let mut rhs = Vec::new();
    if i == j && n == m2 {
        rhs.push(ahat_entry::<S>(i, m, n2).scaled(params.hbar.clone()));
    }
    if i == j && n2 == m {
        rhs.push(ahat_entry::<S>(i, m2, n).scaled(-params.hbar.clone()));
    }
    let diff = Op::sum([Op::commutator(&a, &b), Op::Sum(rhs).scaled(-S::one())]);
    let mut cache = ActionCache::new(&diff, params)?;
    let mut worst = S::zero();
    for idx in probes {
        worst = max_by_magnitude(worst, cache.on_monomial(idx).max_coefficient());
    }
    Ok(worst)
}

/// Result of sweeping the `Â` relation over all entry quadruples.
#[derive(Clone, Debug)]
pub struct AhatSweep<S> {
    /// Max residual over quadruples with every index `>= 1`.
    pub interior: S,
    /// Max residual over quadruples touching a boundary index (reported only).
    pub boundary: S,
    /// Number of boundary quadruples with a nonzero residual.
    pub boundary_failures: usize,
}

/// Runs [`ahat_commutator_check`] for all `(i, j)` and all entry quadruples.
pub fn ahat_sweep<S: Scalar>(
    params: &Parameters<S>,
    probes: &[MultiIndex],
) -> Result<AhatSweep<S>> {
    let l = params.l;
    let mut jobs = Vec::new();
    for i in 1..=params.n {
        for j in 1..=params.n {
            for m in 0..l {
                for n in 0..l {
                    for m2 in 0..l {
                        for n2 in 0..l {
                            jobs.push((i, j, (m, n, m2, n2)));
                        }
                    }
                }
            }
        }
    }
    let results: Vec<(bool, S)> = jobs
        .par_iter()
        .map(|&(i, j, e)| {
            let interior = e.0 > 0 && e.1 > 0 && e.2 > 0 && e.3 > 0;
            ahat_commutator_check(i, j, e, params, probes).map(|r| (interior, r))
        })
        .collect::<Result<_>>()?;
    let mut sweep = AhatSweep {
        interior: S::zero(),
        boundary: S::zero(),
        boundary_failures: 0,
    };
    for (interior, r) in results {
        if interior {
            sweep.interior = max_by_magnitude(sweep.interior, r);
        } else {
            if !r.is_zero() {
                sweep.boundary_failures += 1;
            }
            sweep.boundary = max_by_magnitude(sweep.boundary, r);
        }
    }
    Ok(sweep)
}

/// Max residual of the infinitesimal braid relations among `Ω_{i,j}`, `1 <= i,j,k,l <= N`:
/// `[Ω_ij, Ω_kl] = 0` for distinct indices and `[Ω_ij, Ω_ik + Ω_kj] = 0`.
pub fn braid_residual<S: Scalar>(params: &Parameters<S>, probes: &[MultiIndex]) -> Result<S> {
    let (l, n) = (params.l, params.n);
    let mut jobs: Vec<(Op<S>, Op<S>)> = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                if i == j || j == k || i == k {
                    continue;
                }
                jobs.push((omega(l, i, j), Op::sum([omega(l, i, k), omega(l, k, j)])));
                for m in 1..=n {
                    if m != i && m != j && m != k {
                        jobs.push((omega(l, i, j), omega(l, k, m)));
                    }
                }
            }
        }
    }
    let results: Vec<S> = jobs
        .par_iter()
        .map(|(a, b)| operator_commutator_residual(a, b, params, probes))
        .collect::<Result<_>>()?;
    Ok(results.into_iter().fold(S::zero(), max_by_magnitude))
}

/// Max over probes of `deg(H_i q^A) - deg(q^A)`.
pub fn degree_raise<S: Scalar>(
    i: usize,
    params: &Parameters<S>,
    z: &[S],
    probes: &[MultiIndex],
) -> Result<i64> {
    let h = hamiltonian(i, params, z)?;
    let mut cache = ActionCache::new(&h, params)?;
    Ok(probes
        .iter()
        .map(|a| cache.on_monomial(a).degree() - a.degree() as i64)
        .max()
        .unwrap_or(i64::MIN))
}

/// Canonical commutation `[p_m^{(j)}, q_n^{(i)}] = δ δ ħ` on the given polynomials.
pub fn canonical_commutation_residual<S: Scalar>(
    params: &Parameters<S>,
    samples: &[Polynomial<S>],
) -> Result<S> {
    let mut worst = S::zero();
    for j in 1..=params.n {
        for m in 1..params.l {
            for i in 1..=params.n {
                for k in 1..params.l {
                    let c = Op::commutator(&Op::p(m, j), &Op::q(k, i));
                    let delta = if (m, j) == (k, i) {
                        params.hbar.clone()
                    } else {
                        S::zero()
                    };
                    for f in samples {
                        let r = &c.apply(f, params)? - &f.scale(&delta);
                        worst = max_by_magnitude(worst, r.max_coefficient());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Which version of the `L = 2` Garnier form to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GarnierForm {
    /// Coefficients exactly as usually printed:
    /// `-z_j/(z_i-z_j) (θ_j + q_j p_j) q_i p_j`, `-z_i/(z_i-z_j) (θ_i + q_i p_i) q_j p_i`
    /// and `-((e_1-e_0) z_i + e_0 - e_1 - ħ + κ_1 - κ_0) q_i p_i`.
    Printed,
    /// The two exchange terms carry an extra factor `(z_i - 1)` and the `e`
    /// difference has the opposite sign. This is the form that agrees with the
    /// general Hamiltonian up to a scalar.
    Corrected,
}

/// The `L = 2` Garnier form of `z_i (z_i - 1) H_i`, with `q_j = q_1^{(j)}`.
pub fn garnier_example<S: Scalar>(
    i: usize,
    params: &Parameters<S>,
    z: &[S],
    form: GarnierForm,
) -> Result<Op<S>> {
    if params.l != 2 {
        return Err(Error::Unsupported(format!(
            "the Garnier form exists only for L = 2, got L = {}",
            params.l
        )));
    }
    params.check_z(z)?;
    let n = params.n;
    let one = S::one();
    let c = |v: S| Op::Scalar(v);
    let qj = |j: usize| Op::q(1, j);
    let pj = |j: usize| Op::p(1, j);
    let euler = |j: usize| Op::product([qj(j), pj(j)]);
    let euler_sum = || Op::sum((1..=n).map(euler));
    // θ_j + q_j p_j
    let shifted = |j: usize| Op::sum([c(params.theta[j].clone()), euler(j)]);
    let zi = z[i - 1].clone();
    let k1 = params.kappa[1].clone();
    let exchange_factor = match form {
        GarnierForm::Printed => one.clone(),
        GarnierForm::Corrected => zi.clone() - one.clone(),
    };
    let mut terms = vec![
        Op::product([
            qj(i),
            Op::sum([c(k1.clone() - params.theta[0].clone()), euler_sum()]),
            Op::sum([c(k1.clone()), euler_sum()]),
        ]),
        Op::product([c(zi.clone()), shifted(i), pj(i)]),
    ];
    for j in (1..=n).filter(|&j| j != i) {
        let zj = z[j - 1].clone();
        let d_ij = zi.clone() - zj.clone();
        let d_ji = zj.clone() - zi.clone();
        let wj = zj.clone() * exchange_factor.clone() / d_ij.clone();
        let wi = zi.clone() * exchange_factor.clone() / d_ij;
        terms.push(Op::product([shifted(j), qj(i), pj(j)]).scaled(-wj));
        terms.push(Op::product([shifted(i), qj(j), pj(i)]).scaled(-wi));
        let w = zi.clone() * (zj - one.clone()) / d_ji;
        terms.push(Op::product([shifted(i), qj(j), pj(j)]).scaled(-w.clone()));
        terms.push(Op::product([shifted(j), qj(i), pj(i)]).scaled(-w));
    }
    terms.push(Op::product([shifted(i), qj(i), pj(i)]).scaled(-(zi.clone() + one.clone())));
    let e_diff = match form {
        GarnierForm::Printed => params.e[1].clone() - params.e[0].clone(),
        GarnierForm::Corrected => params.e[0].clone() - params.e[1].clone(),
    };
    let lin =
        e_diff.clone() * zi.clone() - e_diff - params.hbar.clone() + k1 - params.kappa[0].clone();
    terms.push(euler(i).scaled(-lin));
    Ok(Op::Sum(terms))
}

/// Deviation of `z_i(z_i-1)H_i - (Garnier form)` from a single multiple of the
/// identity `λ_i(z)`, over the probes. Returns `(deviation, λ_i(z))`, with λ
/// read off the constant probe.
pub fn garnier_example_residual<S: Scalar>(
    i: usize,
    params: &Parameters<S>,
    z: &[S],
    form: GarnierForm,
    probes: &[MultiIndex],
) -> Result<(S, S)> {
    let example = garnier_example(i, params, z, form)?;
    let zi = z[i - 1].clone();
    let generic = hamiltonian(i, params, z)?.scaled(zi.clone() * (zi - S::one()));
    let diff = Op::sum([generic, example.scaled(-S::one())]);
    let mut cache = ActionCache::new(&diff, params)?;
    let unit = MultiIndex::zero(params.l - 1, params.n);
    let lambda = cache.on_monomial(&unit).coefficient_of(&unit);
    let mut worst = S::zero();
    for idx in probes {
        let image = cache.on_monomial(idx).clone();
        let r = &image - &Polynomial::monomial(idx.clone(), lambda.clone());
        worst = max_by_magnitude(worst, r.max_coefficient());
    }
    Ok((worst, lambda))
}

/// Coefficient of `q_n^{(i)} q^A` in `z_i(z_i-1) H_i q^A` for every probe of
/// degree `d(A)`, paired with the predicted `-(κ_0 - Σθ - d(A))(κ_n + Σ_j A_{n,j})`
/// (predicted value valid at `ħ = 1`). Returns the largest mismatch.
pub fn leading_coefficient_residual<S: Scalar>(
    i: usize,
    params: &Parameters<S>,
    z: &[S],
    probes: &[MultiIndex],
) -> Result<S> {
    let zi = z[i - 1].clone();
    let h = hamiltonian(i, params, z)?.scaled(zi.clone() * (zi - S::one()));
    let mut cache = ActionCache::new(&h, params)?;
    let mut worst = S::zero();
    for a in probes {
        let image = cache.on_monomial(a).clone();
        let d = S::from_i64(a.degree() as i64);
        for n in 1..params.l {
            let mut target = a.clone();
            target.set(n, i, a.get(n, i) + 1);
            let predicted = -(params.resonance() - d.clone())
                * (params.kappa[n].clone() + S::from_i64(a.level_degree(n) as i64));
            let got = image.coefficient_of(&target);
            worst = max_by_magnitude(worst, got - predicted);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use crate::weylops::{sample_parameters, sample_z, SampleOptions};
    use num_traits::Zero;

    fn rparams(l: usize, n: usize, seed: u64) -> Parameters<Rational> {
        sample_parameters(l, n, seed, &SampleOptions::default()).unwrap()
    }

    #[test]
    fn hamiltonians_commute_small() {
        let p = rparams(2, 2, 7);
        let z = sample_z(2, 7);
        let probes = probes_up_to(&p, 3);
        assert!(commutator_residual(1, 2, &p, &z, &probes)
            .unwrap()
            .is_zero());
        assert!(commutator_residual(1, 1, &p, &z, &probes)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn ahat_interior_relations() {
        let p = rparams(3, 1, 2);
        let probes = probes_up_to(&p, 3);
        for e in [(1, 1, 1, 1), (1, 2, 2, 1)] {
            assert!(ahat_commutator_check(1, 1, e, &p, &probes)
                .unwrap()
                .is_zero());
        }
        let p = rparams(2, 2, 2);
        let probes = probes_up_to(&p, 2);
        assert!(ahat_commutator_check(1, 2, (1, 1, 1, 1), &p, &probes)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn canonical_commutation_with_general_hbar() {
        let opts = SampleOptions {
            hbar: Some(ratio(-5, 3)),
            ..Default::default()
        };
        let p = sample_parameters(3, 2, 1, &opts).unwrap();
        let samples: Vec<_> = probes_up_to(&p, 2)
            .iter()
            .map(Polynomial::basis_monomial)
            .collect();
        assert!(canonical_commutation_residual(&p, &samples)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn garnier_rejects_other_l() {
        let p = rparams(3, 1, 2);
        assert!(matches!(
            garnier_example(1, &p, &[ratio(1, 3)], GarnierForm::Corrected),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn garnier_constant_probe_is_trivially_zero() {
        let p = rparams(2, 1, 4);
        let z = sample_z(1, 4);
        let unit = vec![MultiIndex::zero(1, 1)];
        for form in [GarnierForm::Printed, GarnierForm::Corrected] {
            let (dev, _) = garnier_example_residual(1, &p, &z, form, &unit).unwrap();
            assert!(dev.is_zero());
        }
    }

    #[test]
    fn corrected_garnier_form_matches_up_to_scalar() {
        let opts = SampleOptions {
            hbar: Some(ratio(2, 3)),
            ..Default::default()
        };
        let p = sample_parameters(2, 2, 8, &opts).unwrap();
        let z = sample_z(2, 8);
        let probes = probes_up_to(&p, 2);
        for i in 1..=2 {
            let (dev, _) =
                garnier_example_residual(i, &p, &z, GarnierForm::Corrected, &probes).unwrap();
            assert!(dev.is_zero());
            let (dev, _) =
                garnier_example_residual(i, &p, &z, GarnierForm::Printed, &probes).unwrap();
            assert!(!dev.is_zero());
        }
    }
}
