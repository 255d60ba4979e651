use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::pfaffian::{Matrix, PfaffianSystem, Space};
use crate::polyalg::{enumerate_basis, index_lookup, MultiIndex};
use crate::scalar::Scalar;
use crate::weylops::Parameters;

use super::dictionary::dictionary_m;

/// Row builder: accumulates `coefficient · φ_B` and drops shifted indices
/// that leave `𝒜_M`. Such terms carry a hidden factor (`A_{n,i}` from
/// `A_{n,i} X_n^{(i)}`, or `A_0` from the `f_0` copies) that vanishes exactly
/// when the shift is impossible.
struct Row<'a, S> {
    a: &'a MultiIndex,
    m: u32,
    lookup: &'a HashMap<MultiIndex, usize>,
    out: Vec<S>,
}

impl<S: Scalar> Row<'_, S> {
    fn add(&mut self, shifts: &[(usize, usize, i32)], c: S) {
        let Some(b) = self.a.shifted(shifts) else {
            return;
        };
        if b.degree() > self.m {
            return;
        }
        let k = self.lookup[&b];
        self.out[k] = self.out[k].clone() + c;
    }
}

/// Which version of the reduced `κ z_i ∇_i φ_A` to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohomologyForm {
    /// As printed: the diagonal bracket carries `Σ_{m>=n} α_m + L - n`.
    Printed,
    /// With `Σ_{m>=n} α_m - (L - n)` in the diagonal bracket. This version
    /// differs from `M_i` only by `M β_i / z_i` times the identity.
    Corrected,
}

impl CohomologyForm {
    pub fn as_str(self) -> &'static str {
        match self {
            CohomologyForm::Printed => "printed",
            CohomologyForm::Corrected => "corrected",
        }
    }
}

/// `P_i(z)`: the matrix of `κ ∂_i` on `c_A = ∫ U φ_A` read off the reduction
/// of `κ z_i ∇_i φ_A` modulo the coboundaries `X_n^{(i)}`, divided by `z_i`.
///
/// Rows and columns follow `enumerate_basis(L, N, M)`.
pub fn pfaffian_from_cohomology<S: Scalar>(
    params: &Parameters<S>,
    z: &[S],
    m: u32,
    i: usize,
    form: CohomologyForm,
) -> Result<Matrix<S>> {
    let exps = dictionary_m(params, m)?;
    params.check_z(z)?;
    let (l, nt) = (params.l, params.n);
    if i == 0 || i > nt {
        return Err(Error::Parameter(format!(
            "direction i = {i} outside 1..={nt}"
        )));
    }
    let basis = enumerate_basis(l, nt, m)?;
    let lookup = index_lookup(&basis);
    let int = |v: i64| S::from_i64(v);
    let alpha = &exps.alpha;
    let beta = &exps.beta;
    let gamma = exps.gamma.clone();
    let mm = int(m as i64);
    let zi = z[i - 1].clone();
    let one = S::one();
    let zi1 = zi.clone() - one.clone();
    let levels = l - 1;

    let mut p = Matrix::zeros(basis.len(), basis.len());
    for (r, a) in basis.iter().enumerate() {
        let e = |n: usize, j: usize| int(a.get(n, j) as i64);
        let col = |j: usize| int(a.time_degree(j) as i64);
        let lev = |n: usize| int(a.level_degree(n) as i64);
        let a0 = int((m - a.degree()) as i64);
        // Σ_j A_{n,j} + δ_{n,1}(γ - M)
        let level_factor = |n: usize| {
            if n == 1 {
                lev(1) + gamma.clone() - mm.clone()
            } else {
                lev(n)
            }
        };
        let mut row = Row {
            a,
            m,
            lookup: &lookup,
            out: vec![S::zero(); basis.len()],
        };

        let level_shift = |n: usize| match form {
            CohomologyForm::Printed => int((l - n) as i64),
            CohomologyForm::Corrected => int(-((l - n) as i64)),
        };
        // Diagonal bracket.
        let mut diag = S::zero();
        for n in 1..=levels {
            let tail = alpha[n - 1..].iter().fold(S::zero(), |s, x| s + x.clone());
            let head = (1..=n).fold(S::zero(), |s, k| s + e(k, i));
            diag = diag - e(n, i) * (tail + level_shift(n) - beta[i - 1].clone() + head);
        }
        let mut inner =
            a0.clone() * (col(i) - beta[i - 1].clone()) + e(1, i) * (mm.clone() - gamma.clone());
        for j in 1..=nt {
            for n in 1..=levels {
                inner = inner - e(n, i) * e(n, j);
            }
        }
        diag = diag + inner / zi1.clone();
        for j in (1..=nt).filter(|&j| j != i) {
            let zj = z[j - 1].clone();
            let mut s = S::zero();
            for n in 1..=levels {
                s = s + e(n, i) * (col(j) + e(n, j) - beta[j - 1].clone())
                    - beta[i - 1].clone() * e(n, j);
            }
            diag = diag + zj.clone() / (zi.clone() - zj) * s;
        }
        row.add(&[], diag);

        for n in 1..=levels {
            // φ_{(A_{n,i} - 1)}
            row.add(
                &[(n, i, -1)],
                -(a0.clone() + one.clone()) / zi1.clone() * level_factor(n),
            );
            // φ_{(A_{n,i} + 1)}
            row.add(
                &[(n, i, 1)],
                zi.clone() / zi1.clone() * (col(i) - beta[i - 1].clone()) * (e(n, i) + one.clone()),
            );
            // φ_{(A_{m,i} + 1, A_{n,i} - 1)}
            for mlev in (1..=levels).filter(|&k| k != n) {
                let side = if mlev < n { one.clone() } else { zi.clone() };
                row.add(
                    &[(mlev, i, 1), (n, i, -1)],
                    -level_factor(n) / zi1.clone() * side * (e(mlev, i) + one.clone()),
                );
            }
        }

        for j in (1..=nt).filter(|&j| j != i) {
            let zj = z[j - 1].clone();
            let dij = zi.clone() - zj.clone();
            for n in 1..=levels {
                // φ_{(A_{m,j} - 1, A_{m,i} + 1, A_{n,i} - 1, A_{n,j} + 1)}
                for mlev in (1..=levels).filter(|&k| k != n) {
                    let side = if mlev < n { zj.clone() } else { zi.clone() };
                    row.add(
                        &[(mlev, j, -1), (mlev, i, 1), (n, i, -1), (n, j, 1)],
                        (e(n, j) + one.clone()) / dij.clone() * side * (e(mlev, i) + one.clone()),
                    );
                }
                // φ_{(A_{n,j} - 1, A_{n,i} + 1)}
                row.add(
                    &[(n, j, -1), (n, i, 1)],
                    zi.clone() / dij.clone()
                        * (beta[i - 1].clone() - col(i))
                        * (e(n, i) + one.clone()),
                );
                // φ_{(A_{n,i} - 1, A_{n,j} + 1)}
                row.add(
                    &[(n, i, -1), (n, j, 1)],
                    zj.clone() / dij.clone()
                        * (beta[j - 1].clone() - col(j))
                        * (e(n, j) + one.clone()),
                );
            }
        }

        for (c, v) in row.out.into_iter().enumerate() {
            p.set(r, c, v / zi.clone());
        }
    }
    Ok(p)
}

/// Outcome of comparing `P_i(z)` with the restricted operator `M_i(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyAgreement<S> {
    pub i: usize,
    pub form: CohomologyForm,
    /// `P_i = M_i` entrywise.
    pub exact: bool,
    /// `Some(λ)` when `P_i - M_i = λ I` with `λ ≠ 0`.
    pub lambda: Option<S>,
    /// `P_i - M_i`.
    pub discrepancy: Matrix<S>,
}

/// Compares [`pfaffian_from_cohomology`] with the restriction of `H_i` to `V(M)`.
pub fn compare_with_operator<S: Scalar>(
    params: &Parameters<S>,
    z: &[S],
    m: u32,
    i: usize,
    form: CohomologyForm,
) -> Result<CohomologyAgreement<S>> {
    let p = pfaffian_from_cohomology(params, z, m, i, form)?;
    let sys = PfaffianSystem::new(params, Space::Total(m))?;
    let mi = sys.matrix_at(i, z)?;
    let diff = p.sub(&mi);
    let exact = diff.is_zero();
    let mut lambda = None;
    if !exact {
        let l0 = diff.get(0, 0).clone();
        let mut scalar = true;
        for r in 0..diff.rows() {
            for c in 0..diff.cols() {
                let want = if r == c { l0.clone() } else { S::zero() };
                if !diff.get(r, c).approx_eq(&want) {
                    scalar = false;
                }
            }
        }
        if scalar {
            lambda = Some(l0);
        }
    }
    Ok(CohomologyAgreement {
        i,
        form,
        exact,
        lambda,
        discrepancy: diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use crate::weylops::{sample_parameters, sample_z, SampleOptions};
    use num_traits::Zero;

    fn params(l: usize, n: usize, m: u32, seed: u64) -> Parameters<Rational> {
        let opts = SampleOptions {
            resonance: Some(ratio(m as i64, 1)),
            ..Default::default()
        };
        let p = sample_parameters(l, n, seed, &opts).unwrap();
        let mut kappa = p.kappa.clone();
        for k in kappa.iter_mut().skip(2) {
            *k = ratio(1, 1);
        }
        Parameters::new(
            l,
            n,
            p.e.clone(),
            kappa,
            p.theta[1..].to_vec(),
            ratio(1, 1),
            ratio(1, 1),
        )
        .unwrap()
    }

    #[test]
    fn corrected_form_differs_by_scalar() {
        for (l, n, m) in [
            (2, 1, 1),
            (2, 1, 2),
            (2, 2, 1),
            (3, 1, 1),
            (3, 1, 2),
            (2, 2, 2),
        ] {
            let p = params(l, n, m, 11);
            let z = sample_z(n, 5);
            let beta = dictionary_m(&p, m).unwrap().beta;
            for i in 1..=n {
                let c = compare_with_operator(&p, &z, m, i, CohomologyForm::Corrected).unwrap();
                let want = ratio(m as i64, 1) * beta[i - 1].clone() / z[i - 1].clone();
                assert_eq!(c.lambda, Some(want), "({l},{n},{m}) i={i}");
            }
        }
    }

    #[test]
    fn printed_form_has_index_dependent_diagonal() {
        let p = params(3, 1, 1, 4);
        let z = sample_z(1, 2);
        let c = compare_with_operator(&p, &z, 1, 1, CohomologyForm::Printed).unwrap();
        assert!(!c.exact && c.lambda.is_none());
        // Off-diagonal entries agree.
        for r in 0..c.discrepancy.rows() {
            for col in (0..c.discrepancy.cols()).filter(|&col| col != r) {
                assert!(c.discrepancy.get(r, col).is_zero());
            }
        }
    }
}
