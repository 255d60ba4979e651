use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::polyalg::{MultiIndex, Polynomial};
use crate::scalar::{sum, Scalar};

use super::Parameters;

/// Element of the Weyl algebra as an unevaluated expression tree.
///
/// `Q(m, i)` and `P(m, i)` with `m >= 1`, `i >= 1` are the generators.
/// Indices `m = 0` or `i = 0` name the boundary nodes, which stand for
/// fixed expressions in the generators:
///
/// | node | expansion |
/// |---|---|
/// | `q_0^{(i)}` | `θ_i + Σ_m q_m^{(i)} p_m^{(i)}` |
/// | `p_0^{(i)}` | `-1` |
/// | `q_m^{(0)}` | `-1` |
/// | `p_m^{(0)}` | `κ_m + Σ_i q_m^{(i)} p_m^{(i)}` |
/// | `q_0^{(0)}` | `κ_0 - Σ_i θ_i - Σ_{i,m} q_m^{(i)} p_m^{(i)}` |
/// | `p_0^{(0)}` | `-1` |
///
/// A `Product` acts right factor first, so `Product([a, b])` applied to `f`
/// is `a(b(f))`, matching the order the factors are written in.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorExpr<S> {
    Scalar(S),
    Q(usize, usize),
    P(usize, usize),
    Sum(Vec<OperatorExpr<S>>),
    Product(Vec<OperatorExpr<S>>),
}

impl<S: Scalar> OperatorExpr<S> {
    pub fn scalar(value: S) -> Self {
        OperatorExpr::Scalar(value)
    }

    pub fn q(level: usize, time: usize) -> Self {
        OperatorExpr::Q(level, time)
    }

    pub fn p(level: usize, time: usize) -> Self {
        OperatorExpr::P(level, time)
    }

    pub fn sum(terms: impl IntoIterator<Item = Self>) -> Self {
        OperatorExpr::Sum(terms.into_iter().collect())
    }

    pub fn product(factors: impl IntoIterator<Item = Self>) -> Self {
        OperatorExpr::Product(factors.into_iter().collect())
    }

    /// `coeff * self`.
    pub fn scaled(self, coeff: S) -> Self {
        OperatorExpr::Product(vec![OperatorExpr::Scalar(coeff), self])
    }

    /// `a b - b a`.
    pub fn commutator(a: &Self, b: &Self) -> Self {
        OperatorExpr::Sum(vec![
            OperatorExpr::Product(vec![a.clone(), b.clone()]),
            OperatorExpr::Product(vec![b.clone(), a.clone()]).scaled(-S::one()),
        ])
    }

    /// Checks every generator index against `0..=L-1` and `0..=N`.
    pub fn validate(&self, l: usize, n: usize) -> Result<()> {
        match self {
            OperatorExpr::Scalar(_) => Ok(()),
            OperatorExpr::Q(m, i) | OperatorExpr::P(m, i) => {
                if *m < l && *i <= n {
                    Ok(())
                } else {
                    Err(Error::Structure(format!(
                        "generator index (m={m}, i={i}) outside 0..={} x 0..={n}",
                        l - 1
                    )))
                }
            }
            OperatorExpr::Sum(v) | OperatorExpr::Product(v) => {
                v.iter().try_for_each(|c| c.validate(l, n))
            }
        }
    }

    /// Replaces every boundary node by its expansion in the generators.
    pub fn expand(&self, params: &Parameters<S>) -> Result<Self> {
        self.validate(params.l, params.n)?;
        Ok(self.expand_unchecked(params))
    }

    fn expand_unchecked(&self, params: &Parameters<S>) -> Self {
        let (l, n) = (params.l, params.n);
        let euler = |m: usize, i: usize| Self::product([Self::Q(m, i), Self::P(m, i)]);
        let minus_one = || Self::Scalar(-S::one());
        match self {
            OperatorExpr::Scalar(_) => self.clone(),
            OperatorExpr::Q(0, 0) => {
                let mut terms = vec![Self::Scalar(
                    params.kappa[0].clone() - sum(&params.theta[1..]),
                )];
                for i in 1..=n {
                    for m in 1..l {
                        terms.push(euler(m, i).scaled(-S::one()));
                    }
                }
                Self::Sum(terms)
            }
            OperatorExpr::P(0, _) => minus_one(),
            OperatorExpr::Q(_, 0) => minus_one(),
            OperatorExpr::Q(0, i) => {
                let mut terms = vec![Self::Scalar(params.theta[*i].clone())];
                terms.extend((1..l).map(|m| euler(m, *i)));
                Self::Sum(terms)
            }
            OperatorExpr::P(m, 0) => {
                let mut terms = vec![Self::Scalar(params.kappa[*m].clone())];
                terms.extend((1..=n).map(|i| euler(*m, i)));
                Self::Sum(terms)
            }
            OperatorExpr::Q(..) | OperatorExpr::P(..) => self.clone(),
            OperatorExpr::Sum(v) => {
                Self::Sum(v.iter().map(|c| c.expand_unchecked(params)).collect())
            }
            OperatorExpr::Product(v) => {
                Self::Product(v.iter().map(|c| c.expand_unchecked(params)).collect())
            }
        }
    }

    /// Applies the operator to `f`, with `p_m^{(i)} = ħ ∂/∂q_m^{(i)}`.
    pub fn apply(&self, f: &Polynomial<S>, params: &Parameters<S>) -> Result<Polynomial<S>> {
        if (f.levels(), f.times()) != (params.l - 1, params.n) {
            return Err(Error::Structure(format!(
                "polynomial lives in a {}x{} context, parameters describe {}x{}",
                f.levels(),
                f.times(),
                params.l - 1,
                params.n
            )));
        }
        let expanded = self.expand(params)?;
        Ok(expanded.apply_expanded(f, &params.hbar))
    }

    /// Application of an already expanded tree (no boundary nodes).
    pub(crate) fn apply_expanded(&self, f: &Polynomial<S>, hbar: &S) -> Polynomial<S> {
        match self {
            OperatorExpr::Scalar(c) => f.scale(c),
            OperatorExpr::Q(m, i) => f.mul_var(*m, *i),
            OperatorExpr::P(m, i) => f.derivative(*m, *i).scale(hbar),
            OperatorExpr::Sum(v) => {
                let mut out = Polynomial::zero(f.levels(), f.times());
                for c in v {
                    out.add_scaled(&c.apply_expanded(f, hbar), &S::one());
                }
                out
            }
            OperatorExpr::Product(v) => {
                let mut acc = f.clone();
                for c in v.iter().rev() {
                    if acc.is_zero() {
                        break;
                    }
                    acc = c.apply_expanded(&acc, hbar);
                }
                acc
            }
        }
    }
}

/// An operator prepared for repeated application, caching its action on
/// monomials.
///
/// Linear extension over the cache makes long probe sweeps (and applying one
/// operator to the output of another) cost one tree walk per distinct monomial.
#[derive(Clone, Debug)]
pub struct ActionCache<S> {
    op: OperatorExpr<S>,
    hbar: S,
    levels: usize,
    times: usize,
    cache: HashMap<MultiIndex, Polynomial<S>>,
}

impl<S: Scalar> ActionCache<S> {
    pub fn new(op: &OperatorExpr<S>, params: &Parameters<S>) -> Result<Self> {
        Ok(Self {
            op: op.expand(params)?,
            hbar: params.hbar.clone(),
            levels: params.l - 1,
            times: params.n,
            cache: HashMap::new(),
        })
    }

    /// The operator applied to `q^index`.
    pub fn on_monomial(&mut self, index: &MultiIndex) -> &Polynomial<S> {
        if !self.cache.contains_key(index) {
            let image = self
                .op
                .apply_expanded(&Polynomial::basis_monomial(index), &self.hbar);
            self.cache.insert(index.clone(), image);
        }
        &self.cache[index]
    }

    pub fn apply(&mut self, f: &Polynomial<S>) -> Polynomial<S> {
        let mut out = Polynomial::zero(self.levels, self.times);
        for (a, c) in f.terms() {
            let image = self.on_monomial(a).clone();
            out.add_scaled(&image, c);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use crate::weylops::{sample_parameters, SampleOptions};

    fn params(l: usize, n: usize) -> Parameters<Rational> {
        let opts = SampleOptions {
            hbar: Some(ratio(3, 2)),
            ..Default::default()
        };
        sample_parameters(l, n, 1, &opts).unwrap()
    }

    fn mono(l: usize, n: usize, entries: &[u32]) -> Polynomial<Rational> {
        Polynomial::basis_monomial(&MultiIndex::from_entries(l - 1, n, entries.to_vec()))
    }

    #[test]
    fn derivation_carries_hbar() {
        let p = params(2, 1);
        let out = OperatorExpr::p(1, 1).apply(&mono(2, 1, &[2]), &p).unwrap();
        let expected = mono(2, 1, &[1]).scale(&(ratio(2, 1) * p.hbar.clone()));
        assert_eq!(out, expected);
    }

    #[test]
    fn boundary_q0_on_one_is_theta() {
        let p = params(3, 2);
        for i in 1..=2 {
            let out = OperatorExpr::q(0, i)
                .apply(&mono(3, 2, &[0; 4]), &p)
                .unwrap();
            assert_eq!(out, Polynomial::constant(2, 2, p.theta[i].clone()));
        }
    }

    #[test]
    fn boundary_p_m0_on_generator() {
        let p = params(3, 2);
        let f = mono(3, 2, &[0, 1, 0, 0]);
        let out = OperatorExpr::p(1, 0).apply(&f, &p).unwrap();
        assert_eq!(out, f.scale(&(p.kappa[1].clone() + p.hbar.clone())));
    }

    #[test]
    fn out_of_range_index_is_structure_error() {
        let p = params(2, 1);
        let f = mono(2, 1, &[1]);
        assert!(matches!(
            OperatorExpr::q(2, 1).apply(&f, &p),
            Err(Error::Structure(_))
        ));
        assert!(matches!(
            OperatorExpr::p(1, 2).apply(&f, &p),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn product_acts_right_factor_first() {
        // q p (x) = ħ x, p q (x) = 2ħ x
        let p = params(2, 1);
        let f = mono(2, 1, &[1]);
        let qp = OperatorExpr::product([OperatorExpr::q(1, 1), OperatorExpr::p(1, 1)]);
        let pq = OperatorExpr::product([OperatorExpr::p(1, 1), OperatorExpr::q(1, 1)]);
        assert_eq!(qp.apply(&f, &p).unwrap(), f.scale(&p.hbar));
        assert_eq!(
            pq.apply(&f, &p).unwrap(),
            f.scale(&(ratio(2, 1) * p.hbar.clone()))
        );
    }

    #[test]
    fn cache_matches_direct_application() {
        let p = params(3, 2);
        let op = OperatorExpr::product([
            OperatorExpr::q(1, 1),
            OperatorExpr::p(1, 0),
            OperatorExpr::q(0, 0),
            OperatorExpr::p(2, 2),
        ]);
        let mut cache = ActionCache::new(&op, &p).unwrap();
        let f = &mono(3, 2, &[1, 0, 2, 1]) + &mono(3, 2, &[0, 0, 0, 3]);
        assert_eq!(cache.apply(&f), op.apply(&f, &p).unwrap());
    }
}
