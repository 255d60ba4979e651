use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::MultiIndex;

/// A polynomial in the variables `q_m^{(i)}` (`1 <= m <= L-1`, `1 <= i <= N`).
///
/// Zero coefficients are never stored, so the zero polynomial has no terms and
/// degree `-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<S> {
    levels: usize,
    times: usize,
    terms: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(levels: usize, times: usize) -> Self {
        Self {
            levels,
            times,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(levels: usize, times: usize, value: S) -> Self {
        Self::monomial(MultiIndex::zero(levels, times), value)
    }

    /// `coeff * q^index`.
    pub fn monomial(index: MultiIndex, coeff: S) -> Self {
        let mut p = Self::zero(index.levels(), index.times());
        p.add_term(index, coeff);
        p
    }

    /// `q^index` with unit coefficient.
    pub fn basis_monomial(index: &MultiIndex) -> Self {
        Self::monomial(index.clone(), S::one())
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn times(&self) -> usize {
        self.times
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.terms.iter()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|a| a.degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    /// Coefficient of `q^index`, zero when absent.
    pub fn coefficient_of(&self, index: &MultiIndex) -> S {
        self.terms.get(index).cloned().unwrap_or_else(S::zero)
    }

    /// Adds `coeff * q^index` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, index: MultiIndex, coeff: S) {
        debug_assert_eq!((index.levels(), index.times()), (self.levels, self.times));
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(index) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_context(&self, other: &Self) -> Result<()> {
        if (self.levels, self.times) != (other.levels, other.times) {
            return Err(Error::Structure(format!(
                "polynomial contexts differ: {}x{} vs {}x{}",
                self.levels, self.times, other.levels, other.times
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        Ok(out)
    }

    /// Adds `factor * other` in place.
    pub fn add_scaled(&mut self, other: &Self, factor: &S) {
        debug_assert!(self.check_context(other).is_ok());
        if factor.is_zero() {
            return;
        }
        for (a, c) in &other.terms {
            self.add_term(a.clone(), c.clone() * factor.clone());
        }
    }

    pub fn scale(&self, factor: &S) -> Self {
        let mut out = Self::zero(self.levels, self.times);
        if factor.is_zero() {
            return out;
        }
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.clone() * factor.clone());
        }
        out
    }

    /// Multiplication by the variable `q_level^{(time)}`.
    pub fn mul_var(&self, level: usize, time: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(a, c)| {
                let mut b = a.clone();
                b.set(level, time, a.get(level, time) + 1);
                (b, c.clone())
            })
            .collect();
        Self {
            levels: self.levels,
            times: self.times,
            terms,
        }
    }

    /// Partial derivative in `q_level^{(time)}`.
    pub fn derivative(&self, level: usize, time: usize) -> Self {
        let mut out = Self::zero(self.levels, self.times);
        for (a, c) in &self.terms {
            let k = a.get(level, time);
            if k > 0 {
                let mut b = a.clone();
                b.set(level, time, k - 1);
                out.terms.insert(b, c.clone() * S::from_i64(k as i64));
            }
        }
        out
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let mut out = Self::zero(self.levels, self.times);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let e: Vec<u32> = a
                    .entries()
                    .iter()
                    .zip(b.entries())
                    .map(|(x, y)| x + y)
                    .collect();
                out.add_term(
                    MultiIndex::from_entries(self.levels, self.times, e),
                    c.clone() * d.clone(),
                );
            }
        }
        Ok(out)
    }

    /// Largest coefficient by magnitude (zero for the zero polynomial).
    pub fn max_coefficient(&self) -> S {
        self.terms
            .values()
            .map(|c| c.modulus())
            .fold(S::zero(), crate::scalar::max_by_magnitude)
    }

    /// Part of total degree exactly `degree`.
    pub fn homogeneous_part(&self, degree: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(a, _)| a.degree() == degree)
            .map(|(a, c)| (a.clone(), c.clone()))
            .collect();
        Self {
            levels: self.levels,
            times: self.times,
            terms,
        }
    }
}

impl<S: Scalar> Add for &Polynomial<S> {
    type Output = Polynomial<S>;

    /// # Panics
    /// If the operands live in different `(L, N)` contexts.
    fn add(self, rhs: Self) -> Polynomial<S> {
        self.try_add(rhs).expect("polynomial context mismatch")
    }
}

impl<S: Scalar> Sub for &Polynomial<S> {
    type Output = Polynomial<S>;

    fn sub(self, rhs: Self) -> Polynomial<S> {
        self.try_add(&-rhs).expect("polynomial context mismatch")
    }
}

impl<S: Scalar> Neg for &Polynomial<S> {
    type Output = Polynomial<S>;

    fn neg(self) -> Polynomial<S> {
        self.scale(&-S::one())
    }
}

impl<S: Scalar> Mul for &Polynomial<S> {
    type Output = Polynomial<S>;

    fn mul(self, rhs: Self) -> Polynomial<S> {
        self.try_mul(rhs).expect("polynomial context mismatch")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn q(levels: usize, times: usize, entries: &[u32]) -> MultiIndex {
        MultiIndex::from_entries(levels, times, entries.to_vec())
    }

    #[test]
    fn add_cancels_to_zero() {
        let a = Polynomial::monomial(q(1, 1, &[2]), ratio(3, 1));
        let sum = &a + &(-&a);
        assert!(sum.is_zero());
        assert_eq!(sum.degree(), -1);
    }

    #[test]
    fn coefficient_of_constant() {
        let mut p = Polynomial::constant(1, 1, ratio(3, 1));
        p.add_term(q(1, 1, &[1]), ratio(2, 1));
        assert_eq!(p.coefficient_of(&MultiIndex::zero(1, 1)), ratio(3, 1));
        assert_eq!(p.coefficient_of(&q(1, 1, &[5])), Rational::zero());
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn exact_scaling() {
        let p = Polynomial::monomial(q(1, 1, &[1]), ratio(1, 2));
        assert_eq!(
            p.scale(&ratio(1, 3)).coefficient_of(&q(1, 1, &[1])),
            ratio(1, 6)
        );
    }

    #[test]
    fn derivation_rule() {
        let p = Polynomial::monomial(q(1, 1, &[2]), Rational::from_integer(1.into()));
        let d = p.derivative(1, 1);
        assert_eq!(d.coefficient_of(&q(1, 1, &[1])), ratio(2, 1));
        assert!(p
            .derivative(1, 1)
            .derivative(1, 1)
            .derivative(1, 1)
            .is_zero());
    }

    #[test]
    fn context_mismatch_is_an_error() {
        let a = Polynomial::constant(1, 1, ratio(1, 1));
        let b = Polynomial::constant(2, 1, ratio(1, 1));
        assert!(matches!(a.try_add(&b), Err(Error::Structure(_))));
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial<Rational>> {
        prop::collection::vec(((0u32..3, 0u32..3, 0u32..2), -9i64..10, 1i64..6), 0..6).prop_map(
            |terms| {
                let mut p = Polynomial::zero(1, 3);
                for ((a, b, c), n, d) in terms {
                    p.add_term(q(1, 3, &[a, b, c]), ratio(n, d));
                }
                p
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn leibniz_rule(a in arb_poly(), b in arb_poly()) {
            let lhs = (&a * &b).derivative(1, 2);
            let rhs = &(&a.derivative(1, 2) * &b) + &(&a * &b.derivative(1, 2));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
