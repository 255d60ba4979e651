use crate::error::Result;
use crate::scalar::{sum, Scalar};

use super::{OperatorExpr, Parameters};

type Op<S> = OperatorExpr<S>;

fn q<S: Scalar>(m: usize, i: usize) -> Op<S> {
    Op::Q(m, i)
}

fn p<S: Scalar>(m: usize, i: usize) -> Op<S> {
    Op::P(m, i)
}

/// `z_i H_i` split into its `z`-independent operator groups.
///
/// ```text
/// z_i H_i = g12 + g3 / (z_i - 1) + Σ_{j≠i} z_j/(z_i - z_j) (g4_j - θ_i θ_j) + c_i
/// ```
///
/// with `g12` the first two sums of the definition, `g3` the `1/(z_i - 1)` sum,
/// `g4_j` the inner `Σ_{m,n}` of the `z_j/(z_i - z_j)` sum and
/// `c_i = θ_i (e_0 + κ_0 - Σ_{j>=1} θ_j)`. Factor order inside every product is
/// the order written in the definition.
#[derive(Clone, Debug)]
pub struct HamiltonianParts<S> {
    pub i: usize,
    pub g12: Op<S>,
    pub g3: Op<S>,
    /// `(j, g4_j)` for every `j != i`.
    pub g4: Vec<(usize, Op<S>)>,
    /// `c_i`.
    pub constant: S,
    /// `θ_i θ_j` for every `j != i`, in the order of `g4`.
    pub theta_products: Vec<S>,
}

/// `Σ_{m,n=0}^{L-1} q_m^{(i)} p_n^{(i)} q_n^{(j)} p_m^{(j)}`.
pub fn exchange_sum<S: Scalar>(l: usize, i: usize, j: usize) -> Op<S> {
    let mut terms = Vec::with_capacity(l * l);
    for m in 0..l {
        for n in 0..l {
            terms.push(Op::product([q(m, i), p(n, i), q(n, j), p(m, j)]));
        }
    }
    Op::Sum(terms)
}

/// `Ω_{i,j} = ½ tr(Â^{(i)} Â^{(j)})` with `(Â^{(i)})_{m,n} = q_m^{(i)} p_n^{(i)}`.
pub fn omega<S: Scalar>(l: usize, i: usize, j: usize) -> Op<S> {
    exchange_sum(l, i, j).scaled(S::from_ratio(1, 2))
}

/// Entry `(m, n)` of `Â^{(i)}`.
pub fn ahat_entry<S: Scalar>(i: usize, m: usize, n: usize) -> Op<S> {
    Op::product([q(m, i), p(n, i)])
}

impl<S: Scalar> HamiltonianParts<S> {
    pub fn new(params: &Parameters<S>, i: usize) -> Result<Self> {
        let (l, n) = (params.l, params.n);
        if i == 0 || i > n {
            return Err(crate::Error::Structure(format!(
                "Hamiltonian index i = {i} outside 1..={n}"
            )));
        }
        let mut g12 = Vec::new();
        for k in 0..l {
            g12.push(Op::product([q(k, i), p(k, i)]).scaled(params.e[k].clone()));
        }
        for j in 0..=n {
            for m in 0..l {
                for k in m + 1..l {
                    g12.push(Op::product([q(m, i), p(m, j), q(k, j), p(k, i)]));
                }
            }
        }
        let mut g3 = Vec::new();
        for m in 0..l {
            for k in 0..l {
                g3.push(Op::product([q(m, i), p(m, 0), q(k, 0), p(k, i)]));
            }
        }
        let others: Vec<usize> = (1..=n).filter(|&j| j != i).collect();
        let g4 = others.iter().map(|&j| (j, exchange_sum(l, i, j))).collect();
        let theta_products = others
            .iter()
            .map(|&j| params.theta[i].clone() * params.theta[j].clone())
            .collect();
        let constant = params.theta[i].clone()
            * (params.e[0].clone() + params.kappa[0].clone() - sum(&params.theta[1..]));
        Ok(Self {
            i,
            g12: Op::Sum(g12),
            g3: Op::Sum(g3),
            g4,
            constant,
            theta_products,
        })
    }

    /// Scalar weights `(1/z_i, 1/(z_i - 1), [z_j/(z_i - z_j)])` at an admissible `z`.
    pub fn weights(&self, z: &[S]) -> (S, S, Vec<S>) {
        let zi = z[self.i - 1].clone();
        let w4 = self
            .g4
            .iter()
            .map(|(j, _)| z[j - 1].clone() / (zi.clone() - z[j - 1].clone()))
            .collect();
        (S::one() / zi.clone(), S::one() / (zi - S::one()), w4)
    }

    /// The scalar part of `z_i H_i` at `z`: `c_i - Σ_j θ_iθ_j z_j/(z_i - z_j)`.
    pub fn scalar_part(&self, z: &[S]) -> S {
        let (_, _, w4) = self.weights(z);
        w4.iter()
            .zip(&self.theta_products)
            .fold(self.constant.clone(), |acc, (w, t)| {
                acc - w.clone() * t.clone()
            })
    }

    /// `H_i` at `z` as one expression.
    pub fn assemble(&self, z: &[S]) -> Op<S> {
        let (inv_zi, w3, w4) = self.weights(z);
        let mut terms = vec![self.g12.clone(), self.g3.clone().scaled(w3)];
        for ((_, g), w) in self.g4.iter().zip(w4) {
            terms.push(g.clone().scaled(w));
        }
        terms.push(Op::Scalar(self.scalar_part(z)));
        Op::Sum(terms).scaled(inv_zi)
    }
}

/// The Hamiltonian `H_i` at the point `z`.
pub fn hamiltonian<S: Scalar>(i: usize, params: &Parameters<S>, z: &[S]) -> Result<Op<S>> {
    params.check_z(z)?;
    Ok(HamiltonianParts::new(params, i)?.assemble(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{MultiIndex, Polynomial};
    use crate::scalar::{ratio, Rational};
    use crate::weylops::{sample_parameters, sample_z, SampleOptions};
    use crate::Error;

    #[test]
    fn pole_is_singularity() {
        let p = sample_parameters(2, 2, 3, &SampleOptions::default()).unwrap();
        let z = vec![ratio(1, 2), ratio(1, 2)];
        assert!(matches!(hamiltonian(1, &p, &z), Err(Error::Singularity(_))));
        assert!(matches!(
            hamiltonian(1, &p, &[ratio(0, 1), ratio(1, 3)]),
            Err(Error::Singularity(_))
        ));
    }

    // Independent expansion at L = 2, N = 1 with ħ = 1: every boundary node is
    // resolved by hand into multiplication and x d/dx.
    #[test]
    fn hand_expansion_l2_n1() {
        let p = sample_parameters(2, 1, 9, &SampleOptions::default()).unwrap();
        let z = vec![ratio(2, 7)];
        let h = hamiltonian(1, &p, &z).unwrap();
        let (e0, e1) = (p.e[0].clone(), p.e[1].clone());
        let (k0, k1) = (p.kappa[0].clone(), p.kappa[1].clone());
        let th = p.theta[1].clone();
        let r = k0.clone() - th.clone();
        for d in 0..4u32 {
            let dd = ratio(d as i64, 1);
            let x = MultiIndex::from_entries(1, 1, vec![d]);
            let out = h.apply(&Polynomial::basis_monomial(&x), &p).unwrap();
            // z H q^d = A q^d + B q^{d+1} + C q^{d-1} (derivation by hand)
            // group 1: e0 q0 p0 = -e0 (th + d), e1 q1p1 = e1 d
            // group 2 (j=1): q0 p0 q1 p1 = -(th + d) d ... see below
            let zi = z[0].clone();
            let g1 = -e0.clone() * (th.clone() + dd.clone()) + e1.clone() * dd.clone();
            // j=1, (m,n)=(0,1): q_0 p_0 q_1 p_1 -> q_0 (-1) (q1 p1) q^d = -(th + d) d
            let g2_j1 = -(th.clone() + dd.clone()) * dd.clone();
            // j=0, (m,n)=(0,1): q_0^{(1)} p_0^{(0)} q_1^{(0)} p_1^{(1)} = q0 (-1)(-1) p1
            //   -> d q^{d-1} then q0 on degree d-1: (th + d - 1) d q^{d-1}
            let g2_j0_lower = (th.clone() + dd.clone() - ratio(1, 1)) * dd.clone();
            // group 3, Σ_{m,n} q_m p_m^{(0)} q_n^{(0)} p_n
            //  (0,0): q0 (-1) q00 (-1) = q0 q00: q00 on q^d = (r - d), q0 -> (th + d)
            let g3_00 = (th.clone() + dd.clone()) * (r.clone() - dd.clone());
            //  (0,1): q0 (-1) (-1) p1: lowers, d, then q0 at degree d-1
            let g3_01_lower = (th.clone() + dd.clone() - ratio(1, 1)) * dd.clone();
            //  (1,0): q1 p10 q00 (-1): -(r - d)(k1 + d) q^{d+1}
            let g3_10_raise = -(r.clone() - dd.clone()) * (k1.clone() + dd.clone());
            //  (1,1): q1 p10 (-1) p1: -(k1 + d - 1) d q^d
            let g3_11 = -(k1.clone() + dd.clone() - ratio(1, 1)) * dd.clone();
            let cst = th.clone() * (e0.clone() + k0.clone() - th.clone());
            let w3 = ratio(1, 1) / (zi.clone() - ratio(1, 1));
            let inv = ratio(1, 1) / zi.clone();
            let diag = inv.clone() * (g1 + g2_j1 + w3.clone() * (g3_00 + g3_11) + cst);
            let up = inv.clone() * w3.clone() * g3_10_raise;
            let down = inv.clone() * (g2_j0_lower + w3.clone() * g3_01_lower);
            let mut expected = Polynomial::<Rational>::zero(1, 1);
            expected.add_term(x.clone(), diag);
            expected.add_term(MultiIndex::from_entries(1, 1, vec![d + 1]), up);
            if d > 0 {
                expected.add_term(MultiIndex::from_entries(1, 1, vec![d - 1]), down);
            }
            assert_eq!(out, expected, "d = {d}");
        }
    }

    #[test]
    fn parts_assemble_to_the_same_operator_action() {
        let p = sample_parameters(3, 2, 5, &SampleOptions::default()).unwrap();
        let z = sample_z(2, 5);
        let h = hamiltonian(2, &p, &z).unwrap();
        let parts = HamiltonianParts::new(&p, 2).unwrap();
        let f = Polynomial::basis_monomial(&MultiIndex::from_entries(2, 2, vec![1, 0, 1, 1]));
        let direct = h.apply(&f, &p).unwrap();
        let mut pieced = parts.g12.apply(&f, &p).unwrap();
        let (inv, w3, w4) = parts.weights(&z);
        pieced.add_scaled(&parts.g3.apply(&f, &p).unwrap(), &w3);
        for ((_, g), w) in parts.g4.iter().zip(&w4) {
            pieced.add_scaled(&g.apply(&f, &p).unwrap(), w);
        }
        pieced.add_scaled(&f, &parts.scalar_part(&z));
        assert_eq!(direct, pieced.scale(&inv));
    }
}
