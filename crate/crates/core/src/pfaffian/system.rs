use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::polyalg::{enumerate_basis, enumerate_basis_ft, index_lookup, MultiIndex};
use crate::scalar::{Complex, Scalar};
use crate::weylops::{hamiltonian, ActionCache, HamiltonianParts, OperatorExpr, Parameters};

use super::Matrix;

/// Which invariant polynomial subspace to restrict to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Space {
    /// `V(M)`: total degree `<= M`; invariant when `κ_0 - Σθ_i = M`.
    Total(u32),
    /// `F(T_1..T_{L-1})`: level degrees `d_m <= T_m`; invariant when `κ_m = -T_m`.
    Levels(Vec<i64>),
}

impl Space {
    pub fn basis(&self, l: usize, n: usize) -> Result<Vec<MultiIndex>> {
        match self {
            Space::Total(m) => enumerate_basis(l, n, *m),
            Space::Levels(t) => enumerate_basis_ft(l, n, t),
        }
    }

    /// Checks the parameter condition that makes the space invariant.
    pub fn check_resonance<S: Scalar>(&self, params: &Parameters<S>) -> Result<()> {
        match self {
            Space::Total(m) => {
                let r = params.resonance();
                if !r.approx_eq(&S::from_i64(*m as i64)) {
                    return Err(Error::Parameter(format!(
                        "V({m}) needs kappa_0 - sum(theta_i) = {m}, got {}",
                        r.render()
                    )));
                }
            }
            Space::Levels(t) => {
                if t.len() != params.l - 1 {
                    return Err(Error::Parameter(format!(
                        "expected {} level caps, got {}",
                        params.l - 1,
                        t.len()
                    )));
                }
                for (m, &cap) in t.iter().enumerate() {
                    if !params.kappa[m + 1].approx_eq(&S::from_i64(-cap)) {
                        return Err(Error::Parameter(format!(
                            "F(T) needs kappa_{} = -T_{} = {}, got {}",
                            m + 1,
                            m + 1,
                            -cap,
                            params.kappa[m + 1].render()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Matrix of an operator on a basis, `(R)_{A,B}` = coefficient of `q^A` in `op q^B`.
///
/// Fails with [`Error::OutOfSpace`] at the first image coefficient outside the basis.
pub fn restrict_operator<S: Scalar>(
    op: &OperatorExpr<S>,
    params: &Parameters<S>,
    basis: &[MultiIndex],
    lookup: &HashMap<MultiIndex, usize>,
    hamiltonian_index: usize,
) -> Result<Matrix<S>> {
    let mut cache = ActionCache::new(op, params)?;
    let mut out = Matrix::zeros(basis.len(), basis.len());
    for (col, b) in basis.iter().enumerate() {
        for (a, c) in cache.on_monomial(b).terms() {
            match lookup.get(a) {
                Some(&row) => out.set(row, col, c.clone()),
                None => {
                    return Err(Error::OutOfSpace {
                        hamiltonian: hamiltonian_index,
                        source_index: b.to_string(),
                        target_index: a.to_string(),
                    })
                }
            }
        }
    }
    Ok(out)
}

/// `M_i(z)` on the chosen space, from the full Hamiltonian at `z`.
///
/// No resonance precondition is enforced up front; a violated condition shows
/// up as an [`Error::OutOfSpace`] naming the overflowing monomial.
pub fn restrict<S: Scalar>(
    params: &Parameters<S>,
    z: &[S],
    space: &Space,
    i: usize,
) -> Result<Matrix<S>> {
    let basis = space.basis(params.l, params.n)?;
    let lookup = index_lookup(&basis);
    let h = hamiltonian(i, params, z)?;
    restrict_operator(&h, params, &basis, &lookup, i)
}

/// Restricted `z`-independent pieces of one `H_i` (see [`HamiltonianParts`]).
#[derive(Clone, Debug)]
struct PartMatrices<S> {
    i: usize,
    /// `j != i`, in the order of `g4` and `theta_products`.
    others: Vec<usize>,
    constant: S,
    theta_products: Vec<S>,
    g12: Matrix<S>,
    g3: Matrix<S>,
    g4: Vec<Matrix<S>>,
}

/// The Pfaffian system `κ ∂_i c = M_i(z) c` on an invariant subspace.
///
/// Convention: `(M_i)_{A,B}` is the coefficient of `q^A` in `H_i q^B`, so a
/// solution `Ψ = Σ_A c_A(z) q^A` of the Schrödinger system has coefficient
/// vector `c` (ordered like [`PfaffianSystem::basis`]) solving the system.
#[derive(Clone, Debug)]
pub struct PfaffianSystem<S> {
    params: Parameters<S>,
    space: Space,
    basis: Vec<MultiIndex>,
    pieces: Vec<PartMatrices<S>>,
}

impl<S: Scalar> PfaffianSystem<S> {
    pub fn new(params: &Parameters<S>, space: Space) -> Result<Self> {
        space.check_resonance(params)?;
        let basis = space.basis(params.l, params.n)?;
        let lookup = index_lookup(&basis);
        let mut pieces = Vec::with_capacity(params.n);
        for i in 1..=params.n {
            let parts = HamiltonianParts::new(params, i)?;
            let g12 = restrict_operator(&parts.g12, params, &basis, &lookup, i)?;
            let g3 = restrict_operator(&parts.g3, params, &basis, &lookup, i)?;
            let g4 = parts
                .g4
                .iter()
                .map(|(_, g)| restrict_operator(g, params, &basis, &lookup, i))
                .collect::<Result<_>>()?;
            pieces.push(PartMatrices {
                i,
                others: parts.g4.iter().map(|(j, _)| *j).collect(),
                constant: parts.constant,
                theta_products: parts.theta_products,
                g12,
                g3,
                g4,
            });
        }
        Ok(Self {
            params: params.clone(),
            space,
            basis,
            pieces,
        })
    }

    pub fn params(&self) -> &Parameters<S> {
        &self.params
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn times(&self) -> usize {
        self.params.n
    }

    /// `M_i(z)`.
    pub fn matrix_at(&self, i: usize, z: &[S]) -> Result<Matrix<S>> {
        if i == 0 || i > self.params.n {
            return Err(Error::Structure(format!(
                "Hamiltonian index i = {i} outside 1..={}",
                self.params.n
            )));
        }
        self.params.check_z(z)?;
        let piece = &self.pieces[i - 1];
        let zi = z[piece.i - 1].clone();
        let mut m = piece.g12.clone();
        m.add_scaled(&piece.g3, &(S::one() / (zi.clone() - S::one())));
        let mut scalar = piece.constant.clone();
        for ((g, &j), t) in piece
            .g4
            .iter()
            .zip(&piece.others)
            .zip(&piece.theta_products)
        {
            let w = z[j - 1].clone() / (zi.clone() - z[j - 1].clone());
            m.add_scaled(g, &w);
            scalar = scalar - w * t.clone();
        }
        m.add_diagonal(&scalar);
        Ok(m.scale(&(S::one() / zi)))
    }

    /// The same system over the complex field.
    pub fn to_complex(&self) -> PfaffianSystem<Complex> {
        let c = |m: &Matrix<S>| m.to_complex();
        let pieces = self
            .pieces
            .iter()
            .map(|p| PartMatrices {
                i: p.i,
                others: p.others.clone(),
                constant: p.constant.to_complex(),
                theta_products: p.theta_products.iter().map(Scalar::to_complex).collect(),
                g12: c(&p.g12),
                g3: c(&p.g3),
                g4: p.g4.iter().map(c).collect(),
            })
            .collect();
        PfaffianSystem {
            params: self.params.to_complex(),
            space: self.space.clone(),
            basis: self.basis.clone(),
            pieces,
        }
    }
}

/// The two parts of the flatness check.
#[derive(Clone, Debug)]
pub struct FlatnessResidual<S> {
    /// `max |[M_i, M_j]|`, in the system's own field.
    pub commutator: S,
    /// `max |∂_i M_j - ∂_j M_i| / max(1, max |∂_i M_j|)` by central differences.
    pub cross_derivative: f64,
}

/// Flatness of the connection at `z`: commuting matrices and symmetric cross
/// derivatives. The derivative part uses central differences with step `h` on
/// the complex version of the system.
pub fn flatness_residual<S: Scalar>(
    system: &PfaffianSystem<S>,
    z: &[S],
    i: usize,
    j: usize,
    h: f64,
) -> Result<FlatnessResidual<S>> {
    let mi = system.matrix_at(i, z)?;
    let mj = system.matrix_at(j, z)?;
    let commutator = mi.commutator(&mj).max_abs();
    if i == j {
        return Ok(FlatnessResidual {
            commutator,
            cross_derivative: 0.0,
        });
    }
    let fsys = system.to_complex();
    let zc: Vec<Complex> = z.iter().map(Scalar::to_complex).collect();
    let di_mj = central_difference(&fsys, &zc, j, i, h)?;
    let dj_mi = central_difference(&fsys, &zc, i, j, h)?;
    let scale = di_mj.max_abs().re.max(1.0);
    Ok(FlatnessResidual {
        commutator,
        cross_derivative: di_mj.sub(&dj_mi).max_abs().re / scale,
    })
}

/// `∂ M_target / ∂ z_dir` by a second-order central difference.
pub fn central_difference(
    system: &PfaffianSystem<Complex>,
    z: &[Complex],
    target: usize,
    dir: usize,
    h: f64,
) -> Result<Matrix<Complex>> {
    let mut zp = z.to_vec();
    let mut zm = z.to_vec();
    zp[dir - 1] += h;
    zm[dir - 1] -= h;
    let plus = system.matrix_at(target, &zp)?;
    let minus = system.matrix_at(target, &zm)?;
    Ok(plus.sub(&minus).scale(&Complex::new(0.5 / h, 0.0)))
}
