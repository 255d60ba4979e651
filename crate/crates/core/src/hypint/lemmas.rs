//! Rational identities behind the reduction of `∇_i φ_A`, checked exactly.
//!
//! Each identity involves two copies `t^{(1)}, t^{(2)}` of the variables and
//! is symmetrized over `𝔖_2^{L-1}` (independent swaps of the two copies on
//! every level). Only the rational parts appear; the weight cancels.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{ratio, Rational};

/// The identities that can be checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LemmaId {
    /// `(Y_n^{(i)})_{l,j}` for `l < n`.
    LLtN,
    /// `(Y_n^{(i)})_{l,j}` for `2 <= n < l`.
    NLtL,
    /// `(Y_1^{(i)})_{l,j}` for `1 < l`.
    OneLtL,
    /// `(Y_n^{(i)})_{n,j}`.
    LEqN,
    /// `(Y_n^{(i)})_0`.
    LEq0,
    /// `t/(1 - z_i t) = (1 - z_j t)/(z_i - z_j) (1/(1 - z_i t) - 1/(1 - z_j t))`.
    Jacobi,
    /// `t_{L-1}/(1 - z_i t_{L-1}) = (-f_0 + Σ_n f_n^{(i)}) / ((z_i - 1) f_0)`.
    F0,
}

impl LemmaId {
    pub const ALL: [LemmaId; 7] = [
        LemmaId::LLtN,
        LemmaId::NLtL,
        LemmaId::OneLtL,
        LemmaId::LEqN,
        LemmaId::LEq0,
        LemmaId::Jacobi,
        LemmaId::F0,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::LLtN => "l_lt_n",
            LemmaId::NLtL => "n_lt_l",
            LemmaId::OneLtL => "one_lt_l",
            LemmaId::LEqN => "l_eq_n",
            LemmaId::LEq0 => "l_eq_0",
            LemmaId::Jacobi => "jacobi",
            LemmaId::F0 => "f0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s)
    }

    /// Smallest `L` for which the identity has admissible `(n, l)`.
    pub fn min_levels(self) -> usize {
        match self {
            LemmaId::LLtN | LemmaId::OneLtL => 3,
            LemmaId::NLtL => 4,
            _ => 2,
        }
    }
}

/// A sample point: two copies of `(t_1, ..., t_{L-1})`, the two times
/// `z_i`, `z_j`, and the level indices the identity is stated for.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaPoint {
    pub l: usize,
    /// The `n` of `Y_n^{(i)}`.
    pub n: usize,
    /// The `l` of `(Y_n^{(i)})_{l,j}`; unused by `l_eq_n`, `l_eq_0` and the auxiliary relations.
    pub lev: usize,
    /// `j = i`: the terms that need `z_i ≠ z_j` drop out.
    pub same_time: bool,
    pub t: [Vec<Rational>; 2],
    pub zi: Rational,
    pub zj: Rational,
}

/// Deterministic random exact point for `id` with `L = l` levels.
///
/// Coordinates are distinct small rationals away from `0`, `1` and every
/// `1/z`, so no factor vanishes.
pub fn random_lemma_point(id: LemmaId, l: usize, seed: u64) -> Result<LemmaPoint> {
    if l < id.min_levels() {
        return Err(Error::Parameter(format!(
            "{} needs L >= {}, got {l}",
            id.as_str(),
            id.min_levels()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = l - 1;
    let (n, lev) = match id {
        LemmaId::LLtN => {
            let n = rng.random_range(2..=levels);
            (n, rng.random_range(1..n))
        }
        LemmaId::NLtL => {
            let n = rng.random_range(2..levels);
            (n, rng.random_range(n + 1..=levels))
        }
        LemmaId::OneLtL => (1, rng.random_range(2..=levels)),
        LemmaId::LEqN | LemmaId::LEq0 => {
            let n = rng.random_range(1..=levels);
            (n, n)
        }
        LemmaId::Jacobi | LemmaId::F0 => (1, 1),
    };
    loop {
        let mut draw = || ratio(rng.random_range(-40..=40i64), rng.random_range(1..=13i64));
        let t = [
            (0..levels).map(|_| draw()).collect::<Vec<_>>(),
            (0..levels).map(|_| draw()).collect::<Vec<_>>(),
        ];
        let zi = draw();
        let zj = draw();
        let same_time = !matches!(id, LemmaId::Jacobi) && rng.random_bool(0.25);
        let p = LemmaPoint {
            l,
            n,
            lev,
            same_time,
            t,
            zi,
            zj,
        };
        if check_point(&p).is_ok() {
            return Ok(p);
        }
    }
}

/// Rejects points on which some factor of the identities vanishes.
fn check_point(p: &LemmaPoint) -> Result<()> {
    let one = ratio(1, 1);
    let mut coords: Vec<&Rational> = p.t.iter().flatten().collect();
    coords.push(&one);
    for (a, x) in coords.iter().enumerate() {
        if x.is_zero() {
            return Err(Error::Domain("a coordinate vanishes".into()));
        }
        for y in &coords[a + 1..] {
            if x == y {
                return Err(Error::Domain("coordinates coincide".into()));
            }
        }
        for z in [&p.zi, &p.zj] {
            if (one.clone() - z * *x).is_zero() {
                return Err(Error::Domain("1 - z t vanishes".into()));
            }
        }
    }
    if p.zi == one || p.zj == one || p.zi.is_zero() || p.zj.is_zero() {
        return Err(Error::Domain("z must avoid 0 and 1".into()));
    }
    if p.zi == p.zj {
        return Err(Error::Domain("z_i = z_j".into()));
    }
    if p.t.iter().any(|c| c.len() != p.l - 1) {
        return Err(Error::Parameter("each copy needs L-1 coordinates".into()));
    }
    Ok(())
}

/// One copy's coordinates with `t_0 = 1` prepended.
fn with_anchor(t: &[Rational]) -> Vec<Rational> {
    let mut v = vec![ratio(1, 1)];
    v.extend_from_slice(t);
    v
}

/// `f_0(t) = Π_m 1/(t_{m-1} - t_m)`.
fn f0(t: &[Rational]) -> Rational {
    (1..t.len()).fold(ratio(1, 1), |acc, m| {
        acc / (t[m - 1].clone() - t[m].clone())
    })
}

/// `f_n^{(i)}(t) = (1 - z t_{L-1})^{-1} Π_{m≠n} 1/(t_{m-1} - t_m)`.
fn fn_(t: &[Rational], n: usize, z: &Rational) -> Rational {
    let last = t.len() - 1;
    f0(t) * (t[n - 1].clone() - t[n].clone()) / (ratio(1, 1) - z * &t[last])
}

/// `C(n, 1, 2)`; level `L` does not exist, so the `t_{m+1}` term stops at `m = L-2`.
fn c_term(n: usize, a: &[Rational], b: &[Rational]) -> Rational {
    let last = a.len() - 1;
    let mut s = Rational::zero();
    for m in n..=last {
        let mut k = ratio(-1, 1) / (a[m].clone() - b[m - 1].clone())
            + ratio(2, 1) / (a[m].clone() - b[m].clone());
        if m < last {
            k -= ratio(1, 1) / (a[m].clone() - b[m + 1].clone());
        }
        s += a[m].clone() * k;
    }
    if n == 1 {
        s += a[1].clone() / (a[1].clone() - ratio(1, 1));
    }
    s
}

/// `Σ_{σ ∈ 𝔖_2^{L-1}} F(σ t^{(1)}, σ t^{(2)})`.
fn sym(p: &LemmaPoint, f: impl Fn(&[Rational], &[Rational]) -> Rational) -> Rational {
    let levels = p.l - 1;
    let a = with_anchor(&p.t[0]);
    let b = with_anchor(&p.t[1]);
    let mut total = Rational::zero();
    for mask in 0u32..(1 << levels) {
        let mut x = a.clone();
        let mut y = b.clone();
        for m in 1..=levels {
            if mask & (1 << (m - 1)) != 0 {
                std::mem::swap(&mut x[m], &mut y[m]);
            }
        }
        total += f(&x, &y);
    }
    total
}

/// `|LHS - RHS|` of identity `id` at `p`, in exact arithmetic.
pub fn lemma_identity_check(id: LemmaId, p: &LemmaPoint) -> Result<Rational> {
    check_point(p)?;
    if p.l < id.min_levels() {
        return Err(Error::Parameter(format!(
            "{} needs L >= {}",
            id.as_str(),
            id.min_levels()
        )));
    }
    let (n, lev, l) = (p.n, p.lev, p.l);
    let levels = l - 1;
    let zi = p.zi.clone();
    let zj = if p.same_time {
        p.zi.clone()
    } else {
        p.zj.clone()
    };
    let one = ratio(1, 1);
    let inv_last = |t: &[Rational]| one.clone() / t[levels].clone();
    let ok_levels = match id {
        LemmaId::LLtN => 1 <= lev && lev < n && n <= levels,
        LemmaId::NLtL => 2 <= n && n < lev && lev <= levels,
        LemmaId::OneLtL => n == 1 && 1 < lev && lev <= levels,
        LemmaId::LEqN | LemmaId::LEq0 => 1 <= n && n <= levels,
        LemmaId::Jacobi | LemmaId::F0 => true,
    };
    if !ok_levels {
        return Err(Error::Parameter(format!(
            "levels n = {n}, l = {lev} not admissible for {}",
            id.as_str()
        )));
    }
    let distinct = !p.same_time;
    let diff = match id {
        LemmaId::Jacobi => {
            if !distinct {
                return Err(Error::Parameter("jacobi needs z_i ≠ z_j".into()));
            }
            let t = p.t[0][0].clone();
            let lhs = t.clone() / (one.clone() - zi.clone() * t.clone());
            let rhs = (one.clone() - zj.clone() * t.clone()) / (zi.clone() - zj.clone())
                * (one.clone() / (one.clone() - zi.clone() * t.clone())
                    - one.clone() / (one.clone() - zj.clone() * t.clone()));
            lhs - rhs
        }
        LemmaId::F0 => {
            let t = with_anchor(&p.t[0]);
            let lhs = t[levels].clone() / (one.clone() - zi.clone() * t[levels].clone());
            let sum_f = (1..=levels).fold(Rational::zero(), |s, m| s + fn_(&t, m, &zi));
            let rhs = (sum_f - f0(&t)) / ((zi.clone() - one.clone()) * f0(&t));
            lhs - rhs
        }
        LemmaId::LLtN => {
            let lhs = sym(p, |x, y| {
                c_term(n, x, y) * inv_last(x) * fn_(x, n, &zi) * inv_last(y) * fn_(y, lev, &zj)
            });
            let mut rhs = sym(p, |x, y| {
                inv_last(x) * fn_(x, n, &zi) * inv_last(y) * fn_(y, lev, &zi)
            });
            if distinct {
                rhs += zj.clone() / (zi.clone() - zj.clone())
                        * sym(p, |x, y| {
                            inv_last(x)
                                * inv_last(y)
                                * (fn_(x, n, &zi) - fn_(x, n, &zj))
                                * (fn_(y, lev, &zi) - fn_(y, lev, &zj))
                        });
            }
            lhs - rhs
        }
        LemmaId::NLtL | LemmaId::OneLtL => {
            let lhs = sym(p, |x, y| {
                c_term(n, x, y) * inv_last(x) * fn_(x, n, &zi) * inv_last(y) * fn_(y, lev, &zj)
            });
            let mut rhs = Rational::zero();
            if distinct {
                rhs = one.clone() / (zi.clone() - zj.clone())
                    * sym(p, |x, y| {
                        inv_last(x)
                            * inv_last(y)
                            * (fn_(x, n, &zi) - fn_(x, n, &zj))
                            * (zi.clone() * fn_(y, lev, &zi) - zj.clone() * fn_(y, lev, &zj))
                    });
            }
            if n == 1 {
                rhs += one.clone() / (zi.clone() - one.clone())
                        * sym(p, |x, y| {
                            let tail =
                                (2..=levels).fold(Rational::zero(), |s, m| s + fn_(x, m, &zi));
                            inv_last(x)
                                * (f0(x) - fn_(x, 1, &zi) - zi.clone() * tail)
                                * inv_last(y)
                                * fn_(y, lev, &zj)
                        });
            }
            lhs - rhs
        }
        LemmaId::LEqN => {
            let lhs = sym(p, |x, y| {
                c_term(n, x, y) * inv_last(x) * fn_(x, n, &zi) * inv_last(y) * fn_(y, n, &zj)
            });
            let mut rhs = sym(p, |x, y| {
                inv_last(x) * fn_(x, n, &zi) * inv_last(y) * fn_(y, n, &zi)
            });
            if n != 1 {
                rhs += one.clone() / (zi.clone() - one.clone())
                        * sym(p, |x, y| {
                            let head = (1..=n).fold(Rational::zero(), |s, m| s + fn_(x, m, &zi));
                            let tail =
                                (n + 1..=levels).fold(Rational::zero(), |s, m| s + fn_(x, m, &zi));
                            inv_last(x)
                                * (head + zi.clone() * tail - f0(x))
                                * inv_last(y)
                                * fn_(y, n, &zj)
                        });
            }
            if distinct {
                rhs += zj.clone() / (zi.clone() - zj.clone())
                        * sym(p, |x, y| {
                            inv_last(x)
                                * inv_last(y)
                                * (fn_(x, n, &zi) - fn_(x, n, &zj))
                                * (fn_(y, n, &zi) - fn_(y, n, &zj))
                        });
            }
            lhs - rhs
        }
        LemmaId::LEq0 => {
            let delta = if n == 1 {
                one.clone()
            } else {
                Rational::zero()
            };
            let lhs = sym(p, |x, y| {
                c_term(n, x, y) * inv_last(x) * fn_(x, n, &zi) * inv_last(y) * f0(y)
            });
            let mut rhs = sym(p, |x, y| {
                let all = (1..=levels).fold(Rational::zero(), |s, m| s + fn_(y, m, &zi));
                inv_last(x) * inv_last(y) / (zi.clone() - one.clone())
                    * fn_(x, n, &zi)
                    * (zi.clone() * all - (one.clone() + delta.clone()) * f0(y))
            });
            if n == 1 {
                rhs += sym(p, |x, y| {
                        let tail = (2..=levels).fold(Rational::zero(), |s, m| s + fn_(x, m, &zi));
                        inv_last(x) * inv_last(y) / (zi.clone() - one.clone())
                            * f0(y)
                            * (f0(x) - zi.clone() * tail)
                    });
            }
            lhs - rhs
        }
    };
    Ok(diff.abs())
}
