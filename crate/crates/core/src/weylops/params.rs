use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{ratio, sum, Complex, Rational, Scalar};

/// Scalar constants of the model.
///
/// `e` and `kappa` have length `L` (indices `0..L-1`), `theta` has length
/// `N + 1` with `theta[0] = θ_0`. `hbar` realizes `p = ħ ∂/∂q`; `planck` is the
/// `κ` in front of `∂/∂z_i` in the Schrödinger system.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters<S> {
    pub l: usize,
    pub n: usize,
    pub e: Vec<S>,
    pub kappa: Vec<S>,
    pub theta: Vec<S>,
    pub hbar: S,
    pub planck: S,
}

impl<S: Scalar> Parameters<S> {
    /// Builds parameters with `θ_0` derived from `Σ κ_m = Σ_{i=0}^N θ_i`.
    ///
    /// `theta` holds `θ_1..θ_N`.
    pub fn new(
        l: usize,
        n: usize,
        e: Vec<S>,
        kappa: Vec<S>,
        theta: Vec<S>,
        hbar: S,
        planck: S,
    ) -> Result<Self> {
        if theta.len() != n {
            return Err(Error::Parameter(format!(
                "expected {n} values theta_1..theta_N, got {}",
                theta.len()
            )));
        }
        let theta0 = sum(&kappa) - sum(&theta);
        let mut full = Vec::with_capacity(n + 1);
        full.push(theta0);
        full.extend(theta);
        Self::with_theta0(l, n, e, kappa, full, hbar, planck)
    }

    /// Builds parameters from an explicit `θ_0..θ_N`, checking both linear relations.
    pub fn with_theta0(
        l: usize,
        n: usize,
        e: Vec<S>,
        kappa: Vec<S>,
        theta: Vec<S>,
        hbar: S,
        planck: S,
    ) -> Result<Self> {
        if l < 2 {
            return Err(Error::Parameter(format!("L must be at least 2, got {l}")));
        }
        if n < 1 {
            return Err(Error::Parameter(format!("N must be at least 1, got {n}")));
        }
        for (name, v, want) in [("e", &e, l), ("kappa", &kappa, l), ("theta", &theta, n + 1)] {
            if v.len() != want {
                return Err(Error::Parameter(format!(
                    "{name} must have length {want}, got {}",
                    v.len()
                )));
            }
        }
        let e_sum = sum(&e);
        let e_target = S::from_ratio(l as i64 - 1, 2);
        if !e_sum.approx_eq(&e_target) {
            return Err(Error::Parameter(format!(
                "relation sum(e_m) = (L-1)/2 violated: sum(e_m) = {}, (L-1)/2 = {}",
                e_sum.render(),
                e_target.render()
            )));
        }
        let k_sum = sum(&kappa);
        let t_sum = sum(&theta);
        if !k_sum.approx_eq(&t_sum) {
            return Err(Error::Parameter(format!(
                "relation sum(kappa_m) = sum(theta_i) violated: sum(kappa_m) = {}, sum(theta_i) = {}",
                k_sum.render(),
                t_sum.render()
            )));
        }
        if planck.is_zero() {
            return Err(Error::Parameter(
                "planck constant kappa must be nonzero".into(),
            ));
        }
        Ok(Self {
            l,
            n,
            e,
            kappa,
            theta,
            hbar,
            planck,
        })
    }

    /// `κ_0 - Σ_{i=1}^N θ_i`, the value that selects the invariant subspace `V(M)`.
    pub fn resonance(&self) -> S {
        self.kappa[0].clone() - sum(&self.theta[1..])
    }

    /// Same parameters over the complex field.
    pub fn to_complex(&self) -> Parameters<Complex> {
        let c = |v: &[S]| v.iter().map(Scalar::to_complex).collect::<Vec<_>>();
        Parameters {
            l: self.l,
            n: self.n,
            e: c(&self.e),
            kappa: c(&self.kappa),
            theta: c(&self.theta),
            hbar: self.hbar.to_complex(),
            planck: self.planck.to_complex(),
        }
    }

    /// Checks that `z` is a point where every `H_i` is defined.
    pub fn check_z(&self, z: &[S]) -> Result<()> {
        check_admissible(z, self.n)
    }
}

/// `z` has `n` coordinates, none equal to 0 or 1 and no two equal.
pub fn check_admissible<S: Scalar>(z: &[S], n: usize) -> Result<()> {
    if z.len() != n {
        return Err(Error::Parameter(format!(
            "expected {n} coordinates z_1..z_N, got {}",
            z.len()
        )));
    }
    for (i, zi) in z.iter().enumerate() {
        if zi.is_zero() || (zi.clone() - S::one()).is_zero() {
            return Err(Error::Singularity(format!(
                "z_{} = {} lies on a pole (z_i must avoid 0 and 1)",
                i + 1,
                zi.render()
            )));
        }
        for (j, zj) in z.iter().enumerate().skip(i + 1) {
            if (zi.clone() - zj.clone()).is_zero() {
                return Err(Error::Singularity(format!(
                    "z_{} = z_{} = {} lies on a pole",
                    i + 1,
                    j + 1,
                    zi.render()
                )));
            }
        }
    }
    Ok(())
}

/// Options for [`sample_parameters`].
#[derive(Clone, Debug, Default)]
pub struct SampleOptions {
    /// Force `κ_0 - Σθ_i` to this value.
    pub resonance: Option<Rational>,
    /// Force `κ_m = -T_m` for `m = 1..L-1`.
    pub level_caps: Option<Vec<i64>>,
    /// Use this `ħ` instead of 1.
    pub hbar: Option<Rational>,
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    let den = rng.random_range(1..=7i64);
    let num = rng.random_range(-12..=12i64);
    ratio(num, den)
}

/// Deterministic pseudo-random exact parameters satisfying both relations.
///
/// `e_{L-1}` and `θ_0` are the dependent values; `planck = 1`.
pub fn sample_parameters(
    l: usize,
    n: usize,
    seed: u64,
    options: &SampleOptions,
) -> Result<Parameters<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e: Vec<Rational> = (0..l - 1).map(|_| small_rational(&mut rng)).collect();
    let e_last = ratio(l as i64 - 1, 2) - sum(&e);
    e.push(e_last);
    let theta: Vec<Rational> = (0..n).map(|_| small_rational(&mut rng)).collect();
    let mut kappa: Vec<Rational> = (0..l).map(|_| small_rational(&mut rng)).collect();
    if let Some(r) = &options.resonance {
        kappa[0] = r.clone() + sum(&theta);
    }
    if let Some(caps) = &options.level_caps {
        if caps.len() != l - 1 {
            return Err(Error::Parameter(format!(
                "expected {} level caps, got {}",
                l - 1,
                caps.len()
            )));
        }
        for (m, &t) in caps.iter().enumerate() {
            kappa[m + 1] = ratio(-t, 1);
        }
    }
    let hbar = options.hbar.clone().unwrap_or_else(|| ratio(1, 1));
    Parameters::new(l, n, e, kappa, theta, hbar, ratio(1, 1))
}

/// Deterministic admissible rational point with `1 > z_1 > ... > z_N > 0`.
pub fn sample_z(n: usize, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_2a11);
    loop {
        let mut z: Vec<Rational> = (0..n)
            .map(|_| ratio(rng.random_range(1..=96i64), 97))
            .collect();
        z.sort_by(|a, b| b.cmp(a));
        if check_admissible(&z, n).is_ok() {
            return z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta0_is_derived() {
        let p = Parameters::new(
            2,
            1,
            vec![ratio(1, 4), ratio(1, 4)],
            vec![ratio(3, 1), ratio(1, 2)],
            vec![ratio(1, 3)],
            ratio(1, 1),
            ratio(1, 1),
        )
        .unwrap();
        assert_eq!(p.theta[0], ratio(7, 2) - ratio(1, 3));
        assert_eq!(p.resonance(), ratio(8, 3));
    }

    #[test]
    fn violated_relations_are_named() {
        let err = Parameters::with_theta0(
            2,
            1,
            vec![ratio(1, 4), ratio(1, 4)],
            vec![ratio(1, 1), ratio(1, 1)],
            vec![ratio(1, 1), ratio(0, 1)],
            ratio(1, 1),
            ratio(1, 1),
        )
        .unwrap_err();
        assert!(
            err.to_string().contains("sum(kappa_m) = sum(theta_i)"),
            "{err}"
        );
        let err = Parameters::new(
            3,
            1,
            vec![ratio(1, 1), ratio(1, 1), ratio(1, 1)],
            vec![ratio(1, 1); 3],
            vec![ratio(1, 1)],
            ratio(1, 1),
            ratio(1, 1),
        )
        .unwrap_err();
        assert!(err.to_string().contains("(L-1)/2"), "{err}");
    }

    #[test]
    fn samples_respect_constraints_and_options() {
        let opts = SampleOptions {
            resonance: Some(ratio(2, 1)),
            ..Default::default()
        };
        let p = sample_parameters(3, 2, 11, &opts).unwrap();
        assert_eq!(p.resonance(), ratio(2, 1));
        assert_eq!(p, sample_parameters(3, 2, 11, &opts).unwrap());
        let z = sample_z(3, 4);
        assert!(check_admissible(&z, 3).is_ok());
        assert!(z.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn poles_are_rejected() {
        assert!(matches!(
            check_admissible(&[ratio(1, 1)], 1),
            Err(Error::Singularity(_))
        ));
        assert!(matches!(
            check_admissible(&[ratio(1, 2), ratio(1, 2)], 2),
            Err(Error::Singularity(_))
        ));
    }
}
