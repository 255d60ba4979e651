use proptest::prelude::*;
use qims::hypint::{
    dictionary_m, dictionary_m1, eval_psi1, eval_psim, eval_psim_on, eval_psim_unsymmetrized,
    parameters_for_m, parameters_for_m1, pde_residual, series_psi1, Chamber, ExponentsM,
    ExponentsM1, QuadratureSpec,
};
use qims::scalar::ratio;
use qims::weylops::Parameters;
use qims::Rational;

fn m1_params(alpha: &[Rational], beta: Rational, gamma: &[Rational], planck: i64) -> Parameters<Rational> {
    let e = ExponentsM1 {
        alpha: alpha.to_vec(),
        beta: vec![beta],
        gamma: gamma.to_vec(),
        planck: ratio(planck, 1),
    };
    parameters_for_m1(&e, ratio(1, 1)).unwrap()
}

fn two_copy_params() -> Parameters<Rational> {
    let q = |s: &str| qims::scalar::parse_rational(s).unwrap();
    Parameters::new(
        2,
        1,
        vec![q("1/2"), q("0")],
        vec![q("7/3"), q("-3/2")],
        vec![q("1/3")],
        ratio(1, 1),
        ratio(3, 1),
    )
    .unwrap()
}

#[test]
fn symmetrized_integral_matches_sum_over_permuted_chambers() {
    let p = two_copy_params();
    let z = [ratio(3, 10)];
    let quad = QuadratureSpec::tanh_sinh(41);
    let sym = eval_psim(&p, &z, 2, &quad).unwrap();
    let (parts, count) = eval_psim_unsymmetrized(&p, &z, 2, &quad).unwrap();
    assert_eq!(count, 2);
    for (a, b) in sym.values.iter().zip(&parts.values) {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn one_copy_reduces_to_single_copy_integral() {
    // κ_2 = 1 makes the two dictionaries agree.
    let p = m1_params(
        &[ratio(-3, 1), ratio(-5, 2)],
        ratio(-1, 3),
        &[ratio(1, 1), ratio(1, 1)],
        -2,
    );
    let z = [ratio(1, 4)];
    let quad = QuadratureSpec::gauss_jacobi(20);
    let a = eval_psi1(&p, &z, &quad).unwrap();
    let b = eval_psim(&p, &z, 1, &quad).unwrap();
    assert_eq!(a.basis, b.basis);
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() <= 1e-12 * x.abs(), "{x} vs {y}");
    }
}

#[test]
fn coefficient_count_matches_basis() {
    let p = two_copy_params();
    let e = eval_psim(&p, &[ratio(3, 10)], 2, &QuadratureSpec::tanh_sinh(21)).unwrap();
    assert_eq!(e.values.len(), 3);
}

#[test]
fn node_doubling_is_stable_in_window() {
    let p = m1_params(&[ratio(5, 2)], ratio(3, 4), &[ratio(-1, 2)], 1);
    let e = eval_psi1(&p, &[ratio(2, 5)], &QuadratureSpec::gauss_jacobi(32)).unwrap();
    assert!(e.relative_change < 1e-10);
}

#[test]
fn zero_beta_makes_empty_coefficient_z_independent() {
    let p = m1_params(&[ratio(5, 2), ratio(2, 1)], ratio(0, 1), &[ratio(-1, 2), ratio(-1, 3)], 1);
    let quad = QuadratureSpec::gauss_jacobi(24);
    let a = eval_psi1(&p, &[ratio(1, 5)], &quad).unwrap().values[0];
    let b = eval_psi1(&p, &[ratio(7, 10)], &quad).unwrap().values[0];
    assert!((a - b).abs() <= 1e-10 * a.abs());
}

#[test]
fn separated_chamber_rejects_three_copies() {
    assert!(Chamber::separated(3, 3).is_err());
    assert!(Chamber::default_for(3, 2).is_ok());
}

#[test]
fn ordered_and_separated_chambers_both_solve_two_level_system() {
    // For L = 2 both chambers are cycles; each gives a solution.
    let p = two_copy_params();
    let z = [0.3];
    let quad = QuadratureSpec::tanh_sinh(41);
    let a = eval_psim_on(&p, &z, 2, Chamber::ordered(2, 2).unwrap(), &quad).unwrap();
    assert!(a.values.iter().all(|v| v.is_finite()));
    let r = pde_residual(&p, &[ratio(3, 10)], 1, 2, &quad, 1e-3).unwrap();
    assert!(r.residual < 1e-6, "{}", r.residual);
}

fn rat(num: i64, den: i64) -> Rational {
    ratio(num, den)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dictionary_round_trip(
        alpha in prop::collection::vec((-20i64..20, 1i64..7), 2),
        beta in (-20i64..20, 1i64..7),
        gamma in prop::collection::vec((-20i64..20, 1i64..7), 2),
        planck in 1i64..4,
    ) {
        let alpha: Vec<Rational> = alpha.iter().map(|&(p, q)| rat(p, q)).collect();
        let gamma: Vec<Rational> = gamma.iter().map(|&(p, q)| rat(p, q)).collect();
        let p = m1_params(&alpha, rat(beta.0, beta.1), &gamma, planck);
        let back = dictionary_m1(&p).unwrap();
        prop_assert_eq!(&back.alpha, &alpha);
        prop_assert_eq!(&back.gamma, &gamma);
        prop_assert_eq!(&back.beta, &vec![rat(beta.0, beta.1)]);

        let em = ExponentsM {
            alpha: back.alpha.clone(),
            beta: back.beta.clone(),
            gamma: rat(beta.0, beta.1),
            planck: ratio(planck, 1),
            m: 2,
        };
        let pm = parameters_for_m(&em, ratio(1, 1)).unwrap();
        prop_assert_eq!(dictionary_m(&pm, 2).unwrap(), em);
    }

    #[test]
    fn series_agrees_with_quadrature(
        l in 2usize..=4,
        a in 3i64..8,
        b in 1i64..3,
        g in 10i64..16,
        z in 1i64..=5,
    ) {
        let p = m1_params(
            &vec![rat(a, 2); l - 1],
            rat(b, 3),
            &vec![rat(-g, 2); l - 1],
            1,
        );
        let z = rat(z, 10);
        let s = series_psi1(&p, &z, 19).unwrap();
        let q = eval_psi1(&p, &[z], &QuadratureSpec::gauss_jacobi(24)).unwrap();
        for (x, y) in s.values.iter().zip(&q.values) {
            prop_assert!((x - y).abs() <= 1e-8 * y.abs(), "{} vs {}", x, y);
        }
    }

    #[test]
    fn single_copy_integral_solves_pde(
        a in 3i64..7,
        b in -2i64..3,
        g in 1i64..4,
        z in 2i64..=7,
    ) {
        let p = m1_params(&[rat(a, 2), rat(a + 1, 2)], rat(b, 3), &[rat(-g, 4), rat(-1, 3)], 2);
        let r = pde_residual(&p, &[rat(z, 10)], 1, 1, &QuadratureSpec::gauss_jacobi(24), 1e-3).unwrap();
        prop_assert!(r.residual < 1e-5, "{}", r.residual);
    }
}
