use num_traits::Zero;
use proptest::prelude::*;
use qims::pfaffian::{restrict, Space};
use qims::polyalg::{binomial, enumerate_basis, enumerate_basis_ft};
use qims::scalar::ratio;
use qims::weylops::{
    ahat_sweep, braid_residual, commutator_residual, degree_raise, probes_up_to,
    sample_parameters, sample_z, SampleOptions,
};
use qims::Error;

#[test]
fn basis_sizes() {
    // (L - 1) N variables, total degree <= M.
    for (l, n, m) in [(2, 1, 3), (3, 2, 2), (4, 2, 3)] {
        let vars = (l - 1) * n;
        let b = enumerate_basis(l, n, m).unwrap();
        assert_eq!(b.len() as u128, binomial((vars + m as usize) as u64, m as u64));
    }
    let b = enumerate_basis_ft(3, 2, &[2, 1]).unwrap();
    assert_eq!(b.len(), 6 * 3);
}

#[test]
fn hamiltonians_raise_degree_by_at_most_one() {
    let p = sample_parameters(3, 2, 4, &SampleOptions::default()).unwrap();
    let z = sample_z(2, 4);
    let probes = probes_up_to(&p, 3);
    for i in 1..=2 {
        assert!(degree_raise(i, &p, &z, &probes).unwrap() <= 1);
    }
}

#[test]
fn resonance_off_by_one_overflows() {
    let opts = SampleOptions {
        resonance: Some(ratio(3, 1)),
        ..Default::default()
    };
    let p = sample_parameters(2, 2, 1, &opts).unwrap();
    let z = sample_z(2, 1);
    assert!(restrict(&p, &z, &Space::Total(3), 1).is_ok());
    assert!(matches!(
        restrict(&p, &z, &Space::Total(2), 1),
        Err(Error::OutOfSpace { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hamiltonians_commute(seed in 0u64..10_000, l in 2usize..=3, hbar in 1i64..4) {
        let opts = SampleOptions { hbar: Some(ratio(hbar, 2)), ..Default::default() };
        let p = sample_parameters(l, 2, seed, &opts).unwrap();
        let z = sample_z(2, seed);
        let probes = probes_up_to(&p, 2);
        prop_assert!(commutator_residual(1, 2, &p, &z, &probes).unwrap().is_zero());
    }

    #[test]
    fn interior_relations_and_braid_hold(seed in 0u64..10_000) {
        let p = sample_parameters(3, 2, seed, &SampleOptions::default()).unwrap();
        let probes = probes_up_to(&p, 1);
        prop_assert!(ahat_sweep(&p, &probes).unwrap().interior.is_zero());
        prop_assert!(braid_residual(&p, &probes).unwrap().is_zero());
    }

    #[test]
    fn level_space_is_invariant(seed in 0u64..10_000, t1 in 0i64..3, t2 in 0i64..3) {
        let opts = SampleOptions { level_caps: Some(vec![t1, t2]), ..Default::default() };
        let p = sample_parameters(3, 2, seed, &opts).unwrap();
        let z = sample_z(2, seed);
        for i in 1..=2 {
            prop_assert!(restrict(&p, &z, &Space::Levels(vec![t1, t2]), i).is_ok());
        }
    }
}
