//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the report is always printed; the
//! process exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use qims::hypint::{
    compare_with_operator, dictionary_m, eval_psi1, lemma_identity_check, parameters_for_m1,
    pde_residual, random_lemma_point, series_psi1, CohomologyForm, ExponentsM1, LemmaId,
    QuadratureSpec,
};
use qims::pfaffian::{
    flatness_residual, monodromy_like_transport, propagate, restrict, PfaffianSystem, Space,
    Tolerances, ZPath,
};
use qims::scalar::{parse_rational, ratio};
use qims::weylops::{
    ahat_sweep, braid_residual, commutator_residual, garnier_example_residual,
    leading_coefficient_residual, probes_up_to, sample_parameters, sample_z, GarnierForm,
    Parameters, SampleOptions,
};
use qims::{Complex, Error, Rational, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn pass_if(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn q(text: &str) -> Rational {
    parse_rational(text).expect("valid rational literal")
}

fn qs(list: &[&str]) -> Vec<Rational> {
    list.iter().map(|s| q(s)).collect()
}

fn params(
    l: usize,
    n: usize,
    e: &[&str],
    kappa: &[&str],
    theta: &[&str],
    planck: &str,
) -> Parameters<Rational> {
    Parameters::new(l, n, qs(e), qs(kappa), qs(theta), ratio(1, 1), q(planck))
        .expect("consistent parameters")
}

fn resonant(l: usize, n: usize, m: i64, seed: u64) -> Parameters<Rational> {
    let opts = SampleOptions {
        resonance: Some(ratio(m, 1)),
        ..Default::default()
    };
    sample_parameters(l, n, seed, &opts).unwrap()
}

fn c1() -> Outcome {
    run(|| {
        let mut worst = ratio(0, 1);
        let mut pairs = 0;
        for (l, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1)] {
            for seed in 0..5 {
                let p = sample_parameters(l, n, seed, &SampleOptions::default())?;
                let z = sample_z(n, seed);
                let probes = probes_up_to(&p, 3);
                for i in 1..=n {
                    for j in i..=n {
                        let r = commutator_residual(i, j, &p, &z, &probes)?;
                        worst = worst.max(r.abs());
                        pairs += 1;
                    }
                }
            }
        }
        pass_if(
            worst.is_zero(),
            format!("max |[H_i,H_j] q^A| = {worst} over {pairs} (i,j) pairs x 5 draws"),
        )
    })
}

fn c2() -> Outcome {
    run(|| {
        let mut interior = ratio(0, 1);
        let mut braid = ratio(0, 1);
        let mut boundary_failures = 0;
        for l in 2..=3 {
            for n in 1..=3 {
                let p = sample_parameters(l, n, 17 + (l * 3 + n) as u64, &SampleOptions::default())?;
                let probes = probes_up_to(&p, 2);
                let sweep = ahat_sweep(&p, &probes)?;
                interior = interior.max(sweep.interior.abs());
                boundary_failures += sweep.boundary_failures;
                braid = braid.max(braid_residual(&p, &probes)?.abs());
            }
        }
        pass_if(
            interior.is_zero() && braid.is_zero(),
            format!(
                "interior commutators {interior}, braid identities {braid} \
                 (boundary entries outside the lemma: {boundary_failures} nonzero)"
            ),
        )
    })
}

fn c3() -> Outcome {
    run(|| {
        let mut checked = 0;
        let mut largest = 0;
        let total = [(2, 3, 4), (3, 2, 3), (3, 3, 3), (4, 2, 2)];
        for (k, &(l, n, m)) in total.iter().enumerate() {
            let p = resonant(l, n, m, 40 + k as u64);
            let z = sample_z(n, k as u64);
            for i in 1..=n {
                let mat = restrict(&p, &z, &Space::Total(m as u32), i)?;
                largest = largest.max(mat.rows());
                checked += 1;
            }
        }
        let levels: [(usize, usize, Vec<i64>); 3] = [
            (2, 2, vec![3]),
            (3, 2, vec![2, 2]),
            (4, 1, vec![3, 2, 1]),
        ];
        for (k, (l, n, caps)) in levels.iter().enumerate() {
            let opts = SampleOptions {
                level_caps: Some(caps.clone()),
                ..Default::default()
            };
            let p = sample_parameters(*l, *n, 60 + k as u64, &opts)?;
            let z = sample_z(*n, 9 + k as u64);
            for i in 1..=*n {
                let mat = restrict(&p, &z, &Space::Levels(caps.clone()), i)?;
                largest = largest.max(mat.rows());
                checked += 1;
            }
        }
        // Off resonance the top degree must overflow.
        let off = resonant(3, 2, 2, 5);
        let mut kappa = off.kappa.clone();
        kappa[0] += ratio(1, 2);
        let off = Parameters::new(
            3,
            2,
            off.e.clone(),
            kappa,
            off.theta[1..].to_vec(),
            ratio(1, 1),
            ratio(1, 1),
        )?;
        let overflow = matches!(
            restrict(&off, &sample_z(2, 1), &Space::Total(2), 1),
            Err(Error::OutOfSpace { .. })
        );
        let mut leading = ratio(0, 1);
        for (l, n) in [(2, 2), (3, 2), (4, 1)] {
            let p = sample_parameters(l, n, 77, &SampleOptions::default())?;
            let z = sample_z(n, 77);
            let probes = probes_up_to(&p, 3);
            for i in 1..=n {
                leading = leading.max(leading_coefficient_residual(i, &p, &z, &probes)?.abs());
            }
        }
        pass_if(
            largest <= 200 && overflow && leading.is_zero(),
            format!(
                "{checked} restrictions with zero overflow (D <= {largest}), \
                 off-resonance overflow detected: {overflow}, leading coefficient residual {leading}"
            ),
        )
    })
}

fn c4() -> Outcome {
    run(|| {
        let mut commutator = ratio(0, 1);
        let mut cross: f64 = 0.0;
        for (k, (l, n, m)) in [(2, 2, 1), (2, 2, 2), (3, 2, 1)].into_iter().enumerate() {
            let p = resonant(l, n, m, 90 + k as u64);
            let sys = PfaffianSystem::new(&p, Space::Total(m as u32))?;
            for seed in 0..3 {
                let z = sample_z(n, seed + 10 * k as u64);
                let f = flatness_residual(&sys, &z, 1, 2, 1e-5)?;
                commutator = commutator.max(f.commutator.abs());
                cross = cross.max(f.cross_derivative);
            }
        }
        pass_if(
            commutator.is_zero() && cross < 1e-7,
            format!("commutator {commutator}, cross-derivative {cross:.2e} (tol 1e-7)"),
        )
    })
}

fn c5() -> Outcome {
    run(|| {
        let mut corrected = ratio(0, 1);
        let mut printed_nonzero = 0;
        let mut cases = 0;
        for n in 1..=2 {
            for seed in 0..3 {
                let opts = SampleOptions {
                    hbar: Some(ratio(seed as i64 + 1, 2)),
                    ..Default::default()
                };
                let p = sample_parameters(2, n, 30 + seed, &opts)?;
                let z = sample_z(n, 30 + seed);
                let probes = probes_up_to(&p, 3);
                for i in 1..=n {
                    let (dev, _) =
                        garnier_example_residual(i, &p, &z, GarnierForm::Corrected, &probes)?;
                    corrected = corrected.max(dev.abs());
                    let (dev, _) =
                        garnier_example_residual(i, &p, &z, GarnierForm::Printed, &probes)?;
                    if !dev.is_zero() {
                        printed_nonzero += 1;
                    }
                    cases += 1;
                }
            }
        }
        pass_if(
            corrected.is_zero(),
            format!(
                "corrected example: deviation {corrected} on V(3) probes ({cases} cases); \
                 printed example deviates in {printed_nonzero}/{cases}"
            ),
        )
    })
}

fn c6() -> Outcome {
    run(|| {
        let mut exact = 0;
        let mut fallback = 0;
        let mut failed = Vec::new();
        let mut lambda_ok = true;
        for (k, (l, n, m)) in [(2, 1, 1), (2, 1, 2), (2, 2, 1), (3, 1, 1)]
            .into_iter()
            .enumerate()
        {
            let base = resonant(l, n, m, 200 + k as u64);
            let mut kappa = base.kappa.clone();
            for v in kappa.iter_mut().skip(2) {
                *v = ratio(1, 1);
            }
            let p = Parameters::new(
                l,
                n,
                base.e.clone(),
                kappa,
                base.theta[1..].to_vec(),
                ratio(1, 1),
                ratio(1, 1),
            )?;
            let beta = dictionary_m(&p, m as u32)?.beta;
            for seed in 0..5 {
                let z = sample_z(n, 300 + seed);
                for i in 1..=n {
                    let c = compare_with_operator(&p, &z, m as u32, i, CohomologyForm::Corrected)?;
                    if c.exact {
                        exact += 1;
                    } else if let Some(lambda) = c.lambda {
                        fallback += 1;
                        let want = ratio(m, 1) * beta[i - 1].clone() / z[i - 1].clone();
                        lambda_ok &= lambda == want;
                    } else {
                        failed.push(format!("({l},{n},{m}) i={i}"));
                    }
                }
            }
        }
        pass_if(
            failed.is_empty() && lambda_ok,
            format!(
                "exact {exact}, lambda*identity fallback {fallback} (lambda = M beta_i / z_i: {lambda_ok}), \
                 unmatched {failed:?}"
            ),
        )
    })
}

fn c7() -> Outcome {
    run(|| {
        let mut worst = ratio(0, 1);
        let mut points = 0;
        for id in LemmaId::ALL {
            for seed in 0..50u64 {
                let l = id.min_levels() + (seed % 3) as usize;
                let pt = random_lemma_point(id, l, seed)?;
                worst = worst.max(lemma_identity_check(id, &pt)?);
                points += 1;
            }
        }
        pass_if(
            worst.is_zero(),
            format!("max |LHS - RHS| = {worst} over {points} exact points (7 identities)"),
        )
    })
}

/// Single-copy configurations in the convergent window.
fn m1_cases() -> Vec<(Parameters<Rational>, Vec<Rational>)> {
    vec![
        (
            params(2, 1, &["1/2", "0"], &["4/3", "-1/2"], &["1/3"], "2"),
            qs(&["3/10"]),
        ),
        (
            params(2, 2, &["1/2", "0"], &["5/3", "-1/2"], &["1/3", "1/3"], "2"),
            qs(&["3/10", "1/5"]),
        ),
        (
            params(
                3,
                1,
                &["1/2", "1/4", "1/4"],
                &["4/3", "-1/2", "-1/3"],
                &["1/3"],
                "2",
            ),
            qs(&["3/10"]),
        ),
        (
            params(
                3,
                2,
                &["1/2", "1/4", "1/4"],
                &["5/3", "-1/2", "-1/3"],
                &["1/3", "1/3"],
                "2",
            ),
            qs(&["3/10", "1/5"]),
        ),
        (
            params(
                4,
                1,
                &["1/2", "1/2", "1/4", "1/4"],
                &["4/3", "-1/2", "-1/3", "-1/4"],
                &["1/3"],
                "2",
            ),
            qs(&["3/10"]),
        ),
        (
            params(
                4,
                2,
                &["1/2", "1/2", "1/4", "1/4"],
                &["5/3", "-1/2", "-1/3", "-1/4"],
                &["1/3", "1/3"],
                "2",
            ),
            qs(&["3/10", "1/5"]),
        ),
    ]
}

fn c8() -> Outcome {
    run(|| {
        let mut residual: f64 = 0.0;
        let mut change: f64 = 0.0;
        let mut doubling: f64 = 0.0;
        for (p, z) in m1_cases() {
            let nodes = if p.l == 4 { 16 } else { 24 };
            let quad = QuadratureSpec::gauss_jacobi(nodes);
            for i in 1..=p.n {
                let r = pde_residual(&p, &z, i, 1, &quad, 1e-3)?;
                residual = residual.max(r.residual);
                change = change.max(r.quadrature_change);
            }
            // 32 vs 64 nodes.
            let a = eval_psi1(&p, &z, &QuadratureSpec::gauss_jacobi(if p.l == 4 { 16 } else { 32 }))?;
            doubling = doubling.max(a.relative_change);
        }
        pass_if(
            residual < 1e-5 && change < 1e-10 && doubling < 1e-10,
            format!(
                "PDE residual {residual:.2e} (tol 1e-5), node-doubling change {:.2e} (tol 1e-10), \
                 L in 2..=4, N in 1..=2",
                change.max(doubling)
            ),
        )
    })
}

fn series_case(l: usize) -> Parameters<Rational> {
    let e = ExponentsM1 {
        alpha: vec![ratio(2, 1); l - 1],
        beta: vec![ratio(1, 3)],
        gamma: vec![ratio(-6, 1); l - 1],
        planck: ratio(1, 1),
    };
    parameters_for_m1(&e, ratio(1, 1)).expect("valid exponents")
}

fn c9() -> Outcome {
    run(|| {
        let mut worst: f64 = 0.0;
        let mut tail: f64 = 0.0;
        for l in 2..=4 {
            let p = series_case(l);
            for z in [ratio(1, 4), ratio(1, 2)] {
                let s = series_psi1(&p, &z, 19)?;
                let quad = eval_psi1(&p, std::slice::from_ref(&z), &QuadratureSpec::gauss_jacobi(24))?;
                for (a, b) in s.values.iter().zip(&quad.values) {
                    worst = worst.max((a - b).abs() / b.abs());
                }
                tail = tail.max(
                    s.tail_bound
                        .iter()
                        .zip(&s.values)
                        .map(|(t, v)| t / v.abs())
                        .fold(0.0, f64::max),
                );
            }
        }
        pass_if(
            worst < 1e-8,
            format!(
                "max relative difference {worst:.2e} (tol 1e-8), 20 terms, |z| <= 1/2, \
                 relative tail bound {tail:.1e}"
            ),
        )
    })
}

fn c10() -> Outcome {
    run(|| {
        let p2 = params(2, 1, &["1/2", "0"], &["7/3", "-3/2"], &["1/3"], "3");
        let z2 = qs(&["3/10"]);
        let t = Instant::now();
        let r2 = pde_residual(&p2, &z2, 1, 2, &QuadratureSpec::tanh_sinh(61), 1e-3)?;
        let t2 = t.elapsed();
        let p3 = params(
            3,
            1,
            &["-2", "3/2", "3/2"],
            &["5/3", "1/2", "1"],
            &["-1/3"],
            "-3",
        );
        let t = Instant::now();
        let r3 = pde_residual(
            &p3,
            &qs(&["3/10"]),
            1,
            2,
            &QuadratureSpec::monte_carlo(1_000_000, 0),
            1e-3,
        )?;
        let t3 = t.elapsed();
        pass_if(
            r2.residual < 1e-4 && r3.residual < 1e-2,
            format!(
                "(2,1,2) tanh-sinh: {:.2e} (tol 1e-4, {:.1}s); (3,1,2) Monte Carlo 1e6, seed 0: \
                 {:.2e} (tol 1e-2, {:.1}s)",
                r2.residual,
                t2.as_secs_f64(),
                r3.residual,
                t3.as_secs_f64()
            ),
        )
    })
}

fn relative_distance(a: &[Complex], b: &[Complex]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn c11() -> Outcome {
    run(|| {
        let tol = Tolerances::default();
        let mut transport: f64 = 0.0;
        let mut loop_err: f64 = 0.0;
        let cases = m1_cases();
        for (p, _) in [&cases[0], &cases[2]] {
            let sys = PfaffianSystem::new(p, Space::Total(1))?.to_complex();
            let quad = QuadratureSpec::gauss_jacobi(32);
            let (za, zb) = (ratio(3, 10), ratio(3, 5));
            let start: Vec<Complex> = eval_psi1(p, &[za], &quad)?
                .values
                .iter()
                .map(|&v| Complex::new(v, 0.0))
                .collect();
            let target: Vec<Complex> = eval_psi1(p, &[zb], &quad)?
                .values
                .iter()
                .map(|&v| Complex::new(v, 0.0))
                .collect();
            let c = |re: f64, im: f64| vec![Complex::new(re, im)];
            let path = ZPath::new(vec![c(0.3, 0.0), c(0.45, 0.2), c(0.6, 0.0)], 1)?;
            let end = propagate(&sys, &path, &start, tol)?;
            transport = transport.max(relative_distance(&end.value, &target));
            let lp = ZPath::new(
                vec![c(0.3, 0.0), c(0.5, 0.15), c(0.6, -0.1), c(0.3, 0.0)],
                1,
            )?;
            let back = monodromy_like_transport(&sys, &lp, &start, tol)?;
            loop_err = loop_err.max(relative_distance(&back.value, &start));
        }
        pass_if(
            transport < 1e-4 && loop_err < 10.0 * tol.rtol,
            format!(
                "transport vs quadrature {transport:.2e} (tol 1e-4), loop return {loop_err:.2e} \
                 (tol {:.0e})",
                10.0 * tol.rtol
            ),
        )
    })
}

fn run(f: impl FnOnce() -> Result<Outcome>) -> Outcome {
    match f() {
        Ok(o) => o,
        Err(e) => Outcome {
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 11] = [
        ("exact commutativity", 60, c1),
        ("interior commutators and braid relations", 30, c2),
        ("subspace invariance and leading coefficient", 30, c3),
        ("flatness", 30, c4),
        ("Garnier example", 30, c5),
        ("cohomology Pfaffian vs operator", 60, c6),
        ("lemma identities", 30, c7),
        ("single-copy integral solves the PDE", 120, c8),
        ("series vs quadrature", 30, c9),
        ("two-copy integral solves the PDE", 300, c10),
        ("transport consistency", 60, c11),
    ];
    let mut failures = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = check();
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let ok = out.passed && in_time;
        if !ok {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.2}s / {budget}s]",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
