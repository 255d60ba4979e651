use std::path::{Path, PathBuf};

use num_traits::{Signed, Zero};
use qims::hypint::{
    compare_with_operator, dictionary_m, eval_psi1, eval_psi1_f64, eval_psim, eval_psim_f64,
    lemma_identity_check, pde_residual, random_lemma_point, series_psi1, CohomologyForm,
    IntegralEstimate, LemmaId, QuadratureSpec,
};
use qims::pfaffian::{flatness_residual, propagate, restrict, PfaffianSystem, Space, ZPath};
use qims::polyalg::{enumerate_basis_ft, enumerate_basis};
use qims::scalar::rational_to_f64;
use qims::weylops::{
    ahat_sweep, braid_residual, commutator_residual, garnier_example_residual,
    leading_coefficient_residual, probes_up_to, GarnierForm, Parameters,
};
use qims::{Error, Rational};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::plot::{line_chart, Series};
use crate::report;

/// A finished command: the text to emit and whether its checks passed.
pub struct Output {
    pub text: String,
    pub passed: bool,
}

fn json_output(command: &str, passed: bool, body: Map<String, Value>) -> Output {
    let mut v = Map::new();
    v.insert("command".into(), json!(command));
    v.insert("status".into(), json!(if passed { "pass" } else { "fail" }));
    v.extend(body);
    Output {
        text: report::render(&Value::Object(v)),
        passed,
    }
}

fn space_json(space: &Space) -> Value {
    match space {
        Space::Total(m) => json!({ "kind": "total_degree", "M": m }),
        Space::Levels(t) => json!({ "kind": "level_degrees", "T": t }),
    }
}

fn exact_list(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(report::exact).collect())
}

fn max_abs(acc: Rational, x: Rational) -> Rational {
    acc.max(x.abs())
}

pub fn basis(cfg: &RunConfig) -> Result<Output, CliError> {
    let (l, n) = cfg.dims()?;
    let space = cfg.require_space()?;
    let b = match &space {
        Space::Total(m) => enumerate_basis(l, n, *m)?,
        Space::Levels(t) => enumerate_basis_ft(l, n, t)?,
    };
    let mut body = Map::new();
    body.insert("L".into(), json!(l));
    body.insert("N".into(), json!(n));
    body.insert("space".into(), space_json(&space));
    body.insert("dimension".into(), json!(b.len()));
    body.insert("basis".into(), report::basis(&b));
    Ok(json_output("basis", true, body))
}

/// CSV with a header row of basis labels; one row per output index.
fn matrix_csv(basis: &[qims::polyalg::MultiIndex], m: &qims::pfaffian::Matrix<Rational>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["row".to_string()];
    header.extend(basis.iter().map(|b| b.label()));
    let io = |e: csv::Error| CliError::Config(format!("csv: {e}"));
    w.write_record(&header).map_err(io)?;
    for (r, b) in basis.iter().enumerate() {
        let mut rec = vec![b.label()];
        rec.extend(m.row(r).iter().map(qims::Scalar::render));
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Config(format!("csv: {e}")))
}

pub fn hamiltonian(cfg: &RunConfig, csv_out: bool) -> Result<Output, CliError> {
    let p = cfg.parameters()?;
    let z = cfg.z(p.n)?;
    let i = cfg.direction(p.n)?;
    let space = cfg.require_space()?;
    let m = restrict(&p, &z, &space, i)?;
    let b = space.basis(p.l, p.n)?;
    if csv_out {
        return Ok(Output {
            text: matrix_csv(&b, &m)?,
            passed: true,
        });
    }
    let mut body = Map::new();
    body.insert("parameters".into(), report::parameters(&p));
    body.insert("z".into(), exact_list(&z));
    body.insert("i".into(), json!(i));
    body.insert("space".into(), space_json(&space));
    body.insert("basis".into(), report::basis(&b));
    body.insert("matrix".into(), report::exact_matrix(&m));
    Ok(json_output("hamiltonian", true, body))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckKind {
    Commute,
    Braid,
    Flatness,
    Subspace,
    Garnier,
    Lemmas,
}

pub fn check(cfg: &RunConfig, kind: CheckKind) -> Result<Output, CliError> {
    let (name, (passed, mut body)) = match kind {
        CheckKind::Commute => ("commute", check_commute(cfg)?),
        CheckKind::Braid => ("braid", check_braid(cfg)?),
        CheckKind::Flatness => ("flatness", check_flatness(cfg)?),
        CheckKind::Subspace => ("subspace", check_subspace(cfg)?),
        CheckKind::Garnier => ("garnier", check_garnier(cfg)?),
        CheckKind::Lemmas => ("lemmas", check_lemmas(cfg)?),
    };
    body.insert("check".into(), json!(name));
    Ok(json_output("check", passed, body))
}

type CheckResult = (bool, Map<String, Value>);

fn common(p: &Parameters<Rational>, z: Option<&[Rational]>, probe_degree: Option<u32>) -> Map<String, Value> {
    let mut body = Map::new();
    body.insert("parameters".into(), report::parameters(p));
    if let Some(z) = z {
        body.insert("z".into(), exact_list(z));
    }
    if let Some(d) = probe_degree {
        body.insert("probe_degree".into(), json!(d));
    }
    body
}

fn check_commute(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let p = cfg.parameters()?;
    let z = cfg.z(p.n)?;
    let d = cfg.probe_degree.unwrap_or(3);
    let probes = probes_up_to(&p, d);
    let mut pairs = Vec::new();
    let mut worst = Rational::zero();
    for i in 1..=p.n {
        for j in i + 1..=p.n {
            let r = commutator_residual(i, j, &p, &z, &probes)?;
            worst = max_abs(worst, r.clone());
            pairs.push(json!({ "i": i, "j": j, "residual": report::exact(&r) }));
        }
    }
    let mut body = common(&p, Some(&z), Some(d));
    body.insert("probes".into(), json!(probes.len()));
    body.insert("pairs".into(), Value::Array(pairs));
    body.insert("residual".into(), report::exact(&worst));
    Ok((worst.is_zero(), body))
}

fn check_braid(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let p = cfg.parameters()?;
    let d = cfg.probe_degree.unwrap_or(2);
    let probes = probes_up_to(&p, d);
    let sweep = ahat_sweep(&p, &probes)?;
    let braid = braid_residual(&p, &probes)?;
    let mut body = common(&p, None, Some(d));
    body.insert("interior_residual".into(), report::exact(&sweep.interior));
    body.insert("boundary_residual".into(), report::exact(&sweep.boundary));
    body.insert("boundary_failures".into(), json!(sweep.boundary_failures));
    body.insert("braid_residual".into(), report::exact(&braid));
    Ok((sweep.interior.is_zero() && braid.is_zero(), body))
}

fn check_flatness(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let p = cfg.parameters()?;
    let z = cfg.z(p.n)?;
    let space = cfg.require_space()?;
    let h = cfg.tolerances.h.unwrap_or(1e-5);
    let tol = cfg.tolerances.flatness.unwrap_or(1e-7);
    let sys = PfaffianSystem::new(&p, space.clone())?;
    let mut pairs = Vec::new();
    let mut commutator = Rational::zero();
    let mut cross: f64 = 0.0;
    for i in 1..=p.n {
        for j in i + 1..=p.n {
            let f = flatness_residual(&sys, &z, i, j, h)?;
            commutator = max_abs(commutator, f.commutator.clone());
            cross = cross.max(f.cross_derivative);
            pairs.push(json!({
                "i": i,
                "j": j,
                "commutator": report::exact(&f.commutator),
                "cross_derivative": report::float(f.cross_derivative, tol),
            }));
        }
    }
    let mut body = common(&p, Some(&z), None);
    body.insert("space".into(), space_json(&space));
    body.insert("dimension".into(), json!(sys.dim()));
    body.insert("step".into(), report::float(h, 0.0));
    body.insert("pairs".into(), Value::Array(pairs));
    body.insert("commutator".into(), report::exact(&commutator));
    body.insert("cross_derivative".into(), report::float(cross, tol));
    Ok((commutator.is_zero() && cross < tol, body))
}

fn check_subspace(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let p = cfg.parameters()?;
    let z = cfg.z(p.n)?;
    let space = cfg.require_space()?;
    let d = cfg.probe_degree.unwrap_or(3);
    let mut ok = true;
    let mut per_i = Vec::new();
    for i in 1..=p.n {
        match restrict(&p, &z, &space, i) {
            Ok(m) => per_i.push(json!({ "i": i, "overflow": null, "dimension": m.rows() })),
            Err(Error::OutOfSpace {
                source_index,
                target_index,
                ..
            }) => {
                ok = false;
                per_i.push(json!({
                    "i": i,
                    "overflow": { "source": source_index, "target": target_index },
                }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let probes = probes_up_to(&p, d);
    let mut leading = Rational::zero();
    for i in 1..=p.n {
        leading = max_abs(leading, leading_coefficient_residual(i, &p, &z, &probes)?);
    }
    let mut body = common(&p, Some(&z), Some(d));
    body.insert("space".into(), space_json(&space));
    body.insert("restrictions".into(), Value::Array(per_i));
    body.insert("leading_coefficient_residual".into(), report::exact(&leading));
    Ok((ok && leading.is_zero(), body))
}

fn check_garnier(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let p = cfg.parameters()?;
    let z = cfg.z(p.n)?;
    let d = cfg.probe_degree.unwrap_or(3);
    let probes = probes_up_to(&p, d);
    let mut ok = true;
    let mut per_i = Vec::new();
    for i in 1..=p.n {
        let (dev, lambda) = garnier_example_residual(i, &p, &z, GarnierForm::Corrected, &probes)?;
        let (printed, _) = garnier_example_residual(i, &p, &z, GarnierForm::Printed, &probes)?;
        ok &= dev.is_zero();
        per_i.push(json!({
            "i": i,
            "lambda": report::exact(&lambda),
            "deviation": report::exact(&dev),
            "printed_form_deviation": report::exact(&printed),
        }));
    }
    let mut body = common(&p, Some(&z), Some(d));
    body.insert("directions".into(), Value::Array(per_i));
    Ok((ok, body))
}

fn check_lemmas(cfg: &RunConfig) -> Result<CheckResult, CliError> {
    let points = cfg.points.unwrap_or(50);
    let seed = cfg.seed();
    let base_l = cfg.model.l.unwrap_or(2);
    let mut ok = true;
    let mut rows = Vec::new();
    for id in LemmaId::ALL {
        let l = base_l.max(id.min_levels());
        let mut worst = Rational::zero();
        for k in 0..points as u64 {
            let pt = random_lemma_point(id, l, seed.wrapping_add(k))?;
            worst = worst.max(lemma_identity_check(id, &pt)?);
        }
        ok &= worst.is_zero();
        rows.push(json!({
            "lemma": id.as_str(),
            "L": l,
            "points": points,
            "residual": report::exact(&worst),
        }));
    }
    let mut body = Map::new();
    body.insert("seed".into(), json!(seed));
    body.insert("identities".into(), Value::Array(rows));
    Ok((ok, body))
}

pub fn pfaffian(cfg: &RunConfig, path_file: Option<&Path>) -> Result<Output, CliError> {
    let p = cfg.parameters()?;
    let space = cfg.require_space()?;
    let sys = PfaffianSystem::new(&p, space.clone())?;
    let fsys = sys.to_complex();
    let path = ZPath::new(cfg.path(path_file)?, p.n)?;
    let c0 = cfg.initial(sys.dim())?;
    let tol = cfg.transport_tolerances();
    let t = propagate(&fsys, &path, &c0, tol)?;
    let mut body = common(&p, None, None);
    body.insert("space".into(), space_json(&space));
    body.insert("basis".into(), report::basis(sys.basis()));
    body.insert(
        "waypoints".into(),
        Value::Array(
            path.waypoints()
                .iter()
                .map(|w| Value::Array(w.iter().map(|&c| report::complex(c, 0.0)).collect()))
                .collect(),
        ),
    );
    body.insert(
        "initial".into(),
        Value::Array(c0.iter().map(|&c| report::complex(c, 0.0)).collect()),
    );
    body.insert(
        "endpoint".into(),
        Value::Array(t.value.iter().map(|&c| report::complex(c, tol.rtol)).collect()),
    );
    body.insert(
        "steps".into(),
        json!({
            "accepted": t.stats.accepted,
            "rejected": t.stats.rejected,
            "evaluations": t.stats.evaluations,
        }),
    );
    body.insert("rtol".into(), report::float(tol.rtol, 0.0));
    body.insert("atol".into(), report::float(tol.atol, 0.0));
    if path.is_closed() {
        let num: f64 = t.value.iter().zip(&c0).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = c0.iter().map(|b| b.norm_sqr()).sum();
        body.insert(
            "loop_return".into(),
            report::float((num / den).sqrt(), 10.0 * tol.rtol),
        );
    }
    Ok(json_output("pfaffian", true, body))
}

fn copies(cfg: &RunConfig) -> u32 {
    cfg.model.m.unwrap_or(1)
}

fn estimate_json(e: &IntegralEstimate, tol: f64) -> Map<String, Value> {
    let mut body = Map::new();
    body.insert("scheme".into(), json!(e.scheme.as_str()));
    body.insert("basis".into(), report::basis(&e.basis));
    body.insert("coefficients".into(), report::floats(&e.values, tol));
    body.insert("relative_change".into(), report::float(e.relative_change, tol));
    body.insert("evaluations".into(), json!(e.evaluations));
    body.insert(
        "axis_exponents".into(),
        Value::Array(
            e.exponents
                .iter()
                .map(|&(a, b)| json!([report::float(a, 0.0), report::float(b, 0.0)]))
                .collect(),
        ),
    );
    body
}

fn evaluate(p: &Parameters<Rational>, z: &[Rational], m: u32, quad: &QuadratureSpec) -> Result<IntegralEstimate, CliError> {
    Ok(if m == 1 {
        eval_psi1(p, z, quad)?
    } else {
        eval_psim(p, z, m, quad)?
    })
}

pub fn integral(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.parameters()?;
    let z = cfg.z(p.n)?;
    let m = copies(cfg);
    let quad = cfg.quadrature(24)?;
    let tol = cfg.quadrature_tolerance(quad.scheme);
    let e = evaluate(&p, &z, m, &quad)?;
    if !(e.relative_change <= tol) {
        return Err(CliError::Numerical(format!(
            "quadrature did not stabilize: relative change {:.3e} exceeds {tol:.1e}",
            e.relative_change
        )));
    }
    let mut body = common(&p, Some(&z), None);
    body.insert("M".into(), json!(m));
    body.insert("nodes".into(), json!(quad.nodes_per_axis));
    if quad.scheme == qims::hypint::Scheme::MonteCarlo {
        body.insert("samples".into(), json!(quad.mc_samples));
        body.insert("quadrature_seed".into(), json!(quad.seed));
    }
    body.extend(estimate_json(&e, tol));
    Ok(json_output("integral", true, body))
}

pub fn series(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.parameters()?;
    let z = cfg.z(p.n)?;
    let order = cfg.order.unwrap_or(19);
    let s = series_psi1(&p, &z[0], order)?;
    let mut body = common(&p, Some(&z), None);
    body.insert("order".into(), json!(order));
    body.insert("basis".into(), report::basis(&s.basis));
    body.insert(
        "coefficients".into(),
        Value::Array(
            s.values
                .iter()
                .zip(&s.tail_bound)
                .map(|(&v, &t)| report::float(v, t))
                .collect(),
        ),
    );
    body.insert("tail_bound".into(), report::floats(&s.tail_bound, 0.0));
    body.insert(
        "axis_exponents".into(),
        Value::Array(
            s.exponents
                .iter()
                .map(|&(a, b)| json!([report::float(a, 0.0), report::float(b, 0.0)]))
                .collect(),
        ),
    );
    Ok(json_output("series", true, body))
}

fn cohomology_report(p: &Parameters<Rational>, z: &[Rational], m: u32) -> Result<(bool, Value), CliError> {
    if let Err(e) = dictionary_m(p, m) {
        return Ok((true, json!({ "skipped": e.to_string() })));
    }
    let mut ok = true;
    let mut rows = Vec::new();
    for i in 1..=p.n {
        let c = compare_with_operator(p, z, m, i, CohomologyForm::Corrected)?;
        let printed = compare_with_operator(p, z, m, i, CohomologyForm::Printed)?;
        let agrees = c.exact || c.lambda.is_some();
        ok &= agrees;
        let mut row = json!({
            "i": i,
            "form": c.form.as_str(),
            "exact": c.exact,
            "lambda": c.lambda.as_ref().map(report::exact),
            "printed_form_exact": printed.exact,
            "printed_form_lambda": printed.lambda.as_ref().map(report::exact),
        });
        if !c.exact {
            row["discrepancy"] = report::exact_matrix(&c.discrepancy);
        }
        rows.push(row);
    }
    Ok((ok, Value::Array(rows)))
}

/// `z_i` grid strictly inside the admissible interval around the current point.
fn plot_grid(cfg: &RunConfig, z: &[f64], i: usize) -> Result<Vec<f64>, CliError> {
    let lo = if i < z.len() { z[i] } else { 0.0 };
    let hi = if i >= 2 { z[i - 2] } else { 1.0 };
    let pad = 0.1 * (hi - lo);
    let parse = |s: &Option<String>, default: f64| -> Result<f64, CliError> {
        match s {
            Some(t) => Ok(rational_to_f64(&qims::scalar::parse_rational(t)?)),
            None => Ok(default),
        }
    };
    let a = parse(&cfg.plot.from, lo + pad)?;
    let b = parse(&cfg.plot.to, hi - pad)?;
    let n = cfg.plot.points.unwrap_or(17);
    if n < 2 || !(lo < a && a < b && b < hi) {
        return Err(CliError::Config(format!(
            "plot range [{a}, {b}] with {n} points must lie inside ({lo}, {hi})"
        )));
    }
    Ok((0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect())
}

fn plot(cfg: &RunConfig, p: &Parameters<Rational>, z: &[Rational], i: usize, m: u32, quad: &QuadratureSpec, file: &Path) -> Result<Value, CliError> {
    let zf: Vec<f64> = z.iter().map(rational_to_f64).collect();
    let grid = plot_grid(cfg, &zf, i)?;
    let mut series: Vec<Series> = Vec::new();
    for &x in &grid {
        let mut point = zf.clone();
        point[i - 1] = x;
        let e = if m == 1 {
            eval_psi1_f64(p, &point, quad)?
        } else {
            eval_psim_f64(p, &point, m, quad)?
        };
        if series.is_empty() {
            series = e
                .basis
                .iter()
                .map(|b| Series {
                    label: format!("c[{}]", b.label()),
                    points: Vec::new(),
                })
                .collect();
        }
        for (s, v) in series.iter_mut().zip(&e.values) {
            s.points.push((x, *v));
        }
    }
    let svg = line_chart(
        &format!("integral coefficients along z_{i}"),
        &format!("z_{i}"),
        "c_A(z)",
        &series,
    );
    report::write(file, &svg)?;
    Ok(json!({ "file": file.display().to_string(), "direction": i, "points": grid.len() }))
}

pub fn verify(cfg: &RunConfig, plot_file: Option<&PathBuf>) -> Result<Output, CliError> {
    let p = cfg.parameters()?;
    let z = cfg.z(p.n)?;
    let m = copies(cfg);
    let quad = cfg.quadrature(24)?;
    let tol = cfg.residual_tolerance(quad.scheme, m);
    let qtol = cfg.quadrature_tolerance(quad.scheme);
    let step = cfg.tolerances.step.unwrap_or(1e-3);
    let mut ok = true;
    let mut rows = Vec::new();
    for i in 1..=p.n {
        let r = pde_residual(&p, &z, i, m, &quad, step)?;
        let pass = r.residual < tol && r.quadrature_change <= qtol;
        ok &= pass;
        rows.push(json!({
            "i": i,
            "residual": report::float(r.residual, tol),
            "quadrature_change": report::float(r.quadrature_change, qtol),
            "pass": pass,
        }));
    }
    let (coh_ok, coh) = cohomology_report(&p, &z, m)?;
    ok &= coh_ok;
    let mut body = common(&p, Some(&z), None);
    body.insert("M".into(), json!(m));
    body.insert("scheme".into(), json!(quad.scheme.as_str()));
    body.insert("nodes".into(), json!(quad.nodes_per_axis));
    body.insert("step".into(), report::float(step, 0.0));
    body.insert("pde".into(), Value::Array(rows));
    body.insert("cohomology".into(), coh);
    if let Some(file) = plot_file {
        let i = cfg.direction(p.n)?;
        body.insert("plot".into(), plot(cfg, &p, &z, i, m, &quad, file)?);
    }
    Ok(json_output("verify", ok, body))
}
