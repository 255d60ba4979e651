use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use qims::polyalg::MultiIndex;
use qims::{Complex, Rational, Scalar};
use serde_json::{json, Value};

use crate::error::CliError;

/// Exact value: `{"value": "p/q", "provenance": "exact"}`.
pub fn exact(x: &Rational) -> Value {
    json!({ "value": x.render(), "provenance": "exact" })
}

/// Float value with the tolerance it was judged against.
pub fn float(x: f64, tolerance: f64) -> Value {
    json!({ "value": finite(x), "provenance": "float", "tolerance": tolerance })
}

pub fn complex(x: Complex, tolerance: f64) -> Value {
    json!({
        "re": finite(x.re),
        "im": finite(x.im),
        "provenance": "float",
        "tolerance": tolerance,
    })
}

/// JSON has no infinities; those are written as strings.
fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

pub fn floats(xs: &[f64], tolerance: f64) -> Value {
    Value::Array(xs.iter().map(|&x| float(x, tolerance)).collect())
}

pub fn index(a: &MultiIndex) -> Value {
    json!({ "label": a.label(), "rows": a.rows() })
}

pub fn basis(b: &[MultiIndex]) -> Value {
    Value::Array(b.iter().map(index).collect())
}

pub fn exact_matrix(m: &qims::pfaffian::Matrix<Rational>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array(m.row(r).iter().map(exact).collect()))
            .collect(),
    )
}

pub fn parameters(p: &qims::weylops::Parameters<Rational>) -> Value {
    let list = |v: &[Rational]| Value::Array(v.iter().map(exact).collect());
    json!({
        "L": p.l,
        "N": p.n,
        "e": list(&p.e),
        "kappa": list(&p.kappa),
        "theta": list(&p.theta),
        "hbar": exact(&p.hbar),
        "planck": exact(&p.planck),
    })
}

/// Where a report goes: `--out FILE`, or stdout.
pub struct Sink {
    pub out: Option<PathBuf>,
}

impl Sink {
    /// Writes the deterministic report, and the run metadata next to it
    /// (`FILE.meta.json`) or on stderr.
    pub fn emit(&self, text: &str, command: &str, elapsed: Duration) -> Result<(), CliError> {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let meta = json!({
            "metadata": {
                "command": command,
                "finished_unix_seconds": stamp,
                "elapsed_seconds": elapsed.as_secs_f64(),
                "version": env!("CARGO_PKG_VERSION"),
            }
        });
        match &self.out {
            Some(path) => {
                write(path, text)?;
                write(&meta_path(path), &format!("{meta:#}\n"))?;
            }
            None => {
                print!("{text}");
                eprintln!("{meta}");
            }
        }
        Ok(())
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Renders a report as pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    format!("{v:#}\n")
}
