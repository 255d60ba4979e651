use std::path::{Path, PathBuf};

use qims::hypint::{QuadratureSpec, Scheme};
use qims::pfaffian::{Space, Tolerances};
use qims::scalar::parse_rational;
use qims::weylops::{sample_parameters, sample_z, Parameters, SampleOptions};
use qims::{Complex, Rational};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<u32>,
    #[serde(rename = "T")]
    pub t: Option<Vec<i64>>,
}

/// Model constants as exact strings. `theta` lists `θ_1..θ_N`; `theta0`
/// is derived when absent and verified when present.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterText {
    pub e: Vec<String>,
    pub kappa: Vec<String>,
    pub theta: Vec<String>,
    pub theta0: Option<String>,
    pub hbar: Option<String>,
    pub planck: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureText {
    pub scheme: Option<String>,
    pub nodes: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceText {
    /// Transport relative tolerance.
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    /// Largest accepted quadrature node-doubling change (or MC standard error).
    pub quadrature: Option<f64>,
    /// Largest accepted PDE residual.
    pub residual: Option<f64>,
    /// Largest accepted relative cross-derivative in the flatness check.
    pub flatness: Option<f64>,
    /// Finite-difference step for the PDE residual.
    pub step: Option<f64>,
    /// Central-difference step for the flatness check.
    pub h: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotText {
    pub from: Option<String>,
    pub to: Option<String>,
    pub points: Option<usize>,
}

/// A coordinate in a path file: `"p/q"`, a number, or `[re, im]`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Coordinate {
    Text(String),
    Number(f64),
    Pair([Box<Coordinate>; 2]),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PathSpec {
    File(PathBuf),
    Inline(Vec<Vec<Coordinate>>),
}

/// The JSON configuration file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: Model,
    pub parameters: Option<ParameterText>,
    pub seed: Option<u64>,
    pub z: Option<Vec<String>>,
    pub i: Option<usize>,
    pub path: Option<PathSpec>,
    pub initial: Option<Vec<Coordinate>>,
    #[serde(default)]
    pub quadrature: QuadratureText,
    #[serde(default)]
    pub tolerances: ToleranceText,
    pub probe_degree: Option<u32>,
    pub order: Option<usize>,
    pub points: Option<usize>,
    #[serde(default)]
    pub plot: PlotText,
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub l: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<u32>,
    pub z: Option<Vec<String>>,
    pub i: Option<usize>,
    pub nodes: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn rational(text: &str, what: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|_| CliError::Config(format!("{what}: cannot parse {text:?}")))
}

fn rationals(list: &[String], what: &str) -> Result<Vec<Rational>, CliError> {
    list.iter()
        .enumerate()
        .map(|(k, s)| rational(s, &format!("{what}[{k}]")))
        .collect()
}

impl Coordinate {
    fn real(&self, what: &str) -> Result<f64, CliError> {
        match self {
            Coordinate::Text(s) => Ok(qims::scalar::rational_to_f64(&rational(s, what)?)),
            Coordinate::Number(x) if x.is_finite() => Ok(*x),
            Coordinate::Number(x) => Err(CliError::Config(format!("{what}: {x} is not finite"))),
            Coordinate::Pair(_) => Err(CliError::Config(format!(
                "{what}: expected a real number"
            ))),
        }
    }

    pub fn complex(&self, what: &str) -> Result<Complex, CliError> {
        match self {
            Coordinate::Pair([re, im]) => Ok(Complex::new(re.real(what)?, im.real(what)?)),
            other => Ok(Complex::new(other.real(what)?, 0.0)),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        if o.l.is_some() {
            self.model.l = o.l;
        }
        if o.n.is_some() {
            self.model.n = o.n;
        }
        if o.m.is_some() {
            self.model.m = o.m;
        }
        if o.z.is_some() {
            self.z = o.z;
        }
        if o.i.is_some() {
            self.i = o.i;
        }
        if o.nodes.is_some() {
            self.quadrature.nodes = o.nodes;
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.out.is_some() {
            self.out = o.out;
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// `(L, N)`, taken from the model or inferred from the parameters.
    pub fn dims(&self) -> Result<(usize, usize), CliError> {
        let p = self.parameters.as_ref();
        let l = self
            .model
            .l
            .or_else(|| p.map(|p| p.e.len()))
            .ok_or_else(|| CliError::Config("model.L is required".into()))?;
        let n = self
            .model
            .n
            .or_else(|| p.map(|p| p.theta.len()))
            .ok_or_else(|| CliError::Config("model.N is required".into()))?;
        if l < 2 || n < 1 {
            return Err(CliError::Config(format!(
                "need L >= 2 and N >= 1, got L = {l}, N = {n}"
            )));
        }
        Ok((l, n))
    }

    /// The invariant space: `V(M)` if `M` is set, else `F(T)` if `T` is set.
    pub fn space(&self) -> Result<Option<Space>, CliError> {
        match (&self.model.m, &self.model.t) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "model sets both M and T; choose one space".into(),
            )),
            (Some(m), None) => Ok(Some(Space::Total(*m))),
            (None, Some(t)) => Ok(Some(Space::Levels(t.clone()))),
            (None, None) => Ok(None),
        }
    }

    pub fn require_space(&self) -> Result<Space, CliError> {
        self.space()?
            .ok_or_else(|| CliError::Config("this command needs model.M or model.T".into()))
    }

    /// Explicit parameters, or a seeded random draw matching the chosen space.
    pub fn parameters(&self) -> Result<Parameters<Rational>, CliError> {
        let (l, n) = self.dims()?;
        let Some(p) = &self.parameters else {
            let mut opts = SampleOptions::default();
            match self.space()? {
                Some(Space::Total(m)) => opts.resonance = Some(Rational::from_integer(m.into())),
                Some(Space::Levels(t)) => opts.level_caps = Some(t),
                None => {}
            }
            return Ok(sample_parameters(l, n, self.seed(), &opts)?);
        };
        let e = rationals(&p.e, "parameters.e")?;
        let kappa = rationals(&p.kappa, "parameters.kappa")?;
        let theta = rationals(&p.theta, "parameters.theta")?;
        let one = || "1".to_string();
        let hbar = rational(p.hbar.clone().unwrap_or_else(one).as_str(), "parameters.hbar")?;
        let planck = rational(
            p.planck.clone().unwrap_or_else(one).as_str(),
            "parameters.planck",
        )?;
        let params = match &p.theta0 {
            None => Parameters::new(l, n, e, kappa, theta, hbar, planck)?,
            Some(t0) => {
                let mut full = vec![rational(t0, "parameters.theta0")?];
                full.extend(theta);
                Parameters::with_theta0(l, n, e, kappa, full, hbar, planck)?
            }
        };
        Ok(params)
    }

    /// Exact `z`, or a seeded admissible draw.
    pub fn z(&self, n: usize) -> Result<Vec<Rational>, CliError> {
        match &self.z {
            Some(z) => {
                let z = rationals(z, "z")?;
                if z.len() != n {
                    return Err(CliError::Config(format!(
                        "z has {} coordinates, expected N = {n}",
                        z.len()
                    )));
                }
                Ok(z)
            }
            None => Ok(sample_z(n, self.seed())),
        }
    }

    pub fn direction(&self, n: usize) -> Result<usize, CliError> {
        let i = self.i.unwrap_or(1);
        if i == 0 || i > n {
            return Err(CliError::Config(format!("i = {i} outside 1..={n}")));
        }
        Ok(i)
    }

    pub fn quadrature(&self, default_nodes: usize) -> Result<QuadratureSpec, CliError> {
        let q = &self.quadrature;
        let scheme = Scheme::parse(q.scheme.as_deref().unwrap_or("gauss_jacobi"))?;
        let spec = QuadratureSpec {
            scheme,
            nodes_per_axis: q.nodes.unwrap_or(default_nodes),
            mc_samples: q.samples.unwrap_or(100_000),
            seed: q.seed.unwrap_or(self.seed()),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Accepted quadrature error for a scheme.
    pub fn quadrature_tolerance(&self, scheme: Scheme) -> f64 {
        self.tolerances.quadrature.unwrap_or(match scheme {
            Scheme::GaussJacobiTensor => 1e-10,
            Scheme::TanhSinhTensor => 1e-6,
            Scheme::MonteCarlo => 1e-2,
        })
    }

    /// Accepted PDE residual for a scheme and copy count.
    pub fn residual_tolerance(&self, scheme: Scheme, m: u32) -> f64 {
        self.tolerances.residual.unwrap_or(match scheme {
            Scheme::MonteCarlo => 1e-2,
            _ if m == 1 => 1e-5,
            _ => 1e-4,
        })
    }

    pub fn transport_tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            rtol: self.tolerances.rtol.unwrap_or(d.rtol),
            atol: self.tolerances.atol.unwrap_or(d.atol),
        }
    }

    /// Waypoints from an inline path or a path file (relative to the config).
    pub fn path(&self, file: Option<&Path>) -> Result<Vec<Vec<Complex>>, CliError> {
        let spec = match (file, &self.path) {
            (Some(f), _) => PathSpec::File(f.to_path_buf()),
            (None, Some(p)) => p.clone(),
            (None, None) => {
                return Err(CliError::Config(
                    "no path: give a path file or set `path` in the config".into(),
                ))
            }
        };
        let points = match spec {
            PathSpec::Inline(points) => points,
            PathSpec::File(f) => {
                let f = match (&self.base_dir, file) {
                    (Some(dir), None) if f.is_relative() => dir.join(f),
                    _ => f,
                };
                let text = std::fs::read_to_string(&f)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", f.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", f.display())))?
            }
        };
        points
            .iter()
            .enumerate()
            .map(|(k, w)| {
                w.iter()
                    .enumerate()
                    .map(|(j, c)| c.complex(&format!("path[{k}][{j}]")))
                    .collect()
            })
            .collect()
    }

    pub fn initial(&self, dim: usize) -> Result<Vec<Complex>, CliError> {
        match &self.initial {
            None => {
                let mut v = vec![Complex::new(0.0, 0.0); dim];
                v[0] = Complex::new(1.0, 0.0);
                Ok(v)
            }
            Some(list) => {
                if list.len() != dim {
                    return Err(CliError::Config(format!(
                        "initial vector has {} entries, space dimension is {dim}",
                        list.len()
                    )));
                }
                list.iter()
                    .enumerate()
                    .map(|(k, c)| c.complex(&format!("initial[{k}]")))
                    .collect()
            }
        }
    }
}
