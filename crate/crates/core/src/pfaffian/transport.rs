use crate::error::{Error, Result};
use crate::scalar::Complex;

use super::{Matrix, PfaffianSystem};

/// Segments closer than this fraction of their length to a pole hyperplane are rejected.
pub const POLE_GUARD: f64 = 1e-3;

/// Polygonal path in `ℂ^N` through admissible points.
#[derive(Clone, Debug, PartialEq)]
pub struct ZPath {
    waypoints: Vec<Vec<Complex>>,
}

/// Distance from the segment `a + s (b - a)`, `s ∈ [0, 1]`, to the zero set of
/// the affine function whose values at the endpoints are `fa`, `fb`.
fn segment_distance(fa: Complex, fb: Complex, gradient_norm: f64) -> f64 {
    let d = fb - fa;
    let s = if d.norm_sqr() == 0.0 {
        0.0
    } else {
        (-(fa * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0)
    };
    (fa + d * s).norm() / gradient_norm
}

impl ZPath {
    /// Builds a path, rejecting any segment that passes within
    /// [`POLE_GUARD`] × its length of `z_i ∈ {0, 1}` or `z_i = z_j`.
    pub fn new(waypoints: Vec<Vec<Complex>>, n: usize) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::Parameter(
                "a path needs at least one waypoint".into(),
            ));
        }
        for (k, w) in waypoints.iter().enumerate() {
            if w.len() != n {
                return Err(Error::Parameter(format!(
                    "waypoint {k} has {} coordinates, expected {n}",
                    w.len()
                )));
            }
        }
        let path = Self { waypoints };
        path.check_poles()?;
        Ok(path)
    }

    /// Straight segment from `a` to `b`.
    pub fn segment(a: Vec<Complex>, b: Vec<Complex>) -> Result<Self> {
        let n = a.len();
        Self::new(vec![a, b], n)
    }

    pub fn waypoints(&self) -> &[Vec<Complex>] {
        &self.waypoints
    }

    pub fn start(&self) -> &[Complex] {
        &self.waypoints[0]
    }

    pub fn end(&self) -> &[Complex] {
        self.waypoints.last().expect("nonempty")
    }

    pub fn is_closed(&self) -> bool {
        self.start() == self.end()
    }

    /// Point at parameter `s ∈ [0, 1]` on segment `k`.
    pub fn point(&self, k: usize, s: f64) -> Vec<Complex> {
        let (a, b) = (&self.waypoints[k], &self.waypoints[k + 1]);
        a.iter().zip(b).map(|(x, y)| x + (y - x) * s).collect()
    }

    fn check_poles(&self) -> Result<()> {
        let single = [self.waypoints[0].clone(), self.waypoints[0].clone()];
        let pairs: Vec<(&Vec<Complex>, &Vec<Complex>)> = if self.waypoints.len() == 1 {
            vec![(&single[0], &single[1])]
        } else {
            self.waypoints.windows(2).map(|w| (&w[0], &w[1])).collect()
        };
        for (k, (a, b)) in pairs.into_iter().enumerate() {
            let length = a
                .iter()
                .zip(b)
                .map(|(x, y)| (y - x).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let bound = POLE_GUARD * length;
            let n = a.len();
            let check = |fa: Complex, fb: Complex, g: f64, what: String| -> Result<()> {
                let d = segment_distance(fa, fb, g);
                if d <= bound || d == 0.0 {
                    return Err(Error::Singularity(format!(
                        "segment {k} passes within {d:.3e} of {what} (guard {bound:.3e})"
                    )));
                }
                Ok(())
            };
            for i in 0..n {
                check(a[i], b[i], 1.0, format!("z_{} = 0", i + 1))?;
                let one = Complex::new(1.0, 0.0);
                check(a[i] - one, b[i] - one, 1.0, format!("z_{} = 1", i + 1))?;
                for j in i + 1..n {
                    check(
                        a[i] - a[j],
                        b[i] - b[j],
                        2f64.sqrt(),
                        format!("z_{} = z_{}", i + 1, j + 1),
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Integration tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

/// Step counts of one transport.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Endpoint of a transport plus its step statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Transport {
    pub value: Vec<Complex>,
    pub stats: StepStats,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 200_000;

/// Adaptive Dormand–Prince integration of `dc/ds = A(s) c` on `s ∈ [0, 1]`.
fn integrate_linear(
    mut rhs: impl FnMut(f64) -> Result<Matrix<Complex>>,
    c0: &[Complex],
    tol: Tolerances,
    segment: usize,
    stats: &mut StepStats,
) -> Result<Vec<Complex>> {
    let dim = c0.len();
    let mut y = c0.to_vec();
    let mut s = 0.0f64;
    let mut h = 0.05f64;
    let mut k: Vec<Vec<Complex>> = vec![vec![Complex::new(0.0, 0.0); dim]; 7];
    let mut steps = 0;
    let mut a_prev: Option<(f64, Vec<Complex>)> = None;
    while 1.0 - s > 1e-12 {
        if steps >= MAX_STEPS {
            return Err(Error::Propagation {
                segment,
                s,
                message: format!("step budget of {MAX_STEPS} exhausted"),
            });
        }
        steps += 1;
        h = h.min(1.0 - s);
        if h < 1e-13 {
            return Err(Error::Propagation {
                segment,
                s,
                message: format!("step size underflow (h = {h:.3e})"),
            });
        }
        // First-same-as-last: reuse the derivative from the previous accepted step.
        k[0] = match &a_prev {
            Some((sp, d)) if *sp == s => d.clone(),
            _ => {
                stats.evaluations += 1;
                rhs(s)?.mul_vec(&y)
            }
        };
        let mut stage = y.clone();
        for st in 1..7 {
            for (x, y0) in stage.iter_mut().zip(&y) {
                *x = *y0;
            }
            for (j, kj) in k.iter().enumerate().take(st) {
                let a = A[st][j];
                if a != 0.0 {
                    for (x, kv) in stage.iter_mut().zip(kj) {
                        *x += kv * (h * a);
                    }
                }
            }
            stats.evaluations += 1;
            k[st] = rhs(s + C[st] * h)?.mul_vec(&stage);
        }
        // stage now holds the 5th-order solution (row 7 of A equals B5).
        let mut err = 0.0f64;
        for idx in 0..dim {
            let mut e = Complex::new(0.0, 0.0);
            for st in 0..7 {
                e += k[st][idx] * (h * (B5[st] - B4[st]));
            }
            let scale = tol.atol + tol.rtol * y[idx].norm().max(stage[idx].norm());
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            return Err(Error::Propagation {
                segment,
                s,
                message: "non-finite values (pole crossed?)".into(),
            });
        }
        if err <= 1.0 {
            s += h;
            y = stage;
            a_prev = Some((s, k[6].clone()));
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(y)
}

/// Transports `c0` along `path` by `κ dc/ds = Σ_i (dz_i/ds) M_i(z(s)) c`.
pub fn propagate(
    system: &PfaffianSystem<Complex>,
    path: &ZPath,
    c0: &[Complex],
    tol: Tolerances,
) -> Result<Transport> {
    if c0.len() != system.dim() {
        return Err(Error::Parameter(format!(
            "initial vector has length {}, system dimension is {}",
            c0.len(),
            system.dim()
        )));
    }
    if path.start().len() != system.times() {
        return Err(Error::Parameter(format!(
            "path lives in C^{}, system has N = {}",
            path.start().len(),
            system.times()
        )));
    }
    let inv_planck = Complex::new(1.0, 0.0) / system.params().planck;
    let mut stats = StepStats::default();
    let mut c = c0.to_vec();
    for k in 0..path.waypoints().len().saturating_sub(1) {
        let (a, b) = (&path.waypoints()[k], &path.waypoints()[k + 1]);
        let dz: Vec<Complex> = a.iter().zip(b).map(|(x, y)| y - x).collect();
        if dz.iter().all(|d| d.norm() == 0.0) {
            continue;
        }
        let rhs = |s: f64| -> Result<Matrix<Complex>> {
            let z = path.point(k, s);
            let mut total = Matrix::zeros(system.dim(), system.dim());
            for (i, d) in dz.iter().enumerate() {
                if d.norm() != 0.0 {
                    total.add_scaled(&system.matrix_at(i + 1, &z)?, &(d * inv_planck));
                }
            }
            Ok(total)
        };
        c = integrate_linear(rhs, &c, tol, k, &mut stats)?;
    }
    Ok(Transport { value: c, stats })
}

/// Transport around a closed loop. For a contractible loop in a pole-free
/// region the result equals `c0` up to the integration tolerance.
pub fn monodromy_like_transport(
    system: &PfaffianSystem<Complex>,
    path: &ZPath,
    c0: &[Complex],
    tol: Tolerances,
) -> Result<Transport> {
    if !path.is_closed() {
        return Err(Error::Parameter("loop must end where it starts".into()));
    }
    propagate(system, path, c0, tol)
}
