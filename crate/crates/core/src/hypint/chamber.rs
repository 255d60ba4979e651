use crate::error::{Error, Result};

/// Real interval hosting one block of copies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interval {
    /// `1 > t_1 > ... > t_{L-1} > 0`.
    Lower,
    /// `1 < t_1 < ... < t_{L-1} < 1/z_1`.
    Upper,
}

impl Interval {
    pub fn as_str(self) -> &'static str {
        match self {
            Interval::Lower => "lower",
            Interval::Upper => "upper",
        }
    }
}

/// A group of copies sharing one interval, ordered level by level: every
/// level-`n` copy lies closer to `t = 1` than every level-`(n+1)` copy, and
/// inside a level `t_n^{(1)}` is closest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub interval: Interval,
    pub copies: usize,
}

/// The integration region: a product of ordered blocks.
///
/// Inside a block the variables form one monotone sequence
/// `1 = x_0 > x_1 > ... > x_K > 0` in a normalized coordinate `x`, with
/// `t = x` on the lower interval and `t = b - (b - 1) x`, `b = 1/z_1`, on the
/// upper one. The cube map is `x_k = x_{k-1} u_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chamber {
    pub l: usize,
    pub blocks: Vec<Block>,
}

impl Chamber {
    /// All `M` copies in one lower block.
    pub fn ordered(l: usize, m: usize) -> Result<Self> {
        Self::from_blocks(
            l,
            vec![Block {
                interval: Interval::Lower,
                copies: m,
            }],
        )
    }

    /// One copy per interval, so no two copies ever meet.
    pub fn separated(l: usize, m: usize) -> Result<Self> {
        if m > 2 {
            return Err(Error::Unsupported(format!(
                "separated chamber has two intervals, cannot host M = {m} copies"
            )));
        }
        let intervals = [Interval::Lower, Interval::Upper];
        Self::from_blocks(
            l,
            intervals[..m]
                .iter()
                .map(|&interval| Block {
                    interval,
                    copies: 1,
                })
                .collect(),
        )
    }

    /// Ordered chamber when it is a twisted cycle (`L = 2` or `M = 1`),
    /// separated chamber otherwise.
    ///
    /// For `L >= 3` and `M >= 2` the ordered chamber has corners where a
    /// level-`n` and two level-`(n±1)`/level-`n` variables meet with
    /// exponents summing to `2/κ - 1/κ - 1/κ = 0`; the chamber is then not
    /// closed as a twisted cycle and its integral does not solve the system.
    pub fn default_for(l: usize, m: usize) -> Result<Self> {
        if l == 2 || m == 1 {
            Self::ordered(l, m)
        } else {
            Self::separated(l, m)
        }
    }

    pub fn from_blocks(l: usize, blocks: Vec<Block>) -> Result<Self> {
        if l < 2 {
            return Err(Error::Parameter(format!("chamber needs L >= 2, got {l}")));
        }
        if blocks.is_empty() || blocks.iter().any(|b| b.copies == 0) {
            return Err(Error::Parameter("chamber blocks must be nonempty".into()));
        }
        Ok(Self { l, blocks })
    }

    /// Number of copies `M`.
    pub fn copies(&self) -> usize {
        self.blocks.iter().map(|b| b.copies).sum()
    }

    /// Number of integration variables `(L-1) M`.
    pub fn dim(&self) -> usize {
        (self.l - 1) * self.copies()
    }

    /// Block index and position inside the block of `t_n^{(a)}` (1-based `n`, `a`);
    /// `n = 0` is the anchor `t_0 = 1` at position 0.
    pub fn locate(&self, n: usize, a: usize) -> (usize, usize) {
        let mut first = 1;
        for (k, b) in self.blocks.iter().enumerate() {
            if a < first + b.copies {
                let local = a - first + 1;
                let pos = if n == 0 {
                    0
                } else {
                    (n - 1) * b.copies + local
                };
                return (k, pos);
            }
            first += b.copies;
        }
        panic!("copy {a} out of range");
    }

    /// Maps a point of the open unit cube to the chamber.
    pub fn point(&self, z1: f64, u: &[f64], ubar: &[f64]) -> ChamberPoint {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        let mut offset = 0;
        let b = 1.0 / z1;
        for blk in &self.blocks {
            let k = blk.copies * (self.l - 1);
            let (c0, c1) = match blk.interval {
                Interval::Lower => (0.0, 1.0),
                Interval::Upper => (b, -(b - 1.0)),
            };
            blocks.push(BlockPoint::from_cube(
                &u[offset..offset + k],
                &ubar[offset..offset + k],
                c0,
                c1,
            ));
            offset += k;
        }
        ChamberPoint {
            chamber: self.clone(),
            blocks,
        }
    }

    /// Cube coordinates of a single-copy point `t = (t_1, ..., t_{L-1})` in the lower interval.
    pub fn cube_coordinates(&self, t: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.blocks.len() != 1 || self.blocks[0].interval != Interval::Lower {
            return Err(Error::Unsupported(
                "cube coordinates need one lower block".into(),
            ));
        }
        let m = self.blocks[0].copies;
        let mut seq = vec![1.0];
        for level in t {
            if level.len() != m {
                return Err(Error::Parameter(format!(
                    "expected {m} copies per level, got {}",
                    level.len()
                )));
            }
            seq.extend_from_slice(level);
        }
        if seq.len() != self.dim() + 1 {
            return Err(Error::Parameter(format!(
                "expected {} levels, got {}",
                self.l - 1,
                t.len()
            )));
        }
        for k in 1..seq.len() {
            if !(seq[k] > 0.0 && seq[k] < seq[k - 1]) {
                return Err(Error::Domain(format!(
                    "point is outside the chamber 1 > t_1 > ... > t_{{L-1}} > 0 (coordinate {k})"
                )));
            }
        }
        let u: Vec<f64> = (1..seq.len()).map(|k| seq[k] / seq[k - 1]).collect();
        let ubar: Vec<f64> = (1..seq.len())
            .map(|k| (seq[k - 1] - seq[k]) / seq[k - 1])
            .collect();
        Ok((u, ubar))
    }
}

/// One block evaluated at a cube point, in the normalized coordinate `x`.
#[derive(Clone, Debug)]
pub struct BlockPoint {
    /// `x_0 = 1, x_1, ..., x_K`.
    pub x: Vec<f64>,
    pub ln_x: Vec<f64>,
    /// `gap[p][q] = 1 - x_q / x_p` for `p < q`.
    gap: Vec<Vec<f64>>,
    /// `t = c0 + c1 x`.
    pub c0: f64,
    pub c1: f64,
}

impl BlockPoint {
    fn from_cube(u: &[f64], ubar: &[f64], c0: f64, c1: f64) -> Self {
        let k = u.len();
        let mut ln_x = vec![0.0; k + 1];
        for j in 1..=k {
            ln_x[j] = ln_x[j - 1] + u[j - 1].ln();
        }
        let x: Vec<f64> = ln_x.iter().map(|v| v.exp()).collect();
        // 1 - Π_{p<l<=q} u_l accumulated as D_q = D_{q-1} + P_{q-1} (1 - u_q):
        // a sum of nonnegative terms, so no cancellation.
        let mut gap = vec![vec![0.0; k + 1]; k + 1];
        for (p, row) in gap.iter_mut().enumerate().take(k) {
            let mut d = 0.0;
            let mut prod = 1.0;
            for q in p + 1..=k {
                d += prod * ubar[q - 1];
                prod *= u[q - 1];
                row[q] = d;
            }
        }
        Self {
            x,
            ln_x,
            gap,
            c0,
            c1,
        }
    }

    /// `x_p - x_q` (positive) for `p < q`.
    fn x_diff(&self, p: usize, q: usize) -> f64 {
        self.x[p] * self.gap[p][q]
    }

    fn ln_x_diff(&self, p: usize, q: usize) -> f64 {
        self.ln_x[p] + self.gap[p][q].ln()
    }
}

/// A chamber point with the quantities the integrands need, each computed
/// without cancellation.
#[derive(Clone, Debug)]
pub struct ChamberPoint {
    chamber: Chamber,
    blocks: Vec<BlockPoint>,
}

impl ChamberPoint {
    /// `t_n^{(a)}` (`n = 0` gives the anchor 1).
    pub fn t(&self, n: usize, a: usize) -> f64 {
        let (k, p) = self.chamber.locate(n, a);
        let b = &self.blocks[k];
        if p == 0 {
            1.0
        } else {
            b.c0 + b.c1 * b.x[p]
        }
    }

    /// `ln t_n^{(a)}` (all variables are positive).
    pub fn ln_t(&self, n: usize, a: usize) -> f64 {
        let (k, p) = self.chamber.locate(n, a);
        let b = &self.blocks[k];
        if b.c0 == 0.0 {
            b.ln_x[p]
        } else {
            self.t(n, a).ln()
        }
    }

    /// Signed `t_n^{(a)} - t_m^{(b)}` and `ln |t_n^{(a)} - t_m^{(b)}|`.
    pub fn diff(&self, (n, a): (usize, usize), (m, b): (usize, usize)) -> (f64, f64) {
        let (ka, pa) = self.chamber.locate(n, a);
        let (kb, pb) = self.chamber.locate(m, b);
        if ka == kb || pa == 0 || pb == 0 {
            // The anchor sits at x = 1 in every block.
            let (blk, p, q) = if ka == kb {
                (&self.blocks[ka], pa, pb)
            } else if pa == 0 {
                (&self.blocks[kb], 0, pb)
            } else {
                (&self.blocks[ka], pa, 0)
            };
            if p == q {
                return (0.0, f64::NEG_INFINITY);
            }
            let (lo, hi, flip) = if p < q { (p, q, 1.0) } else { (q, p, -1.0) };
            // x_p - x_q = flip * (x_lo - x_hi), t difference = c1 (x_p - x_q)
            let mag = blk.c1.abs() * blk.x_diff(lo, hi);
            let ln = blk.c1.abs().ln() + blk.ln_x_diff(lo, hi);
            (flip * blk.c1.signum() * mag, ln)
        } else {
            let d = self.t(n, a) - self.t(m, b);
            (d, d.abs().ln())
        }
    }

    /// `1 - z t_n^{(a)}` and its log. `z1` pins the upper interval end.
    pub fn one_minus_zt(&self, z: f64, z1: f64, n: usize, a: usize) -> (f64, f64) {
        let (k, p) = self.chamber.locate(n, a);
        let b = &self.blocks[k];
        let v = if b.c0 == 0.0 {
            1.0 - z * b.x[p]
        } else {
            // 1 - z (c0 + c1 x) with c0 = 1/z1: constant (z1 - z)/z1 is exact zero for z = z1.
            (z1 - z) / z1 - z * b.c1 * b.x[p]
        };
        (v, v.ln())
    }

    /// `ln` of the Jacobian of the cube map.
    pub fn ln_jacobian(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let k = b.x.len() - 1;
                k as f64 * b.c1.abs().ln() + b.ln_x[..k].iter().sum::<f64>()
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_stable_differences() {
        let ch = Chamber::ordered(3, 2).unwrap();
        let t = vec![vec![0.9, 0.8], vec![0.3, 0.2999999]];
        let (u, ub) = ch.cube_coordinates(&t).unwrap();
        let p = ch.point(0.5, &u, &ub);
        assert!((p.t(1, 2) - 0.8).abs() < 1e-15);
        assert!((p.t(2, 2) - 0.2999999).abs() < 1e-15);
        assert!((p.diff((2, 1), (2, 2)).0 - 1e-7).abs() < 1e-16);
        assert!((p.diff((2, 2), (2, 1)).0 + 1e-7).abs() < 1e-16);
        assert!((p.diff((0, 1), (1, 2)).0 - 0.2).abs() < 1e-15);
        assert_eq!(ch.locate(2, 1), (0, 3));
    }

    #[test]
    fn upper_interval_signs() {
        let ch = Chamber::separated(3, 2).unwrap();
        let z1 = 0.5;
        let u = [0.5, 0.5, 0.5, 0.5];
        let p = ch.point(z1, &u, &u);
        // copy 2: t_1 = 2 - 0.5 = 1.5, t_2 = 2 - 0.25 = 1.75
        assert!((p.t(1, 2) - 1.5).abs() < 1e-15);
        assert!((p.t(2, 2) - 1.75).abs() < 1e-15);
        assert!((p.diff((1, 2), (2, 2)).0 + 0.25).abs() < 1e-15);
        assert!((p.diff((0, 2), (1, 2)).0 + 0.5).abs() < 1e-15);
        assert!((p.one_minus_zt(z1, z1, 2, 2).0 - 0.125).abs() < 1e-15);
        assert!((p.diff((1, 1), (1, 2)).0 - (0.5 - 1.5)).abs() < 1e-15);
    }

    #[test]
    fn unordered_point_is_rejected() {
        let ch = Chamber::ordered(3, 1).unwrap();
        let err = ch.cube_coordinates(&[vec![0.2], vec![0.5]]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
