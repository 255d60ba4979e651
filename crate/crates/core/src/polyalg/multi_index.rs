use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

/// Exponent matrix `A = (A_{m,i})` of a monomial `q^A`.
///
/// Rows are the levels `m = 1..L-1`, columns the time indices `i = 1..N`.
/// Accessors take these 1-based indices; storage is row-major.
///
/// Ordering is graded lexicographic: first by total degree `d(A)`, then by
/// the row-major entry sequence.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    levels: usize,
    times: usize,
    entries: Vec<u32>,
}

impl MultiIndex {
    /// The zero index (the monomial `1`) for `levels = L-1` rows and `times = N` columns.
    pub fn zero(levels: usize, times: usize) -> Self {
        Self {
            levels,
            times,
            entries: vec![0; levels * times],
        }
    }

    /// Builds an index from row-major entries.
    ///
    /// # Panics
    /// If `entries.len() != levels * times`.
    pub fn from_entries(levels: usize, times: usize, entries: Vec<u32>) -> Self {
        assert_eq!(entries.len(), levels * times, "entry count mismatch");
        Self {
            levels,
            times,
            entries,
        }
    }

    /// The index of the single variable `q_level^{(time)}`.
    pub fn unit(levels: usize, times: usize, level: usize, time: usize) -> Self {
        let mut idx = Self::zero(levels, times);
        idx.set(level, time, 1);
        idx
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn times(&self) -> usize {
        self.times
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    fn slot(&self, level: usize, time: usize) -> usize {
        assert!(
            (1..=self.levels).contains(&level) && (1..=self.times).contains(&time),
            "index (m={level}, i={time}) outside {}x{}",
            self.levels,
            self.times
        );
        (level - 1) * self.times + (time - 1)
    }

    /// `A_{level,time}`.
    pub fn get(&self, level: usize, time: usize) -> u32 {
        self.entries[self.slot(level, time)]
    }

    pub fn set(&mut self, level: usize, time: usize, value: u32) {
        let s = self.slot(level, time);
        self.entries[s] = value;
    }

    /// Total degree `d(A)`.
    pub fn degree(&self) -> u32 {
        self.entries.iter().sum()
    }

    /// Level degree `d_m(A) = Σ_i A_{m,i}`.
    pub fn level_degree(&self, level: usize) -> u32 {
        (1..=self.times).map(|i| self.get(level, i)).sum()
    }

    /// Column sum `Σ_m A_{m,i}`.
    pub fn time_degree(&self, time: usize) -> u32 {
        (1..=self.levels).map(|m| self.get(m, time)).sum()
    }

    /// `A_0 = M - d(A)`, or `None` when `d(A) > M`.
    pub fn complement(&self, total: u32) -> Option<u32> {
        total.checked_sub(self.degree())
    }

    /// `S_n^{(i)} = Σ_{j<i} Σ_m A_{m,j} + Σ_{m<=n} A_{m,i}`, the end of the
    /// block of copies carrying `f_n^{(i)}` in the column-major sweep.
    /// `segment_end(0, i)` is the start of column `i`.
    pub fn segment_end(&self, level: usize, time: usize) -> u32 {
        let before: u32 = (1..time).map(|j| self.time_degree(j)).sum();
        before + (1..=level).map(|m| self.get(m, time)).sum::<u32>()
    }

    /// Applies `(level, time, delta)` shifts; `None` if an entry goes negative.
    pub fn shifted(&self, shifts: &[(usize, usize, i32)]) -> Option<Self> {
        let mut out = self.clone();
        for &(level, time, delta) in shifts {
            let s = out.slot(level, time);
            let v = out.entries[s] as i64 + delta as i64;
            if v < 0 {
                return None;
            }
            out.entries[s] = v as u32;
        }
        Some(out)
    }

    /// Multinomial coefficient `M! / (A_0! Π A_{m,i}!)`; `None` if `d(A) > M`.
    pub fn multinomial(&self, total: u32) -> Option<BigUint> {
        let a0 = self.complement(total)?;
        let mut value = factorial(total);
        for &k in self.entries.iter().chain(std::iter::once(&a0)) {
            value /= factorial(k);
        }
        Some(value)
    }

    /// Label used in CSV headers: `m1i1:e,m1i2:e,...`.
    pub fn label(&self) -> String {
        let mut parts = Vec::with_capacity(self.entries.len());
        for m in 1..=self.levels {
            for i in 1..=self.times {
                parts.push(format!("m{m}i{i}:{}", self.get(m, i)));
            }
        }
        parts.join(",")
    }

    /// Rows as nested vectors, for serialization.
    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.entries
            .chunks(self.times.max(1))
            .map(|r| r.to_vec())
            .collect()
    }
}

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.entries.cmp(&other.entries))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (r, row) in self.rows().iter().enumerate() {
            if r > 0 {
                write!(f, ";")?;
            }
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            write!(f, "{}", cells.join(","))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_and_segments() {
        // levels = 2, times = 2; A = [[1,2],[0,3]]
        let a = MultiIndex::from_entries(2, 2, vec![1, 2, 0, 3]);
        assert_eq!(a.degree(), 6);
        assert_eq!(a.level_degree(1), 3);
        assert_eq!(a.level_degree(2), 3);
        assert_eq!(a.time_degree(2), 5);
        assert_eq!(a.complement(8), Some(2));
        assert_eq!(a.complement(5), None);
        // column 1 holds A_{1,1}=1, A_{2,1}=0; column 2 starts at 1
        assert_eq!(a.segment_end(1, 1), 1);
        assert_eq!(a.segment_end(2, 1), 1);
        assert_eq!(a.segment_end(0, 2), 1);
        assert_eq!(a.segment_end(1, 2), 3);
        assert_eq!(a.segment_end(2, 2), 6);
    }

    #[test]
    fn segment_ends_are_nondecreasing_in_sweep_order() {
        let a = MultiIndex::from_entries(3, 2, vec![2, 0, 1, 4, 0, 1]);
        let mut prev = 0;
        for i in 1..=2 {
            for n in 1..=3 {
                let s = a.segment_end(n, i);
                assert!(s >= prev);
                prev = s;
            }
        }
        assert_eq!(prev, a.degree());
    }

    #[test]
    fn multinomial_and_shifts() {
        let a = MultiIndex::from_entries(1, 2, vec![1, 1]);
        assert_eq!(a.multinomial(3).unwrap(), BigUint::from(6u32));
        assert_eq!(a.multinomial(2).unwrap(), BigUint::from(2u32));
        assert!(a.shifted(&[(1, 1, -2)]).is_none());
        let b = a.shifted(&[(1, 1, -1), (1, 2, 1)]).unwrap();
        assert_eq!(b.entries(), &[0, 2]);
    }

    #[test]
    fn graded_order() {
        let z = MultiIndex::zero(1, 2);
        let e1 = MultiIndex::unit(1, 2, 1, 1);
        let e2 = MultiIndex::unit(1, 2, 1, 2);
        assert!(z < e2 && e2 < e1);
        assert_eq!(e1.label(), "m1i1:1,m1i2:0");
        assert_eq!(format!("{e1}"), "[1,0]");
    }
}
