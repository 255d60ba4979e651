use std::fmt;

use crate::scalar::{max_by_magnitude, Complex, Scalar};

/// Dense row-major matrix over a [`Scalar`] field.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for k in 0..dim {
            m.set(k, k, S::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: S) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &Self, factor: &S) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        if factor.is_zero() {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a = a.clone() + b.clone() * factor.clone();
            }
        }
    }

    /// `self += value * I`.
    pub fn add_diagonal(&mut self, value: &S) {
        for k in 0..self.rows.min(self.cols) {
            let v = self.get(k, k).clone() + value.clone();
            self.set(k, k, v);
        }
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|a| a.clone() * factor.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &-S::one());
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        let v = out.get(r, c).clone() + a.clone() * b.clone();
                        out.set(r, c, v);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Entry of largest magnitude (zero for an empty matrix).
    pub fn max_abs(&self) -> S {
        self.data
            .iter()
            .map(|a| a.modulus())
            .fold(S::zero(), max_by_magnitude)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    pub fn to_complex(&self) -> Matrix<Complex> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Scalar::to_complex).collect(),
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let cells: Vec<String> = row.iter().map(|c| format!("{c:?}")).collect();
            writeln!(f, "  {}", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    #[test]
    fn product_and_commutator() {
        let mut a = Matrix::<Rational>::zeros(2, 2);
        a.set(0, 1, ratio(1, 1));
        let mut b = Matrix::<Rational>::zeros(2, 2);
        b.set(1, 0, ratio(1, 1));
        let c = a.commutator(&b);
        assert_eq!(*c.get(0, 0), ratio(1, 1));
        assert_eq!(*c.get(1, 1), ratio(-1, 1));
        assert_eq!(
            a.mul_vec(&[ratio(2, 1), ratio(3, 1)]),
            vec![ratio(3, 1), ratio(0, 1)]
        );
    }
}
