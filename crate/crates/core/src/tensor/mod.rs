//! Dense complex linear algebra for registers of a handful of qubits.
//!
//! Qubit `0` is the leftmost tensor factor, i.e. the most significant bit of
//! a computational-basis index. The 1-based labels used elsewhere in the
//! crate (`N12`, `F_pair(24)`, `theta1`) count qubits from 1, so label `k`
//! always refers to index `k - 1` here.

mod eigen;

pub use eigen::{degenerate_groups, hermitian_eigen, hermitian_eigenvalues, multiplicity, psd_sqrt, singular_values, Eigen};

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting bad shapes and NaN/Inf.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::ShapeMismatch { rows, cols, len: data.len() });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: k / cols, col: k % cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows of real or complex values.
    pub fn from_rows<T: Into<C64> + Copy>(rows: &[&[T]]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().map(|&z| z.into())).collect();
        Self::new(n_rows, n_cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diag<T: Into<C64> + Copy>(values: &[T]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v.into();
        }
        m
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                m[(i, j)] = x * y.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Entrywise complex conjugate (computational basis).
    pub fn conj(&self) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&z| z * s).collect())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.mul_unchecked(rhs))
    }

    pub(crate) fn mul_unchecked(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self * m * self^dagger`.
    pub fn conjugate(&self, m: &Self) -> Result<Self> {
        self.matmul(m)?.matmul(&self.dagger())
    }

    /// Largest entrywise modulus of `self - other`; `inf` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |h - h^dagger|` over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `max |u^dagger u - 1|` over entries.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.dagger().mul_unchecked(self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        ComplexMatrix::from_raw(self.rows, self.cols, self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        ComplexMatrix::from_raw(self.rows, self.cols, self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect())
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        self.mul_unchecked(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Left-to-right Kronecker product of all factors.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

/// Bit of `index` that encodes qubit `q` in an `n`-qubit register.
#[inline]
pub(crate) fn qubit_bit(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

pub(crate) fn register_qubits(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() || !m.rows.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} is not a qubit-register operator",
            m.rows, m.cols
        )));
    }
    Ok(m.rows.trailing_zeros() as usize)
}

pub(crate) fn check_qubits(indices: &[usize], n_qubits: usize) -> Result<()> {
    for (k, &q) in indices.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
        if indices[..k].contains(&q) {
            return Err(Error::RepeatedQubit(q));
        }
    }
    Ok(())
}

/// Transposes the tensor indices of the qubits in `subset`.
pub fn partial_transpose(m: &ComplexMatrix, subset: &[usize]) -> Result<ComplexMatrix> {
    let n = register_qubits(m)?;
    check_qubits(subset, n)?;
    let mask = subset.iter().fold(0usize, |acc, &q| acc | qubit_bit(n, q));
    let dim = m.rows;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for x in 0..dim {
        for y in 0..dim {
            // swap the masked bits between row and column index
            let swapped = (x ^ y) & mask;
            out[(x ^ swapped, y ^ swapped)] = m[(x, y)];
        }
    }
    Ok(out)
}

/// Reduced operator on the qubits in `keep`, in the order given.
pub fn partial_trace(m: &ComplexMatrix, keep: &[usize]) -> Result<ComplexMatrix> {
    let n = register_qubits(m)?;
    if keep.is_empty() {
        return Err(Error::DimensionMismatch("partial trace must keep at least one qubit".into()));
    }
    check_qubits(keep, n)?;
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let spread = |sub: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|&(i, _)| sub & (1 << (k - 1 - i)) != 0)
            .fold(0, |acc, (_, &q)| acc | qubit_bit(n, q))
    };
    let keep_dim = 1 << keep.len();
    let keep_idx: Vec<usize> = (0..keep_dim).map(|a| spread(a, keep)).collect();
    let traced_idx: Vec<usize> = (0..1usize << traced.len()).map(|t| spread(t, &traced)).collect();
    let mut out = ComplexMatrix::zeros(keep_dim, keep_dim);
    for a in 0..keep_dim {
        for b in 0..keep_dim {
            out[(a, b)] = traced_idx.iter().map(|&t| m[(keep_idx[a] | t, keep_idx[b] | t)]).sum();
        }
    }
    Ok(out)
}
