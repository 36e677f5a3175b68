//! Dense row-major matrices.
//!
//! Products skip exact zeros on the left operand, so block-diagonal
//! truncations (the common case here) cost roughly `nnz * n` instead of `n^3`.

use std::fmt;
use std::ops::{Index, IndexMut};

use super::LinalgError;

/// A dense real matrix with no structural invariant beyond its shape.
#[derive(Clone, PartialEq)]
pub struct GeneralMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl GeneralMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &GeneralMatrix) -> Result<GeneralMatrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                actual: rhs.rows,
            });
        }
        let mut out = GeneralMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn add(&self, rhs: &GeneralMatrix) -> Result<GeneralMatrix, LinalgError> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &GeneralMatrix) -> Result<GeneralMatrix, LinalgError> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> GeneralMatrix {
        GeneralMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    fn zip_with(
        &self,
        rhs: &GeneralMatrix,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GeneralMatrix, LinalgError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(LinalgError::ShapeMismatch {
                left: (self.rows, self.cols),
                right: (rhs.rows, rhs.cols),
            });
        }
        Ok(GeneralMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖self - I‖_F`, for square matrices.
    pub fn distance_from_identity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self[(i, j)] - if i == j { 1.0 } else { 0.0 };
                acc += d * d;
            }
        }
        acc.sqrt()
    }

    /// Largest absolute difference between `self` and its transpose.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Places `block` with its top-left corner at `(row, col)`.
    pub fn set_block(&mut self, row: usize, col: usize, block: &GeneralMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(row + i, col + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> GeneralMatrix {
        let mut out = GeneralMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(row + i, col + j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for GeneralMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for GeneralMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for GeneralMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GeneralMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// A dense real symmetric matrix. Entries `(i, j)` and `(j, i)` are always
/// bitwise equal.
#[derive(Clone, PartialEq)]
pub struct SymmetricMatrix {
    inner: GeneralMatrix,
}

impl SymmetricMatrix {
    /// Symmetrizes `m` as `(m + mᵀ)/2`.
    pub fn from_general(m: &GeneralMatrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() == 0 {
            return Err(LinalgError::Empty);
        }
        let n = m.rows();
        let mut inner = m.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                inner[(i, j)] = v;
                inner[(j, i)] = v;
            }
        }
        Ok(Self { inner })
    }

    /// Accepts `m` only if it is already exactly symmetric.
    pub fn try_from_exact(m: GeneralMatrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() == 0 {
            return Err(LinalgError::Empty);
        }
        let n = m.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { inner: m })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        Self::from_general(&GeneralMatrix::from_rows(rows)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        if diag.is_empty() {
            return Err(LinalgError::Empty);
        }
        Ok(Self {
            inner: GeneralMatrix::from_diagonal(diag),
        })
    }

    pub fn identity(n: usize) -> Result<Self, LinalgError> {
        Self::from_diagonal(&vec![1.0; n])
    }

    /// Block-diagonal assembly of symmetric blocks.
    pub fn block_diagonal(blocks: &[SymmetricMatrix]) -> Result<Self, LinalgError> {
        let n: usize = blocks.iter().map(SymmetricMatrix::dim).sum();
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        let mut m = GeneralMatrix::zeros(n, n);
        let mut offset = 0;
        for b in blocks {
            m.set_block(offset, offset, b.as_general());
            offset += b.dim();
        }
        Ok(Self { inner: m })
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn as_general(&self) -> &GeneralMatrix {
        &self.inner
    }

    pub fn into_general(self) -> GeneralMatrix {
        self.inner
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.inner[(i, i)]).collect()
    }

    /// Leading principal `n x n` submatrix.
    pub fn leading(&self, n: usize) -> Result<Self, LinalgError> {
        if n == 0 || n > self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                actual: n,
            });
        }
        Ok(Self {
            inner: self.inner.block(0, 0, n, n),
        })
    }

    /// `⟨x, S y⟩`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64, LinalgError> {
        let sy = self.inner.matvec(y)?;
        if x.len() != sy.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: sy.len(),
                actual: x.len(),
            });
        }
        Ok(dot(x, &sy))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.inner.matvec(x)
    }

    pub fn matmul(&self, rhs: &GeneralMatrix) -> Result<GeneralMatrix, LinalgError> {
        self.inner.matmul(rhs)
    }

    /// `P S P` for symmetric `P`, symmetrized. Returns the result together
    /// with the asymmetry of the raw triple product.
    pub fn congruence(&self, p: &SymmetricMatrix) -> Result<(SymmetricMatrix, f64), LinalgError> {
        let raw = p.inner.matmul(&self.inner)?.matmul(&p.inner)?;
        let asym = raw.asymmetry();
        Ok((SymmetricMatrix::from_general(&raw)?, asym))
    }

    pub fn sub(&self, rhs: &SymmetricMatrix) -> Result<SymmetricMatrix, LinalgError> {
        Ok(Self {
            inner: self.inner.sub(&rhs.inner)?,
        })
    }

    pub fn add(&self, rhs: &SymmetricMatrix) -> Result<SymmetricMatrix, LinalgError> {
        Ok(Self {
            inner: self.inner.add(&rhs.inner)?,
        })
    }

    pub fn scale(&self, factor: f64) -> SymmetricMatrix {
        Self {
            inner: self.inner.scale(factor),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }
}

impl Index<(usize, usize)> for SymmetricMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.inner[idx]
    }
}

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymmetricMatrix {}x{} [", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            writeln!(f, "  {:?}", self.inner.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}
