//! Dense row-major matrices, row partitioning with zero padding, and the
//! chunk grid used to address groups of rows inside a partition.
//!
//! Storage is row-major: `data[i * cols + j]` holds `A[i, j]`.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    ZeroDimension { rows: usize, cols: usize },
    #[error("data length {got} does not match {rows}x{cols}")]
    InvalidData { rows: usize, cols: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("row range {begin}..{end} outside 0..{rows}")]
    RowRange { begin: usize, end: usize, rows: usize },
    #[error("chunk {chunk} out of range for {chunks} chunks")]
    ChunkOutOfRange { chunk: usize, chunks: usize },
    #[error("invalid partition parameters: k={k}, chunks={chunks}")]
    BadPartition { k: usize, chunks: usize },
}

/// A dense matrix of `f64` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::ZeroDimension { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(MatrixError::InvalidData {
                rows,
                cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// All-zero matrix. Panics on a zero dimension.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "zero-sized matrix");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return Err(MatrixError::DimensionMismatch {
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data).expect("from_fn requires nonzero dimensions")
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    /// Copies rows `range` into a new matrix.
    pub fn slice_rows(&self, range: Range<usize>) -> Result<Self, MatrixError> {
        self.check_range(&range)?;
        Self::new(
            range.len(),
            self.cols,
            self.data[range.start * self.cols..range.end * self.cols].to_vec(),
        )
    }

    /// Copies columns `range` into a new matrix.
    pub fn slice_cols(&self, range: Range<usize>) -> Result<Self, MatrixError> {
        if range.start >= range.end || range.end > self.cols {
            return Err(MatrixError::DimensionMismatch {
                expected: self.cols,
                got: range.end,
            });
        }
        Ok(Self::from_fn(self.rows, range.len(), |i, j| {
            self.get(i, range.start + j)
        }))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (p, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(p)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self += alpha * other`, elementwise.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) -> Result<(), MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::DimensionMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Scales row `i` by `d[i]`, i.e. `diag(d) * self`.
    pub fn scale_rows(&self, d: &[f64]) -> Result<Self, MatrixError> {
        if d.len() != self.rows {
            return Err(MatrixError::DimensionMismatch {
                expected: self.rows,
                got: d.len(),
            });
        }
        let mut out = self.clone();
        for (i, &s) in d.iter().enumerate() {
            out.row_mut(i).iter_mut().for_each(|v| *v *= s);
        }
        Ok(out)
    }

    /// Stacks matrices vertically. All inputs must share a column count.
    pub fn vstack(parts: &[Self]) -> Result<Self, MatrixError> {
        let cols = parts.first().map_or(0, |p| p.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != cols {
                return Err(MatrixError::DimensionMismatch {
                    expected: cols,
                    got: p.cols,
                });
            }
            rows += p.rows;
            data.extend_from_slice(&p.data);
        }
        Self::new(rows, cols, data)
    }

    /// Appends zero rows at the bottom until the matrix has `rows` rows.
    pub fn pad_rows(&self, rows: usize) -> Self {
        let mut data = self.data.clone();
        data.resize(rows.max(self.rows) * self.cols, 0.0);
        Self {
            rows: rows.max(self.rows),
            cols: self.cols,
            data,
        }
    }

    /// Appends zero columns on the right until the matrix has `cols` columns.
    pub fn pad_cols(&self, cols: usize) -> Self {
        let cols = cols.max(self.cols);
        Self::from_fn(self.rows, cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                0.0
            }
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn check_range(&self, range: &Range<usize>) -> Result<(), MatrixError> {
        if range.start > range.end || range.end > self.rows {
            return Err(MatrixError::RowRange {
                begin: range.start,
                end: range.end,
                rows: self.rows,
            });
        }
        Ok(())
    }
}

/// A dense vector of `f64`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(data: Vec<f64>) -> Self {
        Self(data)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn filled(len: usize, v: f64) -> Self {
        Self(vec![v; len])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        )
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    /// Largest absolute difference relative to the norm of `reference`.
    pub fn relative_error(&self, reference: &Self) -> f64 {
        let diff: f64 = self
            .0
            .iter()
            .zip(&reference.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale = reference.norm();
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// How a matrix with `original_rows` rows was padded and split into `k`
/// equal row blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub original_rows: usize,
    pub k: usize,
    pub padded_rows: usize,
    pub rows_per_partition: usize,
}

/// Splits one partition's rows into `chunks` contiguous groups.
///
/// Boundaries sit at `floor(c * rows / chunks)`, so when `chunks` divides
/// `rows_per_partition` every chunk has exactly `rows_per_chunk` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkGrid {
    pub chunks_per_partition: usize,
    pub rows_per_partition: usize,
}

impl ChunkGrid {
    pub fn new(rows_per_partition: usize, chunks_per_partition: usize) -> Self {
        assert!(chunks_per_partition >= 1, "a chunk grid needs at least one chunk");
        Self {
            chunks_per_partition,
            rows_per_partition,
        }
    }

    /// Rows per chunk when the grid is uniform.
    pub fn rows_per_chunk(&self) -> Option<usize> {
        (self.rows_per_partition % self.chunks_per_partition == 0)
            .then(|| self.rows_per_partition / self.chunks_per_partition)
    }

    pub fn chunk_rows(&self, chunk: usize) -> Result<Range<usize>, MatrixError> {
        let c = self.chunks_per_partition;
        if chunk >= c {
            return Err(MatrixError::ChunkOutOfRange { chunk, chunks: c });
        }
        let r = self.rows_per_partition;
        Ok(chunk * r / c..(chunk + 1) * r / c)
    }
}

/// Pads `a` with zero rows to the smallest multiple of `k * chunks` and
/// splits it into `k` row blocks.
pub fn pad_and_partition(
    a: &DenseMatrix,
    k: usize,
    chunks: usize,
) -> Result<(PartitionPlan, ChunkGrid, Vec<DenseMatrix>), MatrixError> {
    if k == 0 || chunks == 0 {
        return Err(MatrixError::BadPartition { k, chunks });
    }
    let unit = k * chunks;
    let padded_rows = a.rows().div_ceil(unit) * unit;
    let rows_per_partition = padded_rows / k;
    let padded = a.pad_rows(padded_rows);
    let blocks = (0..k)
        .map(|j| padded.slice_rows(j * rows_per_partition..(j + 1) * rows_per_partition))
        .collect::<Result<Vec<_>, _>>()?;
    let plan = PartitionPlan {
        original_rows: a.rows(),
        k,
        padded_rows,
        rows_per_partition,
    };
    Ok((plan, ChunkGrid::new(rows_per_partition, chunks), blocks))
}

/// Row range of `chunk` within a partition's local row indexing.
pub fn chunk_rows(grid: &ChunkGrid, chunk: usize) -> Result<Range<usize>, MatrixError> {
    grid.chunk_rows(chunk)
}

/// Row-by-row dot products of `a[rows]` with `x`.
pub fn matvec(a: &DenseMatrix, x: &DenseVector, rows: Range<usize>) -> Result<DenseVector, MatrixError> {
    if x.len() != a.cols() {
        return Err(MatrixError::DimensionMismatch {
            expected: a.cols(),
            got: x.len(),
        });
    }
    a.check_range(&rows)?;
    Ok(DenseVector(
        rows.map(|i| dot(a.row(i), x.as_slice())).collect(),
    ))
}

/// `a * x` over every row.
pub fn matvec_full(a: &DenseMatrix, x: &DenseVector) -> Result<DenseVector, MatrixError> {
    matvec(a, x, 0..a.rows())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |i, j| (i * cols + j) as f64 + 1.0)
    }

    #[test]
    fn partition_exact_divisibility() {
        let a = seq(4, 2);
        let (plan, grid, blocks) = pad_and_partition(&a, 2, 2).unwrap();
        assert_eq!(plan.padded_rows, 4);
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0], a.slice_rows(0..2).unwrap());
        assert_eq!(grid.rows_per_chunk(), Some(1));
    }

    #[test]
    fn partition_pads_to_multiple_of_k_times_chunks() {
        let a = seq(5, 2);
        let (plan, _, blocks) = pad_and_partition(&a, 2, 2).unwrap();
        assert_eq!(plan.padded_rows, 8);
        assert_eq!(plan.rows_per_partition, 4);
        for r in 1..4 {
            assert!(blocks[1].row(r).iter().all(|&v| v == 0.0));
        }
        assert_eq!(blocks[1].row(0), a.row(4));
    }

    #[test]
    fn partition_rows_per_chunk() {
        let a = seq(12, 3);
        let (plan, grid, _) = pad_and_partition(&a, 2, 3).unwrap();
        assert_eq!(plan.padded_rows, 12);
        assert_eq!(grid.rows_per_chunk(), Some(2));
    }

    #[test]
    fn partition_rejects_empty_matrix() {
        assert!(matches!(
            DenseMatrix::new(0, 2, vec![]),
            Err(MatrixError::ZeroDimension { .. })
        ));
    }

    #[test]
    fn chunk_row_ranges() {
        let grid = ChunkGrid::new(9, 3);
        assert_eq!(chunk_rows(&grid, 0).unwrap(), 0..3);
        assert_eq!(chunk_rows(&grid, 2).unwrap(), 6..9);
        assert!(matches!(
            chunk_rows(&grid, 3),
            Err(MatrixError::ChunkOutOfRange { chunk: 3, chunks: 3 })
        ));
    }

    #[test]
    fn uneven_grid_covers_all_rows() {
        let grid = ChunkGrid::new(10, 4);
        assert_eq!(grid.rows_per_chunk(), None);
        let mut next = 0;
        for c in 0..4 {
            let r = grid.chunk_rows(c).unwrap();
            assert_eq!(r.start, next);
            next = r.end;
        }
        assert_eq!(next, 10);
    }

    #[test]
    fn matvec_examples() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let x = DenseVector::new(vec![1.0, 1.0]);
        assert_eq!(matvec(&a, &x, 0..2).unwrap().as_slice(), &[3.0, 7.0]);
        assert_eq!(matvec(&a, &x, 1..2).unwrap().as_slice(), &[7.0]);
        let id = DenseMatrix::identity(3);
        let x = DenseVector::new(vec![5.0, 6.0, 7.0]);
        assert_eq!(matvec_full(&id, &x).unwrap(), x);
    }

    #[test]
    fn matvec_rejects_bad_input() {
        let a = DenseMatrix::identity(2);
        assert!(matches!(
            matvec(&a, &DenseVector::zeros(3), 0..2),
            Err(MatrixError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            matvec(&a, &DenseVector::zeros(2), 0..3),
            Err(MatrixError::RowRange { .. })
        ));
    }
}
