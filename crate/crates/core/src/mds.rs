//! (n, k)-MDS coding of row partitions over the reals.
//!
//! A matrix is split into `k` row blocks; worker `i` stores
//! `sum_j G[i][j] * block_j`. Any `k` workers whose generator rows form an
//! invertible `k x k` system suffice to recover every block's product with
//! a vector, independently for every row position.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Lu;
use crate::matrix::{self, ChunkGrid, DenseMatrix, DenseVector, MatrixError, PartitionPlan};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("evaluation points must be distinct (duplicate {0})")]
    DuplicatePoints(f64),
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("generator submatrix for workers {0:?} is singular")]
    SingularSubmatrix(Vec<usize>),
    #[error("need {needed} distinct responses, got {got}")]
    InsufficientResponses { needed: usize, got: usize },
    #[error("row range {begin}..{end} is not aligned to chunk boundaries")]
    MisalignedRange { begin: usize, end: usize },
    #[error("chunk {0} has not been decoded")]
    MissingChunk(usize),
    #[error("row {0} has not been decoded")]
    MissingRow(usize),
    #[error("block ({0}, {1}) is missing")]
    MissingBlock(usize, usize),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Vandermonde { points: Vec<f64> },
    Custom,
}

/// The `n x k` coding coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    pub n: usize,
    pub k: usize,
    pub coeffs: DenseMatrix,
    pub kind: GeneratorKind,
}

/// `n` Chebyshev nodes of the first kind on `[-1, 1]`, in decreasing order.
pub fn chebyshev_points(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect()
}

pub(crate) fn check_distinct(points: &[f64]) -> Result<(), CodecError> {
    for (i, &p) in points.iter().enumerate() {
        if points[..i].contains(&p) {
            return Err(CodecError::DuplicatePoints(p));
        }
    }
    Ok(())
}

impl GeneratorMatrix {
    /// Vandermonde generator `G[i][j] = points[i]^j`. Defaults to Chebyshev
    /// nodes when `points` is `None`.
    pub fn vandermonde(n: usize, k: usize, points: Option<Vec<f64>>) -> Result<Self, CodecError> {
        if k == 0 || n < k {
            return Err(CodecError::BadShape(format!("need n >= k >= 1, got n={n}, k={k}")));
        }
        let points = points.unwrap_or_else(|| chebyshev_points(n));
        if points.len() != n {
            return Err(CodecError::BadShape(format!(
                "expected {n} evaluation points, got {}",
                points.len()
            )));
        }
        check_distinct(&points)?;
        let coeffs = DenseMatrix::from_fn(n, k, |i, j| points[i].powi(j as i32));
        Ok(Self {
            n,
            k,
            coeffs,
            kind: GeneratorKind::Vandermonde { points },
        })
    }

    /// Arbitrary `n x k` coefficients, one row per worker.
    pub fn custom<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, CodecError> {
        let coeffs = DenseMatrix::from_rows(rows).map_err(|e| CodecError::BadShape(e.to_string()))?;
        let (n, k) = (coeffs.rows(), coeffs.cols());
        if n < k {
            return Err(CodecError::BadShape(format!("need n >= k, got n={n}, k={k}")));
        }
        Ok(Self {
            n,
            k,
            coeffs,
            kind: GeneratorKind::Custom,
        })
    }

    /// Seeded i.i.d. standard normal coefficients. Every `k x k`
    /// submatrix is invertible with probability one and stays well
    /// conditioned for large `k`, where monomial Vandermonde does not.
    pub fn gaussian(n: usize, k: usize, seed: u64) -> Result<Self, CodecError> {
        if k == 0 || n < k {
            return Err(CodecError::BadShape(format!("need n >= k >= 1, got n={n}, k={k}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = DenseMatrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut rng));
        Ok(Self {
            n,
            k,
            coeffs,
            kind: GeneratorKind::Custom,
        })
    }

    pub fn row(&self, worker: usize) -> &[f64] {
        self.coeffs.row(worker)
    }

    /// The `k x k` system formed by the given workers' rows.
    pub fn submatrix(&self, workers: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(workers.len(), self.k, |r, c| self.coeffs.get(workers[r], c))
    }
}

/// Coded data held by one worker.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPartition {
    pub worker_id: usize,
    pub data: DenseMatrix,
    pub generator_row: Vec<f64>,
}

/// Partial product rows returned by a worker for one chunk.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkResponse {
    pub worker_id: usize,
    pub chunk: usize,
    pub values: Vec<f64>,
}

pub fn mds_encode(blocks: &[DenseMatrix], g: &GeneratorMatrix) -> Result<Vec<EncodedPartition>, CodecError> {
    if blocks.len() != g.k {
        return Err(CodecError::BadShape(format!(
            "generator has k={} but {} blocks were given",
            g.k,
            blocks.len()
        )));
    }
    let (rows, cols) = (blocks[0].rows(), blocks[0].cols());
    if blocks.iter().any(|b| b.rows() != rows || b.cols() != cols) {
        return Err(CodecError::BadShape("blocks differ in shape".into()));
    }
    (0..g.n)
        .map(|i| {
            let mut data = DenseMatrix::zeros(rows, cols);
            for (j, block) in blocks.iter().enumerate() {
                let c = g.coeffs.get(i, j);
                if c != 0.0 {
                    data.add_scaled(c, block)?;
                }
            }
            Ok(EncodedPartition {
                worker_id: i,
                data,
                generator_row: g.row(i).to_vec(),
            })
        })
        .collect()
}

/// Multiplies the worker's rows in `ranges` by `x`, one response per chunk.
/// Every range must start and end on a chunk boundary of `grid`.
pub fn worker_matvec(
    part: &EncodedPartition,
    x: &DenseVector,
    grid: &ChunkGrid,
    ranges: &[Range<usize>],
) -> Result<Vec<ChunkResponse>, CodecError> {
    let bounds: Vec<Range<usize>> = (0..grid.chunks_per_partition)
        .map(|c| grid.chunk_rows(c))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for range in ranges {
        let first = bounds.iter().position(|b| b.start == range.start);
        let last = bounds.iter().position(|b| b.end == range.end);
        let (Some(first), Some(last)) = (first, last) else {
            return Err(CodecError::MisalignedRange {
                begin: range.start,
                end: range.end,
            });
        };
        if last < first {
            return Err(CodecError::MisalignedRange {
                begin: range.start,
                end: range.end,
            });
        }
        for chunk in first..=last {
            out.push(chunk_response(part, x, grid, chunk)?);
        }
    }
    Ok(out)
}

/// The response of `part` for a single chunk.
pub fn chunk_response(
    part: &EncodedPartition,
    x: &DenseVector,
    grid: &ChunkGrid,
    chunk: usize,
) -> Result<ChunkResponse, CodecError> {
    let rows = grid.chunk_rows(chunk)?;
    Ok(ChunkResponse {
        worker_id: part.worker_id,
        chunk,
        values: matrix::matvec(&part.data, x, rows)?.into_vec(),
    })
}

/// Cache of factored generator submatrices keyed by the ordered worker set.
#[derive(Debug, Default)]
pub struct DecodeCache {
    factors: HashMap<Vec<usize>, Lu>,
    hits: usize,
}

impl DecodeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    pub fn clear(&mut self) {
        self.factors.clear();
    }

    fn factor(&mut self, g: &GeneratorMatrix, workers: &[usize]) -> Result<&Lu, CodecError> {
        if self.factors.contains_key(workers) {
            self.hits += 1;
        } else {
            let lu = Lu::factor(&g.submatrix(workers))
                .ok_or_else(|| CodecError::SingularSubmatrix(workers.to_vec()))?;
            self.factors.insert(workers.to_vec(), lu);
        }
        Ok(&self.factors[workers])
    }
}

/// Recovers `block_j[chunk rows] * x` for every `j` from the first `k`
/// distinct-worker responses (arrival order). Returns `k` vectors.
pub fn mds_decode_chunk(
    g: &GeneratorMatrix,
    responses: &[ChunkResponse],
    cache: &mut DecodeCache,
) -> Result<Vec<Vec<f64>>, CodecError> {
    let mut chosen: Vec<&ChunkResponse> = Vec::with_capacity(g.k);
    for r in responses {
        if chosen.len() == g.k {
            break;
        }
        if !chosen.iter().any(|c| c.worker_id == r.worker_id) {
            chosen.push(r);
        }
    }
    if chosen.len() < g.k {
        return Err(CodecError::InsufficientResponses {
            needed: g.k,
            got: chosen.len(),
        });
    }
    let len = chosen[0].values.len();
    if chosen.iter().any(|c| c.values.len() != len || c.chunk != chosen[0].chunk) {
        return Err(CodecError::BadShape("responses disagree on chunk or length".into()));
    }
    let workers: Vec<usize> = chosen.iter().map(|c| c.worker_id).collect();
    let lu = cache.factor(g, &workers)?;
    let mut blocks = vec![vec![0.0; len]; g.k];
    let mut rhs = vec![0.0; g.k];
    for row in 0..len {
        for (slot, c) in rhs.iter_mut().zip(&chosen) {
            *slot = c.values[row];
        }
        lu.solve_in_place(&mut rhs);
        for (block, &v) in blocks.iter_mut().zip(&rhs) {
            block[row] = v;
        }
    }
    Ok(blocks)
}

/// Interleaves decoded chunks back into `A * x`, dropping padding rows.
pub fn assemble(
    decoded: &BTreeMap<usize, Vec<Vec<f64>>>,
    plan: &PartitionPlan,
    grid: &ChunkGrid,
) -> Result<DenseVector, CodecError> {
    let mut out = vec![0.0; plan.padded_rows];
    for chunk in 0..grid.chunks_per_partition {
        let blocks = decoded.get(&chunk).ok_or(CodecError::MissingChunk(chunk))?;
        let rows = grid.chunk_rows(chunk)?;
        if blocks.len() != plan.k || blocks.iter().any(|b| b.len() != rows.len()) {
            return Err(CodecError::BadShape(format!("chunk {chunk} has the wrong shape")));
        }
        for (j, block) in blocks.iter().enumerate() {
            let base = j * plan.rows_per_partition;
            out[base + rows.start..base + rows.end].copy_from_slice(block);
        }
    }
    out.truncate(plan.original_rows);
    Ok(DenseVector::new(out))
}

/// A matrix encoded for `n` workers together with the layout needed to
/// decode products with it.
#[derive(Debug, Clone)]
pub struct CodedMatrix {
    pub plan: PartitionPlan,
    pub grid: ChunkGrid,
    pub generator: GeneratorMatrix,
    pub partitions: Vec<EncodedPartition>,
    original: DenseMatrix,
}

impl CodedMatrix {
    pub fn encode(a: &DenseMatrix, generator: GeneratorMatrix, chunks: usize) -> Result<Self, CodecError> {
        let (plan, grid, blocks) = matrix::pad_and_partition(a, generator.k, chunks)?;
        let partitions = mds_encode(&blocks, &generator)?;
        Ok(Self {
            plan,
            grid,
            generator,
            partitions,
            original: a.clone(),
        })
    }

    pub fn n(&self) -> usize {
        self.generator.n
    }

    pub fn k(&self) -> usize {
        self.generator.k
    }

    pub fn rows_per_partition(&self) -> usize {
        self.plan.rows_per_partition
    }

    pub fn cols(&self) -> usize {
        self.original.cols()
    }

    /// The unencoded matrix, kept for verification.
    pub fn original(&self) -> &DenseMatrix {
        &self.original
    }

    /// Storage across all workers, in matrix entries.
    pub fn stored_entries(&self) -> usize {
        self.partitions.iter().map(|p| p.data.data().len()).sum()
    }

    /// `A * x` decoded from the whole partitions of the first `k` distinct
    /// entries of `workers`.
    pub fn product_from(
        &self,
        workers: &[usize],
        x: &DenseVector,
        cache: &mut DecodeCache,
    ) -> Result<DenseVector, CodecError> {
        if let Some(&w) = workers.iter().find(|&&w| w >= self.n()) {
            return Err(CodecError::BadShape(format!("no worker {w} among {}", self.n())));
        }
        let mut decoded = BTreeMap::new();
        for chunk in 0..self.grid.chunks_per_partition {
            let responses = workers
                .iter()
                .map(|&w| chunk_response(&self.partitions[w], x, &self.grid, chunk))
                .collect::<Result<Vec<_>, _>>()?;
            decoded.insert(chunk, mds_decode_chunk(&self.generator, &responses, cache)?);
        }
        assemble(&decoded, &self.plan, &self.grid)
    }
}
