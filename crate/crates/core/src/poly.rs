//! Polynomial codes for bilinear products.
//!
//! `A` is split into `a` row blocks and `B` into `b` column blocks. Worker
//! `i` with evaluation point `p` stores `A~ = sum_j A_j p^j` and
//! `B~ = sum_l B_l p^(a*l)`, so its product `A~ B~` is the evaluation at `p`
//! of a matrix polynomial whose coefficient `j + a*l` is `A_j B_l`. Any
//! `a*b` evaluations of one row interpolate that row of every block product.
//!
//! The Hessian `A^T diag(x) A` uses the same layout with `b = a`: the left
//! operand is `A^T` split by rows (column blocks of `A`, transposed) and the
//! right operand is `A` split by columns.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::linalg::Lu;
use crate::matrix::{DenseMatrix, DenseVector};
use crate::mds::{check_distinct, chebyshev_points, CodecError};

/// Recovery thresholds above this use Chebyshev points by default.
pub const INTEGER_POINTS_MAX_THRESHOLD: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyScheme {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub points: Vec<f64>,
}

impl PolyScheme {
    /// Worker indices `0..n` as points when `a*b <= 6`, Chebyshev nodes
    /// otherwise.
    pub fn new(n: usize, a: usize, b: usize) -> Result<Self, CodecError> {
        if a * b <= INTEGER_POINTS_MAX_THRESHOLD {
            Self::integer(n, a, b)
        } else {
            Self::with_points(n, a, b, chebyshev_points(n))
        }
    }

    pub fn integer(n: usize, a: usize, b: usize) -> Result<Self, CodecError> {
        Self::with_points(n, a, b, (0..n).map(|i| i as f64).collect())
    }

    pub fn chebyshev(n: usize, a: usize, b: usize) -> Result<Self, CodecError> {
        Self::with_points(n, a, b, chebyshev_points(n))
    }

    pub fn with_points(n: usize, a: usize, b: usize, points: Vec<f64>) -> Result<Self, CodecError> {
        if a == 0 || b == 0 {
            return Err(CodecError::BadShape(format!("a and b must be positive, got a={a}, b={b}")));
        }
        if n < a * b {
            return Err(CodecError::BadShape(format!(
                "too few workers: n={n} < a*b={}",
                a * b
            )));
        }
        if points.len() != n {
            return Err(CodecError::BadShape(format!(
                "expected {n} points, got {}",
                points.len()
            )));
        }
        check_distinct(&points)?;
        Ok(Self { n, a, b, points })
    }

    /// Minimum number of distinct responses per row.
    pub fn threshold(&self) -> usize {
        self.a * self.b
    }

    fn vandermonde(&self, workers: &[usize]) -> DenseMatrix {
        let m = self.threshold();
        DenseMatrix::from_fn(workers.len(), m, |r, e| self.points[workers[r]].powi(e as i32))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyEncodedPair {
    pub worker_id: usize,
    pub left_tilde: DenseMatrix,
    pub right_tilde: DenseMatrix,
}

/// One row of a worker's product.
#[derive(Debug, Clone, PartialEq)]
pub struct RowEvaluation {
    pub worker_id: usize,
    pub row: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComputeMode {
    /// Rows of `A~ B~`.
    Product,
    /// Rows of `A~ diag(x) B~`, i.e. `left[rows] * (diag(x) * right)`.
    Hessian(DenseVector),
}

/// Splits `m` into `parts` equal row blocks.
pub fn split_rows(m: &DenseMatrix, parts: usize) -> Result<Vec<DenseMatrix>, CodecError> {
    if parts == 0 || m.rows() % parts != 0 {
        return Err(CodecError::BadShape(format!(
            "{} rows do not split into {parts} blocks",
            m.rows()
        )));
    }
    let r = m.rows() / parts;
    (0..parts)
        .map(|j| m.slice_rows(j * r..(j + 1) * r).map_err(CodecError::from))
        .collect()
}

/// Splits `m` into `parts` equal column blocks.
pub fn split_cols(m: &DenseMatrix, parts: usize) -> Result<Vec<DenseMatrix>, CodecError> {
    if parts == 0 || m.cols() % parts != 0 {
        return Err(CodecError::BadShape(format!(
            "{} columns do not split into {parts} blocks",
            m.cols()
        )));
    }
    let c = m.cols() / parts;
    (0..parts)
        .map(|l| m.slice_cols(l * c..(l + 1) * c).map_err(CodecError::from))
        .collect()
}

fn evaluate(blocks: &[DenseMatrix], point: f64, stride: usize) -> Result<DenseMatrix, CodecError> {
    let mut out = DenseMatrix::zeros(blocks[0].rows(), blocks[0].cols());
    for (j, block) in blocks.iter().enumerate() {
        out.add_scaled(point.powi((j * stride) as i32), block)?;
    }
    Ok(out)
}

pub fn poly_encode(
    a_blocks: &[DenseMatrix],
    b_blocks: &[DenseMatrix],
    scheme: &PolyScheme,
) -> Result<Vec<PolyEncodedPair>, CodecError> {
    if a_blocks.len() != scheme.a || b_blocks.len() != scheme.b {
        return Err(CodecError::BadShape(format!(
            "scheme wants {}x{} blocks, got {}x{}",
            scheme.a,
            scheme.b,
            a_blocks.len(),
            b_blocks.len()
        )));
    }
    let (ar, ac) = (a_blocks[0].rows(), a_blocks[0].cols());
    let (br, bc) = (b_blocks[0].rows(), b_blocks[0].cols());
    if a_blocks.iter().any(|m| m.rows() != ar || m.cols() != ac)
        || b_blocks.iter().any(|m| m.rows() != br || m.cols() != bc)
    {
        return Err(CodecError::BadShape("blocks differ in shape".into()));
    }
    if ac != br {
        return Err(CodecError::BadShape(format!(
            "left blocks have {ac} columns but right blocks have {br} rows"
        )));
    }
    scheme
        .points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            Ok(PolyEncodedPair {
                worker_id: i,
                left_tilde: evaluate(a_blocks, p, 1)?,
                right_tilde: evaluate(b_blocks, p, scheme.a)?,
            })
        })
        .collect()
}

/// Encodes the operands of `A^T diag(x) A` for `scheme` (which must have
/// `b == a`). `A` must have a column count divisible by `a`.
pub fn encode_hessian(a: &DenseMatrix, scheme: &PolyScheme) -> Result<Vec<PolyEncodedPair>, CodecError> {
    if scheme.a != scheme.b {
        return Err(CodecError::BadShape(format!(
            "Hessian layout needs a == b, got a={}, b={}",
            scheme.a, scheme.b
        )));
    }
    let right = split_cols(a, scheme.a)?;
    let left: Vec<DenseMatrix> = right.iter().map(DenseMatrix::transpose).collect();
    poly_encode(&left, &right, scheme)
}

pub fn poly_worker_compute(
    pair: &PolyEncodedPair,
    rows: Range<usize>,
    mode: &ComputeMode,
) -> Result<Vec<RowEvaluation>, CodecError> {
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let left = pair.left_tilde.slice_rows(rows.clone())?;
    let product = match mode {
        ComputeMode::Product => left.matmul(&pair.right_tilde)?,
        ComputeMode::Hessian(x) => {
            let scaled = pair.right_tilde.scale_rows(x.as_slice())?;
            left.matmul(&scaled)?
        }
    };
    Ok(rows
        .enumerate()
        .map(|(r, row)| RowEvaluation {
            worker_id: pair.worker_id,
            row,
            values: product.row(r).to_vec(),
        })
        .collect())
}

/// Factored interpolation systems keyed by the ordered worker set.
#[derive(Debug, Default)]
pub struct InterpolationCache {
    factors: HashMap<Vec<usize>, Lu>,
}

impl InterpolationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Interpolates the `a*b` coefficient rows of one product row from the
/// first `a*b` distinct-worker evaluations.
pub fn decode_row(
    scheme: &PolyScheme,
    evals: &[&RowEvaluation],
    cache: &mut InterpolationCache,
) -> Result<Vec<Vec<f64>>, CodecError> {
    let m = scheme.threshold();
    let mut chosen: Vec<&RowEvaluation> = Vec::with_capacity(m);
    for e in evals {
        if chosen.len() == m {
            break;
        }
        if !chosen.iter().any(|c| c.worker_id == e.worker_id) {
            chosen.push(e);
        }
    }
    if chosen.len() < m {
        return Err(CodecError::InsufficientResponses {
            needed: m,
            got: chosen.len(),
        });
    }
    let cols = chosen[0].values.len();
    if chosen.iter().any(|c| c.values.len() != cols) {
        return Err(CodecError::BadShape("evaluations differ in length".into()));
    }
    let workers: Vec<usize> = chosen.iter().map(|c| c.worker_id).collect();
    if !cache.factors.contains_key(&workers) {
        let lu = Lu::factor(&scheme.vandermonde(&workers))
            .ok_or_else(|| CodecError::SingularSubmatrix(workers.clone()))?;
        cache.factors.insert(workers.clone(), lu);
    }
    let lu = &cache.factors[&workers];
    let mut coeffs = vec![vec![0.0; cols]; m];
    let mut rhs = vec![0.0; m];
    for col in 0..cols {
        for (slot, c) in rhs.iter_mut().zip(&chosen) {
            *slot = c.values[col];
        }
        lu.solve_in_place(&mut rhs);
        for (coef, &v) in coeffs.iter_mut().zip(&rhs) {
            coef[col] = v;
        }
    }
    Ok(coeffs)
}

/// Groups evaluations by row (keeping arrival order) and decodes each row.
/// The result maps row index to its `a*b` coefficient rows; coefficient
/// `j + a*l` is the row of `A_j B_l`.
pub fn poly_decode_rows(
    scheme: &PolyScheme,
    evals: &[RowEvaluation],
) -> Result<BTreeMap<usize, Vec<Vec<f64>>>, CodecError> {
    let mut by_row: BTreeMap<usize, Vec<&RowEvaluation>> = BTreeMap::new();
    for e in evals {
        by_row.entry(e.row).or_default().push(e);
    }
    let mut cache = InterpolationCache::new();
    by_row
        .into_iter()
        .map(|(row, list)| Ok((row, decode_row(scheme, &list, &mut cache)?)))
        .collect()
}

/// Rebuilds the block products `A_j B_l` from decoded rows `0..rows`.
pub fn blocks_from_rows(
    decoded: &BTreeMap<usize, Vec<Vec<f64>>>,
    scheme: &PolyScheme,
    rows: usize,
) -> Result<BTreeMap<(usize, usize), DenseMatrix>, CodecError> {
    let cols = decoded
        .values()
        .next()
        .and_then(|c| c.first())
        .map_or(0, Vec::len);
    let mut out = BTreeMap::new();
    for j in 0..scheme.a {
        for l in 0..scheme.b {
            let e = j + scheme.a * l;
            let mut data = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                let coeffs = decoded.get(&r).ok_or(CodecError::MissingRow(r))?;
                data.extend_from_slice(&coeffs[e]);
            }
            out.insert((j, l), DenseMatrix::new(rows, cols, data)?);
        }
    }
    Ok(out)
}

/// Tiles an `a x b` grid of equally sized blocks.
pub fn assemble_blocks(
    blocks: &BTreeMap<(usize, usize), DenseMatrix>,
    a: usize,
    b: usize,
) -> Result<DenseMatrix, CodecError> {
    let first = blocks.get(&(0, 0)).ok_or(CodecError::MissingBlock(0, 0))?;
    let (br, bc) = (first.rows(), first.cols());
    let mut out = DenseMatrix::zeros(a * br, b * bc);
    for j in 0..a {
        for l in 0..b {
            let block = blocks.get(&(j, l)).ok_or(CodecError::MissingBlock(j, l))?;
            if block.rows() != br || block.cols() != bc {
                return Err(CodecError::BadShape(format!("block ({j}, {l}) has the wrong shape")));
            }
            for r in 0..br {
                out.row_mut(j * br + r)[l * bc..(l + 1) * bc].copy_from_slice(block.row(r));
            }
        }
    }
    Ok(out)
}

/// Tiles the `a x a` Hessian blocks `(A^T)_j diag(x) A_l` into a `d x d` matrix.
pub fn hessian_assemble(
    blocks: &BTreeMap<(usize, usize), DenseMatrix>,
    a: usize,
) -> Result<DenseMatrix, CodecError> {
    assemble_blocks(blocks, a, a)
}

/// `A^T diag(x) A` decoded from the full products of `workers` (the first
/// `a*b` distinct ones are used). `pairs` come from `encode_hessian` of `a`
/// padded to a multiple of `scheme.a` columns.
pub fn hessian_from(
    a: &DenseMatrix,
    scheme: &PolyScheme,
    pairs: &[PolyEncodedPair],
    workers: &[usize],
    x: &DenseVector,
) -> Result<DenseMatrix, CodecError> {
    let rows = pairs.first().map_or(0, |p| p.left_tilde.rows());
    let mode = ComputeMode::Hessian(x.clone());
    let mut evals = Vec::new();
    for &w in workers {
        let pair = pairs
            .get(w)
            .ok_or_else(|| CodecError::BadShape(format!("no worker {w} among {}", pairs.len())))?;
        evals.extend(poly_worker_compute(pair, 0..rows, &mode)?);
    }
    let decoded = poly_decode_rows(scheme, &evals)?;
    let blocks = blocks_from_rows(&decoded, scheme, rows)?;
    let d = a.cols();
    Ok(hessian_assemble(&blocks, scheme.a)?.slice_rows(0..d)?.slice_cols(0..d)?)
}

/// `A^T diag(x) A` computed directly.
pub fn direct_hessian(a: &DenseMatrix, x: &DenseVector) -> Result<DenseMatrix, CodecError> {
    Ok(a.transpose().matmul(&a.scale_rows(x.as_slice())?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> DenseMatrix {
        DenseMatrix::from_rows(&[[v]]).unwrap()
    }

    #[test]
    fn integer_points_encoding() {
        let scheme = PolyScheme::integer(5, 2, 2).unwrap();
        let a = [scalar(1.0), scalar(2.0)];
        let b = [scalar(3.0), scalar(4.0)];
        let pairs = poly_encode(&a, &b, &scheme).unwrap();
        assert_eq!(pairs[0].left_tilde.get(0, 0), 1.0);
        assert_eq!(pairs[0].right_tilde.get(0, 0), 3.0);
        // A0 + 2 A1 and B0 + 4 B1
        assert_eq!(pairs[2].left_tilde.get(0, 0), 5.0);
        assert_eq!(pairs[2].right_tilde.get(0, 0), 19.0);
    }

    #[test]
    fn scalar_product_is_the_quoted_polynomial() {
        let scheme = PolyScheme::integer(5, 2, 2).unwrap();
        let pairs = poly_encode(&[scalar(1.0), scalar(2.0)], &[scalar(3.0), scalar(4.0)], &scheme).unwrap();
        for (i, pair) in pairs.iter().enumerate() {
            let x = i as f64;
            let got = poly_worker_compute(pair, 0..1, &ComputeMode::Product).unwrap();
            assert_eq!(got[0].values[0], 3.0 + 6.0 * x + 4.0 * x * x + 8.0 * x * x * x);
        }
    }

    #[test]
    fn uncoded_when_a_and_b_are_one() {
        let scheme = PolyScheme::integer(3, 1, 1).unwrap();
        assert_eq!(scheme.threshold(), 1);
        let a = DenseMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[3.0], [4.0]]).unwrap();
        for pair in poly_encode(&[a.clone()], &[b.clone()], &scheme).unwrap() {
            assert_eq!(pair.left_tilde, a);
            assert_eq!(pair.right_tilde, b);
        }
        let ev = RowEvaluation { worker_id: 1, row: 0, values: vec![11.0] };
        let decoded = poly_decode_rows(&scheme, &[ev]).unwrap();
        assert_eq!(decoded[&0], vec![vec![11.0]]);
    }

    #[test]
    fn decode_known_cubic() {
        let scheme = PolyScheme::integer(4, 2, 2).unwrap();
        let p = |x: f64| 3.0 + 6.0 * x + 4.0 * x * x + 8.0 * x * x * x;
        let evals: Vec<RowEvaluation> = (0..4)
            .map(|i| RowEvaluation { worker_id: i, row: 0, values: vec![p(i as f64)] })
            .collect();
        assert_eq!(
            evals.iter().map(|e| e.values[0]).collect::<Vec<_>>(),
            vec![3.0, 21.0, 95.0, 273.0]
        );
        let coeffs = &poly_decode_rows(&scheme, &evals).unwrap()[&0];
        for (got, want) in coeffs.iter().zip([3.0, 6.0, 4.0, 8.0]) {
            assert!((got[0] - want).abs() < 1e-10, "{got:?} vs {want}");
        }
    }

    #[test]
    fn duplicate_worker_does_not_count() {
        let scheme = PolyScheme::integer(4, 2, 2).unwrap();
        let mut evals: Vec<RowEvaluation> = (0..3)
            .map(|i| RowEvaluation { worker_id: i, row: 0, values: vec![1.0] })
            .collect();
        evals.push(RowEvaluation { worker_id: 2, row: 0, values: vec![1.0] });
        assert!(matches!(
            poly_decode_rows(&scheme, &evals),
            Err(CodecError::InsufficientResponses { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn scheme_validation() {
        assert!(matches!(PolyScheme::integer(3, 2, 2), Err(CodecError::BadShape(_))));
        assert!(matches!(
            PolyScheme::with_points(4, 2, 2, vec![0.0, 1.0, 1.0, 2.0]),
            Err(CodecError::DuplicatePoints(_))
        ));
        let s = PolyScheme::new(12, 3, 3).unwrap();
        assert!(s.points.iter().all(|p| p.abs() < 1.0));
        let s = PolyScheme::new(5, 2, 2).unwrap();
        assert_eq!(s.points, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn empty_row_range_gives_nothing() {
        let scheme = PolyScheme::integer(4, 2, 2).unwrap();
        let pairs = poly_encode(&[scalar(1.0), scalar(2.0)], &[scalar(3.0), scalar(4.0)], &scheme).unwrap();
        assert!(poly_worker_compute(&pairs[0], 0..0, &ComputeMode::Product).unwrap().is_empty());
    }

    #[test]
    fn hessian_of_two_by_two() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let h = direct_hessian(&a, &DenseVector::new(vec![1.0, 1.0])).unwrap();
        assert_eq!(h, DenseMatrix::from_rows(&[[10.0, 14.0], [14.0, 20.0]]).unwrap());
        let z = direct_hessian(&a, &DenseVector::zeros(2)).unwrap();
        assert_eq!(z, DenseMatrix::zeros(2, 2));
        let blocks = BTreeMap::from([((0, 0), h.clone())]);
        assert_eq!(hessian_assemble(&blocks, 1).unwrap(), h);
    }

    #[test]
    fn hessian_assemble_reports_missing_block() {
        let blocks = BTreeMap::from([((0, 0), DenseMatrix::identity(1))]);
        assert!(matches!(hessian_assemble(&blocks, 2), Err(CodecError::MissingBlock(0, 1))));
    }

    #[test]
    fn hessian_mode_with_unit_weights_matches_product() {
        let a = DenseMatrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64 * 0.25 - 1.0);
        let scheme = PolyScheme::integer(4, 2, 2).unwrap();
        let pairs = encode_hessian(&a, &scheme).unwrap();
        let ones = ComputeMode::Hessian(DenseVector::filled(4, 1.0));
        for pair in &pairs {
            let h = poly_worker_compute(pair, 0..2, &ones).unwrap();
            let p = poly_worker_compute(pair, 0..2, &ComputeMode::Product).unwrap();
            assert_eq!(h, p);
        }
    }
}
