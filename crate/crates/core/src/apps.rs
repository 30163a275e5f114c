//! Iterative applications written against a matrix-vector engine.
//!
//! Each app lists the matrices it multiplies by, and its step function asks
//! an engine for those products. The engine may be the uncoded oracle or a
//! simulated coded cluster; the arithmetic around the products is shared.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{matvec_full, DenseMatrix, DenseVector, MatrixError};
use crate::poly::direct_hessian;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AppError {
    #[error("dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Source of the products an app needs. Matrix ids index `App::matrices`.
pub trait ComputeEngine {
    type Error: From<AppError>;

    fn matvec(&mut self, id: usize, x: &DenseVector) -> Result<DenseVector, Self::Error>;

    /// `A^T diag(x) A` for the dataset matrix.
    fn hessian(&mut self, x: &DenseVector) -> Result<DenseMatrix, Self::Error>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub a: DenseMatrix,
    /// Labels `+1`/`-1`, one per row (classification apps only).
    #[serde(default)]
    pub y: Option<Vec<f64>>,
    /// Starting vector for the apps that need one.
    #[serde(default)]
    pub x0: Option<DenseVector>,
}

fn default_eta() -> f64 {
    0.5
}
fn default_svm_eta() -> f64 {
    0.1
}
fn default_lambda() -> f64 {
    0.01
}
fn default_alpha() -> f64 {
    0.85
}
fn default_hops() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum App {
    /// Gradient descent on the logistic loss.
    Lr {
        #[serde(default = "default_eta")]
        eta: f64,
    },
    /// Subgradient descent on the regularized hinge loss.
    Svm {
        #[serde(default = "default_svm_eta")]
        eta: f64,
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    /// Power iteration with damping and uniform teleport.
    #[serde(rename = "pagerank")]
    PageRank {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// `hops` applications of the graph Laplacian per iteration.
    GraphFilter {
        #[serde(default = "default_hops")]
        hops: usize,
    },
    /// `A^T diag(x) A` every iteration.
    Hessian,
}

impl App {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Lr { .. } => "lr",
            Self::Svm { .. } => "svm",
            Self::PageRank { .. } => "pagerank",
            Self::GraphFilter { .. } => "graph_filter",
            Self::Hessian => "hessian",
        }
    }

    /// On failure, the offending field and what is wrong with it.
    pub fn validate(&self) -> Result<(), (&'static str, &'static str)> {
        match *self {
            Self::Lr { eta } | Self::Svm { eta, .. } if !(eta >= 0.0) => Err(("eta", "must be non-negative")),
            Self::Svm { lambda, .. } if !(lambda >= 0.0) => Err(("lambda", "must be non-negative")),
            Self::PageRank { alpha } if !(0.0..=1.0).contains(&alpha) => Err(("alpha", "must be in [0, 1]")),
            Self::GraphFilter { hops: 0 } => Err(("hops", "must be positive")),
            _ => Ok(()),
        }
    }

    /// Matrices multiplied by vectors, indexed by engine matrix id.
    pub fn matrices(&self, data: &Dataset) -> Vec<DenseMatrix> {
        match self {
            Self::Lr { .. } | Self::Svm { .. } => vec![data.a.clone(), data.a.transpose()],
            Self::PageRank { .. } | Self::GraphFilter { .. } => vec![data.a.clone()],
            Self::Hessian => Vec::new(),
        }
    }

    pub fn check(&self, data: &Dataset) -> Result<(), AppError> {
        let a = &data.a;
        match self {
            Self::Lr { .. } | Self::Svm { .. } => match &data.y {
                Some(y) if y.len() == a.rows() => Ok(()),
                Some(y) => Err(AppError::Dataset(format!("{} labels for {} rows", y.len(), a.rows()))),
                None => Err(AppError::Dataset("labels are required".into())),
            },
            Self::PageRank { .. } | Self::GraphFilter { .. } if a.rows() != a.cols() => {
                Err(AppError::Dataset(format!("matrix must be square, got {}x{}", a.rows(), a.cols())))
            }
            Self::GraphFilter { .. } => match &data.x0 {
                Some(x) if x.len() != a.cols() => Err(AppError::Dataset("x0 has the wrong length".into())),
                _ => Ok(()),
            },
            Self::Hessian => match &data.x0 {
                Some(x) if x.len() != a.rows() => Err(AppError::Dataset("x0 has the wrong length".into())),
                _ => Ok(()),
            },
            Self::PageRank { .. } => Ok(()),
        }
    }

    pub fn init_state(&self, data: &Dataset) -> AppState {
        let x = match self {
            Self::Lr { .. } | Self::Svm { .. } => DenseVector::zeros(data.a.cols()),
            Self::PageRank { .. } => DenseVector::filled(data.a.rows(), 1.0 / data.a.rows() as f64),
            Self::GraphFilter { .. } => data.x0.clone().unwrap_or_else(|| DenseVector::filled(data.a.cols(), 1.0)),
            Self::Hessian => data.x0.clone().unwrap_or_else(|| DenseVector::filled(data.a.rows(), 1.0)),
        };
        AppState { x, iter: 0, hessian: None }
    }

    pub fn step<E: ComputeEngine>(&self, state: &AppState, data: &Dataset, engine: &mut E) -> Result<AppState, E::Error> {
        let mut next = match *self {
            Self::Lr { eta } => AppState {
                x: lr_step(&state.x, labels(data)?, eta, engine, 0, 1)?,
                ..state.clone()
            },
            Self::Svm { eta, lambda } => AppState {
                x: svm_step(&state.x, labels(data)?, eta, lambda, engine, 0, 1)?,
                ..state.clone()
            },
            Self::PageRank { alpha } => AppState {
                x: pagerank_step(&state.x, alpha, engine, 0)?,
                ..state.clone()
            },
            Self::GraphFilter { hops } => AppState {
                x: graph_filter(&state.x, hops, engine, 0)?,
                ..state.clone()
            },
            Self::Hessian => AppState {
                hessian: Some(engine.hessian(&state.x)?),
                ..state.clone()
            },
        };
        next.iter = state.iter + 1;
        Ok(next)
    }
}

fn labels(data: &Dataset) -> Result<&[f64], AppError> {
    data.y.as_deref().ok_or_else(|| AppError::Dataset("labels are required".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppState {
    /// Weights, rank vector, signal or Hessian weights depending on the app.
    pub x: DenseVector,
    pub iter: usize,
    #[serde(default)]
    pub hessian: Option<DenseMatrix>,
}

impl AppState {
    /// Largest relative difference to `other` over the vector and Hessian.
    pub fn relative_diff(&self, other: &Self) -> f64 {
        let mut d = self.x.relative_error(&other.x);
        if let (Some(a), Some(b)) = (&self.hessian, &other.hessian) {
            let scale = b.frobenius_norm().max(f64::MIN_POSITIVE);
            d = d.max(a.max_abs_diff(b) / scale);
        }
        d
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `w - eta * (1/D) A^T (sigmoid(A w) - y01)` with labels mapped to {0, 1}.
pub fn lr_step<E: ComputeEngine>(
    w: &DenseVector,
    y: &[f64],
    eta: f64,
    engine: &mut E,
    a_id: usize,
    at_id: usize,
) -> Result<DenseVector, E::Error> {
    let z = engine.matvec(a_id, w)?;
    let r: Vec<f64> = z
        .as_slice()
        .iter()
        .zip(y)
        .map(|(&z, &y)| sigmoid(z) - (y + 1.0) / 2.0)
        .collect();
    let g = engine.matvec(at_id, &DenseVector::new(r))?;
    Ok(w.axpy(-eta / y.len() as f64, &g))
}

/// `w - eta * (lambda w - (1/D) A^T (y * [y * (A w) < 1]))`.
pub fn svm_step<E: ComputeEngine>(
    w: &DenseVector,
    y: &[f64],
    eta: f64,
    lambda: f64,
    engine: &mut E,
    a_id: usize,
    at_id: usize,
) -> Result<DenseVector, E::Error> {
    let z = engine.matvec(a_id, w)?;
    let v: Vec<f64> = z
        .as_slice()
        .iter()
        .zip(y)
        .map(|(&z, &y)| if y * z < 1.0 { y } else { 0.0 })
        .collect();
    let h = engine.matvec(at_id, &DenseVector::new(v))?;
    let g = w.scaled(lambda).axpy(-1.0 / y.len() as f64, &h);
    Ok(w.axpy(-eta, &g))
}

/// `alpha P x + (1 - alpha) / N`, rescaled to sum to 1.
pub fn pagerank_step<E: ComputeEngine>(
    x: &DenseVector,
    alpha: f64,
    engine: &mut E,
    p_id: usize,
) -> Result<DenseVector, E::Error> {
    let px = engine.matvec(p_id, x)?;
    let teleport = (1.0 - alpha) / x.len() as f64;
    let next = px.map(|v| alpha * v + teleport);
    let sum = next.sum();
    Ok(if sum > 0.0 { next.scaled(1.0 / sum) } else { next })
}

/// `L^hops x`.
pub fn graph_filter<E: ComputeEngine>(
    x: &DenseVector,
    hops: usize,
    engine: &mut E,
    l_id: usize,
) -> Result<DenseVector, E::Error> {
    let mut out = x.clone();
    for _ in 0..hops {
        out = engine.matvec(l_id, &out)?;
    }
    Ok(out)
}

/// Direct products, used as the reference for every coded run.
#[derive(Debug, Clone)]
pub struct UncodedEngine {
    matrices: Vec<DenseMatrix>,
    a: DenseMatrix,
}

impl UncodedEngine {
    pub fn new(app: &App, data: &Dataset) -> Self {
        Self {
            matrices: app.matrices(data),
            a: data.a.clone(),
        }
    }
}

impl ComputeEngine for UncodedEngine {
    type Error = AppError;

    fn matvec(&mut self, id: usize, x: &DenseVector) -> Result<DenseVector, AppError> {
        let m = self
            .matrices
            .get(id)
            .ok_or_else(|| AppError::Dataset(format!("no matrix with id {id}")))?;
        Ok(matvec_full(m, x)?)
    }

    fn hessian(&mut self, x: &DenseVector) -> Result<DenseMatrix, AppError> {
        direct_hessian(&self.a, x).map_err(|e| AppError::Dataset(e.to_string()))
    }
}

/// Runs `iterations` steps on the uncoded engine.
pub fn run_uncoded(app: &App, data: &Dataset, iterations: usize) -> Result<AppState, AppError> {
    app.check(data)?;
    let mut engine = UncodedEngine::new(app, data);
    let mut state = app.init_state(data);
    for _ in 0..iterations {
        state = app.step(&state, data, &mut engine)?;
    }
    Ok(state)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        z * scale
    })
}

impl Dataset {
    /// Seeded synthetic data shaped for `app`.
    ///
    /// - LR and SVM: Gaussian features scaled by `1/sqrt(cols)` with labels
    ///   `sign(A w* + noise)` for a Gaussian `w*`.
    /// - PageRank: a column-stochastic link matrix over `rows` nodes, each
    ///   with three random out-links.
    /// - Graph filter: the Laplacian of a random undirected graph over `rows`
    ///   nodes with two random edges per node, and a Gaussian signal.
    /// - Hessian: a Gaussian matrix and weights in `[0.1, 1)`.
    pub fn synthetic(app: &App, rows: usize, cols: usize, seed: u64) -> Result<Self, AppError> {
        if rows == 0 || cols == 0 {
            return Err(AppError::Dataset("rows and cols must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(match app {
            App::Lr { .. } | App::Svm { .. } => {
                let a = gaussian_matrix(&mut rng, rows, cols, 1.0 / (cols as f64).sqrt());
                let w_star: Vec<f64> = (0..cols).map(|_| StandardNormal.sample(&mut rng)).collect();
                let y = (0..rows)
                    .map(|i| {
                        let noise: f64 = StandardNormal.sample(&mut rng);
                        let s = crate::matrix::dot(a.row(i), &w_star) + 0.1 * noise;
                        if s >= 0.0 {
                            1.0
                        } else {
                            -1.0
                        }
                    })
                    .collect();
                Self { a, y: Some(y), x0: None }
            }
            App::PageRank { .. } => {
                let n = rows;
                let mut p = DenseMatrix::zeros(n, n);
                for i in 0..n {
                    let mut targets: Vec<usize> = Vec::new();
                    while targets.len() < 3.min(n.saturating_sub(1)) {
                        let j = rng.random_range(0..n);
                        if j != i && !targets.contains(&j) {
                            targets.push(j);
                        }
                    }
                    if targets.is_empty() {
                        targets.push(i);
                    }
                    let share = 1.0 / targets.len() as f64;
                    for j in targets {
                        p.set(j, i, share);
                    }
                }
                Self { a: p, y: None, x0: None }
            }
            App::GraphFilter { .. } => {
                let n = rows;
                let mut adj = DenseMatrix::zeros(n, n);
                for i in 0..n {
                    for _ in 0..2 {
                        let j = rng.random_range(0..n);
                        if j != i {
                            adj.set(i, j, 1.0);
                            adj.set(j, i, 1.0);
                        }
                    }
                }
                let l = DenseMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        adj.row(i).iter().sum()
                    } else {
                        -adj.get(i, j)
                    }
                });
                let x0 = DenseVector::new((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
                Self { a: l, y: None, x0: Some(x0) }
            }
            App::Hessian => {
                let a = gaussian_matrix(&mut rng, rows, cols, 1.0);
                let x = DenseVector::new((0..rows).map(|_| rng.random_range(0.1..1.0)).collect());
                Self { a, y: None, x0: Some(x) }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine_for(m: DenseMatrix) -> UncodedEngine {
        UncodedEngine {
            matrices: vec![m.clone(), m.transpose()],
            a: m,
        }
    }

    #[test]
    fn lr_gradient_at_zero() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, -1.0]]).unwrap();
        let y = [1.0, -1.0];
        let mut e = engine_for(a);
        let w = lr_step(&DenseVector::zeros(2), &y, 1.0, &mut e, 0, 1).unwrap();
        // g = (1/2) A^T (0.5 - y01) = (1/2) A^T (-0.5, 0.5) = (0.5, -0.75)
        assert!((w.as_slice()[0] + 0.5).abs() < 1e-15);
        assert!((w.as_slice()[1] - 0.75).abs() < 1e-15);
        let same = lr_step(&w, &y, 0.0, &mut e, 0, 1).unwrap();
        assert_eq!(same, w);
    }

    #[test]
    fn svm_gradients() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let y = [1.0, -1.0];
        let mut e = engine_for(a);
        // all margins >= 1: g = lambda w
        let w = DenseVector::new(vec![2.0, -2.0]);
        let next = svm_step(&w, &y, 1.0, 0.5, &mut e, 0, 1).unwrap();
        assert_eq!(next, DenseVector::new(vec![1.0, -1.0]));
        // lambda 0, w 0: g = -(1/D) A^T y
        let next = svm_step(&DenseVector::zeros(2), &y, 1.0, 0.0, &mut e, 0, 1).unwrap();
        assert_eq!(next, DenseVector::new(vec![0.5, -0.5]));
    }

    #[test]
    fn pagerank_swap_and_teleport() {
        let p = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let mut e = engine_for(p);
        let x = DenseVector::new(vec![0.3, 0.7]);
        let next = pagerank_step(&x, 1.0, &mut e, 0).unwrap();
        assert!((next.as_slice()[0] - 0.7).abs() < 1e-15);
        assert!((next.as_slice()[1] - 0.3).abs() < 1e-15);
        let flat = pagerank_step(&x, 0.0, &mut e, 0).unwrap();
        assert_eq!(flat, DenseVector::new(vec![0.5, 0.5]));
    }

    #[test]
    fn laplacian_examples() {
        let l = DenseMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let mut e = engine_for(l);
        let out = graph_filter(&DenseVector::new(vec![1.0, 0.0]), 1, &mut e, 0).unwrap();
        assert_eq!(out, DenseVector::new(vec![1.0, -1.0]));
        let zero = graph_filter(&DenseVector::filled(2, 3.0), 1, &mut e, 0).unwrap();
        assert_eq!(zero, DenseVector::zeros(2));
    }

    #[test]
    fn synthetic_shapes() {
        let pr = Dataset::synthetic(&App::PageRank { alpha: 0.85 }, 20, 20, 1).unwrap();
        for j in 0..20 {
            let col: f64 = (0..20).map(|i| pr.a.get(i, j)).sum();
            assert!((col - 1.0).abs() < 1e-12);
        }
        let gf = Dataset::synthetic(&App::GraphFilter { hops: 1 }, 15, 15, 2).unwrap();
        let ones = DenseVector::filled(15, 1.0);
        assert!(matvec_full(&gf.a, &ones).unwrap().norm() < 1e-12);
        let lr = Dataset::synthetic(&App::Lr { eta: 0.5 }, 30, 4, 3).unwrap();
        assert!(lr.y.unwrap().iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn config_validation() {
        assert!(App::PageRank { alpha: 1.5 }.validate().is_err());
        assert!(App::GraphFilter { hops: 0 }.validate().is_err());
        assert!(App::Lr { eta: 0.1 }.validate().is_ok());
    }
}
