//! Coded matrix computation with slack-squeeze work assignment.
//!
//! The crate covers MDS and polynomial coding of matrices, the S²C²
//! scheduler that sizes each worker's share of coded rows from predicted
//! speeds, speed predictors, a deterministic virtual-time cluster
//! simulator and a few iterative applications that run on top of it.

pub mod apps;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod mds;
pub mod poly;
pub mod predictor;
pub mod scheduler;
pub mod sim;

pub use matrix::{DenseMatrix, DenseVector};
