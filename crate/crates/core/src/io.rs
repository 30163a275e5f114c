//! Matrix and label files.
//!
//! Two matrix encodings are supported:
//! - CSV: one matrix row per line, comma-separated reals.
//! - Binary: a 16-byte header of two little-endian `u64` (rows, cols)
//!   followed by `rows * cols` little-endian `f64` in row-major order.
//!
//! Files ending in `.bin` are binary; everything else is read as CSV.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::matrix::{DenseMatrix, MatrixError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("{path}: {source}")]
    Shape {
        path: String,
        #[source]
        source: MatrixError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => Self::Binary,
            _ => Self::Csv,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, IoError> {
    match MatrixFormat::from_path(path) {
        MatrixFormat::Csv => read_matrix_csv(path),
        MatrixFormat::Binary => read_matrix_binary(path),
    }
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<(), IoError> {
    match MatrixFormat::from_path(path) {
        MatrixFormat::Csv => write_matrix_csv(path, m),
        MatrixFormat::Binary => write_matrix_binary(path, m),
    }
}

pub fn read_matrix_csv(path: &Path) -> Result<DenseMatrix, IoError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| IoError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: e.to_string(),
            })?;
        rows.push(row);
    }
    DenseMatrix::from_rows(&rows).map_err(|source| IoError::Shape {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<(), IoError> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn read_matrix_binary(path: &Path) -> Result<DenseMatrix, IoError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_binary(&bytes).map_err(|msg| IoError::Parse {
        path: path.display().to_string(),
        line: 0,
        msg,
    })
}

pub fn write_matrix_binary(path: &Path, m: &DenseMatrix) -> Result<(), IoError> {
    let mut f = io::BufWriter::new(fs::File::create(path).map_err(io_err(path))?);
    f.write_all(&encode_binary(m)).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))
}

pub fn encode_binary(m: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * m.data().len());
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<DenseMatrix, String> {
    if bytes.len() < 16 {
        return Err(format!("binary matrix header truncated ({} bytes)", bytes.len()));
    }
    let rows = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| "binary matrix dimensions overflow".to_string())?;
    if body.len() != expected {
        return Err(format!(
            "binary matrix body has {} bytes, expected {expected} for {rows}x{cols}",
            body.len()
        ));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::new(rows, cols, data).map_err(|e| e.to_string())
}

/// Reads a label file: one `+1`/`-1` per line (commas also accepted).
pub fn read_labels(path: &Path) -> Result<Vec<f64>, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|e: std::num::ParseFloatError| IoError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: e.to_string(),
            })?;
            if v != 1.0 && v != -1.0 {
                return Err(IoError::Parse {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    msg: format!("label must be +1 or -1, got {v}"),
                });
            }
            labels.push(v);
        }
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_layout() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        let bytes = encode_binary(&m);
        assert_eq!(bytes.len(), 16 + 24);
        assert_eq!(&bytes[0..8], &1u64.to_le_bytes());
        assert_eq!(&bytes[8..16], &3u64.to_le_bytes());
        assert_eq!(&bytes[16..24], &1.0f64.to_le_bytes());
        assert_eq!(decode_binary(&bytes).unwrap(), m);
    }

    #[test]
    fn truncated_binary_is_rejected() {
        assert!(decode_binary(&[0u8; 10]).is_err());
        let mut bytes = encode_binary(&DenseMatrix::identity(2));
        bytes.pop();
        assert!(decode_binary(&bytes).is_err());
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = DenseMatrix::from_fn(3, 2, |i, j| (i as f64 + 0.1) * (j as f64 - 0.7));
        for name in ["m.csv", "m.bin"] {
            let p = dir.path().join(name);
            write_matrix(&p, &m).unwrap();
            assert_eq!(read_matrix(&p).unwrap(), m);
        }
    }

    #[test]
    fn ragged_csv_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "1,2\n3\n").unwrap();
        assert!(matches!(read_matrix(&p), Err(IoError::Shape { .. })));
    }

    #[test]
    fn labels_must_be_signs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("y.csv");
        fs::write(&p, "1\n-1\n1\n").unwrap();
        assert_eq!(read_labels(&p).unwrap(), vec![1.0, -1.0, 1.0]);
        fs::write(&p, "1\n0\n").unwrap();
        assert!(read_labels(&p).is_err());
    }
}
