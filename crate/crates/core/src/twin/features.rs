use crate::error::{QptError, Result};
use crate::quantum::channel::{qubits_for_chi_dim, ProcessMatrix};
use crate::quantum::matrix::{c, ComplexMatrix};

/// Row-major real parts followed by row-major imaginary parts.
pub fn chi_to_features(chi: &ProcessMatrix) -> Vec<f64> {
    matrix_features(chi.chi())
}

pub fn matrix_features(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(2 * n * n);
    for a in 0..n {
        for b in 0..n {
            v.push(m[(a, b)].re);
        }
    }
    for a in 0..n {
        for b in 0..n {
            v.push(m[(a, b)].im);
        }
    }
    v
}

pub fn features_to_matrix(v: &[f64]) -> Result<ComplexMatrix> {
    let n = ((v.len() / 2) as f64).sqrt().round() as usize;
    if 2 * n * n != v.len() || n == 0 {
        return Err(QptError::Shape(format!("feature vector of length {} is not 2·n²", v.len())));
    }
    Ok(ComplexMatrix::from_fn(n, n, |a, b| c(v[a * n + b], v[n * n + a * n + b])))
}

/// Inverse of [`chi_to_features`]; no CPTP checks.
pub fn features_to_chi_raw(v: &[f64]) -> Result<ProcessMatrix> {
    let m = features_to_matrix(v)?;
    ProcessMatrix::new(qubits_for_chi_dim(m.nrows())?, m)
}
