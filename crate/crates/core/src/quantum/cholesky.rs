//! Cholesky parameterization of positive semidefinite matrices.
//!
//! Parameter layout for a `dim × dim` lower-triangular `L`: the first `dim`
//! entries are the real diagonal, followed by `(re, im)` pairs for the
//! strictly lower entries in row-major order. Total `dim²` reals.

use super::matrix::{c, ComplexMatrix};
use crate::error::{QptError, Result};

pub fn param_count(dim: usize) -> usize {
    dim * dim
}

pub fn lower_from_params(params: &[f64], dim: usize) -> Result<ComplexMatrix> {
    if params.len() != param_count(dim) {
        return Err(QptError::Shape(format!(
            "expected {} Cholesky parameters for dim {dim}, got {}",
            param_count(dim),
            params.len()
        )));
    }
    let mut l = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        l[(k, k)] = c(params[k], 0.0);
    }
    let mut idx = dim;
    for j in 1..dim {
        for k in 0..j {
            l[(j, k)] = c(params[idx], params[idx + 1]);
            idx += 2;
        }
    }
    Ok(l)
}

/// Inverse of [`lower_from_params`]; entries above the diagonal and the
/// imaginary part of the diagonal are ignored.
pub fn params_from_lower(l: &ComplexMatrix) -> Vec<f64> {
    let dim = l.nrows();
    let mut p = Vec::with_capacity(param_count(dim));
    for k in 0..dim {
        p.push(l[(k, k)].re);
    }
    for j in 1..dim {
        for k in 0..j {
            p.push(l[(j, k)].re);
            p.push(l[(j, k)].im);
        }
    }
    p
}

/// `L L† + eps·I`.
pub fn cholesky_build(params: &[f64], dim: usize, eps: f64) -> Result<ComplexMatrix> {
    let l = lower_from_params(params, dim)?;
    Ok(&l * l.adjoint() + ComplexMatrix::identity(dim, dim) * c(eps, 0.0))
}
