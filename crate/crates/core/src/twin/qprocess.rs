//! The CPTP-enforcing output layer.
//!
//! Forward: Cholesky parameters `θ ↦ L`, `B = L L† + εI`, `C = B / Tr B`,
//! `D = P_TP(C)`, and finally `E = (1 − t) D + t I/n` with the smallest
//! `t ≥ 0` making `E` positive semidefinite. Every step is differentiable
//! away from eigenvalue crossings of `D`.

use crate::error::Result;
use crate::quantum::channel::cached_basis;
use crate::quantum::cholesky::{lower_from_params, param_count};
use crate::quantum::cptp::{project_tp, project_tp_linear};
use crate::quantum::matrix::{c, hermitian_eigen, hermitize, real_inner, trace, ComplexMatrix, ComplexVector};

#[derive(Debug, Clone)]
pub struct QProcessCache {
    n_qubits: usize,
    l: ComplexMatrix,
    b: ComplexMatrix,
    s: f64,
    d: ComplexMatrix,
    t: f64,
    lambda: f64,
    v: ComplexVector,
}

pub fn qprocess_param_count(n_qubits: usize) -> usize {
    param_count(4usize.pow(n_qubits as u32))
}

pub fn qprocess_forward(params: &[f64], n_qubits: usize, eps: f64) -> Result<(ComplexMatrix, QProcessCache)> {
    let basis = cached_basis(n_qubits)?;
    let n = basis.len();
    let l = lower_from_params(params, n)?;
    let b = &l * l.adjoint() + ComplexMatrix::identity(n, n) * c(eps, 0.0);
    let s = trace(&b).re;
    let cm = &b / c(s, 0.0);
    let d = hermitize(&project_tp(basis, &cm));
    let (vals, vecs) = hermitian_eigen(&d);
    let lambda = vals[0];
    let v = vecs.column(0).into_owned();
    let floor = 1.0 / n as f64;
    let t = if lambda < 0.0 { -lambda / (floor - lambda) } else { 0.0 };
    let mut e = d.scale(1.0 - t);
    for k in 0..n {
        e[(k, k)] += c(t * floor, 0.0);
    }
    Ok((e, QProcessCache { n_qubits, l, b, s, d, t, lambda, v }))
}

/// Gradient with respect to the Cholesky parameters given `G_E`, the
/// gradient of the loss in the real inner product `Re Tr(A† B)`.
pub fn qprocess_backward(cache: &QProcessCache, g_e: &ComplexMatrix) -> Result<Vec<f64>> {
    let basis = cached_basis(cache.n_qubits)?;
    let n = basis.len();
    let floor = 1.0 / n as f64;

    let mut g_d = g_e.scale(1.0 - cache.t);
    if cache.lambda < 0.0 {
        let mut q_minus_d = -cache.d.clone();
        for k in 0..n {
            q_minus_d[(k, k)] += c(floor, 0.0);
        }
        let dt = -floor / (floor - cache.lambda).powi(2);
        let coeff = dt * real_inner(g_e, &q_minus_d);
        g_d += &cache.v * cache.v.adjoint() * c(coeff, 0.0);
    }

    let g_c = project_tp_linear(basis, &g_d);

    let s = cache.s;
    let mut g_b = &g_c / c(s, 0.0);
    let shift = real_inner(&g_c, &cache.b) / (s * s);
    for k in 0..n {
        g_b[(k, k)] -= c(shift, 0.0);
    }

    let g_l = (&g_b + g_b.adjoint()) * &cache.l;
    let mut out = Vec::with_capacity(param_count(n));
    for k in 0..n {
        out.push(g_l[(k, k)].re);
    }
    for j in 1..n {
        for k in 0..j {
            out.push(g_l[(j, k)].re);
            out.push(g_l[(j, k)].im);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::cptp::cptp_report;
    use crate::quantum::matrix::frobenius;
    use crate::seed::rng_from_seed;
    use rand::Rng;

    fn target(n: usize, rng: &mut crate::seed::Rng) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(n, n, |_, _| c(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)));
        hermitize(&a)
    }

    #[test]
    fn outputs_are_cptp() {
        let mut rng = rng_from_seed(4);
        for n_qubits in 1..=2 {
            let np = qprocess_param_count(n_qubits);
            for _ in 0..20 {
                let p: Vec<f64> = (0..np).map(|_| rng.random_range(-1.0..1.0)).collect();
                let (e, _) = qprocess_forward(&p, n_qubits, 1e-5).unwrap();
                let r = cptp_report(cached_basis(n_qubits).unwrap(), &e);
                assert!((r.trace_re - 1.0).abs() < 1e-9);
                assert!(r.min_eigenvalue >= -1e-9);
                assert!(r.tp_residual <= 1e-6);
                assert_eq!(r.hermiticity_residual, 0.0);
            }
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = rng_from_seed(9);
        for n_qubits in 1..=2 {
            let n = 4usize.pow(n_qubits as u32);
            let np = qprocess_param_count(n_qubits);
            for trial in 0..6 {
                let mut p: Vec<f64> = (0..np).map(|_| rng.random_range(-0.5..0.5)).collect();
                if trial % 2 == 0 {
                    // near a rank-1 χ the mix branch is active
                    p[0] = 1.0;
                    for x in p.iter_mut().skip(1) {
                        *x *= 0.1;
                    }
                }
                let x = target(n, &mut rng);
                let f = |q: &[f64]| {
                    let (e, _) = qprocess_forward(q, n_qubits, 1e-5).unwrap();
                    frobenius(&(e - &x)).powi(2)
                };
                let (e, cache) = qprocess_forward(&p, n_qubits, 1e-5).unwrap();
                let g = qprocess_backward(&cache, &((&e - &x) * c(2.0, 0.0))).unwrap();
                for _ in 0..10 {
                    let k = rng.random_range(0..np);
                    let h = 1e-6;
                    let mut up = p.clone();
                    up[k] += h;
                    let mut dn = p.clone();
                    dn[k] -= h;
                    let num = (f(&up) - f(&dn)) / (2.0 * h);
                    let rel = (num - g[k]).abs() / num.abs().max(g[k].abs()).max(1e-7);
                    assert!(rel < 1e-5, "n={n_qubits} k={k} num={num} ana={}", g[k]);
                }
            }
        }
    }
}
