//! CPTP diagnostics and the two convex projections used by reconstruction.
//!
//! The trace-preservation map `T(χ) = Σ_{αβ} χ_{αβ} E_β† E_α` satisfies
//! `T T* = d·n·id` in the Pauli basis (`d = 2^N`, `n = 4^N`), so the
//! Frobenius projection onto `{χ : T(χ) = I}` has the closed form
//! `χ − T*(T(χ) − I) / (d n)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channel::ProcessMatrix;
use super::matrix::{frobenius, hermitian_eigen, hermiticity_residual, hermitize, from_eigen, ComplexMatrix, ZERO};
use super::pauli::PauliBasis;

/// Default tolerance for CPTP validation.
pub const CPTP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    /// `||χ − χ†||_F`
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `||Σ χ_{αβ} E_β† E_α − I||_F`
    pub tp_residual: f64,
    pub trace_re: f64,
    pub trace_im: f64,
}

impl CptpReport {
    pub fn trace(&self) -> Complex64 {
        Complex64::new(self.trace_re, self.trace_im)
    }

    /// All CPTP conditions hold within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.hermiticity_residual <= tol
            && self.min_eigenvalue >= -tol
            && self.tp_residual <= tol
            && (self.trace_re - 1.0).abs() <= tol
            && self.trace_im.abs() <= tol
    }
}

/// Pauli coefficients `t_γ` of `T(χ) = Σ_γ t_γ E_γ`.
pub fn tp_coefficients(basis: &PauliBasis, chi: &ComplexMatrix) -> Vec<Complex64> {
    let n = basis.len();
    let mut t = vec![ZERO; n];
    for a in 0..n {
        for b in 0..n {
            let w = chi[(a, b)];
            if w == ZERO {
                continue;
            }
            // E_β† E_α = E_β E_α for Hermitian Paulis
            let (ph, g) = basis.product(b, a);
            t[g] += w * ph;
        }
    }
    t
}

/// Adjoint map applied to a Pauli-coefficient operator `Y = Σ y_γ E_γ`:
/// `T*(Y)_{αβ} = Tr(E_α E_β Y) = d · conj(ω_{βα}) · y_{γ(β,α)}`.
pub fn tp_adjoint(basis: &PauliBasis, y: &[Complex64]) -> ComplexMatrix {
    let n = basis.len();
    let d = basis.dim() as f64;
    ComplexMatrix::from_fn(n, n, |a, b| {
        let (ph, g) = basis.product(b, a);
        ph.conj() * y[g] * d
    })
}

/// `||T(χ) − I||_F`.
pub fn tp_residual(basis: &PauliBasis, chi: &ComplexMatrix) -> f64 {
    let mut t = tp_coefficients(basis, chi);
    t[0] -= Complex64::new(1.0, 0.0);
    let d = basis.dim() as f64;
    (d * t.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// Frobenius projection onto the trace-preserving affine set.
pub fn project_tp(basis: &PauliBasis, chi: &ComplexMatrix) -> ComplexMatrix {
    let mut r = tp_coefficients(basis, chi);
    r[0] -= Complex64::new(1.0, 0.0);
    let scale = 1.0 / (basis.dim() * basis.len()) as f64;
    let corr = tp_adjoint(basis, &r);
    chi - corr * Complex64::new(scale, 0.0)
}

/// Linear part of [`project_tp`]: `X − T*(T(X)) / (d n)`. Self-adjoint.
pub fn project_tp_linear(basis: &PauliBasis, x: &ComplexMatrix) -> ComplexMatrix {
    let r = tp_coefficients(basis, x);
    let scale = 1.0 / (basis.dim() * basis.len()) as f64;
    x - tp_adjoint(basis, &r) * Complex64::new(scale, 0.0)
}

/// Frobenius projection onto the PSD cone: Hermitize and clip eigenvalues.
pub fn project_psd(chi: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(chi);
    if vals[0] >= 0.0 {
        return hermitize(chi);
    }
    let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    from_eigen(&clipped, &vecs)
}

/// Smallest mix `(1 − t) χ + t · I/n` that is PSD. `I/n` is the completely
/// depolarizing channel, so trace preservation is kept. Returns the mixed
/// matrix and `t`.
pub fn mix_to_psd(chi: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let n = chi.nrows();
    let h = hermitize(chi);
    let lmin = hermitian_eigen(&h).0[0];
    if lmin >= 0.0 {
        return (h, 0.0);
    }
    let floor = 1.0 / n as f64;
    let t = -lmin / (floor - lmin);
    let mut out = h.scale(1.0 - t);
    for k in 0..n {
        out[(k, k)] += Complex64::new(t * floor, 0.0);
    }
    (out, t)
}

pub fn cptp_report(basis: &PauliBasis, chi: &ComplexMatrix) -> CptpReport {
    let (vals, _) = hermitian_eigen(chi);
    let tr: Complex64 = chi.diagonal().iter().sum();
    CptpReport {
        hermiticity_residual: hermiticity_residual(chi),
        min_eigenvalue: vals[0],
        max_eigenvalue: *vals.last().unwrap(),
        tp_residual: tp_residual(basis, chi),
        trace_re: tr.re,
        trace_im: tr.im,
    }
}

/// CPTP report for a process matrix; the caller decides pass/fail against
/// its own tolerance (see [`CptpReport::is_valid`]).
pub fn is_cptp(chi: &ProcessMatrix, _tol: f64) -> CptpReport {
    cptp_report(chi.basis(), chi.chi())
}

/// Frobenius distance between two χ matrices.
pub fn chi_distance(a: &ProcessMatrix, b: &ProcessMatrix) -> f64 {
    frobenius(&(a.chi() - b.chi()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::channel::{cached_basis, kraus_to_chi};
    use crate::quantum::matrix::c;
    use crate::quantum::pauli::pauli;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_report() {
        let r = is_cptp(&ProcessMatrix::identity(1), CPTP_TOL);
        assert_eq!(r.hermiticity_residual, 0.0);
        assert!(r.min_eigenvalue.abs() < 1e-15);
        assert!((r.max_eigenvalue - 1.0).abs() < 1e-15);
        assert!(r.tp_residual < 1e-15);
        assert!(r.is_valid(CPTP_TOL));
    }

    #[test]
    fn scaled_identity_breaks_normalization() {
        let chi = ProcessMatrix::new(1, ProcessMatrix::identity(1).into_chi().scale(2.0)).unwrap();
        let r = is_cptp(&chi, CPTP_TOL);
        assert!((r.trace() - c(2.0, 0.0)).norm() < 1e-15);
        assert!(r.tp_residual > 0.1);
        assert!(!r.is_valid(CPTP_TOL));
    }

    #[test]
    fn tp_map_gram_is_scalar() {
        // T T*(Y) = d n Y checked on random coefficients
        let basis = cached_basis(2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let y: Vec<Complex64> = (0..basis.len()).map(|_| c(rng.random(), rng.random())).collect();
        let back = tp_coefficients(basis, &tp_adjoint(basis, &y));
        let s = (basis.dim() * basis.len()) as f64;
        for (a, b) in y.iter().zip(&back) {
            assert!((a * s - b).norm() < 1e-10);
        }
    }

    #[test]
    fn tp_projection_lands_on_tp_set_and_is_idempotent() {
        let basis = cached_basis(1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let l = ComplexMatrix::from_fn(4, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let x = &l * l.adjoint() + ComplexMatrix::identity(4, 4) * c(1e-3, 0.0);
        let p = project_tp(basis, &x);
        assert!(tp_residual(basis, &p) < 1e-12);
        assert!(frobenius(&(project_tp(basis, &p) - &p)) < 1e-12);
        // trace preservation forces unit trace
        let tr: Complex64 = p.diagonal().iter().sum();
        assert!((tr - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn psd_mix_keeps_tp() {
        let basis = cached_basis(1).unwrap();
        let mut x = ProcessMatrix::identity(1).into_chi();
        x[(0, 0)] = c(1.2, 0.0);
        x[(3, 3)] = c(-0.2, 0.0);
        let p = project_tp(basis, &x);
        let (m, t) = mix_to_psd(&p);
        assert!(t > 0.0);
        assert!(hermitian_eigen(&m).0[0] > -1e-14);
        assert!(tp_residual(basis, &m) < 1e-12);
    }

    #[test]
    fn depolarizing_is_cptp() {
        let lam: f64 = 0.3;
        let kraus: Vec<ComplexMatrix> = (0..4)
            .map(|k| {
                let w = if k == 0 { 1.0 - 0.75 * lam } else { lam / 4.0 };
                pauli(k).scale(w.sqrt())
            })
            .collect();
        let chi = kraus_to_chi(&kraus).unwrap();
        assert!(is_cptp(&chi, CPTP_TOL).is_valid(CPTP_TOL));
    }
}
