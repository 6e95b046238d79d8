//! Column-stacking vectorization `|A⟩⟩` with `⟨⟨A|B⟩⟩ = Tr(A†B)`.

use super::matrix::{ensure_square, ComplexMatrix, ComplexVector};
use crate::error::{QptError, Result};

pub fn vectorize(op: &ComplexMatrix) -> Result<ComplexVector> {
    ensure_square(op, "vectorize input")?;
    Ok(ComplexVector::from_iterator(op.len(), op.iter().copied()))
}

pub fn devectorize(v: &ComplexVector) -> Result<ComplexMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(QptError::Shape(format!("vector length {} is not a square", v.len())));
    }
    Ok(ComplexMatrix::from_column_slice(d, d, v.as_slice()))
}

/// `⟨⟨a|b⟩⟩`; equals `Tr(a b)` for Hermitian `a`.
pub fn braket(a: &ComplexVector, b: &ComplexVector) -> num_complex::Complex64 {
    a.dotc(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::{c, from_rows, frobenius, trace_of_product, ONE, ZERO};
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn sigma_z_on_ground_state() {
        let z = from_rows(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let rho = from_rows(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let v = braket(&vectorize(&z).unwrap(), &vectorize(&rho).unwrap());
        assert!((v - ONE).norm() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 4);
        let back = devectorize(&vectorize(&a).unwrap()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn braket_matches_direct_trace() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let o = random_matrix(&mut rng, 2);
            let o = (&o + o.adjoint()).scale(0.5);
            let r = random_matrix(&mut rng, 2);
            let rho = &r * r.adjoint();
            let lhs = braket(&vectorize(&o).unwrap(), &vectorize(&rho).unwrap());
            let rhs = trace_of_product(&o, &rho);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn non_square_rejected() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(vectorize(&a), Err(QptError::Shape(_))));
        let v = ComplexVector::zeros(3);
        assert!(devectorize(&v).is_err());
        let _ = frobenius(&a);
    }
}
