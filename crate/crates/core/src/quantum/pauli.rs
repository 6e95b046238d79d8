use num_complex::Complex64;

use super::matrix::{c, from_rows, identity, kron, ComplexMatrix, ONE, ZERO};
use crate::error::{QptError, Result};

pub const MAX_QUBITS: usize = 3;

/// Single-qubit Pauli matrix by index `0..4` = `I, X, Y, Z`.
pub fn pauli(k: usize) -> ComplexMatrix {
    match k {
        0 => identity(2),
        1 => from_rows(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => from_rows(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
        3 => from_rows(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli index {k} out of range"),
    }
}

/// `σ_a σ_b = phase · σ_c` for single-qubit indices.
fn single_product(a: usize, b: usize) -> (Complex64, usize) {
    if a == 0 {
        return (ONE, b);
    }
    if b == 0 {
        return (ONE, a);
    }
    if a == b {
        return (ONE, 0);
    }
    // cyclic x->y->z gives +i
    let k = 6 - a - b;
    if (a % 3) + 1 == b {
        (c(0.0, 1.0), k)
    } else {
        (c(0.0, -1.0), k)
    }
}

/// The N-qubit Pauli basis `{I, X, Y, Z}^{⊗N}` in lexicographic order,
/// qubit 0 being the most significant tensor factor.
#[derive(Debug, Clone)]
pub struct PauliBasis {
    n_qubits: usize,
    elements: Vec<ComplexMatrix>,
    // products[a * n + b] = (phase, c) with E_a E_b = phase E_c
    products: Vec<(Complex64, usize)>,
}

impl PauliBasis {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QptError::UnsupportedSize(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let n = 4usize.pow(n_qubits as u32);
        let elements: Vec<ComplexMatrix> = (0..n)
            .map(|k| {
                let digits = Self::digits_of(k, n_qubits);
                digits
                    .iter()
                    .skip(1)
                    .fold(pauli(digits[0]), |acc, &d| kron(&acc, &pauli(d)))
            })
            .collect();

        let mut products = Vec::with_capacity(n * n);
        for a in 0..n {
            let da = Self::digits_of(a, n_qubits);
            for b in 0..n {
                let db = Self::digits_of(b, n_qubits);
                let mut phase = ONE;
                let mut idx = 0;
                for q in 0..n_qubits {
                    let (p, k) = single_product(da[q], db[q]);
                    phase *= p;
                    idx = idx * 4 + k;
                }
                products.push((phase, idx));
            }
        }
        Ok(PauliBasis { n_qubits, elements, products })
    }

    /// Base-4 digits of a basis index, most significant (qubit 0) first.
    pub fn digits_of(mut k: usize, n_qubits: usize) -> Vec<usize> {
        let mut d = vec![0; n_qubits];
        for q in (0..n_qubits).rev() {
            d[q] = k % 4;
            k /= 4;
        }
        d
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Number of basis elements `4^N`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &ComplexMatrix {
        &self.elements[k]
    }

    /// `(phase, c)` with `E_a E_b = phase · E_c`.
    pub fn product(&self, a: usize, b: usize) -> (Complex64, usize) {
        self.products[a * self.len() + b]
    }

    /// Expansion coefficients `c_k = Tr(E_k† op) / 2^N`.
    pub fn coefficients(&self, op: &ComplexMatrix) -> Vec<Complex64> {
        let d = self.dim() as f64;
        self.elements
            .iter()
            .map(|e| super::matrix::hs_inner(e, op) / d)
            .collect()
    }

    /// Inverse of [`coefficients`](Self::coefficients).
    pub fn combine(&self, coeffs: &[Complex64]) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (e, &ck) in self.elements.iter().zip(coeffs) {
            if ck != ZERO {
                out += e * ck;
            }
        }
        out
    }
}

/// Convenience constructor mirroring the operation name.
pub fn pauli_basis(n_qubits: usize) -> Result<PauliBasis> {
    PauliBasis::new(n_qubits)
}
