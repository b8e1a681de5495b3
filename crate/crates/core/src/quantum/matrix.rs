//! Dense complex matrices for one and two qubits.
//!
//! Every object in this crate is 2×2 or 4×4, so plain dense `nalgebra`
//! storage is used throughout. Two-qubit operators use the basis order
//! `|00⟩, |01⟩, |10⟩, |11⟩` with Alice's qubit as the most significant one.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrix by index: 0 = 𝟙, 1 = σx, 2 = σy, 3 = σz.
pub fn pauli(index: usize) -> ComplexMatrix {
    let entries = match index {
        0 => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        1 => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        2 => [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        3 => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        _ => panic!("Pauli index {index} out of range"),
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// `n̂·σ` for a real 3-vector `n`.
pub fn bloch_operator(n: [f64; 3]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    for (k, &nk) in n.iter().enumerate() {
        m += pauli(k + 1) * c(nk, 0.0);
    }
    m
}

/// Qubit density matrix `(𝟙 + r·σ)/2`.
pub fn qubit_state(r: [f64; 3]) -> ComplexMatrix {
    (pauli(0) + bloch_operator(r)) * c(0.5, 0.0)
}

/// Bloch vector `(Tr ρσx, Tr ρσy, Tr ρσz)` of a 2×2 operator.
pub fn bloch_vector(rho: &ComplexMatrix) -> [f64; 3] {
    let mut r = [0.0; 3];
    for (k, rk) in r.iter_mut().enumerate() {
        *rk = (rho * pauli(k + 1)).trace().re;
    }
    r
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Traces out the first qubit of a 4×4 operator.
pub fn partial_trace_first(m: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(m.shape(), (4, 4), "partial trace expects a two-qubit operator");
    ComplexMatrix::from_fn(2, 2, |i, j| m[(i, j)] + m[(2 + i, 2 + j)])
}

/// Transposes the second qubit of a 4×4 operator.
pub fn partial_transpose_second(m: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(m.shape(), (4, 4), "partial transpose expects a two-qubit operator");
    ComplexMatrix::from_fn(4, 4, |row, col| {
        let (a, b) = (row / 2, row % 2);
        let (a2, b2) = (col / 2, col % 2);
        m[(2 * a + b2, 2 * a2 + b)]
    })
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let mut values: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let x = pauli(1);
        let y = pauli(2);
        let z = pauli(3);
        // σx σy = i σz
        let xy = &x * &y;
        assert!(max_abs_diff(&xy, &(z.clone() * c(0.0, 1.0))) < 1e-15);
        for k in 1..=3 {
            let sq = pauli(k) * pauli(k);
            assert!(max_abs_diff(&sq, &pauli(0)) < 1e-15);
        }
    }

    #[test]
    fn bloch_round_trip() {
        let r = [0.3, -0.2, 0.5];
        let back = bloch_vector(&qubit_state(r));
        for k in 0..3 {
            assert!((back[k] - r[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let a = qubit_state([0.0, 0.0, 1.0]);
        let b = qubit_state([0.5, 0.1, 0.0]);
        let reduced = partial_trace_first(&kron(&a, &b));
        assert!(max_abs_diff(&reduced, &b) < 1e-15);
    }

    #[test]
    fn partial_transpose_of_product_transposes_second_factor() {
        let a = qubit_state([0.1, 0.2, 0.3]);
        let b = qubit_state([0.0, 0.7, 0.0]);
        let pt = partial_transpose_second(&kron(&a, &b));
        assert!(max_abs_diff(&pt, &kron(&a, &b.transpose())) < 1e-15);
    }
}
