//! Small-dimension quantum states and the Bell-diagonal family.

mod bell;
pub mod matrix;

pub use bell::{
    bd_eigenvalues, bell_diagonal, bell_state, canonical_form, geometric_discord,
    is_separable_bd, BellDiagonalParams, CanonicalFormRecord, CanonicalStep, SignBranch,
    EIGENVALUE_LABELS, PHYSICAL_TOL,
};
pub use matrix::{ComplexMatrix, StateVector};

use crate::error::{Error, Result};
use matrix::{bloch_operator, hermitian_eigenvalues, max_abs_diff, partial_transpose_second, pauli};
use num_complex::Complex64;

/// A validated density operator on one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || !(rows == 2 || rows == 4) {
            return Err(Error::InvalidDensityMatrix(format!(
                "expected 2x2 or 4x4, got {rows}x{cols}"
            )));
        }
        let asym = max_abs_diff(&matrix, &matrix.adjoint());
        if asym > Self::HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (max |ρ - ρ†| = {asym:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}, not 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)[0];
        if min_eig < -Self::PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self { matrix: m }
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "state vector has norm {norm}"
            )));
        }
        Self::new(psi * psi.adjoint())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Positivity of the partial transpose; for two qubits this is equivalent
    /// to separability.
    pub fn is_ppt(&self, tol: f64) -> bool {
        assert_eq!(self.dim(), 4, "PPT test needs a two-qubit state");
        hermitian_eigenvalues(&partial_transpose_second(&self.matrix))[0] >= -tol
    }

    /// `weight·self + (1 - weight)·other`.
    pub fn mix(&self, weight: f64, other: &DensityMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot mix {}x{} with {}x{}",
                self.dim(),
                self.dim(),
                other.dim(),
                other.dim()
            )));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::OutOfRange {
                name: "weight",
                value: weight,
                range: "[0, 1]",
            });
        }
        let m = &self.matrix * Complex64::new(weight, 0.0)
            + &other.matrix * Complex64::new(1.0 - weight, 0.0);
        Self::new(m)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    /// Correlation coefficient `Tr[ρ (σ_i ⊗ σ_j)]` for axes `i, j ∈ {0,1,2}`.
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        let op = pauli(i + 1).kronecker(&pauli(j + 1));
        (&self.matrix * op).trace().re
    }
}

/// Rank-one projector onto the `(-1)^outcome` eigenspace of `n̂·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projector {
    pub direction: [f64; 3],
    pub outcome: u8,
}

impl Projector {
    pub const UNIT_TOL: f64 = 1e-12;

    pub fn new(direction: [f64; 3], outcome: u8) -> Result<Self> {
        let p = Self { direction, outcome };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        let norm = self.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > Self::UNIT_TOL {
            return Err(Error::NonUnitDirection(norm));
        }
        if self.outcome > 1 {
            return Err(Error::IndexOutOfRange(format!("outcome {} is not a bit", self.outcome)));
        }
        Ok(())
    }

    /// `(𝟙 + (-1)^outcome n̂·σ)/2`.
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        self.check()?;
        let sign = if self.outcome == 0 { 1.0 } else { -1.0 };
        let n = self.direction.map(|x| sign * x);
        Ok((pauli(0) + bloch_operator(n)) * Complex64::new(0.5, 0.0))
    }
}

/// Matrix of a projector; see [`Projector::matrix`].
pub fn projector_matrix(p: &Projector) -> Result<ComplexMatrix> {
    p.matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use matrix::max_abs_diff;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn projector_z_outcome_zero_is_ket_zero() {
        let m = projector_matrix(&Projector::new([0.0, 0.0, 1.0], 0).unwrap()).unwrap();
        let expected = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(max_abs_diff(&m, &expected) < 1e-15);
    }

    #[test]
    fn projector_x_outcome_one_is_minus_state() {
        let m = projector_matrix(&Projector::new([1.0, 0.0, 0.0], 1).unwrap()).unwrap();
        let h = 0.5;
        let expected = ComplexMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(-h, 0.0), c(-h, 0.0), c(h, 0.0)]);
        assert!(max_abs_diff(&m, &expected) < 1e-15);
    }

    #[test]
    fn projector_is_idempotent_with_unit_trace() {
        let s = 1.0 / 3f64.sqrt();
        for outcome in 0..2 {
            let m = Projector::new([s, -s, s], outcome).unwrap().matrix().unwrap();
            assert!((m.trace().re - 1.0).abs() < 1e-14);
            assert!(max_abs_diff(&(&m * &m), &m) < 1e-14);
        }
    }

    #[test]
    fn projector_rejects_non_unit_direction() {
        assert_eq!(
            Projector::new([1.0, 1.0, 0.0], 0),
            Err(Error::NonUnitDirection(2f64.sqrt()))
        );
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(4, 4)).is_err());
        let bad = ComplexMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(bad), Err(Error::InvalidDensityMatrix(_))));
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed(4).matrix().clone()).is_ok());
    }

    #[test]
    fn maximally_mixed_is_ppt() {
        assert!(DensityMatrix::maximally_mixed(4).is_ppt(1e-12));
    }
}
