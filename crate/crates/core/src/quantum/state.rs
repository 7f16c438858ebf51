use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::{Basis, BasisState};
use super::operator::{max_abs, Operator};
use crate::error::{Error, Result};

/// Amplitudes over a basis. Under no-jump evolution the norm decays; it is
/// never renormalized here.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Arc<Basis>,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(basis: &Arc<Basis>, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: amplitudes.len() });
        }
        Ok(Self { basis: basis.clone(), amplitudes })
    }

    pub fn basis_state(basis: &Arc<Basis>, state: BasisState) -> Result<Self> {
        let i = basis
            .index_of(&state)
            .ok_or_else(|| Error::Undefined(format!("{state} is not in the {} basis", basis.kind())))?;
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Self { basis: basis.clone(), amplitudes })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, state: &BasisState) -> Option<Complex64> {
        self.basis.index_of(state).map(|i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { basis: self.basis.clone(), amplitudes: &self.amplitudes * factor }
    }

    pub fn apply(&self, op: &Operator) -> Result<Self> {
        op.check_same_dim(self.amplitudes.len())?;
        Ok(Self { basis: self.basis.clone(), amplitudes: op.matrix() * &self.amplitudes })
    }

    pub(crate) fn from_slice(basis: &Arc<Basis>, data: &[Complex64]) -> Self {
        Self { basis: basis.clone(), amplitudes: DVector::from_column_slice(data) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    basis: Arc<Basis>,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(basis: &Arc<Basis>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = basis.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        Ok(Self { basis: basis.clone(), matrix })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let v = psi.amplitudes();
        Self { basis: psi.basis().clone(), matrix: v * v.adjoint() }
    }

    pub fn maximally_mixed(basis: &Arc<Basis>) -> Self {
        let n = basis.dim();
        Self { basis: basis.clone(), matrix: DMatrix::identity(n, n) * Complex64::new(1.0 / n as f64, 0.0) }
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn population(&self, state: &BasisState) -> Option<f64> {
        self.basis.index_of(state).map(|i| self.matrix[(i, i)].re)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn from_row_major(basis: &Arc<Basis>, data: &[Complex64]) -> Self {
        let n = basis.dim();
        Self { basis: basis.clone(), matrix: DMatrix::from_row_slice(n, n, data) }
    }

    pub(crate) fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.matrix.nrows();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.matrix[(i, j)]);
            }
        }
        out
    }
}

/// A state that supports ⟨op⟩.
pub trait QuantumState {
    fn dim(&self) -> usize;
    fn expectation_unchecked(&self, op: &Operator) -> Complex64;
}

impl QuantumState for StateVector {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    fn expectation_unchecked(&self, op: &Operator) -> Complex64 {
        self.amplitudes.dotc(&(op.matrix() * &self.amplitudes))
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn expectation_unchecked(&self, op: &Operator) -> Complex64 {
        (op.matrix() * &self.matrix).trace()
    }
}

/// ⟨ψ|op|ψ⟩ (unnormalized) or Tr(op ρ).
pub fn expectation<S: QuantumState>(state: &S, op: &Operator) -> Result<Complex64> {
    op.check_same_dim(state.dim())?;
    Ok(state.expectation_unchecked(op))
}
