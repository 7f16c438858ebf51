use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::{AtomicLevel, Basis, Mode};
use crate::error::{Error, Result};

/// Dense complex matrix over an explicit basis.
///
/// Hamiltonians are stored in units of ħ, i.e. as angular frequencies in rad/ns.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    basis: Arc<Basis>,
    matrix: DMatrix<Complex64>,
}

impl Operator {
    pub fn zeros(basis: &Arc<Basis>) -> Self {
        let n = basis.dim();
        Self { basis: basis.clone(), matrix: DMatrix::zeros(n, n) }
    }

    pub fn identity(basis: &Arc<Basis>) -> Self {
        let n = basis.dim();
        Self { basis: basis.clone(), matrix: DMatrix::identity(n, n) }
    }

    pub fn from_matrix(basis: &Arc<Basis>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = basis.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        Ok(Self { basis: basis.clone(), matrix })
    }

    /// Diagonal operator with entries `f(state)`.
    pub fn diagonal(basis: &Arc<Basis>, f: impl Fn(&super::BasisState) -> f64) -> Self {
        let mut op = Self::zeros(basis);
        for (i, s) in basis.states().iter().enumerate() {
            op.matrix[(i, i)] = Complex64::new(f(s), 0.0);
        }
        op
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self { basis: self.basis.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { basis: self.basis.clone(), matrix: &self.matrix * factor }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Largest elementwise |A − A†|.
    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    pub(crate) fn check_same_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), found: dim })
        }
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        Operator { basis: self.basis.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        Operator { basis: self.basis.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        Operator { basis: self.basis.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

/// Cavity annihilation operator: ⟨μ,n−1|a|μ,n⟩ = √n on the selected mode.
///
/// On the effective two-level basis the lowered state |g2,0⟩ is not represented,
/// so the result is the zero operator; use [`number_operator`] for photon counts.
pub fn annihilation_operator(basis: &Arc<Basis>, mode: Mode) -> Result<Operator> {
    basis.check_mode(mode)?;
    let mut op = Operator::zeros(basis);
    for (col, state) in basis.states().iter().enumerate() {
        if let Some(lowered) = state.lowered(mode) {
            if let Some(row) = basis.index_of(&lowered) {
                op.matrix[(row, col)] = Complex64::new(f64::from(state.photons(mode)).sqrt(), 0.0);
            }
        }
    }
    Ok(op)
}

pub fn creation_operator(basis: &Arc<Basis>, mode: Mode) -> Result<Operator> {
    annihilation_operator(basis, mode).map(|a| a.dagger())
}

/// Photon number a†a, built directly as a diagonal so it is exact on truncated bases.
pub fn number_operator(basis: &Arc<Basis>, mode: Mode) -> Result<Operator> {
    basis.check_mode(mode)?;
    Ok(Operator::diagonal(basis, |s| f64::from(s.photons(mode))))
}

/// σ_{μ,ν} = |μ⟩⟨ν| ⊗ 1_photons.
pub fn atomic_projector(basis: &Arc<Basis>, mu: AtomicLevel, nu: AtomicLevel) -> Result<Operator> {
    basis.check_level(mu)?;
    basis.check_level(nu)?;
    let mut op = Operator::zeros(basis);
    for (col, state) in basis.states().iter().enumerate() {
        if state.level != nu {
            continue;
        }
        if let Some(row) = basis.index_of(&state.with_level(mu)) {
            op.matrix[(row, col)] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(op)
}

/// |s⟩⟨s| for a single basis state.
pub fn state_projector(basis: &Arc<Basis>, state: &super::BasisState) -> Result<Operator> {
    let i = basis
        .index_of(state)
        .ok_or_else(|| Error::Undefined(format!("{state} is not in the {} basis", basis.kind())))?;
    let mut op = Operator::zeros(basis);
    op.matrix[(i, i)] = Complex64::new(1.0, 0.0);
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{build_basis, BasisState, ModelKind, StateVector};
    use AtomicLevel::*;

    fn four(n: u32) -> Arc<Basis> {
        build_basis(ModelKind::FourLevel, n).unwrap()
    }

    #[test]
    fn annihilation_lowers_left_photon() {
        let b = four(1);
        let a = annihilation_operator(&b, Mode::L).unwrap();
        let psi = StateVector::basis_state(&b, BasisState::new(GMinus, 1, 0)).unwrap();
        let out = psi.apply(&a).unwrap();
        let target = b.index_of(&BasisState::new(GMinus, 0, 0)).unwrap();
        for (i, z) in out.amplitudes().iter().enumerate() {
            let expected = if i == target { 1.0 } else { 0.0 };
            assert_eq!(*z, Complex64::new(expected, 0.0));
        }
    }

    #[test]
    fn annihilation_of_vacuum_is_zero() {
        let b = four(1);
        let a = annihilation_operator(&b, Mode::R).unwrap();
        for s in b.states().iter().filter(|s| s.n_r == 0) {
            let out = StateVector::basis_state(&b, *s).unwrap().apply(&a).unwrap();
            assert_eq!(out.norm_sqr(), 0.0);
        }
    }

    #[test]
    fn sqrt_n_rule() {
        let b = four(2);
        let a = annihilation_operator(&b, Mode::L).unwrap();
        let out = StateVector::basis_state(&b, BasisState::new(E, 2, 0)).unwrap().apply(&a).unwrap();
        let amp = out.amplitude(&BasisState::new(E, 1, 0)).unwrap();
        assert_eq!(amp, Complex64::new(2f64.sqrt(), 0.0));
        assert!((out.norm_sqr() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn right_mode_missing_on_single_mode_basis() {
        let b = build_basis(ModelKind::ThreeLevelRaman, 1).unwrap();
        assert!(matches!(annihilation_operator(&b, Mode::R), Err(Error::UnknownMode { .. })));
    }

    #[test]
    fn commutator_below_cutoff() {
        let b = four(2);
        for mode in [Mode::L, Mode::R] {
            let a = annihilation_operator(&b, mode).unwrap();
            let comm = a.commutator(&a.dagger());
            for (i, s) in b.states().iter().enumerate() {
                if s.photons(mode) >= b.n_max() {
                    continue;
                }
                for (j, t) in b.states().iter().enumerate() {
                    if t.photons(mode) >= b.n_max() {
                        continue;
                    }
                    let expected = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                    assert!((comm.get(i, j) - expected).norm() < 1e-14, "({s}, {t})");
                }
            }
        }
    }

    #[test]
    fn number_operator_matches_product_below_cutoff() {
        let b = four(2);
        let a = annihilation_operator(&b, Mode::L).unwrap();
        let n = number_operator(&b, Mode::L).unwrap();
        assert!((&a.dagger() * &a).max_abs_diff(&n) < 1e-14);
    }

    #[test]
    fn projector_examples() {
        let b = four(1);
        let see = atomic_projector(&b, E, E).unwrap();
        let e00 = StateVector::basis_state(&b, BasisState::new(E, 0, 0)).unwrap();
        assert_eq!(e00.apply(&see).unwrap(), e00);

        let sg1e = atomic_projector(&b, G1, E).unwrap();
        let gm = StateVector::basis_state(&b, BasisState::new(GMinus, 1, 0)).unwrap();
        assert_eq!(gm.apply(&sg1e).unwrap().norm_sqr(), 0.0);

        let seg1 = atomic_projector(&b, E, G1).unwrap();
        assert_eq!((&seg1 * &sg1e).max_abs_diff(&see), 0.0);
    }

    #[test]
    fn projector_algebra_exhaustive() {
        for kind in [ModelKind::FourLevel, ModelKind::ThreeLevelRaman] {
            let b = build_basis(kind, 2).unwrap();
            let levels = kind.levels();
            for &mu in levels {
                for &nu in levels {
                    let left = atomic_projector(&b, mu, nu).unwrap();
                    for &nu2 in levels {
                        for &lam in levels {
                            let right = atomic_projector(&b, nu2, lam).unwrap();
                            let prod = &left * &right;
                            let expected =
                                if nu == nu2 { atomic_projector(&b, mu, lam).unwrap() } else { Operator::zeros(&b) };
                            assert_eq!(prod.max_abs_diff(&expected), 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn unknown_level_rejected() {
        let b = four(1);
        assert!(matches!(atomic_projector(&b, G2, E), Err(Error::UnknownLevel { .. })));
    }
}
