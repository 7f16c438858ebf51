use num_complex::Complex64;

use super::Operator;

/// Nonzero triplets of a dense [`Operator`], for the integrator inner loops.
#[derive(Debug, Clone, Default)]
pub(crate) struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    pub fn from_operator(op: &Operator) -> Self {
        let m = op.matrix();
        let dim = m.nrows();
        let mut entries = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                if z != Complex64::new(0.0, 0.0) {
                    entries.push((i, j, z));
                }
            }
        }
        Self { dim, entries }
    }

    /// out += c · A x
    #[inline]
    pub fn mul_vec_add(&self, c: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        for &(i, j, a) in &self.entries {
            out[i] += c * a * x[j];
        }
    }

    /// out += c · A ρ, with ρ and out row-major dim×dim.
    #[inline]
    pub fn left_mul_add(&self, c: Complex64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for &(i, k, a) in &self.entries {
            let ca = c * a;
            let src = &rho[k * n..(k + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += ca * s;
            }
        }
    }

    /// out += c · ρ A†
    #[inline]
    pub fn right_mul_adjoint_add(&self, c: Complex64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for &(j, k, a) in &self.entries {
            let ca = c * a.conj();
            for i in 0..n {
                out[i * n + j] += ca * rho[i * n + k];
            }
        }
    }

    /// out += A ρ A†
    #[inline]
    pub fn sandwich_add(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for &(i, j, a) in &self.entries {
            for &(k, l, b) in &self.entries {
                out[i * n + k] += a * rho[j * n + l] * b.conj();
            }
        }
    }
}
