use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::models::{coherent_parts, loss_channels, Channel, ModelConfig, Pulse};
use crate::quantum::sparse::SparseOp;
use crate::quantum::{Basis, Operator};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Accumulator slot for each loss channel: [P_L, P_R, P_spont].
pub(crate) fn slot(channel: Channel) -> usize {
    match channel {
        Channel::CavityL => 0,
        Channel::CavityR => 1,
        Channel::Spontaneous => 2,
    }
}

fn diag(op: &Operator) -> Vec<f64> {
    (0..op.dim()).map(|i| op.get(i, i).re).collect()
}

#[derive(Debug, Clone)]
struct CompiledChannel {
    slot: usize,
    rate: Vec<f64>,
    rate_drive_sq: Vec<f64>,
    jumps: Vec<SparseOp>,
}

/// A model lowered to sparse triplets and diagonal rate vectors.
#[derive(Debug, Clone)]
pub(crate) struct CompiledModel {
    pub dim: usize,
    pulse: Pulse,
    fixed: SparseOp,
    drive: SparseOp,
    drive_sq: SparseOp,
    channels: Vec<CompiledChannel>,
}

impl CompiledModel {
    pub fn new(config: &ModelConfig, basis: &Arc<Basis>) -> Result<Self> {
        // Only H₀ is compiled as triplets; the anti-Hermitian part −iΓ is
        // diagonal and applied from the channel rate vectors.
        let coherent = coherent_parts(config, basis)?;
        let channels = loss_channels(config, basis)?
            .iter()
            .map(|ch| CompiledChannel {
                slot: slot(ch.channel),
                rate: diag(&ch.rate),
                rate_drive_sq: diag(&ch.rate_drive_sq),
                jumps: ch.jumps.iter().map(SparseOp::from_operator).collect(),
            })
            .collect();
        Ok(Self {
            dim: basis.dim(),
            pulse: config.pulse,
            fixed: SparseOp::from_operator(&coherent.fixed),
            drive: SparseOp::from_operator(&coherent.drive),
            drive_sq: SparseOp::from_operator(&coherent.drive_sq),
            channels,
        })
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.pulse.amplitude(t)
    }

    /// Per-basis-state total loss rate 2Γ_ii at drive Ω.
    fn total_rate(&self, omega: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let w2 = omega * omega;
        for ch in &self.channels {
            for i in 0..self.dim {
                out[i] += ch.rate[i] + w2 * ch.rate_drive_sq[i];
            }
        }
    }

    /// y = [ψ; P_L, P_R, P_spont]; dψ/dt = −i H_eff ψ and dP_c/dt = Σ_i r_c,i |ψ_i|².
    pub fn conditional_rhs(&self, t: f64, y: &[Complex64], out: &mut [Complex64], gamma_buf: &mut [f64]) {
        let n = self.dim;
        let omega = self.omega(t);
        let (psi, dpsi) = (&y[..n], &mut out[..n]);
        dpsi.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        self.fixed.mul_vec_add(-I, psi, dpsi);
        if omega != 0.0 {
            self.drive.mul_vec_add(-I * omega, psi, dpsi);
            self.drive_sq.mul_vec_add(-I * (omega * omega), psi, dpsi);
        }
        self.total_rate(omega, gamma_buf);
        for i in 0..n {
            dpsi[i] -= 0.5 * gamma_buf[i] * psi[i];
        }
        let acc = &mut out[n..n + 3];
        acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        let w2 = omega * omega;
        for ch in &self.channels {
            let mut s = 0.0;
            for i in 0..n {
                let r = ch.rate[i] + w2 * ch.rate_drive_sq[i];
                if r != 0.0 {
                    s += r * psi[i].norm_sqr();
                }
            }
            acc[ch.slot] += s;
        }
    }

    /// y = [ρ row-major; P_L, P_R, P_spont]; Lindblad generator plus emission accumulators.
    pub fn master_rhs(&self, t: f64, y: &[Complex64], out: &mut [Complex64], gamma_buf: &mut [f64]) {
        let n = self.dim;
        let omega = self.omega(t);
        let (rho, drho) = (&y[..n * n], &mut out[..n * n]);
        drho.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        // −i[H₀, ρ]
        for (op, c) in [(&self.fixed, 1.0), (&self.drive, omega), (&self.drive_sq, omega * omega)] {
            if c != 0.0 {
                op.left_mul_add(-I * c, rho, drho);
                op.right_mul_adjoint_add(I * c, rho, drho);
            }
        }
        // −{Γ, ρ} with Γ diagonal
        self.total_rate(omega, gamma_buf);
        for i in 0..n {
            for j in 0..n {
                drho[i * n + j] -= 0.5 * (gamma_buf[i] + gamma_buf[j]) * rho[i * n + j];
            }
        }
        for ch in &self.channels {
            for l in &ch.jumps {
                l.sandwich_add(rho, drho);
            }
        }
        let acc = &mut out[n * n..n * n + 3];
        acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        let w2 = omega * omega;
        for ch in &self.channels {
            let mut s = 0.0;
            for i in 0..n {
                s += (ch.rate[i] + w2 * ch.rate_drive_sq[i]) * rho[i * n + i].re;
            }
            acc[ch.slot] += s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_effective_hamiltonian;
    use crate::models::lindblad_rhs;
    use crate::quantum::{DensityMatrix, StateVector};

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn conditional_rhs_matches_dense_effective_hamiltonian() {
        let configs = [
            ModelConfig::headline(),
            ModelConfig::three_level_raman(
                0.3,
                0.2,
                0.1,
                4.0,
                crate::models::RamanDetuning::StarkCompensated,
                Pulse::sin2(1.0, 20.0),
            ),
            ModelConfig::effective_two_level(0.3, 0.2, 0.1, 4.0, Pulse::sin2(1.0, 20.0)),
        ];
        for c in configs {
            let b = c.basis().unwrap();
            let m = CompiledModel::new(&c, &b).unwrap();
            let n = b.dim();
            let psi = random_vec(n, 7);
            let mut y = psi.clone();
            y.extend([Complex64::new(0.0, 0.0); 3]);
            let mut out = vec![Complex64::new(0.0, 0.0); n + 3];
            let mut buf = vec![0.0; n];
            let t = 8.0;
            m.conditional_rhs(t, &y, &mut out, &mut buf);
            let h = build_effective_hamiltonian(&c, &b, t).unwrap();
            let expected = StateVector::from_slice(&b, &psi).apply(&h).unwrap().scale(-I);
            for i in 0..n {
                assert!((out[i] - expected.amplitudes()[i]).norm() < 1e-14, "{}", c.kind);
            }
            // total accumulator rate equals −d‖ψ‖²/dt
            let dnorm: f64 = (0..n).map(|i| 2.0 * (psi[i].conj() * out[i]).re).sum();
            let acc: f64 = out[n..].iter().map(|z| z.re).sum();
            assert!((dnorm + acc).abs() < 1e-14);
        }
    }

    #[test]
    fn master_rhs_matches_dense_lindblad() {
        let c = ModelConfig::headline().with_branching(vec![0.2, 0.5, 0.3]);
        let b = c.basis().unwrap();
        let m = CompiledModel::new(&c, &b).unwrap();
        let n = b.dim();
        let raw = random_vec(n * n, 11);
        let mut y = raw.clone();
        y.extend([Complex64::new(0.0, 0.0); 3]);
        let mut out = vec![Complex64::new(0.0, 0.0); n * n + 3];
        let mut buf = vec![0.0; n];
        m.master_rhs(50.0, &y, &mut out, &mut buf);
        let rho = DensityMatrix::from_row_major(&b, &raw);
        let expected = lindblad_rhs(&c, &b, &rho, 50.0).unwrap().to_row_major();
        for i in 0..n * n {
            assert!((out[i] - expected[i]).norm() < 1e-14);
        }
    }
}
