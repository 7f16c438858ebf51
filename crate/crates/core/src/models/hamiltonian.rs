//! Hamiltonians, loss channels and the Lindblad generator for the three model kinds.
//!
//! Every Hamiltonian is split as `fixed + Ω(t)·drive + Ω(t)²·drive_sq`, which is
//! exact for all kinds: the resonant and Raman models are linear in Ω, the
//! effective two-level model has Ω_eff ∝ Ω and γ_eff ∝ Ω².

use std::sync::Arc;

use num_complex::Complex64;

use super::config::ModelConfig;
use crate::error::{Error, Result};
use crate::quantum::{
    annihilation_operator, atomic_projector, number_operator, state_projector, AtomicLevel, Basis, BasisState,
    DensityMatrix, Mode, ModelKind, Operator,
};

use AtomicLevel::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    pub fixed: Operator,
    pub drive: Operator,
    pub drive_sq: Operator,
}

impl HamiltonianParts {
    pub fn at(&self, omega: f64) -> Operator {
        let d = self.drive.scale_real(omega);
        let d2 = self.drive_sq.scale_real(omega * omega);
        &(&self.fixed + &d) + &d2
    }
}

/// Where a norm/trace loss goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    CavityL,
    CavityR,
    Spontaneous,
}

/// One decay channel. `rate + Ω²·rate_drive_sq` is the (diagonal, positive)
/// operator whose expectation is the instantaneous loss rate through this
/// channel; `jumps` are the Lindblad operators with Σ L†L equal to that rate.
#[derive(Debug, Clone)]
pub struct LossChannel {
    pub channel: Channel,
    pub rate: Operator,
    pub rate_drive_sq: Operator,
    pub jumps: Vec<Operator>,
}

fn target(basis: &Arc<Basis>, level: AtomicLevel, n: u32) -> Result<Operator> {
    state_projector(basis, &BasisState::new(level, n, 0))
}

/// Hermitian H₀ split into its drive orders, in units of ħ (rad/ns).
pub fn coherent_parts(config: &ModelConfig, basis: &Arc<Basis>) -> Result<HamiltonianParts> {
    config.check_basis(basis)?;
    let zero = Operator::zeros(basis);
    match config.kind {
        ModelKind::FourLevel => {
            let a_l = annihilation_operator(basis, Mode::L)?;
            let a_r = annihilation_operator(basis, Mode::R)?;
            let left = &a_l * &atomic_projector(basis, E, GMinus)?;
            let right = &a_r * &atomic_projector(basis, E, GPlus)?;
            let cavity = &(&left + &left.dagger()) + &(&right + &right.dagger());
            let pump = &atomic_projector(basis, G1, E)? + &atomic_projector(basis, E, G1)?;
            Ok(HamiltonianParts { fixed: cavity.scale_real(config.g), drive: pump.scale_real(0.5), drive_sq: zero })
        }
        ModelKind::ThreeLevelRaman => {
            let a = annihilation_operator(basis, Mode::L)?;
            let jc = &a * &atomic_projector(basis, E, G2)?;
            let cavity = (&jc + &jc.dagger()).scale_real(config.g);
            let detunings = &atomic_projector(basis, E, E)?.scale_real(config.delta)
                + &atomic_projector(basis, G2, G2)?.scale_real(config.raman_delta());
            let pump = &atomic_projector(basis, G1, E)? + &atomic_projector(basis, E, G1)?;
            Ok(HamiltonianParts { fixed: &cavity + &detunings, drive: pump.scale_real(0.5), drive_sq: zero })
        }
        ModelKind::EffectiveTwoLevel => {
            if config.delta == 0.0 {
                return Err(Error::ZeroDetuning);
            }
            let coupling = Complex64::new(0.5 * config.g / config.delta, 0.0);
            let mut m = nalgebra::DMatrix::zeros(2, 2);
            m[(0, 1)] = coupling;
            m[(1, 0)] = coupling;
            let drive = Operator::from_matrix(basis, m)?;
            Ok(HamiltonianParts { fixed: zero.clone(), drive, drive_sq: zero })
        }
    }
}

/// Decay channels of the model. Their rates sum to 2Γ where H_eff = H₀ − iΓ.
pub fn loss_channels(config: &ModelConfig, basis: &Arc<Basis>) -> Result<Vec<LossChannel>> {
    config.check_basis(basis)?;
    let zero = Operator::zeros(basis);
    let spontaneous_jumps = |targets: &[AtomicLevel]| -> Result<Vec<Operator>> {
        targets
            .iter()
            .zip(&config.branching)
            .map(|(&mu, &beta)| Ok(atomic_projector(basis, mu, E)?.scale_real((config.gamma * beta).sqrt())))
            .collect()
    };
    match config.kind {
        ModelKind::FourLevel | ModelKind::ThreeLevelRaman => {
            let mut channels = Vec::new();
            for &mode in config.kind.modes() {
                channels.push(LossChannel {
                    channel: if mode == Mode::L { Channel::CavityL } else { Channel::CavityR },
                    rate: number_operator(basis, mode)?.scale_real(2.0 * config.kappa),
                    rate_drive_sq: zero.clone(),
                    jumps: vec![annihilation_operator(basis, mode)?.scale_real((2.0 * config.kappa).sqrt())],
                });
            }
            channels.push(LossChannel {
                channel: Channel::Spontaneous,
                rate: atomic_projector(basis, E, E)?.scale_real(config.gamma),
                rate_drive_sq: zero,
                jumps: spontaneous_jumps(config.kind.decay_targets())?,
            });
            Ok(channels)
        }
        ModelKind::EffectiveTwoLevel => {
            if config.delta == 0.0 {
                return Err(Error::ZeroDetuning);
            }
            let d2 = config.delta * config.delta;
            let photon = target(basis, G2, 1)?;
            let ground = target(basis, G1, 0)?;
            // |g2,1⟩ keeps a (g/Δ)² admixture of |e,0⟩ and decays through it.
            let cavity_leg = photon.scale_real(config.gamma * config.g * config.g / d2);
            Ok(vec![
                LossChannel {
                    channel: Channel::CavityL,
                    rate: photon.scale_real(2.0 * config.kappa),
                    rate_drive_sq: zero.clone(),
                    jumps: vec![],
                },
                LossChannel {
                    channel: Channel::Spontaneous,
                    rate: cavity_leg,
                    rate_drive_sq: ground.scale_real(0.25 * config.gamma / d2),
                    jumps: vec![],
                },
            ])
        }
    }
}

/// H_eff = H₀ − iΓ split into drive orders.
pub fn effective_parts(config: &ModelConfig, basis: &Arc<Basis>) -> Result<HamiltonianParts> {
    let coherent = coherent_parts(config, basis)?;
    let mut fixed = coherent.fixed;
    let mut drive_sq = coherent.drive_sq;
    let half_i = Complex64::new(0.0, -0.5);
    for ch in loss_channels(config, basis)? {
        fixed = &fixed + &ch.rate.scale(half_i);
        drive_sq = &drive_sq + &ch.rate_drive_sq.scale(half_i);
    }
    Ok(HamiltonianParts { fixed, drive: coherent.drive, drive_sq })
}

pub fn build_coherent_hamiltonian(config: &ModelConfig, basis: &Arc<Basis>, t: f64) -> Result<Operator> {
    Ok(coherent_parts(config, basis)?.at(config.pulse.amplitude(t)))
}

/// Non-Hermitian H_eff = H₀ − iκ Σ a†a − i(γ/2)σ_ee (or its Raman-reduced analogue).
pub fn build_effective_hamiltonian(config: &ModelConfig, basis: &Arc<Basis>, t: f64) -> Result<Operator> {
    Ok(effective_parts(config, basis)?.at(config.pulse.amplitude(t)))
}

/// The reduced non-Hermitian two-level Hamiltonian on {|g1,0⟩, |g2,1⟩}.
pub fn build_effective_two_level(config: &ModelConfig, basis: &Arc<Basis>, t: f64) -> Result<Operator> {
    if config.kind != ModelKind::EffectiveTwoLevel {
        return Err(Error::Unsupported(format!(
            "effective two-level Hamiltonian requested for a {} configuration",
            config.kind
        )));
    }
    build_effective_hamiltonian(config, basis, t)
}

/// dρ/dt written term by term from the master equation, with dense matrices.
///
/// Used as the reference route; the integrators use a compiled sparse form.
pub fn lindblad_rhs(config: &ModelConfig, basis: &Arc<Basis>, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if config.kind == ModelKind::EffectiveTwoLevel {
        return Err(Error::Unsupported("master equation for the effective two-level model".into()));
    }
    config.check_basis(basis)?;
    let dim = basis.dim();
    if rho.matrix().nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho.matrix().nrows() });
    }
    let r = rho.matrix();
    let h = build_coherent_hamiltonian(config, basis, t)?;
    let h = h.matrix();
    let mut out = (h * r - r * h) * (-I);

    let kappa = Complex64::new(config.kappa, 0.0);
    for &mode in config.kind.modes() {
        let a = annihilation_operator(basis, mode)?;
        let a = a.matrix();
        let n = a.adjoint() * a;
        out += (a * r * a.adjoint() * Complex64::new(2.0, 0.0) - &n * r - r * &n) * kappa;
    }

    let see = atomic_projector(basis, E, E)?;
    let see = see.matrix();
    for (&mu, &beta) in config.kind.decay_targets().iter().zip(&config.branching) {
        let lower = atomic_projector(basis, mu, E)?;
        let raise = atomic_projector(basis, E, mu)?;
        let term = lower.matrix() * r * raise.matrix() * Complex64::new(2.0, 0.0) - see * r - r * see;
        out += term * Complex64::new(0.5 * config.gamma * beta, 0.0);
    }
    DensityMatrix::from_matrix(basis, out)
}
