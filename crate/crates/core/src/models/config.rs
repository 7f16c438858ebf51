use std::f64::consts::PI;
use std::sync::Arc;

use super::pulse::Pulse;
use super::raman::{raman_effective_params, stark_compensated_delta};
use crate::error::{Error, Result};
use crate::quantum::{build_basis, Basis, ModelKind};

/// Rates are quoted as ordinary frequencies in MHz with an explicit 2π;
/// internally everything is an angular frequency in rad/ns. 1 MHz ↦ 2π·10⁻³ rad/ns.
pub const RAD_PER_NS_PER_MHZ: f64 = 2.0 * PI * 1e-3;

pub fn mhz(f: f64) -> f64 {
    f * RAD_PER_NS_PER_MHZ
}

pub fn to_mhz(w: f64) -> f64 {
    w / RAD_PER_NS_PER_MHZ
}

/// How the Raman two-photon detuning δ is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RamanDetuning {
    /// δ in rad/ns.
    Fixed(f64),
    /// δ set so the dressed |g1,0⟩ and |g2,1⟩ levels are degenerate at peak drive.
    StarkCompensated,
}

/// Physical parameters, all angular frequencies in rad/ns.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Atom–cavity coupling g.
    pub g: f64,
    /// Cavity field decay κ (photon number decays at 2κ).
    pub kappa: f64,
    /// Excited-state population decay γ.
    pub gamma: f64,
    /// Branching ratios β_μ in the order of [`ModelKind::decay_targets`].
    pub branching: Vec<f64>,
    /// Pump detuning Δ; unused by the resonant four-level model.
    pub delta: f64,
    pub raman_detuning: RamanDetuning,
    pub pulse: Pulse,
    pub n_max: u32,
}

impl ModelConfig {
    fn base(kind: ModelKind, g: f64, kappa: f64, gamma: f64, pulse: Pulse) -> Self {
        let k = kind.decay_targets().len();
        Self {
            kind,
            g,
            kappa,
            gamma,
            branching: vec![1.0 / k as f64; k],
            delta: 0.0,
            raman_detuning: RamanDetuning::Fixed(0.0),
            pulse,
            n_max: 1,
        }
    }

    pub fn four_level(g: f64, kappa: f64, gamma: f64, pulse: Pulse) -> Self {
        Self::base(ModelKind::FourLevel, g, kappa, gamma, pulse)
    }

    pub fn three_level_raman(g: f64, kappa: f64, gamma: f64, delta: f64, raman: RamanDetuning, pulse: Pulse) -> Self {
        Self { delta, raman_detuning: raman, ..Self::base(ModelKind::ThreeLevelRaman, g, kappa, gamma, pulse) }
    }

    pub fn effective_two_level(g: f64, kappa: f64, gamma: f64, delta: f64, pulse: Pulse) -> Self {
        Self { delta, ..Self::base(ModelKind::EffectiveTwoLevel, g, kappa, gamma, pulse) }
    }

    /// (g, κ, γ, Ω₀) = 2π·(45, 45, 4.5, 45) MHz with a 210 ns sin² pump.
    pub fn headline() -> Self {
        Self::four_level(mhz(45.0), mhz(45.0), mhz(4.5), Pulse::sin2(mhz(45.0), 210.0))
    }

    pub fn with_branching(mut self, branching: Vec<f64>) -> Self {
        self.branching = branching;
        self
    }

    pub fn with_n_max(mut self, n_max: u32) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        if kind.decay_targets().len() != self.branching.len() {
            let k = kind.decay_targets().len();
            self.branching = vec![1.0 / k as f64; k];
        }
        self.kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, v) in [("g", self.g), ("kappa", self.kappa), ("gamma", self.gamma)] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !self.delta.is_finite() {
            return bad(format!("delta must be finite, got {}", self.delta));
        }
        if let RamanDetuning::Fixed(d) = self.raman_detuning {
            if !d.is_finite() {
                return bad(format!("raman detuning must be finite, got {d}"));
            }
        }
        let expected = self.kind.decay_targets().len();
        if self.branching.len() != expected {
            return bad(format!("{} model needs {expected} branching ratios, got {}", self.kind, self.branching.len()));
        }
        if self.branching.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return bad("branching ratios must be finite and >= 0".into());
        }
        let sum: f64 = self.branching.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return bad(format!("branching ratios must sum to 1, got {sum}"));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidCutoff(0));
        }
        if self.kind == ModelKind::EffectiveTwoLevel && self.delta == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        self.pulse.validate()
    }

    pub fn basis(&self) -> Result<Arc<Basis>> {
        build_basis(self.kind, self.n_max)
    }

    pub fn check_basis(&self, basis: &Basis) -> Result<()> {
        if basis.kind() != self.kind {
            return Err(Error::KindMismatch { basis: basis.kind(), config: self.kind });
        }
        Ok(())
    }

    /// Effective Raman detuning δ in rad/ns.
    pub fn raman_delta(&self) -> f64 {
        match self.raman_detuning {
            RamanDetuning::Fixed(d) => d,
            RamanDetuning::StarkCompensated => stark_compensated_delta(self.pulse.peak, self.g, self.delta),
        }
    }

    /// (Ω_eff, γ_eff) at peak drive.
    pub fn raman_peak_params(&self) -> Result<(f64, f64)> {
        raman_effective_params(self.pulse.peak, self.g, self.delta, self.gamma)
    }

    /// Fastest rate in the model; sets the RK4 step guard.
    pub fn max_rate(&self) -> f64 {
        let base = [self.g, self.kappa, self.gamma, self.pulse.peak];
        let extra: Vec<f64> = match self.kind {
            ModelKind::FourLevel => vec![],
            ModelKind::ThreeLevelRaman => vec![self.delta.abs(), self.raman_delta().abs()],
            ModelKind::EffectiveTwoLevel => match self.raman_peak_params() {
                Ok((oe, ge)) => {
                    let cavity_leg = self.gamma * self.g * self.g / (self.delta * self.delta);
                    return [oe.abs(), ge, self.kappa, cavity_leg].into_iter().fold(0.0, f64::max);
                }
                Err(_) => vec![],
            },
        };
        base.into_iter().chain(extra).fold(0.0, f64::max)
    }

    /// Cooperativity g²/(κγ).
    pub fn cooperativity(&self) -> f64 {
        self.g * self.g / (self.kappa * self.gamma)
    }
}
