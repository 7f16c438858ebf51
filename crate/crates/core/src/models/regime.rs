use super::config::ModelConfig;
use crate::quantum::ModelKind;

/// A strong inequality `a ≫ b` is taken to hold when `a/b` reaches this factor.
pub const STRONG_MARGIN: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamanWindow {
    /// κ/g
    pub lower: f64,
    /// Ω/Δ at peak drive
    pub ratio: f64,
    /// g/γ
    pub upper: f64,
    pub inside: bool,
}

/// Where a parameter set sits relative to the bad-cavity and Raman regimes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeReport {
    /// C = g²/(κγ)
    pub cooperativity: f64,
    /// N₀ = 1/C
    pub critical_atom_number: f64,
    /// κ²/g², must be ≫ 1 for the photon to leave before it is reabsorbed.
    pub cavity_margin: f64,
    /// g²/(κγ), must be ≫ 1 for the cavity to beat spontaneous emission.
    pub atom_margin: f64,
    pub bad_cavity_ok: bool,
    /// Only reported for the Raman models.
    pub raman_window: Option<RamanWindow>,
}

pub fn regime_report(config: &ModelConfig) -> RegimeReport {
    let (g, kappa, gamma) = (config.g, config.kappa, config.gamma);
    let cooperativity = config.cooperativity();
    let cavity_margin = kappa * kappa / (g * g);
    let atom_margin = g * g / (kappa * gamma);
    let raman_window = match config.kind {
        ModelKind::FourLevel => None,
        ModelKind::ThreeLevelRaman | ModelKind::EffectiveTwoLevel => {
            let lower = kappa / g;
            let ratio = (config.pulse.peak / config.delta).abs();
            let upper = g / gamma;
            Some(RamanWindow { lower, ratio, upper, inside: lower < ratio && ratio < upper })
        }
    };
    RegimeReport {
        cooperativity,
        critical_atom_number: 1.0 / cooperativity,
        cavity_margin,
        atom_margin,
        bad_cavity_ok: cavity_margin >= STRONG_MARGIN && atom_margin >= STRONG_MARGIN,
        raman_window,
    }
}
