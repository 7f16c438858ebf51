use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::{ModelConfig, RamanDetuning};

/// A swept or optimized quantity. Absolute rates are in rad/ns, T₀ in ns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamName {
    // Declaration order is the order in which parameters are applied, so
    // ratios always see the already-updated quantities they refer to.
    Gamma,
    Kappa,
    KappaOverGamma,
    G,
    Cooperativity,
    Delta,
    DeltaOverGamma,
    DeltaRaman,
    DeltaRamanOverGamma,
    Omega0,
    OmegaOverDelta,
    T0,
}

impl ParamName {
    pub const ALL: [ParamName; 12] = [
        ParamName::Gamma,
        ParamName::Kappa,
        ParamName::KappaOverGamma,
        ParamName::G,
        ParamName::Cooperativity,
        ParamName::Delta,
        ParamName::DeltaOverGamma,
        ParamName::DeltaRaman,
        ParamName::DeltaRamanOverGamma,
        ParamName::Omega0,
        ParamName::OmegaOverDelta,
        ParamName::T0,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ParamName::Gamma => "gamma",
            ParamName::Kappa => "kappa",
            ParamName::KappaOverGamma => "kappa_over_gamma",
            ParamName::G => "g",
            ParamName::Cooperativity => "cooperativity",
            ParamName::Delta => "delta",
            ParamName::DeltaOverGamma => "delta_over_gamma",
            ParamName::DeltaRaman => "delta_raman",
            ParamName::DeltaRamanOverGamma => "delta_raman_over_gamma",
            ParamName::Omega0 => "omega0",
            ParamName::OmegaOverDelta => "omega_over_delta",
            ParamName::T0 => "t0",
        }
    }

    /// Whether the value is an angular frequency (as opposed to a ratio or a time).
    pub fn is_rate(self) -> bool {
        matches!(
            self,
            ParamName::Gamma
                | ParamName::Kappa
                | ParamName::G
                | ParamName::Delta
                | ParamName::DeltaRaman
                | ParamName::Omega0
        )
    }

    pub fn read(self, c: &ModelConfig) -> f64 {
        match self {
            ParamName::Gamma => c.gamma,
            ParamName::Kappa => c.kappa,
            ParamName::KappaOverGamma => c.kappa / c.gamma,
            ParamName::G => c.g,
            ParamName::Cooperativity => c.cooperativity(),
            ParamName::Delta => c.delta,
            ParamName::DeltaOverGamma => c.delta / c.gamma,
            ParamName::DeltaRaman => c.raman_delta(),
            ParamName::DeltaRamanOverGamma => c.raman_delta() / c.gamma,
            ParamName::Omega0 => c.pulse.peak,
            ParamName::OmegaOverDelta => c.pulse.peak / c.delta.abs(),
            ParamName::T0 => c.pulse.duration,
        }
    }

    fn write(self, c: &mut ModelConfig, v: f64) -> Result<()> {
        let need_gamma = || {
            if c.gamma > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{} needs gamma > 0", self.key())))
            }
        };
        match self {
            ParamName::Gamma => c.gamma = v,
            ParamName::Kappa => c.kappa = v,
            ParamName::KappaOverGamma => {
                need_gamma()?;
                c.kappa = v * c.gamma;
            }
            ParamName::G => c.g = v,
            ParamName::Cooperativity => {
                if v < 0.0 {
                    return Err(Error::InvalidConfig(format!("cooperativity must be >= 0, got {v}")));
                }
                c.g = (v * c.kappa * c.gamma).sqrt();
            }
            ParamName::Delta => c.delta = v,
            ParamName::DeltaOverGamma => {
                need_gamma()?;
                c.delta = v * c.gamma;
            }
            ParamName::DeltaRaman => c.raman_detuning = RamanDetuning::Fixed(v),
            ParamName::DeltaRamanOverGamma => {
                need_gamma()?;
                c.raman_detuning = RamanDetuning::Fixed(v * c.gamma);
            }
            ParamName::Omega0 => c.pulse.peak = v,
            ParamName::OmegaOverDelta => c.pulse.peak = v * c.delta.abs(),
            ParamName::T0 => c.pulse.duration = v,
        }
        Ok(())
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.key() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown parameter `{s}`")))
    }
}

/// Apply parameter values to a copy of `baseline` in canonical order and validate it.
pub fn apply_params(baseline: &ModelConfig, values: &[(ParamName, f64)]) -> Result<ModelConfig> {
    let mut sorted = values.to_vec();
    sorted.sort_by_key(|(p, _)| *p);
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::InvalidConfig(format!("parameter `{}` given twice", w[0].0)));
        }
    }
    let mut c = baseline.clone();
    for (p, v) in sorted {
        if !v.is_finite() {
            return Err(Error::InvalidConfig(format!("{p} must be finite, got {v}")));
        }
        p.write(&mut c, v)?;
    }
    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{mhz, Pulse};

    fn raman() -> ModelConfig {
        let gamma = mhz(20.0);
        ModelConfig::three_level_raman(
            mhz(40.0),
            gamma,
            gamma,
            50.0 * gamma,
            RamanDetuning::StarkCompensated,
            Pulse::constant(1.0),
        )
    }

    #[test]
    fn names_round_trip() {
        for p in ParamName::ALL {
            assert_eq!(p.key().parse::<ParamName>().unwrap(), p);
        }
        assert!("omega".parse::<ParamName>().is_err());
    }

    #[test]
    fn ratios_see_updated_values() {
        let base = raman();
        let c = apply_params(
            &base,
            &[
                (ParamName::OmegaOverDelta, 0.3),
                (ParamName::DeltaOverGamma, 20.0),
                (ParamName::Gamma, 2.0 * base.gamma),
            ],
        )
        .unwrap();
        assert!((c.delta - 40.0 * base.gamma).abs() < 1e-12);
        assert!((c.pulse.peak - 0.3 * c.delta).abs() < 1e-12);
    }

    #[test]
    fn cooperativity_sets_coupling() {
        let c = apply_params(&raman(), &[(ParamName::Cooperativity, 30.0), (ParamName::KappaOverGamma, 2.0)]).unwrap();
        assert!((c.cooperativity() - 30.0).abs() < 1e-9);
        assert!((ParamName::KappaOverGamma.read(&c) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn read_inverts_write() {
        let base = raman();
        for p in ParamName::ALL.into_iter().filter(|p| p.read(&base).is_finite()) {
            let v = p.read(&base) * 1.1 + if p.is_rate() { 0.0 } else { 0.01 };
            let c = apply_params(&base, &[(p, v)]).unwrap();
            assert!((p.read(&c) - v).abs() < 1e-9 * v.abs().max(1.0), "{p}");
        }
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(apply_params(&raman(), &[(ParamName::Gamma, -1.0)]).is_err());
        assert!(apply_params(&raman(), &[(ParamName::G, f64::NAN)]).is_err());
        assert!(apply_params(&raman(), &[(ParamName::G, 1.0), (ParamName::G, 2.0)]).is_err());
    }
}
