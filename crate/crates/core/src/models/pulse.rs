use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    /// Ω₀ on [t_on, t_on + T₀]; `duration = ∞` keeps it on forever.
    Constant,
    /// Ω₀ sin²(π(t − t_on)/T₀) on [t_on, t_on + T₀], zero outside.
    Sin2,
    /// Ω₀ sin²(π(t − t_on)/(2T₀)) up to t_on + T₀, then held at Ω₀.
    RampOn,
}

impl PulseShape {
    pub fn name(self) -> &'static str {
        match self {
            PulseShape::Constant => "constant",
            PulseShape::Sin2 => "sin2",
            PulseShape::RampOn => "ramp-on",
        }
    }
}

/// Classical pump envelope Ω(t), angular frequency in rad/ns, times in ns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub shape: PulseShape,
    pub peak: f64,
    pub duration: f64,
    pub t_on: f64,
}

impl Pulse {
    pub fn constant(peak: f64) -> Self {
        Self { shape: PulseShape::Constant, peak, duration: f64::INFINITY, t_on: 0.0 }
    }

    pub fn sin2(peak: f64, duration: f64) -> Self {
        Self { shape: PulseShape::Sin2, peak, duration, t_on: 0.0 }
    }

    pub fn ramp_on(peak: f64, duration: f64) -> Self {
        Self { shape: PulseShape::RampOn, peak, duration, t_on: 0.0 }
    }

    pub fn off() -> Self {
        Self::constant(0.0)
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn with_t_on(mut self, t_on: f64) -> Self {
        self.t_on = t_on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.peak.is_finite() || self.peak < 0.0 {
            return bad(format!("pulse peak must be finite and >= 0, got {}", self.peak));
        }
        if !self.t_on.is_finite() || self.t_on < 0.0 {
            return bad(format!("pulse t_on must be finite and >= 0, got {}", self.t_on));
        }
        let infinite_ok = self.shape == PulseShape::Constant && self.duration == f64::INFINITY;
        if !(self.duration > 0.0 && (self.duration.is_finite() || infinite_ok)) {
            return bad(format!(
                "pulse duration must be positive and finite for {}, got {}",
                self.shape.name(),
                self.duration
            ));
        }
        Ok(())
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        let rel = t - self.t_on;
        if rel < 0.0 {
            return 0.0;
        }
        match self.shape {
            PulseShape::Constant => {
                if rel > self.duration {
                    0.0
                } else {
                    self.peak
                }
            }
            PulseShape::Sin2 => {
                if rel > self.duration {
                    0.0
                } else {
                    self.peak * (PI * rel / self.duration).sin().powi(2)
                }
            }
            PulseShape::RampOn => {
                if rel >= self.duration {
                    self.peak
                } else {
                    self.peak * (PI * rel / (2.0 * self.duration)).sin().powi(2)
                }
            }
        }
    }

    /// Time after which Ω stays constant (zero, or Ω₀ for a held ramp).
    pub fn settled_after(&self) -> f64 {
        self.t_on + self.duration
    }

    /// Whether Ω is still nonzero at arbitrarily late times.
    pub fn stays_on(&self) -> bool {
        match self.shape {
            PulseShape::RampOn => true,
            PulseShape::Constant => self.duration.is_infinite(),
            PulseShape::Sin2 => false,
        }
    }

    /// ∫₀ᵗ Ω²(t′) dt′ in closed form, for the shapes that have one.
    pub fn integral_of_square(&self, t: f64) -> Option<f64> {
        let rel = (t - self.t_on).clamp(0.0, self.duration);
        let p2 = self.peak * self.peak;
        match self.shape {
            PulseShape::Constant => Some(p2 * rel),
            PulseShape::Sin2 => {
                let t0 = self.duration;
                Some(
                    p2 * (3.0 * rel / 8.0 - t0 * (2.0 * PI * rel / t0).sin() / (4.0 * PI)
                        + t0 * (4.0 * PI * rel / t0).sin() / (32.0 * PI)),
                )
            }
            PulseShape::RampOn => None,
        }
    }
}
