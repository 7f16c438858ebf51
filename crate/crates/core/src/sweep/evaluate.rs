use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::{ModelConfig, PulseShape};
use crate::observables::{emission_rate, probability_bookkeeping, success_rate, Readout};
use crate::quantum::{AtomicLevel, BasisState};
use crate::solvers::{integrate, IntegrationSpec, Solver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Conditional probability of ending in |g2,1⟩.
    SuccessRate,
    /// Total probability of a photon leaving through the cavity.
    EmissionRate,
}

impl Objective {
    pub fn key(self) -> &'static str {
        match self {
            Objective::SuccessRate => "success_rate",
            Objective::EmissionRate => "emission_rate",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "success_rate" => Ok(Objective::SuccessRate),
            "emission_rate" => Ok(Objective::EmissionRate),
            _ => Err(Error::InvalidConfig(format!("unknown objective `{s}` (expected success_rate or emission_rate)"))),
        }
    }
}

/// Integration window for success-rate evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    /// `span` quarter transfer periods π/(2Ω_eff) for a constant drive,
    /// t_on + 3T₀ for shaped pulses.
    Auto,
    /// Up to the end of the pulse (or ramp).
    PulseEnd,
    Fixed(f64),
}

/// How one parameter point is turned into an objective value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvaluationPolicy {
    pub readout: Readout,
    pub horizon: Horizon,
    /// Number of π/(2Ω_eff) intervals covered by the automatic constant-drive horizon.
    pub span: f64,
    /// dt as a fraction of the step guard.
    pub step_fraction: f64,
    pub max_dt: f64,
    pub records: usize,
    /// Success-rate windows are clipped to this many ns.
    pub max_horizon: f64,
    /// Emission runs stop at this time, or earlier once ‖ψ‖² < `stop_below_norm`.
    pub emission_horizon: f64,
    pub stop_below_norm: f64,
}

impl Default for EvaluationPolicy {
    fn default() -> Self {
        Self {
            readout: Readout::RatioPeak,
            horizon: Horizon::Auto,
            span: 4.0,
            step_fraction: 0.8,
            max_dt: 1.0,
            records: 4000,
            max_horizon: 1e5,
            emission_horizon: 2e4,
            stop_below_norm: 1e-4,
        }
    }
}

impl EvaluationPolicy {
    pub fn dt(&self, config: &ModelConfig) -> f64 {
        (self.step_fraction * IntegrationSpec::step_limit(config)).min(self.max_dt)
    }

    pub fn success_horizon(&self, config: &ModelConfig) -> Result<f64> {
        let pulse = &config.pulse;
        let t = match self.horizon {
            Horizon::Fixed(t) => t,
            Horizon::PulseEnd => pulse.settled_after(),
            Horizon::Auto if pulse.shape == PulseShape::Constant && pulse.duration.is_infinite() => {
                let (omega_eff, _) = config.raman_peak_params()?;
                if omega_eff == 0.0 {
                    return Err(Error::Undefined("no effective Raman coupling, transfer time is infinite".into()));
                }
                self.span * PI / (2.0 * omega_eff.abs())
            }
            Horizon::Auto => pulse.t_on + 3.0 * pulse.duration,
        };
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidConfig(format!("evaluation horizon must be positive and finite, got {t}")));
        }
        Ok(t.min(self.max_horizon))
    }

    pub fn spec(&self, config: &ModelConfig, objective: Objective) -> Result<IntegrationSpec> {
        let dt = self.dt(config);
        Ok(match objective {
            Objective::SuccessRate => {
                IntegrationSpec::new(dt, self.success_horizon(config)?).with_records(self.records)
            }
            Objective::EmissionRate => IntegrationSpec::new(dt, self.emission_horizon)
                .with_records(self.records)
                .stopping_below(self.stop_below_norm),
        })
    }
}

/// Outcome of one point. `value` is `None` for a hole, with the reasons in `flags`.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Option<f64>,
    /// Readout time for success rates, final time for emission.
    pub t_eval: Option<f64>,
    pub residual: Option<f64>,
    pub flags: Vec<String>,
}

impl Evaluation {
    fn hole(flag: String) -> Self {
        Self { value: None, t_eval: None, residual: None, flags: vec![flag] }
    }

    /// Value for maximization; holes rank below everything.
    pub fn score(&self) -> f64 {
        self.value.unwrap_or(f64::NEG_INFINITY)
    }
}

pub fn evaluate(config: &ModelConfig, objective: Objective, policy: &EvaluationPolicy) -> Evaluation {
    match evaluate_inner(config, objective, policy) {
        Ok(e) => e,
        Err(e) => Evaluation::hole(e.to_string()),
    }
}

fn evaluate_inner(config: &ModelConfig, objective: Objective, policy: &EvaluationPolicy) -> Result<Evaluation> {
    config.validate()?;
    let spec = policy.spec(config, objective)?;
    let traj = integrate(config, &spec, Solver::Conditional)?;
    let book = probability_bookkeeping(&traj);
    book.check()?;
    let (value, t_eval) = match objective {
        Objective::SuccessRate => {
            let target = BasisState::new(AtomicLevel::G2, 1, 0);
            let r = success_rate(&traj, &target, policy.readout)?;
            (r.value, r.t)
        }
        Objective::EmissionRate => (emission_rate(&traj)?, traj.horizon()),
    };
    Ok(Evaluation { value: Some(value), t_eval: Some(t_eval), residual: Some(book.residual), flags: Vec::new() })
}
