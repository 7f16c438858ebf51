//! Fixed-step RK4 propagation of the no-jump state and of the density matrix.
//!
//! Both integrators carry the per-channel loss integrals as extra ODE
//! components, so P_L, P_R and P_spont come out with the same fourth-order
//! accuracy as the state itself.

mod compiled;
mod rk4;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelConfig, PulseShape};
use crate::quantum::{AtomicLevel, Basis, BasisState, DensityMatrix, Mode, ModelKind, StateVector};
use compiled::CompiledModel;
use rk4::Rk4;

/// Largest allowed `dt · fastest rate`.
pub const STEP_GUARD: f64 = 0.05;

/// Records kept by [`IntegrationSpec::for_config`] at most.
const DEFAULT_RECORDS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Rk4Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Conditional,
    Master,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Conditional => "conditional",
            Solver::Master => "master",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationSpec {
    /// Requested step in ns; the actual step is t_final/⌈t_final/dt⌉.
    pub dt: f64,
    pub t_final: f64,
    pub method: Method,
    pub record_stride: usize,
    /// Skip the step-size guard.
    pub allow_large_step: bool,
    /// Conditional runs stop early once ‖ψ‖² drops below this.
    pub stop_below_norm: Option<f64>,
}

impl IntegrationSpec {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self { dt, t_final, method: Method::Rk4Fixed, record_stride: 1, allow_large_step: false, stop_below_norm: None }
    }

    /// Step limit for a configuration: dt ≤ 0.05 / fastest rate.
    pub fn step_limit(config: &ModelConfig) -> f64 {
        let rate = config.max_rate();
        if rate > 0.0 {
            STEP_GUARD / rate
        } else {
            f64::INFINITY
        }
    }

    /// Defaults: dt at a fifth of the guard (capped at 1 ns), t_final = t_on + 3T₀,
    /// and a stride keeping about 2000 records.
    pub fn for_config(config: &ModelConfig) -> Result<Self> {
        if config.pulse.stays_on() {
            return Err(Error::InvalidConfig("t_final must be given for a drive that never switches off".into()));
        }
        let t_final = config.pulse.t_on + 3.0 * config.pulse.duration;
        Ok(Self::new((0.2 * Self::step_limit(config)).min(1.0), t_final).with_records(DEFAULT_RECORDS))
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    /// Choose the stride so that at most about `records` samples are kept.
    pub fn with_records(mut self, records: usize) -> Self {
        let steps = self.steps();
        self.record_stride = steps.div_ceil(records.max(1)).max(1);
        self
    }

    pub fn allowing_large_step(mut self) -> Self {
        self.allow_large_step = true;
        self
    }

    pub fn stopping_below(mut self, norm: f64) -> Self {
        self.stop_below_norm = Some(norm);
        self
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).ceil().max(1.0) as usize
    }

    pub fn validate(&self, config: &ModelConfig) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive and finite, got {}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_final must be positive and finite, got {}", self.t_final)));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record_stride must be at least 1".into()));
        }
        let limit = Self::step_limit(config);
        if !self.allow_large_step && self.dt > limit {
            return Err(Error::StepTooLarge { dt: self.dt, limit });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrajectoryKind {
    Conditional,
    Master,
}

#[derive(Clone, Debug)]
pub enum States {
    Vectors(Vec<StateVector>),
    Densities(Vec<DensityMatrix>),
}

/// Recorded samples of one run. `emitted_*` and `spontaneous` are the
/// cumulative loss probabilities through each channel up to `times[k]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub basis: Arc<Basis>,
    pub kind: TrajectoryKind,
    pub times: Vec<f64>,
    pub states: States,
    pub emitted_l: Vec<f64>,
    pub emitted_r: Vec<f64>,
    pub spontaneous: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("trajectories always hold the initial sample")
    }

    pub fn emitted(&self, mode: Mode) -> &[f64] {
        match mode {
            Mode::L => &self.emitted_l,
            Mode::R => &self.emitted_r,
        }
    }

    /// ‖ψ‖² for conditional runs, tr ρ for master runs.
    pub fn norm_sqr(&self, k: usize) -> f64 {
        match &self.states {
            States::Vectors(v) => v[k].norm_sqr(),
            States::Densities(d) => d[k].trace().re,
        }
    }

    /// |⟨s|ψ⟩|² or ⟨s|ρ|s⟩ at sample k.
    pub fn population(&self, k: usize, state: &BasisState) -> Option<f64> {
        match &self.states {
            States::Vectors(v) => v[k].amplitude(state).map(|a| a.norm_sqr()),
            States::Densities(d) => d[k].population(state),
        }
    }

    pub fn vectors(&self) -> Option<&[StateVector]> {
        match &self.states {
            States::Vectors(v) => Some(v),
            States::Densities(_) => None,
        }
    }

    pub fn densities(&self) -> Option<&[DensityMatrix]> {
        match &self.states {
            States::Densities(d) => Some(d),
            States::Vectors(_) => None,
        }
    }
}

/// |g1, 0, 0⟩
pub fn initial_state(basis: &Arc<Basis>) -> StateVector {
    StateVector::basis_state(basis, BasisState::new(AtomicLevel::G1, 0, 0)).expect("every basis contains |g1,0,0>")
}

pub fn initial_density(basis: &Arc<Basis>) -> DensityMatrix {
    DensityMatrix::from_pure(&initial_state(basis))
}

fn prepare(config: &ModelConfig, spec: &IntegrationSpec, basis: &Arc<Basis>) -> Result<CompiledModel> {
    config.validate()?;
    config.check_basis(basis)?;
    if basis.n_max() != config.n_max {
        return Err(Error::InvalidConfig(format!(
            "state built with photon cutoff {} but the configuration uses {}",
            basis.n_max(),
            config.n_max
        )));
    }
    spec.validate(config)?;
    CompiledModel::new(config, basis)
}

struct Recorder {
    times: Vec<f64>,
    acc: [Vec<f64>; 3],
}

impl Recorder {
    fn new(capacity: usize) -> Self {
        Self {
            times: Vec::with_capacity(capacity),
            acc: [Vec::with_capacity(capacity), Vec::with_capacity(capacity), Vec::with_capacity(capacity)],
        }
    }

    fn push(&mut self, t: f64, acc: &[Complex64]) {
        self.times.push(t);
        for (v, a) in self.acc.iter_mut().zip(acc) {
            v.push(a.re);
        }
    }
}

fn check_finite(t: f64, acc: &[Complex64]) -> Result<()> {
    if acc.iter().all(|z| z.re.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

/// Propagate ψ under H_eff from t = 0.
pub fn integrate_conditional(config: &ModelConfig, spec: &IntegrationSpec, psi0: &StateVector) -> Result<Trajectory> {
    let basis = psi0.basis().clone();
    let model = prepare(config, spec, &basis)?;
    let n = model.dim;
    let steps = spec.steps();
    let dt = spec.t_final / steps as f64;

    let mut y: Vec<Complex64> = psi0.amplitudes().iter().copied().collect();
    y.extend([Complex64::new(0.0, 0.0); 3]);
    let mut rk = Rk4::new(n + 3);
    let mut buf = vec![0.0; n];
    let mut rhs = |t: f64, y: &[Complex64], out: &mut [Complex64]| model.conditional_rhs(t, y, out, &mut buf);

    let capacity = steps / spec.record_stride + 2;
    let mut rec = Recorder::new(capacity);
    let mut states = Vec::with_capacity(capacity);
    rec.push(0.0, &y[n..]);
    states.push(StateVector::from_slice(&basis, &y[..n]));

    for k in 1..=steps {
        let t0 = (k - 1) as f64 * dt;
        rk.step(&mut rhs, t0, dt, &mut y);
        let t = k as f64 * dt;
        check_finite(t, &y[n..])?;
        let stop = spec.stop_below_norm.is_some_and(|limit| y[..n].iter().map(|z| z.norm_sqr()).sum::<f64>() < limit);
        if k % spec.record_stride == 0 || k == steps || stop {
            if y[..n].iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite { t });
            }
            rec.push(t, &y[n..]);
            states.push(StateVector::from_slice(&basis, &y[..n]));
        }
        if stop {
            break;
        }
    }
    let [emitted_l, emitted_r, spontaneous] = rec.acc;
    Ok(Trajectory {
        basis,
        kind: TrajectoryKind::Conditional,
        times: rec.times,
        states: States::Vectors(states),
        emitted_l,
        emitted_r,
        spontaneous,
    })
}

/// Propagate ρ under the Lindblad master equation from t = 0.
pub fn integrate_master(config: &ModelConfig, spec: &IntegrationSpec, rho0: &DensityMatrix) -> Result<Trajectory> {
    if config.kind == ModelKind::EffectiveTwoLevel {
        return Err(Error::Unsupported("master equation for the effective two-level model".into()));
    }
    let basis = rho0.basis().clone();
    let model = prepare(config, spec, &basis)?;
    let n = model.dim;
    let steps = spec.steps();
    let dt = spec.t_final / steps as f64;

    let mut y = rho0.to_row_major();
    y.extend([Complex64::new(0.0, 0.0); 3]);
    let mut rk = Rk4::new(n * n + 3);
    let mut buf = vec![0.0; n];
    let mut rhs = |t: f64, y: &[Complex64], out: &mut [Complex64]| model.master_rhs(t, y, out, &mut buf);

    let capacity = steps / spec.record_stride + 2;
    let mut rec = Recorder::new(capacity);
    let mut states = Vec::with_capacity(capacity);
    rec.push(0.0, &y[n * n..]);
    states.push(DensityMatrix::from_row_major(&basis, &y[..n * n]));

    for k in 1..=steps {
        let t0 = (k - 1) as f64 * dt;
        rk.step(&mut rhs, t0, dt, &mut y);
        let t = k as f64 * dt;
        check_finite(t, &y[n * n..])?;
        if k % spec.record_stride == 0 || k == steps {
            if y[..n * n].iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite { t });
            }
            rec.push(t, &y[n * n..]);
            states.push(DensityMatrix::from_row_major(&basis, &y[..n * n]));
        }
    }
    let [emitted_l, emitted_r, spontaneous] = rec.acc;
    Ok(Trajectory {
        basis,
        kind: TrajectoryKind::Master,
        times: rec.times,
        states: States::Densities(states),
        emitted_l,
        emitted_r,
        spontaneous,
    })
}

/// Run the chosen solver from |g1,0,0⟩.
pub fn integrate(config: &ModelConfig, spec: &IntegrationSpec, solver: Solver) -> Result<Trajectory> {
    let basis = config.basis()?;
    match solver {
        Solver::Conditional => integrate_conditional(config, spec, &initial_state(&basis)),
        Solver::Master => integrate_master(config, spec, &initial_density(&basis)),
    }
}

/// Bad-cavity adiabatic solution of the four-level no-jump equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticAmplitudes {
    pub g1: Complex64,
    pub e: Complex64,
    /// Equal for both emitting legs.
    pub g_mp: Complex64,
}

/// ∫₀ᵗ Ω² by composite Simpson for envelopes without a closed form.
fn integral_of_square_numeric(config: &ModelConfig, t: f64) -> f64 {
    let n = 4000;
    let h = t / n as f64;
    let f = |x: f64| config.pulse.amplitude(x).powi(2);
    let mut s = f(0.0) + f(t);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    s * h / 3.0
}

pub fn analytic_amplitudes(config: &ModelConfig, t: f64) -> Result<AdiabaticAmplitudes> {
    if config.kind != ModelKind::FourLevel {
        return Err(Error::Unsupported(format!("adiabatic amplitudes for the {} model", config.kind)));
    }
    if config.kappa <= 0.0 {
        return Err(Error::Undefined("adiabatic elimination needs kappa > 0".into()));
    }
    let integral = match config.pulse.integral_of_square(t) {
        Some(v) => v,
        None if config.pulse.shape == PulseShape::RampOn => integral_of_square_numeric(config, t.max(0.0)),
        None => return Err(Error::Unsupported(format!("{} pulse", config.pulse.shape.name()))),
    };
    let width = 4.0 * config.g * config.g / config.kappa + config.gamma;
    let g1 = Complex64::new((-integral / (2.0 * width)).exp(), 0.0);
    let e = Complex64::new(0.0, -config.pulse.amplitude(t) / width) * g1;
    let g_mp = Complex64::new(0.0, -config.g / config.kappa) * e;
    Ok(AdiabaticAmplitudes { g1, e, g_mp })
}

/// Result of rerunning an integration at half the step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub dt: f64,
    /// Largest change of the final P_L, P_R, P_spont and norm between dt and dt/2.
    pub max_deviation: f64,
    pub threshold: f64,
    pub converged: bool,
}

pub const CONVERGENCE_THRESHOLD: f64 = 1e-6;

pub fn convergence_check(config: &ModelConfig, spec: &IntegrationSpec, solver: Solver) -> Result<ConvergenceReport> {
    let finals = |s: &IntegrationSpec| -> Result<[f64; 4]> {
        let tr = integrate(config, s, solver)?;
        let k = tr.len() - 1;
        Ok([tr.emitted_l[k], tr.emitted_r[k], tr.spontaneous[k], tr.norm_sqr(k)])
    };
    let coarse_spec = IntegrationSpec { stop_below_norm: None, ..*spec };
    let fine_spec =
        IntegrationSpec { dt: spec.dt / 2.0, record_stride: spec.record_stride.saturating_mul(2), ..coarse_spec };
    let coarse = finals(&coarse_spec)?;
    let fine = finals(&fine_spec)?;
    let max_deviation = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ConvergenceReport {
        dt: spec.dt,
        max_deviation,
        threshold: CONVERGENCE_THRESHOLD,
        converged: max_deviation.is_finite() && max_deviation < CONVERGENCE_THRESHOLD,
    })
}
