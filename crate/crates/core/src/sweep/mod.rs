//! Parameter grids, inner optimization and the constant-drive versus
//! adiabatic-ramp comparison.
//!
//! Every grid point or table row is an independent integration, so they are
//! farmed out through [`Execution`]; results are merged in grid order and are
//! identical for both execution modes.

mod evaluate;
mod optimize;
mod params;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::models::{ModelConfig, Pulse, RamanDetuning};
use crate::quantum::ModelKind;

pub use evaluate::{evaluate, Evaluation, EvaluationPolicy, Horizon, Objective};
pub use optimize::{optimize_inner, Bound, Optimum, SearchOptions};
pub use params::{apply_params, ParamName};

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub param: ParamName,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: ParamName, values: Vec<f64>) -> Self {
        Self { param, values }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub baseline: ModelConfig,
    /// Outer grid; the first axis varies slowest.
    pub axes: Vec<Axis>,
    pub objective: Objective,
    /// Parameters optimized at every grid point; empty for a plain scan.
    pub inner: Vec<Bound>,
    pub policy: EvaluationPolicy,
    pub search: SearchOptions,
}

impl SweepSpec {
    pub fn new(baseline: ModelConfig, axes: Vec<Axis>, objective: Objective) -> Self {
        Self {
            baseline,
            axes,
            objective,
            inner: Vec::new(),
            policy: EvaluationPolicy::default(),
            search: SearchOptions::default(),
        }
    }

    pub fn with_inner(mut self, inner: Vec<Bound>) -> Self {
        self.inner = inner;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::InvalidConfig("a sweep needs at least one axis".into()));
        }
        for (k, axis) in self.axes.iter().enumerate() {
            if axis.values.is_empty() {
                return Err(Error::InvalidConfig(format!("grid for {} is empty", axis.param)));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("grid for {} has non-finite values", axis.param)));
            }
            if axis.values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidConfig(format!("grid for {} must be strictly increasing", axis.param)));
            }
            if self.axes[..k].iter().any(|a| a.param == axis.param) || self.inner.iter().any(|b| b.param == axis.param)
            {
                return Err(Error::InvalidConfig(format!("parameter {} appears twice", axis.param)));
            }
        }
        self.baseline.validate()
    }

    /// All grid coordinates in row-major order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub coords: Vec<f64>,
    /// `None` marks a hole; see `flags`.
    pub value: Option<f64>,
    pub t_eval: Option<f64>,
    /// Optimized inner parameters, in the order of `SweepResult::inner`.
    pub argmax: Vec<f64>,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub axes: Vec<ParamName>,
    pub inner: Vec<ParamName>,
    pub objective: Objective,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Point with the largest value, ignoring holes.
    pub fn best(&self) -> Option<&SweepPoint> {
        self.points.iter().filter(|p| p.value.is_some()).max_by(|a, b| a.value.unwrap().total_cmp(&b.value.unwrap()))
    }
}

fn sweep_point(spec: &SweepSpec, coords: &[f64], exec: Execution) -> SweepPoint {
    let values: Vec<(ParamName, f64)> = spec.axes.iter().map(|a| a.param).zip(coords.iter().copied()).collect();
    let hole = |flag: String| SweepPoint {
        coords: coords.to_vec(),
        value: None,
        t_eval: None,
        argmax: vec![f64::NAN; spec.inner.len()],
        flags: vec![flag],
    };
    let config = match apply_params(&spec.baseline, &values) {
        Ok(c) => c,
        Err(e) => return hole(e.to_string()),
    };
    if spec.inner.is_empty() {
        let e = evaluate(&config, spec.objective, &spec.policy);
        return SweepPoint {
            coords: coords.to_vec(),
            value: e.value,
            t_eval: e.t_eval,
            argmax: Vec::new(),
            flags: e.flags,
        };
    }
    match optimize_inner(&config, &spec.inner, spec.objective, &spec.policy, &spec.search, exec) {
        Ok(opt) => SweepPoint {
            coords: coords.to_vec(),
            value: Some(opt.value),
            t_eval: opt.t_eval,
            argmax: opt.argmax.iter().map(|(_, v)| *v).collect(),
            flags: Vec::new(),
        },
        Err(e) => hole(e.to_string()),
    }
}

/// Evaluate (or optimize) the objective at every grid point. Failed points are
/// kept as holes with their diagnostics.
pub fn grid_sweep(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let points = spec.points();
    let results = exec.map(&points, |coords| sweep_point(spec, coords, exec));
    Ok(SweepResult {
        axes: spec.axes.iter().map(|a| a.param).collect(),
        inner: spec.inner.iter().map(|b| b.param).collect(),
        objective: spec.objective,
        points: results,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Constant pump with the Raman detuning compensating the ac Stark shifts,
    /// optimized over Ω/Δ.
    ConstantRaman,
    /// Pump ramped on under an always-on cavity coupling, optimized over
    /// Ω/Δ, Δ/γ and δ/γ.
    AdiabaticRamp,
}

impl Protocol {
    pub fn key(self) -> &'static str {
        match self {
            Protocol::ConstantRaman => "constant",
            Protocol::AdiabaticRamp => "adiabatic",
        }
    }

    /// The protocol's drive applied to `config`.
    pub fn configure(self, config: &ModelConfig, options: &CompareOptions) -> ModelConfig {
        let peak = config.pulse.peak;
        let mut c = config.clone().with_kind(ModelKind::ThreeLevelRaman);
        match self {
            Protocol::ConstantRaman => {
                c.pulse = Pulse::constant(peak);
                c.raman_detuning = RamanDetuning::StarkCompensated;
            }
            Protocol::AdiabaticRamp => {
                c.pulse = Pulse::ramp_on(peak, options.ramp_duration);
                if c.raman_detuning == RamanDetuning::StarkCompensated {
                    c.raman_detuning = RamanDetuning::Fixed(c.raman_delta());
                }
            }
        }
        c
    }

    pub fn free(self, config: &ModelConfig) -> Vec<Bound> {
        let bound = |p| Bound::default_for(p, config).expect("default bounds exist for protocol parameters");
        match self {
            Protocol::ConstantRaman => vec![bound(ParamName::OmegaOverDelta)],
            Protocol::AdiabaticRamp => vec![
                bound(ParamName::OmegaOverDelta),
                bound(ParamName::DeltaOverGamma),
                bound(ParamName::DeltaRamanOverGamma),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareOptions {
    /// Ramp time T₀ of the adiabatic protocol, ns.
    pub ramp_duration: f64,
    pub objectives: Vec<Objective>,
    pub policy: EvaluationPolicy,
    pub search: SearchOptions,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            ramp_duration: 200.0,
            objectives: vec![Objective::SuccessRate, Objective::EmissionRate],
            policy: EvaluationPolicy::default(),
            search: SearchOptions::default(),
        }
    }
}

/// One optimized cell of the comparison table.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub protocol: Protocol,
    pub objective: Objective,
    pub optimum: Option<Optimum>,
    pub flag: Option<String>,
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        self.optimum.as_ref().map(|o| o.value)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub kappa_over_gamma: f64,
    pub cells: Vec<Cell>,
}

impl ComparisonRow {
    pub fn cell(&self, protocol: Protocol, objective: Objective) -> Option<&Cell> {
        self.cells.iter().find(|c| c.protocol == protocol && c.objective == objective)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub objectives: Vec<Objective>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    /// max − min of a column over κ/γ, `None` if any entry is a hole.
    pub fn spread(&self, protocol: Protocol, objective: Objective) -> Option<f64> {
        let values: Option<Vec<f64>> =
            self.rows.iter().map(|r| r.cell(protocol, objective).and_then(Cell::value)).collect();
        let values = values?;
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        Some(max - min)
    }

    pub fn is_flagged(&self) -> bool {
        self.rows.iter().flat_map(|r| &r.cells).any(|c| c.flag.is_some())
    }
}

/// Optimize both protocols for each κ/γ, holding the baseline's γ and
/// cooperativity fixed (g = √(Cκγ)).
pub fn compare_protocols(
    baseline: &ModelConfig,
    kappa_over_gamma: &[f64],
    options: &CompareOptions,
    exec: Execution,
) -> Result<ComparisonTable> {
    baseline.validate()?;
    if kappa_over_gamma.is_empty() || kappa_over_gamma.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::InvalidConfig("kappa/gamma grid must be non-empty and positive".into()));
    }
    if options.objectives.is_empty() {
        return Err(Error::InvalidConfig("at least one objective is required".into()));
    }
    let cooperativity = baseline.cooperativity();
    let mut jobs = Vec::new();
    for &x in kappa_over_gamma {
        let config =
            apply_params(baseline, &[(ParamName::KappaOverGamma, x), (ParamName::Cooperativity, cooperativity)])?;
        for protocol in [Protocol::ConstantRaman, Protocol::AdiabaticRamp] {
            for &objective in &options.objectives {
                jobs.push((x, protocol, objective, protocol.configure(&config, options)));
            }
        }
    }
    let cells = exec.map(&jobs, |(_, protocol, objective, config)| {
        let free = protocol.free(config);
        match optimize_inner(config, &free, *objective, &options.policy, &options.search, exec) {
            Ok(opt) => Cell { protocol: *protocol, objective: *objective, optimum: Some(opt), flag: None },
            Err(e) => Cell { protocol: *protocol, objective: *objective, optimum: None, flag: Some(e.to_string()) },
        }
    });
    let per_row = 2 * options.objectives.len();
    let rows = kappa_over_gamma
        .iter()
        .zip(cells.chunks(per_row))
        .map(|(&x, chunk)| ComparisonRow { kappa_over_gamma: x, cells: chunk.to_vec() })
        .collect();
    Ok(ComparisonTable { objectives: options.objectives.clone(), rows })
}
