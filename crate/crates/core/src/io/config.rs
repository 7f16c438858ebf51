//! Run configuration files.
//!
//! External units are MHz (ordinary frequency, the 2π is applied here) and ns.
//! Unknown keys are rejected, every number is range-checked before a
//! [`ModelConfig`] is built, and [`RunConfig::to_toml`] emits a canonical file
//! with every default written out.

use serde::{Deserialize, Serialize};

use crate::models::{mhz, ModelConfig, Pulse, PulseShape, RamanDetuning};
use crate::observables::Readout;
use crate::quantum::ModelKind;
use crate::solvers::IntegrationSpec;
use crate::sweep::{
    Axis, Bound, CompareOptions, EvaluationPolicy, Horizon, Objective, ParamName, SearchOptions, SweepSpec,
};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),

    #[error("missing section [{0}]")]
    MissingSection(&'static str),

    #[error("[{section}] is missing required key `{key}`")]
    MissingKey { section: &'static str, key: &'static str },

    #[error("{}[{section}] {key}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Range { section: &'static str, key: String, line: Option<usize>, message: String },

    #[error("cannot read config `{path}`: {source}")]
    Read { path: String, source: std::io::Error },
}

/// Two-photon detuning in units of γ, or `"stark"` for the compensating choice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RamanSetting {
    Named(RamanName),
    Value(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RamanName {
    Stark,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: Option<ModelKind>,
    pub g_mhz: Option<f64>,
    pub kappa_mhz: Option<f64>,
    pub gamma_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_over_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_raman_over_gamma: Option<RamanSetting>,
    pub branching: Option<Vec<f64>>,
    pub n_max: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeName {
    Constant,
    Sin2,
    RampOn,
}

impl From<ShapeName> for PulseShape {
    fn from(s: ShapeName) -> Self {
        match s {
            ShapeName::Constant => PulseShape::Constant,
            ShapeName::Sin2 => PulseShape::Sin2,
            ShapeName::RampOn => PulseShape::RampOn,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub shape: Option<ShapeName>,
    pub omega0_mhz: Option<f64>,
    /// Omitted for a constant drive that never switches off.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0_ns: Option<f64>,
    pub t_on_ns: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub dt_ns: Option<f64>,
    pub t_final_ns: Option<f64>,
    pub record_stride: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutName {
    RatioPeak,
    NumeratorPeak,
    Final,
}

/// One grid axis: explicit `values`, or `count` points from `start` to `stop`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisEntry {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

/// A free parameter; bounds default to the standard search windows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeEntry {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

/// Settings used by `sweep`, `optimize` and `compare`; all optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub readout_at_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_outer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_over_gamma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objectives: Option<Vec<Objective>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axis: Vec<AxisEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub free: Vec<FreeEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<ModelSection>,
    pub pulse: Option<PulseSection>,
    #[serde(default)]
    pub integration: IntegrationSection,
    #[serde(default)]
    pub task: TaskSection,
}

/// A parsed and validated configuration. `file` is the canonical form with
/// all defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub model: ModelConfig,
    pub integration: IntegrationSpec,
}

impl Serialize for Objective {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.key())
    }
}

impl<'de> Deserialize<'de> for Objective {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

const BUNDLED: &[(&str, &str)] = &[
    ("paper_fig2", include_str!("../../configs/paper_fig2.toml")),
    ("raman_constant", include_str!("../../configs/raman_constant.toml")),
    ("raman_sweep", include_str!("../../configs/raman_sweep.toml")),
    ("raman_optimize", include_str!("../../configs/raman_optimize.toml")),
    ("protocol_compare", include_str!("../../configs/protocol_compare.toml")),
];

/// Names of the configurations shipped with the binary.
pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Read a config from a file path, falling back to a bundled name.
pub fn load_config(source: &str) -> Result<RunConfig, ConfigError> {
    let path = std::path::Path::new(source);
    if path.exists() {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Read { path: source.to_string(), source: e })?;
        return parse_config(&text);
    }
    match bundled(source) {
        Some(text) => parse_config(text),
        None => Err(ConfigError::Read {
            path: source.to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled config"),
        }),
    }
}

/// Line (1-based) on which `key` is assigned inside `[section]`, for diagnostics.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        } else if current == section && t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('=')) {
            return Some(i + 1);
        }
    }
    None
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn err(&self, section: &'static str, key: &str, message: String) -> ConfigError {
        ConfigError::Range { section, key: key.to_string(), line: locate(self.text, section, key), message }
    }

    fn finite(&self, section: &'static str, key: &str, v: f64) -> Result<f64, ConfigError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(section, key, format!("must be finite, got {v}")))
        }
    }

    fn positive(&self, section: &'static str, key: &str, v: f64) -> Result<f64, ConfigError> {
        if self.finite(section, key, v)? > 0.0 {
            Ok(v)
        } else {
            Err(self.err(section, key, format!("must be > 0, got {v}")))
        }
    }

    fn non_negative(&self, section: &'static str, key: &str, v: f64) -> Result<f64, ConfigError> {
        if self.finite(section, key, v)? >= 0.0 {
            Ok(v)
        } else {
            Err(self.err(section, key, format!("must be >= 0, got {v}")))
        }
    }
}

fn required<T: Copy>(v: Option<T>, section: &'static str, key: &'static str) -> Result<T, ConfigError> {
    v.ok_or(ConfigError::MissingKey { section, key })
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut file: ConfigFile =
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string().trim_end().into()))?;
    let ck = Checker { text };

    // [model]
    let m = file.model.as_mut().ok_or(ConfigError::MissingSection("model"))?;
    let kind = required(m.kind, "model", "kind")?;
    let g = ck.positive("model", "g_mhz", required(m.g_mhz, "model", "g_mhz")?)?;
    let kappa = ck.positive("model", "kappa_mhz", required(m.kappa_mhz, "model", "kappa_mhz")?)?;
    let gamma = ck.positive("model", "gamma_mhz", required(m.gamma_mhz, "model", "gamma_mhz")?)?;
    let detuned = kind != ModelKind::FourLevel;
    let delta = match (detuned, m.delta_over_gamma) {
        (true, None) => return Err(ConfigError::MissingKey { section: "model", key: "delta_over_gamma" }),
        (true, Some(d)) => {
            if ck.finite("model", "delta_over_gamma", d)? == 0.0 {
                return Err(ck.err("model", "delta_over_gamma", "must be non-zero".into()));
            }
            d
        }
        (false, Some(_)) => {
            return Err(ck.err("model", "delta_over_gamma", "not used by the four-level model".into()));
        }
        (false, None) => 0.0,
    };
    let raman = match (detuned, m.delta_raman_over_gamma) {
        (false, Some(_)) => {
            return Err(ck.err("model", "delta_raman_over_gamma", "not used by the four-level model".into()));
        }
        (false, None) => None,
        (true, None) | (true, Some(RamanSetting::Named(RamanName::Stark))) => {
            Some(RamanSetting::Named(RamanName::Stark))
        }
        (true, Some(RamanSetting::Value(v))) => {
            Some(RamanSetting::Value(ck.finite("model", "delta_raman_over_gamma", v)?))
        }
    };
    m.delta_raman_over_gamma = raman;
    let targets = kind.decay_targets().len();
    let branching = m.branching.clone().unwrap_or_else(|| vec![1.0 / targets as f64; targets]);
    if branching.len() != targets {
        return Err(ck.err(
            "model",
            "branching",
            format!("{kind} model needs {targets} ratios, got {}", branching.len()),
        ));
    }
    if branching.iter().any(|b| !(b.is_finite() && *b >= 0.0)) || (branching.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(ck.err("model", "branching", "ratios must be >= 0 and sum to 1".into()));
    }
    // Renormalize so the model's tighter sum check holds for decimal input.
    let sum: f64 = branching.iter().sum();
    let branching_internal: Vec<f64> = branching.iter().map(|b| b / sum).collect();
    m.branching = Some(branching);
    let n_max = m.n_max.unwrap_or(1);
    if !(1..=8).contains(&n_max) {
        return Err(ck.err("model", "n_max", format!("must be between 1 and 8, got {n_max}")));
    }
    m.n_max = Some(n_max);

    // [pulse]
    let p = match file.pulse.as_mut() {
        Some(p) if p.shape.is_some() || p.omega0_mhz.is_some() || p.t0_ns.is_some() || p.t_on_ns.is_some() => p,
        _ => return Err(ConfigError::MissingSection("pulse")),
    };
    let shape = required(p.shape, "pulse", "shape")?;
    let omega0 = ck.non_negative("pulse", "omega0_mhz", required(p.omega0_mhz, "pulse", "omega0_mhz")?)?;
    let t0 = match (shape, p.t0_ns) {
        (ShapeName::Constant, None) => f64::INFINITY,
        (_, None) => return Err(ConfigError::MissingKey { section: "pulse", key: "t0_ns" }),
        (_, Some(t)) => ck.positive("pulse", "t0_ns", t)?,
    };
    let t_on = ck.non_negative("pulse", "t_on_ns", p.t_on_ns.unwrap_or(0.0))?;
    p.t_on_ns = Some(t_on);

    let gamma_rad = mhz(gamma);
    let pulse = Pulse { shape: shape.into(), peak: mhz(omega0), duration: t0, t_on };
    let mut model = ModelConfig::four_level(mhz(g), mhz(kappa), gamma_rad, pulse).with_kind(kind);
    model.branching = branching_internal;
    model.n_max = n_max;
    model.delta = delta * gamma_rad;
    model.raman_detuning = match raman {
        Some(RamanSetting::Value(v)) => RamanDetuning::Fixed(v * gamma_rad),
        _ if detuned => RamanDetuning::StarkCompensated,
        _ => RamanDetuning::Fixed(0.0),
    };
    model.validate().map_err(|e| ConfigError::Range {
        section: "model",
        key: "*".into(),
        line: None,
        message: e.to_string(),
    })?;

    // [integration]
    let i = &mut file.integration;
    let t_final = match i.t_final_ns {
        Some(t) => ck.positive("integration", "t_final_ns", t)?,
        None if t0.is_finite() => t_on + 3.0 * t0,
        None => return Err(ConfigError::MissingKey { section: "integration", key: "t_final_ns" }),
    };
    let dt = match i.dt_ns {
        Some(dt) => {
            let dt = ck.positive("integration", "dt_ns", dt)?;
            let limit = IntegrationSpec::step_limit(&model);
            if dt > limit {
                return Err(ck.err("integration", "dt_ns", format!("{dt} exceeds the stability limit {limit:.6} ns")));
            }
            dt
        }
        None => (0.2 * IntegrationSpec::step_limit(&model)).min(1.0),
    };
    let mut integration = IntegrationSpec::new(dt, t_final);
    integration = match i.record_stride {
        Some(0) => return Err(ck.err("integration", "record_stride", "must be at least 1".into())),
        Some(s) => integration.with_stride(s),
        None => integration.with_records(2000),
    };
    *i = IntegrationSection {
        dt_ns: Some(dt),
        t_final_ns: Some(t_final),
        record_stride: Some(integration.record_stride),
    };

    // [task]
    check_task(&file.task, &ck)?;

    Ok(RunConfig { file, model, integration })
}

/// Map an external parameter key (`*_mhz`, `t0_ns` or a ratio) to its internal
/// name and the factor converting external values to internal units.
pub fn external_param(key: &str) -> Option<(ParamName, f64)> {
    if let Some(base) = key.strip_suffix("_mhz") {
        let p: ParamName = base.parse().ok()?;
        return p.is_rate().then_some((p, mhz(1.0)));
    }
    if key == "t0_ns" {
        return Some((ParamName::T0, 1.0));
    }
    let p: ParamName = key.parse().ok()?;
    (!p.is_rate() && p != ParamName::T0).then_some((p, 1.0))
}

/// External key of an internal parameter, the inverse of [`external_param`].
pub fn external_key(p: ParamName) -> String {
    if p.is_rate() {
        format!("{}_mhz", p.key())
    } else if p == ParamName::T0 {
        "t0_ns".into()
    } else {
        p.key().into()
    }
}

fn check_task(task: &TaskSection, ck: &Checker) -> Result<(), ConfigError> {
    let bad = |key: &str, message: String| ck.err("task", key, message);
    for a in &task.axis {
        if external_param(&a.name).is_none() {
            return Err(bad("axis", format!("unknown parameter `{}`", a.name)));
        }
        let explicit = a.values.is_some();
        let ranged = a.start.is_some() || a.stop.is_some() || a.count.is_some();
        if explicit == ranged {
            return Err(bad("axis", format!("axis `{}` needs either `values` or `start`/`stop`/`count`", a.name)));
        }
        if ranged && (a.start.is_none() || a.stop.is_none() || a.count.is_none_or(|c| c == 0)) {
            return Err(bad("axis", format!("axis `{}` needs `start`, `stop` and `count` >= 1", a.name)));
        }
    }
    for f in &task.free {
        if external_param(&f.name).is_none() {
            return Err(bad("free", format!("unknown parameter `{}`", f.name)));
        }
    }
    if let Some(t) = task.horizon_ns {
        ck.positive("task", "horizon_ns", t)?;
    }
    if let Some(t) = task.readout_at_ns {
        ck.non_negative("task", "readout_at_ns", t)?;
        if task.readout.is_some() {
            return Err(bad("readout_at_ns", "give either `readout` or `readout_at_ns`".into()));
        }
    }
    if let Some(r) = task.ramp_ns {
        ck.positive("task", "ramp_ns", r)?;
    }
    if let Some(k) = &task.kappa_over_gamma {
        if k.is_empty() || k.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(bad("kappa_over_gamma", "must be a non-empty list of positive numbers".into()));
        }
    }
    if task.objectives.as_ref().is_some_and(|o| o.is_empty()) {
        return Err(bad("objectives", "must not be empty".into()));
    }
    if task.coarse_points.is_some_and(|c| c < 3) {
        return Err(bad("coarse_points", "must be at least 3".into()));
    }
    if task.max_outer == Some(0) {
        return Err(bad("max_outer", "must be at least 1".into()));
    }
    Ok(())
}

impl RunConfig {
    /// Canonical TOML; parsing it yields an identical `RunConfig`.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.file).expect("config sections serialize")
    }

    pub fn task(&self) -> &TaskSection {
        &self.file.task
    }

    pub fn readout(&self) -> Readout {
        let t = self.task();
        match (t.readout, t.readout_at_ns) {
            (_, Some(at)) => Readout::At(at),
            (Some(ReadoutName::NumeratorPeak), _) => Readout::NumeratorPeak,
            (Some(ReadoutName::Final), _) => Readout::Final,
            _ => Readout::RatioPeak,
        }
    }

    pub fn objective(&self) -> Objective {
        self.task().objective.unwrap_or(Objective::SuccessRate)
    }

    pub fn policy(&self) -> EvaluationPolicy {
        let horizon = self.task().horizon_ns.map_or(Horizon::Auto, Horizon::Fixed);
        EvaluationPolicy { readout: self.readout(), horizon, ..Default::default() }
    }

    pub fn search(&self) -> SearchOptions {
        let t = self.task();
        let d = SearchOptions::default();
        SearchOptions {
            coarse_points: t.coarse_points.unwrap_or(d.coarse_points),
            max_outer: t.max_outer.unwrap_or(d.max_outer),
            ..d
        }
    }

    pub fn axes(&self) -> Result<Vec<Axis>, ConfigError> {
        self.task()
            .axis
            .iter()
            .map(|a| {
                let (param, scale) = external_param(&a.name).expect("checked at parse time");
                let values = match &a.values {
                    Some(v) => v.clone(),
                    None => {
                        let (lo, hi, n) = (a.start.unwrap(), a.stop.unwrap(), a.count.unwrap());
                        if n == 1 {
                            vec![lo]
                        } else {
                            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
                        }
                    }
                };
                Ok(Axis::new(param, values.into_iter().map(|v| v * scale).collect()))
            })
            .collect()
    }

    pub fn free(&self) -> Result<Vec<Bound>, ConfigError> {
        self.task()
            .free
            .iter()
            .map(|f| {
                let (param, scale) = external_param(&f.name).expect("checked at parse time");
                let default = Bound::default_for(param, &self.model);
                let lower = f.lower.map(|v| v * scale).or(default.map(|b| b.lower));
                let upper = f.upper.map(|v| v * scale).or(default.map(|b| b.upper));
                match (lower, upper) {
                    (Some(lower), Some(upper)) => Ok(Bound::new(param, lower, upper)),
                    _ => Err(ConfigError::Range {
                        section: "task",
                        key: "free".into(),
                        line: None,
                        message: format!("`{}` has no default bounds; give `lower` and `upper`", f.name),
                    }),
                }
            })
            .collect()
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let axes = self.axes()?;
        if axes.is_empty() {
            return Err(ConfigError::MissingKey { section: "task", key: "axis" });
        }
        let mut spec = SweepSpec::new(self.model.clone(), axes, self.objective()).with_inner(self.free()?);
        spec.policy = self.policy();
        spec.search = self.search();
        Ok(spec)
    }

    pub fn compare_options(&self) -> CompareOptions {
        let t = self.task();
        let d = CompareOptions::default();
        CompareOptions {
            ramp_duration: t.ramp_ns.unwrap_or(d.ramp_duration),
            objectives: t.objectives.clone().unwrap_or(d.objectives),
            policy: self.policy(),
            search: self.search(),
        }
    }

    pub fn kappa_over_gamma(&self) -> Vec<f64> {
        self.task().kappa_over_gamma.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0])
    }
}
