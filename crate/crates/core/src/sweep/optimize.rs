use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::models::ModelConfig;

use super::evaluate::{evaluate, Evaluation, EvaluationPolicy, Objective};
use super::params::{apply_params, ParamName};

/// Search interval for one free parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    pub param: ParamName,
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub fn new(param: ParamName, lower: f64, upper: f64) -> Self {
        Self { param, lower, upper }
    }

    fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }

    /// Default search windows: Ω/Δ ∈ [0.05, 1], Δ ∈ [10γ, 100γ], δ ∈ [−5γ, 5γ].
    pub fn default_for(param: ParamName, baseline: &ModelConfig) -> Option<Self> {
        let gamma = baseline.gamma;
        let (lo, hi) = match param {
            ParamName::OmegaOverDelta => (0.05, 1.0),
            ParamName::DeltaOverGamma => (10.0, 100.0),
            ParamName::Delta => (10.0 * gamma, 100.0 * gamma),
            ParamName::DeltaRamanOverGamma => (-5.0, 5.0),
            ParamName::DeltaRaman => (-5.0 * gamma, 5.0 * gamma),
            _ => return None,
        };
        Some(Self::new(param, lo, hi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    /// Samples of the coarse scan preceding each golden-section refinement.
    pub coarse_points: usize,
    /// Golden-section stops when the bracket is below this fraction of the bound width.
    pub golden_tolerance: f64,
    /// Outer loop stops once a full sweep of coordinates improves by less than this.
    pub improvement_tolerance: f64,
    pub max_outer: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { coarse_points: 12, golden_tolerance: 1e-4, improvement_tolerance: 1e-4, max_outer: 50 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub argmax: Vec<(ParamName, f64)>,
    pub value: f64,
    pub t_eval: Option<f64>,
    pub evaluations: usize,
    pub iterations: usize,
}

impl Optimum {
    pub fn get(&self, param: ParamName) -> Option<f64> {
        self.argmax.iter().find(|(p, _)| *p == param).map(|(_, v)| *v)
    }
}

struct Search<'a> {
    baseline: &'a ModelConfig,
    free: &'a [Bound],
    objective: Objective,
    policy: &'a EvaluationPolicy,
    exec: Execution,
    evaluations: usize,
    first_flag: Option<String>,
}

impl Search<'_> {
    fn eval_many(&mut self, points: &[Vec<f64>]) -> Vec<Evaluation> {
        let (baseline, free, objective, policy) = (self.baseline, self.free, self.objective, self.policy);
        let out = self.exec.map(points, |x| {
            let values: Vec<(ParamName, f64)> = free.iter().map(|b| b.param).zip(x.iter().copied()).collect();
            match apply_params(baseline, &values) {
                Ok(c) => evaluate(&c, objective, policy),
                Err(e) => Evaluation { value: None, t_eval: None, residual: None, flags: vec![e.to_string()] },
            }
        });
        self.evaluations += points.len();
        for e in &out {
            if self.first_flag.is_none() {
                self.first_flag = e.flags.first().cloned();
            }
        }
        out
    }

    fn eval(&mut self, x: &[f64]) -> Evaluation {
        self.eval_many(&[x.to_vec()]).pop().unwrap()
    }

    /// Maximize along coordinate `i` starting from (x, fx); returns the best point seen.
    fn line_search(&mut self, x: &[f64], fx: &Evaluation, i: usize, opts: &SearchOptions) -> (Vec<f64>, Evaluation) {
        let b = self.free[i];
        let n = opts.coarse_points.max(3);
        let grid: Vec<f64> = (0..n).map(|k| b.lower + (b.upper - b.lower) * k as f64 / (n - 1) as f64).collect();
        let points: Vec<Vec<f64>> = grid
            .iter()
            .map(|&v| {
                let mut p = x.to_vec();
                p[i] = v;
                p
            })
            .collect();
        let evals = self.eval_many(&points);

        let mut best_x = x.to_vec();
        let mut best = fx.clone();
        let mut centre = grid
            .iter()
            .enumerate()
            .min_by(|a, c| (a.1 - x[i]).abs().total_cmp(&(c.1 - x[i]).abs()))
            .map(|(k, _)| k)
            .unwrap();
        for (k, e) in evals.iter().enumerate() {
            if e.score() > best.score() {
                best = e.clone();
                best_x = points[k].clone();
                centre = k;
            }
        }
        if best.value.is_none() {
            return (best_x, best);
        }

        // Golden-section refinement inside the cells next to the best sample.
        let mut lo = grid[centre.saturating_sub(1)];
        let mut hi = grid[(centre + 1).min(n - 1)];
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let at = |v: f64| {
            let mut p = best_x.clone();
            p[i] = v;
            p
        };
        let mut c = hi - phi * (hi - lo);
        let mut d = lo + phi * (hi - lo);
        let (mut pc, mut pd) = (at(c), at(d));
        let mut fc = self.eval(&pc);
        let mut fd = self.eval(&pd);
        let tol = opts.golden_tolerance * (b.upper - b.lower);
        let mut candidates = Vec::new();
        while hi - lo > tol {
            if fc.score() >= fd.score() {
                hi = d;
                candidates.push((pd, fd));
                d = c;
                pd = pc;
                fd = fc;
                c = hi - phi * (hi - lo);
                pc = at(c);
                fc = self.eval(&pc);
            } else {
                lo = c;
                candidates.push((pc, fc));
                c = d;
                pc = pd;
                fc = fd;
                d = lo + phi * (hi - lo);
                pd = at(d);
                fd = self.eval(&pd);
            }
        }
        candidates.push((pc, fc));
        candidates.push((pd, fd));
        for (p, e) in candidates {
            if e.score() > best.score() {
                best = e;
                best_x = p;
            }
        }
        (best_x, best)
    }
}

/// Coordinate descent over the free parameters; each coordinate is maximized by
/// a coarse scan of its bounds followed by golden-section refinement. Starts from
/// the baseline's own values where they lie inside the bounds.
pub fn optimize_inner(
    baseline: &ModelConfig,
    free: &[Bound],
    objective: Objective,
    policy: &EvaluationPolicy,
    opts: &SearchOptions,
    exec: Execution,
) -> Result<Optimum> {
    if free.is_empty() || free.len() > 3 {
        return Err(Error::InvalidConfig(format!("between 1 and 3 free parameters required, got {}", free.len())));
    }
    for (k, b) in free.iter().enumerate() {
        if !(b.lower.is_finite() && b.upper.is_finite() && b.lower < b.upper) {
            return Err(Error::InvalidConfig(format!("bad bounds for {}: [{}, {}]", b.param, b.lower, b.upper)));
        }
        if free[..k].iter().any(|o| o.param == b.param) {
            return Err(Error::InvalidConfig(format!("parameter {} is free twice", b.param)));
        }
    }
    let mut search = Search { baseline, free, objective, policy, exec, evaluations: 0, first_flag: None };
    let mut x: Vec<f64> = free
        .iter()
        .map(|b| {
            let v = b.param.read(baseline);
            if b.contains(v) {
                v
            } else {
                0.5 * (b.lower + b.upper)
            }
        })
        .collect();
    let mut fx = search.eval(&x);

    let mut iterations = 0;
    while iterations < opts.max_outer {
        iterations += 1;
        let before = fx.score();
        for i in 0..free.len() {
            let (nx, nf) = search.line_search(&x, &fx, i, opts);
            if nf.score() > fx.score() {
                x = nx;
                fx = nf;
            }
        }
        if fx.value.is_none() {
            break;
        }
        // A single coordinate is solved exactly by one line search.
        if free.len() == 1 || fx.score() - before < opts.improvement_tolerance {
            break;
        }
    }
    match fx.value {
        Some(value) => Ok(Optimum {
            argmax: free.iter().map(|b| b.param).zip(x).collect(),
            value,
            t_eval: fx.t_eval,
            evaluations: search.evaluations,
            iterations,
        }),
        None => Err(Error::OptimizationFailed(format!(
            "all {} evaluations were flagged; first: {}",
            search.evaluations,
            search.first_flag.unwrap_or_else(|| "unknown".into())
        ))),
    }
}
