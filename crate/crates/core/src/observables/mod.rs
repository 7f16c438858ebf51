//! Figures of merit read off recorded trajectories.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{AtomicLevel, BasisState, Mode, ModelKind, StateVector};
use crate::solvers::{Trajectory, TrajectoryKind};

/// Below this ‖ψ‖² a conditional ratio is considered undefined.
pub const MIN_NORM: f64 = 1e-12;
/// Bookkeeping residual above which a run is flagged unreliable.
pub const RELIABLE_RESIDUAL: f64 = 1e-4;
/// Remaining norm above which an emission integral is not saturated.
pub const SATURATED_NORM: f64 = 0.01;

/// When the conditional transfer probability is read out.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Readout {
    /// Sample maximizing |⟨target|ψ⟩|²/‖ψ‖².
    #[default]
    RatioPeak,
    /// Sample maximizing |⟨target|ψ⟩|².
    NumeratorPeak,
    /// A recorded time.
    At(f64),
    /// The last sample.
    Final,
}

/// A value together with the time it was read at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reading {
    pub value: f64,
    pub t: f64,
}

fn require_conditional(traj: &Trajectory, what: &str) -> Result<()> {
    if traj.kind != TrajectoryKind::Conditional {
        return Err(Error::Unsupported(format!("{what} needs a conditional trajectory")));
    }
    Ok(())
}

/// P_ξ(t) = 2κ∫₀ᵗ⟨a_ξ†a_ξ⟩dt′, linearly interpolated between samples.
pub fn photon_detection_probability(traj: &Trajectory, mode: Mode, t: f64) -> Result<f64> {
    let horizon = traj.horizon();
    let tol = 1e-9 * horizon.max(1.0);
    if !(t >= -tol && t <= horizon + tol) {
        return Err(Error::OutsideHorizon { t, horizon });
    }
    let values = traj.emitted(mode);
    let times = &traj.times;
    let k = times.partition_point(|&s| s < t);
    if k == 0 {
        return Ok(values[0]);
    }
    if k >= times.len() {
        return Ok(values[times.len() - 1]);
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let w = (t - t0) / (t1 - t0);
    Ok(values[k - 1] + w * (values[k] - values[k - 1]))
}

/// Overlap with (|g−,1,0⟩ + |g+,0,1⟩)/√2 within the one-photon emitting subspace.
pub fn bell_fidelity(psi: &StateVector) -> Result<f64> {
    let kind = psi.basis().kind();
    if kind != ModelKind::FourLevel {
        return Err(Error::Unsupported(format!("Bell fidelity for the {kind} model")));
    }
    let minus = psi.amplitude(&BasisState::new(AtomicLevel::GMinus, 1, 0)).unwrap_or_default();
    let plus = psi.amplitude(&BasisState::new(AtomicLevel::GPlus, 0, 1)).unwrap_or_default();
    let weight = minus.norm_sqr() + plus.norm_sqr();
    if !(weight > 0.0) {
        return Err(Error::Undefined("no weight in the emitting subspace".into()));
    }
    let overlap: Complex64 = (minus + plus) * FRAC_1_SQRT_2;
    Ok(overlap.norm_sqr() / weight)
}

fn sample_index(traj: &Trajectory, t: f64) -> Result<usize> {
    let horizon = traj.horizon();
    let tol = 1e-9 * horizon.max(1.0);
    if !(t >= -tol && t <= horizon + tol) {
        return Err(Error::OutsideHorizon { t, horizon });
    }
    let k = traj.times.partition_point(|&s| s < t - tol);
    match traj.times.get(k) {
        Some(&s) if (s - t).abs() <= tol => Ok(k),
        _ => Err(Error::Undefined(format!("t = {t} ns is not a recorded time"))),
    }
}

/// |⟨target|ψ(t)⟩|² / ‖ψ(t)‖² at the readout time.
pub fn success_rate(traj: &Trajectory, target: &BasisState, readout: Readout) -> Result<Reading> {
    require_conditional(traj, "success rate")?;
    let states = traj.vectors().expect("conditional trajectories hold vectors");
    if traj.basis.index_of(target).is_none() {
        return Err(Error::Undefined(format!("{target} is not in the {} basis", traj.basis.kind())));
    }
    let ratio = |k: usize| -> Result<f64> {
        let norm = states[k].norm_sqr();
        if norm < MIN_NORM {
            return Err(Error::Undefined(format!("norm {norm:.3e} at t = {} ns is too small", traj.times[k])));
        }
        Ok(states[k].amplitude(target).unwrap().norm_sqr() / norm)
    };
    let at = |k: usize| -> Result<Reading> { Ok(Reading { value: ratio(k)?, t: traj.times[k] }) };
    match readout {
        Readout::Final => at(traj.len() - 1),
        Readout::At(t) => at(sample_index(traj, t)?),
        Readout::NumeratorPeak => {
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for (k, psi) in states.iter().enumerate() {
                let v = psi.amplitude(target).unwrap().norm_sqr();
                if v > best_val {
                    best = k;
                    best_val = v;
                }
            }
            at(best)
        }
        Readout::RatioPeak => {
            let mut best: Option<Reading> = None;
            for k in 0..traj.len() {
                if states[k].norm_sqr() < MIN_NORM {
                    continue;
                }
                let r = at(k)?;
                if best.is_none_or(|b| r.value > b.value) {
                    best = Some(r);
                }
            }
            best.ok_or_else(|| Error::Undefined("norm vanishes at every sample".into()))
        }
    }
}

/// Total probability that the photon leaves through the cavity, 2κ∫₀^∞⟨a†a⟩dt.
pub fn emission_rate(traj: &Trajectory) -> Result<f64> {
    require_conditional(traj, "emission rate")?;
    let k = traj.len() - 1;
    let emission = traj.emitted_l[k] + traj.emitted_r[k];
    let remaining_norm = traj.norm_sqr(k);
    if remaining_norm > SATURATED_NORM {
        return Err(Error::Unsaturated { emission, remaining_norm });
    }
    Ok(emission)
}

/// Terms of ‖ψ‖² + P_L + P_R + P_spont = 1 (or tr ρ = 1) at the last sample,
/// with the worst residual over all samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bookkeeping {
    pub norm_sqr: f64,
    pub emitted_l: f64,
    pub emitted_r: f64,
    pub spontaneous: f64,
    pub residual: f64,
    pub reliable: bool,
}

impl Bookkeeping {
    pub fn check(&self) -> Result<()> {
        if self.reliable {
            Ok(())
        } else {
            Err(Error::Unreliable(self.residual))
        }
    }
}

pub fn probability_bookkeeping(traj: &Trajectory) -> Bookkeeping {
    let residual_at = |k: usize| match traj.kind {
        TrajectoryKind::Conditional => {
            traj.norm_sqr(k) + traj.emitted_l[k] + traj.emitted_r[k] + traj.spontaneous[k] - 1.0
        }
        TrajectoryKind::Master => traj.norm_sqr(k) - 1.0,
    };
    let residual = (0..traj.len()).map(|k| residual_at(k).abs()).fold(0.0, f64::max);
    let k = traj.len() - 1;
    Bookkeeping {
        norm_sqr: traj.norm_sqr(k),
        emitted_l: traj.emitted_l[k],
        emitted_r: traj.emitted_r[k],
        spontaneous: traj.spontaneous[k],
        residual,
        reliable: residual.is_finite() && residual <= RELIABLE_RESIDUAL,
    }
}

/// Summary of one run. Quantities that do not apply to the model or solver,
/// or that could not be evaluated, are `None` with the reason in `flags`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeritReport {
    pub p_l: f64,
    pub p_r: f64,
    pub p_spont: f64,
    pub norm_sqr: f64,
    pub bell_fidelity: Option<f64>,
    pub success_rate: Option<Reading>,
    pub emission_rate: Option<f64>,
    pub evaluated_at: f64,
    pub residual: f64,
    pub flags: Vec<String>,
}

impl MeritReport {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

pub fn merit_report(traj: &Trajectory, readout: Readout) -> MeritReport {
    let book = probability_bookkeeping(traj);
    let mut flags = Vec::new();
    if !book.reliable {
        flags.push(Error::Unreliable(book.residual).to_string());
    }
    let kind = traj.basis.kind();
    let conditional = traj.kind == TrajectoryKind::Conditional;

    let bell_fidelity = if conditional && kind == ModelKind::FourLevel {
        let states = traj.vectors().unwrap();
        let emitting = |psi: &StateVector| {
            psi.amplitude(&BasisState::new(AtomicLevel::GMinus, 1, 0)).unwrap().norm_sqr()
                + psi.amplitude(&BasisState::new(AtomicLevel::GPlus, 0, 1)).unwrap().norm_sqr()
        };
        let best = (0..states.len()).max_by(|&a, &b| emitting(&states[a]).total_cmp(&emitting(&states[b])));
        match best.map(|k| bell_fidelity(&states[k])) {
            Some(Ok(f)) => Some(f),
            Some(Err(e)) => {
                flags.push(format!("bell fidelity: {e}"));
                None
            }
            None => None,
        }
    } else {
        None
    };

    let success = if conditional && kind != ModelKind::FourLevel {
        match success_rate(traj, &BasisState::new(AtomicLevel::G2, 1, 0), readout) {
            Ok(r) => Some(r),
            Err(e) => {
                flags.push(format!("success rate: {e}"));
                None
            }
        }
    } else {
        None
    };

    let emission = if conditional {
        match emission_rate(traj) {
            Ok(v) => Some(v),
            Err(e) => {
                flags.push(format!("emission rate: {e}"));
                None
            }
        }
    } else {
        None
    };

    MeritReport {
        p_l: book.emitted_l,
        p_r: book.emitted_r,
        p_spont: book.spontaneous,
        norm_sqr: book.norm_sqr,
        bell_fidelity,
        success_rate: success,
        emission_rate: emission,
        evaluated_at: traj.horizon(),
        residual: book.residual,
        flags,
    }
}

impl fmt::Display for MeritReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"));
        writeln!(f, "evaluated_at_ns  {:.3}", self.evaluated_at)?;
        writeln!(f, "P_L              {:.6}", self.p_l)?;
        writeln!(f, "P_R              {:.6}", self.p_r)?;
        writeln!(f, "P_spont          {:.6}", self.p_spont)?;
        writeln!(f, "norm_sq          {:.6}", self.norm_sqr)?;
        writeln!(f, "bell_fidelity    {}", opt(self.bell_fidelity))?;
        match self.success_rate {
            Some(r) => writeln!(f, "success_rate     {:.6} (t = {:.3} ns)", r.value, r.t)?,
            None => writeln!(f, "success_rate     n/a")?,
        }
        writeln!(f, "emission_rate    {}", opt(self.emission_rate))?;
        writeln!(f, "residual         {:.3e}", self.residual)?;
        for flag in &self.flags {
            writeln!(f, "flag             {flag}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
