use thiserror::Error;

use crate::quantum::{AtomicLevel, Mode, ModelKind};

#[derive(Debug, Error)]
pub enum Error {
    #[error("photon cutoff must be at least 1, got {0}")]
    InvalidCutoff(u32),

    #[error("mode {mode:?} does not exist in the {kind} model")]
    UnknownMode { mode: Mode, kind: ModelKind },

    #[error("level {level} is not part of the {kind} model")]
    UnknownLevel { level: AtomicLevel, kind: ModelKind },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis was built for the {basis} model but the configuration is {config}")]
    KindMismatch { basis: ModelKind, config: ModelKind },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pump detuning must be non-zero for the Raman reduction")]
    ZeroDetuning,

    #[error(
        "step {dt} ns exceeds the stability guard {limit} ns (0.05 / fastest rate); set allow_large_step to override"
    )]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("non-finite state encountered at t = {t} ns")]
    NonFinite { t: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("time {t} ns lies outside the trajectory horizon [0, {horizon}] ns")]
    OutsideHorizon { t: f64, horizon: f64 },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("emission not saturated: remaining norm {remaining_norm:.3e} > 0.01 (emission so far {emission:.6})")]
    Unsaturated { emission: f64, remaining_norm: f64 },

    #[error("probability bookkeeping residual {0:.3e} exceeds 1e-4; integration unreliable")]
    Unreliable(f64),

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
