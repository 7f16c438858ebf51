use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Internal atomic level label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomicLevel {
    G1,
    E,
    GMinus,
    GPlus,
    G2,
}

impl AtomicLevel {
    pub fn label(self) -> &'static str {
        match self {
            AtomicLevel::G1 => "g1",
            AtomicLevel::E => "e",
            AtomicLevel::GMinus => "g_minus",
            AtomicLevel::GPlus => "g_plus",
            AtomicLevel::G2 => "g2",
        }
    }
}

impl fmt::Display for AtomicLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Cavity polarization mode. Single-mode models only have `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Resonant four-level atom coupled to left/right circular cavity modes.
    FourLevel,
    /// Far-detuned Λ atom with one cavity mode.
    ThreeLevelRaman,
    /// Adiabatically eliminated Raman model on {|g1,0⟩, |g2,1⟩}.
    EffectiveTwoLevel,
}

impl ModelKind {
    pub fn levels(self) -> &'static [AtomicLevel] {
        use AtomicLevel::*;
        match self {
            ModelKind::FourLevel => &[G1, E, GMinus, GPlus],
            ModelKind::ThreeLevelRaman => &[G1, E, G2],
            ModelKind::EffectiveTwoLevel => &[G1, G2],
        }
    }

    pub fn modes(self) -> &'static [Mode] {
        match self {
            ModelKind::FourLevel => &[Mode::L, Mode::R],
            ModelKind::ThreeLevelRaman | ModelKind::EffectiveTwoLevel => &[Mode::L],
        }
    }

    /// Ground levels that receive spontaneous decay from `e`, in branching-ratio order.
    pub fn decay_targets(self) -> &'static [AtomicLevel] {
        use AtomicLevel::*;
        match self {
            ModelKind::FourLevel => &[G1, GMinus, GPlus],
            ModelKind::ThreeLevelRaman | ModelKind::EffectiveTwoLevel => &[G1, G2],
        }
    }

    pub fn has_level(self, level: AtomicLevel) -> bool {
        self.levels().contains(&level)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::FourLevel => "four-level",
            ModelKind::ThreeLevelRaman => "three-level-raman",
            ModelKind::EffectiveTwoLevel => "effective-two-level",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Composite state |μ, n_L, n_R⟩. `n_r` is always 0 for single-mode models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub level: AtomicLevel,
    pub n_l: u32,
    pub n_r: u32,
}

impl BasisState {
    pub const fn new(level: AtomicLevel, n_l: u32, n_r: u32) -> Self {
        Self { level, n_l, n_r }
    }

    pub fn photons(&self, mode: Mode) -> u32 {
        match mode {
            Mode::L => self.n_l,
            Mode::R => self.n_r,
        }
    }

    fn with_photons(mut self, mode: Mode, n: u32) -> Self {
        match mode {
            Mode::L => self.n_l = n,
            Mode::R => self.n_r = n,
        }
        self
    }

    pub fn with_level(mut self, level: AtomicLevel) -> Self {
        self.level = level;
        self
    }

    /// Same state with one photon removed from `mode`, if there is one.
    pub fn lowered(self, mode: Mode) -> Option<Self> {
        let n = self.photons(mode);
        (n > 0).then(|| self.with_photons(mode, n - 1))
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}>", self.level, self.n_l, self.n_r)
    }
}

/// Ordered product basis: atomic level major, then n_L, then n_R.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    kind: ModelKind,
    n_max: u32,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

impl Basis {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> BasisState {
        self.states[i]
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn has_mode(&self, mode: Mode) -> bool {
        self.kind.modes().contains(&mode)
    }

    pub fn check_mode(&self, mode: Mode) -> Result<()> {
        if self.has_mode(mode) {
            Ok(())
        } else {
            Err(Error::UnknownMode { mode, kind: self.kind })
        }
    }

    pub fn check_level(&self, level: AtomicLevel) -> Result<()> {
        if self.kind.has_level(level) {
            Ok(())
        } else {
            Err(Error::UnknownLevel { level, kind: self.kind })
        }
    }
}

pub fn build_basis(kind: ModelKind, n_max: u32) -> Result<Arc<Basis>> {
    if n_max == 0 {
        return Err(Error::InvalidCutoff(n_max));
    }
    let states: Vec<BasisState> = match kind {
        ModelKind::EffectiveTwoLevel => {
            vec![BasisState::new(AtomicLevel::G1, 0, 0), BasisState::new(AtomicLevel::G2, 1, 0)]
        }
        ModelKind::ThreeLevelRaman => {
            kind.levels().iter().flat_map(|&level| (0..=n_max).map(move |n| BasisState::new(level, n, 0))).collect()
        }
        ModelKind::FourLevel => kind
            .levels()
            .iter()
            .flat_map(|&level| {
                (0..=n_max).flat_map(move |n_l| (0..=n_max).map(move |n_r| BasisState::new(level, n_l, n_r)))
            })
            .collect(),
    };
    let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    Ok(Arc::new(Basis { kind, n_max, states, index }))
}
