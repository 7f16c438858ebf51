//! Physical models: parameters, pump envelopes, Hamiltonians and dissipators.

mod config;
mod hamiltonian;
mod pulse;
mod raman;
mod regime;

pub use config::{mhz, to_mhz, ModelConfig, RamanDetuning, RAD_PER_NS_PER_MHZ};
pub use hamiltonian::{
    build_coherent_hamiltonian, build_effective_hamiltonian, build_effective_two_level, coherent_parts,
    effective_parts, lindblad_rhs, loss_channels, Channel, HamiltonianParts, LossChannel,
};
pub use pulse::{Pulse, PulseShape};
pub use raman::{raman_effective_params, stark_compensated_delta};
pub use regime::{regime_report, RamanWindow, RegimeReport, STRONG_MARGIN};
