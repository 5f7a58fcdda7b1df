//! Simulation of weakly coupled spin-1/2 NMR quantum processors.
//!
//! Density matrices, Hamiltonians and propagators are dense complex matrices
//! over the `2^(n+1)`-dimensional Hilbert space of an observer spin plus `n`
//! computational qubits. Everything is generic over the real scalar; the
//! `*64` and `*32` aliases pin it.
//!
//! Frequencies are in Hz at the API surface and rad/s inside Hamiltonians
//! (`ω = 2πν`).

pub mod bits;
pub mod error;
pub mod evolution;
pub mod gates;
pub mod hamiltonian;
pub mod liouville;
pub mod scalar;
pub mod spectra;
pub mod spin_system;
pub mod tse;

pub use bits::BitString;
pub use error::{Error, Result};
pub use evolution::{
    apply_event, propagator, run_sequence, Envelope, EvolutionOptions, GradientMode, PulseAxis,
    PulseSequence, SequenceEvent,
};
pub use gates::{
    bv_oracle_unitary, bv_pulse_sequence, bv_unitary, controlled_rotation_unitary,
    lpps_prep_unitary, lpps_pulse_sequence, lpps_pulse_sequence_with, ControlPattern,
    LppsPulseOptions,
};
pub use hamiltonian::{
    effective_hamiltonian, internal_hamiltonian, transition_rf_frequency, RfField,
};
pub use liouville::{lpps_state, thermal_equilibrium, Axis, Level, Operator};
pub use scalar::{Cplx, Real};
pub use spectra::{
    decode_answer, multiplet_amplitudes, readout_spectrum, render_lorentzian, Decoded,
    FrequencyGrid, Spectrum,
};
pub use spin_system::{
    alanine_carbons_preset, alanine_preset, load_system, preset, Spin, SpinSystem,
};
pub use tse::{
    analytic_fidelity_3spin, conditional_phase_unitary, fidelity_sweep, gate_fidelity,
    tse_propagators, FidelityCurve, TseParams, TsePropagators,
};

pub type Operator64 = Operator<f64>;
pub type Operator32 = Operator<f32>;
pub type SpinSystem64 = SpinSystem<f64>;
pub type SpinSystem32 = SpinSystem<f32>;
pub type PulseSequence64 = PulseSequence<f64>;
pub type PulseSequence32 = PulseSequence<f32>;
pub type Spectrum64 = Spectrum<f64>;
pub type Spectrum32 = Spectrum<f32>;
pub type FidelityCurve64 = FidelityCurve<f64>;
pub type FidelityCurve32 = FidelityCurve<f32>;
