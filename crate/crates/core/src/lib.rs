//! Numerical emulator for a qubit swept linearly in frequency through an
//! ensemble of coupled bosonic modes (multistate Landau-Zener dynamics), plus
//! the waveform and readout arithmetic used to calibrate such sweeps.

pub mod calib;
pub mod error;
pub mod expm;
pub mod hilbert;
pub mod lzmodel;
pub mod propagate;
pub mod protocol;
pub mod sparse;

pub use error::{Error, Result};
pub use hilbert::{
    build_layout, mode_operator, qubit_operator, BasisLayout, BasisState, CouplingModel, ModeOp,
    ModeSpec, QubitOp, SystemSpec,
};
pub use lzmodel::{
    excitation_number_operator, hamiltonian_at, prepare_state, InitialState, SweepHamiltonian,
    SweepScenario,
};
pub use num_complex::Complex64;
pub use propagate::{
    evolve, evolve_on_grid, evolve_state, step_integrator, EvolveOptions, Observable, QuantumState,
    Scheme, Trajectory,
};
pub use sparse::CsrMatrix;
