//! End-to-end sweep scenarios, readout observables, the analytic
//! Landau-Zener survival probability and map-to-map offset calibration.

mod map;
mod offset;
mod scenarios;
mod stueckelberg;

use std::f64::consts::TAU;

pub use map::{LzCurve, MapMetadata, MapRow, PopulationMap};
pub use offset::{calibrate_offset, CalibrationFit, OffsetWindow, DF_STEP_GHZ, DT_STEP_NS};
pub use scenarios::{
    onset_time, run_figure2, run_figure3, run_fock_scan, run_population_map, Figure2, FockTrace,
};
pub use stueckelberg::{
    instantaneous_frequency, stueckelberg_frequency_check, StueckelbergOptions, StueckelbergReport,
    WindowEstimate,
};

use crate::propagate::QuantumState;

/// Slack allowed on population bounds before clamping.
pub const POPULATION_SLACK: f64 = 1e-9;

/// Excited-state population of the qubit, clamped into `[0, 1]`.
pub fn qubit_population(state: &QuantumState) -> f64 {
    clamp_population(state.qubit_population())
}

pub(crate) fn clamp_population(p: f64) -> f64 {
    debug_assert!(
        (-POPULATION_SLACK..=1.0 + POPULATION_SLACK).contains(&p),
        "population {p} outside [0, 1]"
    );
    p.clamp(0.0, 1.0)
}

/// Survival probability of the swept level after crossing every mode:
/// `prod_n exp(-2π g_n² / v)`.
pub fn lz_formula(couplings: &[f64], velocity: f64) -> f64 {
    assert!(velocity > 0.0, "sweep velocity must be positive");
    let exponent: f64 = couplings.iter().map(|g| TAU * g * g / velocity).sum();
    (-exponent).exp()
}
