use thiserror::Error;

/// Errors raised by model construction, propagation and the calibration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("Hilbert space dimension {dim} exceeds the configured cap of {cap}")]
    DimensionCap { dim: u128, cap: usize },

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeIndex { index: usize, n_modes: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("time {t} ns lies outside the sweep window [0, {t_rise}] ns")]
    TimeOutsideSweep { t: f64, t_rise: f64 },

    #[error("invalid initial state: {0}")]
    InitialState(String),

    #[error("step size underflow at t = {t} ns (dt = {dt:e} ns)")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("norm drift {drift:e} exceeds tolerance {tolerance:e} at t = {t} ns")]
    NormDrift { drift: f64, tolerance: f64, t: f64 },

    #[error("insufficient oscillations: {0}")]
    InsufficientOscillations(String),

    #[error("population maps have no overlapping points")]
    EmptyOverlap,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("IQ reference points coincide")]
    CoincidentReferences,

    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
}

pub type Result<T> = std::result::Result<T, Error>;
