//! Pure-state propagation under the swept Hamiltonian.
//!
//! The default scheme is the exponential midpoint rule
//! `ψ(t+h) = exp(-i h H(t+h/2)) ψ(t)`. Because `H(t)` is affine in `t`, the
//! fourth-order commutator-free Magnus scheme reduces to two half-steps
//! evaluated at `t + h/6` and `t + 5h/6`; it is offered as an alternative.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::expm::{dense_propagator, Krylov};
use crate::hilbert::{mode_operator, BasisLayout, ModeOp, SystemSpec};
use crate::lzmodel::{excitation_number_operator, prepare_state, SweepHamiltonian, SweepScenario};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<C64>,
    pub layout: Arc<BasisLayout>,
    /// Time stamp in ns.
    pub time: f64,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<C64>, layout: Arc<BasisLayout>) -> Self {
        assert_eq!(amplitudes.len(), layout.dimension());
        Self {
            amplitudes,
            layout,
            time: 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Excited-state population `<ψ| |e><e| |ψ>`, a contiguous block sum.
    pub fn qubit_population(&self) -> f64 {
        self.amplitudes[self.layout.mode_block()..]
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn mode_occupation(&self, mode: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * self.layout.occupation(i, mode) as f64)
            .sum()
    }

    pub fn expectation(&self, op: &CsrMatrix) -> C64 {
        op.expectation(&self.amplitudes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    ExponentialMidpoint,
    Magnus4,
}

impl Scheme {
    /// Nominal global order of accuracy.
    pub fn order(self) -> u32 {
        match self {
            Scheme::ExponentialMidpoint => 2,
            Scheme::Magnus4 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub scheme: Scheme,
    /// Step is at most `step_safety / ‖H‖`.
    pub step_safety: f64,
    /// Step is at most `t_rise / min_steps`.
    pub min_steps: usize,
    /// Optional absolute cap on the step in ns.
    pub max_step: Option<f64>,
    pub norm_tolerance: f64,
    pub krylov_tolerance: f64,
    /// Dimensions up to this size use dense eigendecomposition per step.
    pub dense_threshold: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::default(),
            step_safety: 0.05,
            min_steps: 2000,
            max_step: None,
            norm_tolerance: 1e-8,
            krylov_tolerance: 1e-13,
            dense_threshold: 16,
        }
    }
}

impl EvolveOptions {
    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_max_step(mut self, dt: f64) -> Self {
        self.max_step = Some(dt);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    QubitPopulation,
    ModeOccupation(usize),
    ExcitationNumber,
    Norm,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub observables: Vec<Observable>,
    /// `values[k][i]` is observable `k` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    pub final_state: QuantumState,
    pub max_norm_drift: f64,
    pub n_steps: usize,
}

impl Trajectory {
    pub fn series(&self, obs: Observable) -> Option<&[f64]> {
        self.observables
            .iter()
            .position(|&o| o == obs)
            .map(|k| self.values[k].as_slice())
    }
}

enum Measure {
    Qubit,
    Operator(CsrMatrix),
    Norm,
}

impl Measure {
    fn new(obs: Observable, layout: &BasisLayout) -> Result<Self> {
        Ok(match obs {
            Observable::QubitPopulation => Measure::Qubit,
            Observable::ModeOccupation(k) => {
                Measure::Operator(mode_operator(ModeOp::Number, k, layout)?)
            }
            Observable::ExcitationNumber => Measure::Operator(excitation_number_operator(layout)),
            Observable::Norm => Measure::Norm,
        })
    }

    fn eval(&self, state: &QuantumState) -> f64 {
        match self {
            Measure::Qubit => state.qubit_population(),
            Measure::Operator(op) => state.expectation(op).re,
            Measure::Norm => state.norm(),
        }
    }
}

/// One exponential step with a fixed Hamiltonian: `ψ <- exp(-i H dt) ψ`.
pub fn step_integrator(h: &CsrMatrix, state: &mut QuantumState, dt: f64) {
    crate::expm::exp_step(
        h,
        &mut state.amplitudes,
        dt,
        EvolveOptions::default().dense_threshold,
    );
    state.time += dt;
}

struct Stepper<'a> {
    hamiltonian: &'a SweepHamiltonian,
    options: EvolveOptions,
    krylov: Option<Krylov>,
}

impl<'a> Stepper<'a> {
    fn new(hamiltonian: &'a SweepHamiltonian, options: EvolveOptions) -> Self {
        let dim = hamiltonian.dimension();
        let krylov =
            (dim > options.dense_threshold).then(|| Krylov::new(dim, 40, options.krylov_tolerance));
        Self {
            hamiltonian,
            options,
            krylov,
        }
    }

    /// `ψ <- exp(-i dt H(t_eval)) ψ`
    fn exponential(&mut self, t_eval: f64, psi: &mut [C64], dt: f64) {
        match &mut self.krylov {
            Some(k) => {
                let h = self.hamiltonian;
                k.propagate(|x, y| h.apply(t_eval, x, y), psi, dt);
            }
            None => {
                let u = dense_propagator(&self.hamiltonian.at_unchecked(t_eval).to_dense(), dt);
                let out = &u * nalgebra::DVector::from_column_slice(psi);
                psi.copy_from_slice(out.as_slice());
            }
        }
    }

    fn step(&mut self, t: f64, psi: &mut [C64], h: f64) {
        match self.options.scheme {
            Scheme::ExponentialMidpoint => self.exponential(t + 0.5 * h, psi, h),
            Scheme::Magnus4 => {
                self.exponential(t + h / 6.0, psi, 0.5 * h);
                self.exponential(t + 5.0 * h / 6.0, psi, 0.5 * h);
            }
        }
    }
}

/// Largest admissible internal step for this Hamiltonian and options.
pub fn max_step(hamiltonian: &SweepHamiltonian, options: &EvolveOptions) -> f64 {
    let by_norm = options.step_safety / hamiltonian.norm_bound().max(f64::MIN_POSITIVE);
    let mut dt = by_norm.min(hamiltonian.t_rise() / options.min_steps.max(1) as f64);
    if let Some(cap) = options.max_step {
        dt = dt.min(cap);
    }
    dt
}

/// Evolve `state` from its time stamp through every entry of `sample_times`,
/// recording `observables` at each sample (including the initial one when
/// the first sample equals the start time).
pub fn evolve_state(
    mut state: QuantumState,
    hamiltonian: &SweepHamiltonian,
    sample_times: &[f64],
    observables: &[Observable],
    options: &EvolveOptions,
) -> Result<Trajectory> {
    if sample_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidScenario(
            "sample times must be strictly increasing".into(),
        ));
    }
    if let Some(&first) = sample_times.first() {
        if first < state.time {
            return Err(Error::InvalidScenario(
                "sample times precede the state time".into(),
            ));
        }
    }
    let measures = observables
        .iter()
        .map(|&o| Measure::new(o, &state.layout))
        .collect::<Result<Vec<_>>>()?;

    let dt_max = max_step(hamiltonian, options);
    if dt_max.is_nan() || dt_max <= 1e-12 * hamiltonian.t_rise() {
        return Err(Error::StepUnderflow {
            t: state.time,
            dt: dt_max,
        });
    }

    let mut stepper = Stepper::new(hamiltonian, *options);
    let mut values = vec![Vec::with_capacity(sample_times.len()); observables.len()];
    let mut max_drift: f64 = 0.0;
    let mut n_steps = 0usize;

    for &target in sample_times {
        let span = target - state.time;
        if span > 0.0 {
            let n = ((span / dt_max) - 1e-9).ceil().max(1.0) as usize;
            let h = span / n as f64;
            let t0 = state.time;
            for k in 0..n {
                stepper.step(t0 + k as f64 * h, &mut state.amplitudes, h);
            }
            n_steps += n;
            state.time = target;
        }
        let drift = (state.norm() - 1.0).abs();
        max_drift = max_drift.max(drift);
        if drift > options.norm_tolerance {
            return Err(Error::NormDrift {
                drift,
                tolerance: options.norm_tolerance,
                t: state.time,
            });
        }
        for (series, m) in values.iter_mut().zip(&measures) {
            series.push(m.eval(&state));
        }
    }

    Ok(Trajectory {
        times: sample_times.to_vec(),
        observables: observables.to_vec(),
        values,
        final_state: state,
        max_norm_drift: max_drift,
        n_steps,
    })
}

/// Solve `i dψ/dt = H(t) ψ` on `[0, t_rise]` from the scenario's initial
/// state, sampling on the scenario grid.
pub fn evolve(
    spec: &SystemSpec,
    scenario: &SweepScenario,
    observables: &[Observable],
    options: &EvolveOptions,
) -> Result<Trajectory> {
    evolve_on_grid(
        spec,
        scenario,
        &scenario.sample_times(),
        observables,
        options,
    )
}

/// As [`evolve`] but on an explicit sample grid inside `[0, t_rise]`.
pub fn evolve_on_grid(
    spec: &SystemSpec,
    scenario: &SweepScenario,
    sample_times: &[f64],
    observables: &[Observable],
    options: &EvolveOptions,
) -> Result<Trajectory> {
    if let Some(&last) = sample_times.last() {
        if last > scenario.t_rise || sample_times[0] < 0.0 {
            return Err(Error::TimeOutsideSweep {
                t: if last > scenario.t_rise {
                    last
                } else {
                    sample_times[0]
                },
                t_rise: scenario.t_rise,
            });
        }
    }
    let hamiltonian = SweepHamiltonian::new(spec, scenario)?;
    let state = prepare_state(spec, scenario, hamiltonian.layout())?;
    evolve_state(state, &hamiltonian, sample_times, observables, options)
}
