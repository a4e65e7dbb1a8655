//! Time-dependent multistate Landau-Zener Hamiltonian and initial states.
//!
//! The qubit frequency follows `ω_q(t) = ω_i + v t` with
//! `v = (ω_f - ω_i) / t_rise`. In the RWA frame rotating at `ω_ref`:
//!
//! ```text
//! H(t) = (ω_q(t) - ω_ref)/2 σz + Σ (ω_n - ω_ref) a†a + Σ g_n (σ+ a_n + σ- a†_n)
//! ```
//!
//! and in the lab frame (`CouplingModel::Full`):
//!
//! ```text
//! H(t) = ω_q(t)/2 σz + Σ ω_n a†a + Σ g_n σx (a†_n + a_n)
//! ```

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    build_layout, mode_operator, qubit_operator, BasisLayout, CouplingModel, ModeOp, QubitOp,
    SystemSpec,
};
use crate::propagate::QuantumState;
use crate::sparse::CsrMatrix;

/// Largest probability weight a coherent state may lose to Fock truncation.
pub const COHERENT_TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// Qubit and all modes in their ground state.
    Ground,
    /// `|e, 0...0>`, the state after a π pulse on the qubit.
    QubitExcited,
    /// `|g, 0..n..0>` with `n` photons in `mode`.
    ModeFock { mode: usize, n: usize },
    /// `|g>` times a truncated, renormalized coherent state in `mode`.
    ModeCoherent { mode: usize, amplitude: C64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepScenario {
    pub t_rise: f64,
    pub n_time_samples: usize,
    pub initial_state: InitialState,
    /// Rotating-frame reference; `None` uses the mean mode frequency.
    /// Ignored by the lab-frame model.
    pub frame_reference: Option<f64>,
}

impl SweepScenario {
    /// Scenario sampled on a grid of roughly 1 ns spacing.
    pub fn new(t_rise: f64, initial_state: InitialState) -> Self {
        let n = if t_rise.is_finite() && t_rise > 0.0 {
            (t_rise.ceil() as usize + 1).max(2)
        } else {
            2
        };
        Self {
            t_rise,
            n_time_samples: n,
            initial_state,
            frame_reference: None,
        }
    }

    pub fn with_samples(mut self, n_time_samples: usize) -> Self {
        self.n_time_samples = n_time_samples;
        self
    }

    pub fn with_frame_reference(mut self, omega_ref: f64) -> Self {
        self.frame_reference = Some(omega_ref);
        self
    }

    pub fn validate(&self, spec: &SystemSpec) -> Result<()> {
        if !(self.t_rise.is_finite() && self.t_rise > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "rise time must be positive, got {}",
                self.t_rise
            )));
        }
        if self.n_time_samples < 2 {
            return Err(Error::InvalidScenario(
                "at least two time samples are required".into(),
            ));
        }
        if self.velocity(spec) <= 0.0 {
            return Err(Error::InvalidScenario(
                "sweep velocity must be positive".into(),
            ));
        }
        match self.initial_state {
            InitialState::ModeFock { mode, n } => {
                let m = spec.modes.get(mode).ok_or(Error::ModeIndex {
                    index: mode,
                    n_modes: spec.modes.len(),
                })?;
                if n >= m.fock_cutoff {
                    return Err(Error::InitialState(format!(
                        "Fock number {n} not below cutoff {} of mode {mode}",
                        m.fock_cutoff
                    )));
                }
            }
            InitialState::ModeCoherent { mode, .. } if mode >= spec.modes.len() => {
                return Err(Error::ModeIndex {
                    index: mode,
                    n_modes: spec.modes.len(),
                })
            }
            _ => {}
        }
        Ok(())
    }

    /// Landau-Zener velocity `(ω_f - ω_i) / t_rise` in rad/ns².
    pub fn velocity(&self, spec: &SystemSpec) -> f64 {
        (spec.omega_f - spec.omega_i) / self.t_rise
    }

    /// Qubit angular frequency at time `t`; exact at both sweep endpoints.
    pub fn omega_q(&self, spec: &SystemSpec, t: f64) -> f64 {
        let s = t / self.t_rise;
        spec.omega_i * (1.0 - s) + spec.omega_f * s
    }

    /// Reference frequency subtracted from every excitation.
    pub fn frame(&self, spec: &SystemSpec) -> f64 {
        match spec.coupling_model {
            CouplingModel::Rwa => self
                .frame_reference
                .unwrap_or_else(|| spec.mean_mode_frequency()),
            CouplingModel::Full => 0.0,
        }
    }

    /// Uniform sample grid from 0 to `t_rise`, both endpoints exact.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = self.n_time_samples;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.t_rise
                } else {
                    self.t_rise * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Hamiltonian split as `H(t) = H_static + (ω_q(t) - ω_ref) · σz/2`.
#[derive(Debug, Clone)]
pub struct SweepHamiltonian {
    static_part: CsrMatrix,
    /// Diagonal of `σz/2`.
    sweep_diag: Vec<f64>,
    omega_i: f64,
    omega_f: f64,
    t_rise: f64,
    frame: f64,
    layout: Arc<BasisLayout>,
}

impl SweepHamiltonian {
    pub fn new(spec: &SystemSpec, scenario: &SweepScenario) -> Result<Self> {
        spec.validate()?;
        scenario.validate(spec)?;
        let layout = Arc::new(build_layout(spec)?);
        let frame = scenario.frame(spec);
        let dim = layout.dimension();

        let mut diag = vec![C64::new(0.0, 0.0); dim];
        let mut static_part = CsrMatrix::zeros(dim, dim);
        for (k, mode) in spec.modes.iter().enumerate() {
            let detuning = mode.frequency - frame;
            for (i, d) in diag.iter_mut().enumerate() {
                *d += detuning * layout.occupation(i, k) as f64;
            }
            if mode.coupling == 0.0 {
                continue;
            }
            let g = C64::new(mode.coupling, 0.0);
            let coupling = match spec.coupling_model {
                CouplingModel::Rwa => {
                    let absorb = qubit_operator(QubitOp::SigmaPlus, &layout)
                        .matmul(&mode_operator(ModeOp::Lower, k, &layout)?);
                    absorb.add_scaled(C64::new(1.0, 0.0), &absorb.adjoint())
                }
                CouplingModel::Full => {
                    let quadrature = mode_operator(ModeOp::Lower, k, &layout)?.add_scaled(
                        C64::new(1.0, 0.0),
                        &mode_operator(ModeOp::Raise, k, &layout)?,
                    );
                    qubit_operator(QubitOp::SigmaX, &layout).matmul(&quadrature)
                }
            };
            static_part = static_part.add_scaled(g, &coupling);
        }
        static_part = static_part.add_scaled(C64::new(1.0, 0.0), &CsrMatrix::from_diagonal(&diag));

        let sweep_diag = (0..dim)
            .map(|i| {
                if layout.qubit_level(i) == 1 {
                    0.5
                } else {
                    -0.5
                }
            })
            .collect();
        Ok(Self {
            static_part,
            sweep_diag,
            omega_i: spec.omega_i,
            omega_f: spec.omega_f,
            t_rise: scenario.t_rise,
            frame,
            layout,
        })
    }

    pub fn layout(&self) -> &Arc<BasisLayout> {
        &self.layout
    }

    pub fn dimension(&self) -> usize {
        self.layout.dimension()
    }

    pub fn t_rise(&self) -> f64 {
        self.t_rise
    }

    /// Qubit detuning from the frame, `ω_q(t) - ω_ref`. Defined for any `t`
    /// so that integrator stages may sample slightly outside the window.
    pub fn sweep_coefficient(&self, t: f64) -> f64 {
        let s = t / self.t_rise;
        self.omega_i * (1.0 - s) + self.omega_f * s - self.frame
    }

    /// `y = H(t) x`
    pub fn apply(&self, t: f64, x: &[C64], y: &mut [C64]) {
        self.static_part.mul_vec_into(x, y);
        let c = self.sweep_coefficient(t);
        for ((yi, xi), s) in y.iter_mut().zip(x).zip(&self.sweep_diag) {
            *yi += *xi * (c * s);
        }
    }

    /// Sparse matrix of `H(t)` for `t` inside the sweep window.
    pub fn at(&self, t: f64) -> Result<CsrMatrix> {
        if !(0.0..=self.t_rise).contains(&t) {
            return Err(Error::TimeOutsideSweep {
                t,
                t_rise: self.t_rise,
            });
        }
        Ok(self.at_unchecked(t))
    }

    pub(crate) fn at_unchecked(&self, t: f64) -> CsrMatrix {
        let c = self.sweep_coefficient(t);
        let sweep: Vec<C64> = self
            .sweep_diag
            .iter()
            .map(|s| C64::new(c * s, 0.0))
            .collect();
        self.static_part
            .add_scaled(C64::new(1.0, 0.0), &CsrMatrix::from_diagonal(&sweep))
    }

    /// Row-sum bound on `‖H(t)‖` valid over the whole sweep window.
    pub fn norm_bound(&self) -> f64 {
        let c = self
            .sweep_coefficient(0.0)
            .abs()
            .max(self.sweep_coefficient(self.t_rise).abs());
        self.static_part.max_row_sum() + 0.5 * c
    }
}

/// `H(t)` for the given spec and scenario.
pub fn hamiltonian_at(t: f64, spec: &SystemSpec, scenario: &SweepScenario) -> Result<CsrMatrix> {
    SweepHamiltonian::new(spec, scenario)?.at(t)
}

/// Total excitation number `|e><e| + Σ a†_n a_n`.
pub fn excitation_number_operator(layout: &BasisLayout) -> CsrMatrix {
    let diag: Vec<C64> = (0..layout.dimension())
        .map(|i| {
            let n = layout.qubit_level(i)
                + (0..layout.n_modes())
                    .map(|k| layout.occupation(i, k))
                    .sum::<usize>();
            C64::new(n as f64, 0.0)
        })
        .collect();
    CsrMatrix::from_diagonal(&diag)
}

/// Poisson weights `|<m|α>|²` for `m < cutoff`.
fn coherent_amplitudes(amplitude: C64, cutoff: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(cutoff);
    let mut a = C64::new((-0.5 * amplitude.norm_sqr()).exp(), 0.0);
    for m in 0..cutoff {
        if m > 0 {
            a *= amplitude / (m as f64).sqrt();
        }
        amps.push(a);
    }
    amps
}

/// Normalized initial state described by `scenario.initial_state`.
pub fn prepare_state(
    spec: &SystemSpec,
    scenario: &SweepScenario,
    layout: &Arc<BasisLayout>,
) -> Result<QuantumState> {
    scenario.validate(spec)?;
    let dim = layout.dimension();
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    let vacuum = vec![0usize; layout.n_modes()];
    let one = C64::new(1.0, 0.0);
    match scenario.initial_state {
        InitialState::Ground => amps[layout.index(0, &vacuum).unwrap()] = one,
        InitialState::QubitExcited => amps[layout.index(1, &vacuum).unwrap()] = one,
        InitialState::ModeFock { mode, n } => {
            let mut occ = vacuum;
            occ[mode] = n;
            amps[layout.index(0, &occ).unwrap()] = one;
        }
        InitialState::ModeCoherent { mode, amplitude } => {
            let cutoff = layout.cutoffs()[mode];
            let weights = coherent_amplitudes(amplitude, cutoff);
            let kept: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
            let tail = 1.0 - kept;
            if tail > COHERENT_TAIL_TOLERANCE {
                return Err(Error::InitialState(format!(
                    "coherent amplitude {amplitude} loses weight {tail:.3e} above cutoff {cutoff}"
                )));
            }
            let scale = 1.0 / kept.sqrt();
            let mut occ = vacuum;
            for (m, w) in weights.into_iter().enumerate() {
                occ[mode] = m;
                amps[layout.index(0, &occ).unwrap()] = w * scale;
            }
        }
    }
    Ok(QuantumState::new(amps, Arc::clone(layout)))
}
