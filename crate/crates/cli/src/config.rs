//! Run configuration, read from TOML. Frequencies are in GHz, couplings in
//! MHz and times in ns; every table and key is optional and unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use mslz_core::hilbert::ghz_to_angular;
use mslz_core::hilbert::{DEFAULT_SPAN_GHZ, DEFAULT_START_DETUNING_GHZ, RESONATOR_ENSEMBLE};
use mslz_core::{
    Complex64, CouplingModel, EvolveOptions, InitialState, ModeSpec, Scheme, SystemSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub sweep: SweepConfig,
    pub fock: FockConfig,
    pub predistort: PredistortConfig,
    pub iqproject: IqConfig,
    pub calibrate_offset: OffsetConfig,
    pub tolerances: ToleranceConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CouplingModelName {
    #[default]
    Rwa,
    Full,
}

impl CouplingModelName {
    pub fn model(self) -> CouplingModel {
        match self {
            CouplingModelName::Rwa => CouplingModel::Rwa,
            CouplingModelName::Full => CouplingModel::Full,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CouplingModelName::Rwa => "rwa",
            CouplingModelName::Full => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub frequency_ghz: f64,
    pub coupling_mhz: f64,
    #[serde(default = "default_cutoff")]
    pub fock_cutoff: usize,
}

fn default_cutoff() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub modes: Vec<ModeConfig>,
    /// Keep only the first `n_modes` entries of `modes`.
    pub n_modes: Option<usize>,
    /// Start of the sweep; defaults to 200 MHz below the first mode.
    pub omega_i_ghz: Option<f64>,
    pub span_ghz: f64,
    pub coupling_model: CouplingModelName,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            modes: RESONATOR_ENSEMBLE
                .iter()
                .map(|&(f, g)| ModeConfig {
                    frequency_ghz: f,
                    coupling_mhz: g,
                    fock_cutoff: 2,
                })
                .collect(),
            n_modes: None,
            omega_i_ghz: None,
            span_ghz: DEFAULT_SPAN_GHZ,
            coupling_model: CouplingModelName::Rwa,
        }
    }
}

impl SystemConfig {
    fn selected_modes(&self) -> CliResult<&[ModeConfig]> {
        let n = self.n_modes.unwrap_or(self.modes.len());
        if n == 0 {
            return Err(CliError::Config("at least one mode is required".into()));
        }
        if n > self.modes.len() {
            return Err(CliError::Config(format!(
                "{n} modes requested but only {} configured",
                self.modes.len()
            )));
        }
        Ok(&self.modes[..n])
    }

    /// System with every mode's cutoff replaced by `cutoff` when given.
    pub fn build(&self, cutoff: Option<usize>) -> CliResult<SystemSpec> {
        let modes = self
            .selected_modes()?
            .iter()
            .map(|m| {
                ModeSpec::from_ghz(
                    m.frequency_ghz,
                    m.coupling_mhz,
                    cutoff.unwrap_or(m.fock_cutoff),
                )
            })
            .collect::<mslz_core::Result<Vec<_>>>()?;
        let start = self
            .omega_i_ghz
            .unwrap_or_else(|| self.modes[0].frequency_ghz - DEFAULT_START_DETUNING_GHZ);
        let omega_i = ghz_to_angular(start);
        let omega_f = omega_i + ghz_to_angular(self.span_ghz);
        Ok(SystemSpec::new(
            omega_i,
            omega_f,
            modes,
            self.coupling_model.model(),
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateConfig {
    Ground,
    #[default]
    QubitExcited,
    ModeFock {
        mode: usize,
        n: usize,
    },
    ModeCoherent {
        mode: usize,
        amplitude_re: f64,
        amplitude_im: f64,
    },
}

impl InitialStateConfig {
    pub fn state(self) -> InitialState {
        match self {
            InitialStateConfig::Ground => InitialState::Ground,
            InitialStateConfig::QubitExcited => InitialState::QubitExcited,
            InitialStateConfig::ModeFock { mode, n } => InitialState::ModeFock { mode, n },
            InitialStateConfig::ModeCoherent {
                mode,
                amplitude_re,
                amplitude_im,
            } => InitialState::ModeCoherent {
                mode,
                amplitude: Complex64::new(amplitude_re, amplitude_im),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    ExponentialMidpoint,
    Magnus4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub t_rise_ns: Vec<f64>,
    pub sample_spacing_ns: f64,
    pub initial_state: InitialStateConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            t_rise_ns: vec![5.0, 10.0, 20.0, 40.0, 80.0, 150.0],
            sample_spacing_ns: 1.0,
            initial_state: InitialStateConfig::QubitExcited,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FockConfig {
    pub mode: usize,
    pub n_list: Vec<usize>,
    pub t_rise_ns: f64,
    /// Number of leading modes of the system kept for the scan.
    pub n_modes: usize,
    pub fock_cutoff: usize,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            mode: 0,
            n_list: vec![0, 1, 2, 3, 5, 7, 9],
            t_rise_ns: 50.0,
            n_modes: 2,
            fock_cutoff: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    pub amplitude_ma: f64,
    pub length_ns: f64,
    pub total_ns: f64,
    pub dt_ns: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            amplitude_ma: 1.0,
            length_ns: 300.0,
            total_ns: 600.0,
            dt_ns: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredistortConfig {
    /// CSV with columns `t_ns,I_mA` on a uniform grid starting at 0; when
    /// absent the rectangular `pulse` is used.
    pub input: Option<PathBuf>,
    pub pulse: PulseConfig,
    pub tau_ns: f64,
    pub r_ohm: f64,
}

impl Default for PredistortConfig {
    fn default() -> Self {
        Self {
            input: None,
            pulse: PulseConfig::default(),
            tau_ns: mslz_core::calib::DEFAULT_BIASTEE_TAU_NS,
            r_ohm: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IqConfig {
    /// CSV with columns `I,Q`; used in addition to `points`.
    pub input: Option<PathBuf>,
    pub points: Vec<[f64; 2]>,
    pub ref_g: [f64; 2],
    pub ref_e: [f64; 2],
}

impl Default for IqConfig {
    fn default() -> Self {
        Self {
            input: None,
            points: Vec::new(),
            ref_g: [0.0, 0.0],
            ref_e: [1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OffsetConfig {
    /// Sweep CSV shifted onto `map_b`.
    pub map_a: Option<PathBuf>,
    pub map_b: Option<PathBuf>,
    pub dt_window_ns: [f64; 2],
    pub df_window_mhz: [f64; 2],
}

impl Default for OffsetConfig {
    fn default() -> Self {
        Self {
            map_a: None,
            map_b: None,
            dt_window_ns: [-10.0, 10.0],
            df_window_mhz: [-5.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub scheme: SchemeName,
    pub step_safety: f64,
    pub min_steps: usize,
    pub max_step_ns: Option<f64>,
    pub norm_tolerance: f64,
    pub krylov_tolerance: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let d = EvolveOptions::default();
        Self {
            scheme: SchemeName::ExponentialMidpoint,
            step_safety: d.step_safety,
            min_steps: d.min_steps,
            max_step_ns: d.max_step,
            norm_tolerance: d.norm_tolerance,
            krylov_tolerance: d.krylov_tolerance,
        }
    }
}

impl ToleranceConfig {
    pub fn options(&self) -> CliResult<EvolveOptions> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("step_safety", self.step_safety)?;
        positive("norm_tolerance", self.norm_tolerance)?;
        positive("krylov_tolerance", self.krylov_tolerance)?;
        if let Some(h) = self.max_step_ns {
            positive("max_step_ns", h)?;
        }
        Ok(EvolveOptions {
            scheme: match self.scheme {
                SchemeName::ExponentialMidpoint => Scheme::ExponentialMidpoint,
                SchemeName::Magnus4 => Scheme::Magnus4,
            },
            step_safety: self.step_safety,
            min_steps: self.min_steps.max(1),
            max_step: self.max_step_ns,
            norm_tolerance: self.norm_tolerance,
            krylov_tolerance: self.krylov_tolerance,
            ..EvolveOptions::default()
        })
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Single-line JSON form carried in output headers.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}
