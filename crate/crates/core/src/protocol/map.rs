use crate::hilbert::CouplingModel;
use crate::lzmodel::InitialState;

/// One sweep at fixed rise time, sampled along the trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MapRow {
    pub t_rise: f64,
    /// Sample times in ns, from 0 to `t_rise`.
    pub times: Vec<f64>,
    /// Qubit angular frequency at each sample.
    pub omega_q: Vec<f64>,
    /// Clamped excited-state population at each sample.
    pub population: Vec<f64>,
    pub max_norm_drift: f64,
    /// Largest deviation of `<N>` from its initial value.
    pub max_excitation_drift: f64,
}

impl MapRow {
    pub fn final_population(&self) -> f64 {
        *self.population.last().expect("row has samples")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapMetadata {
    pub spec_fingerprint: u64,
    pub coupling_model: CouplingModel,
    pub initial_state: InitialState,
}

/// Qubit population over a grid of rise times and trajectory times.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMap {
    pub rows: Vec<MapRow>,
    pub metadata: Option<MapMetadata>,
}

impl PopulationMap {
    pub fn new(rows: Vec<MapRow>) -> Self {
        Self {
            rows,
            metadata: None,
        }
    }

    pub fn t_rise_grid(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t_rise).collect()
    }

    pub fn final_populations(&self) -> Vec<f64> {
        self.rows.iter().map(MapRow::final_population).collect()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.max_norm_drift)
            .fold(0.0, f64::max)
    }

    pub fn max_excitation_drift(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.max_excitation_drift)
            .fold(0.0, f64::max)
    }
}

/// Final population against rise time, with the analytic overlay.
#[derive(Debug, Clone, PartialEq)]
pub struct LzCurve {
    pub t_rise: Vec<f64>,
    pub simulated: Vec<f64>,
    pub formula: Vec<f64>,
}

impl LzCurve {
    pub fn max_abs_error(&self) -> f64 {
        self.simulated
            .iter()
            .zip(&self.formula)
            .map(|(s, f)| (s - f).abs())
            .fold(0.0, f64::max)
    }

    pub fn mean_abs_error(&self) -> f64 {
        let n = self.simulated.len().max(1) as f64;
        self.simulated
            .iter()
            .zip(&self.formula)
            .map(|(s, f)| (s - f).abs())
            .sum::<f64>()
            / n
    }
}
