use rayon::prelude::*;

use super::map::{LzCurve, MapMetadata, MapRow, PopulationMap};
use super::{clamp_population, lz_formula};
use crate::error::{Error, Result};
use crate::hilbert::SystemSpec;
use crate::lzmodel::{InitialState, SweepScenario};
use crate::propagate::{evolve, EvolveOptions, Observable};

#[derive(Debug, Clone, PartialEq)]
pub struct Figure2 {
    pub map: PopulationMap,
    pub curve: LzCurve,
}

/// Population trace for one initial Fock number.
#[derive(Debug, Clone, PartialEq)]
pub struct FockTrace {
    pub n: usize,
    pub row: MapRow,
}

fn run_row(spec: &SystemSpec, scenario: &SweepScenario, options: &EvolveOptions) -> Result<MapRow> {
    let tr = evolve(
        spec,
        scenario,
        &[Observable::QubitPopulation, Observable::ExcitationNumber],
        options,
    )?;
    let population = tr.values[0].iter().copied().map(clamp_population).collect();
    let excitation = &tr.values[1];
    let n0 = excitation[0];
    let max_excitation_drift = excitation
        .iter()
        .map(|n| (n - n0).abs())
        .fold(0.0, f64::max);
    Ok(MapRow {
        t_rise: scenario.t_rise,
        omega_q: tr
            .times
            .iter()
            .map(|&t| scenario.omega_q(spec, t))
            .collect(),
        times: tr.times,
        population,
        max_norm_drift: tr.max_norm_drift,
        max_excitation_drift,
    })
}

fn run_map(
    spec: &SystemSpec,
    initial_state: InitialState,
    t_rise_grid: &[f64],
    options: &EvolveOptions,
) -> Result<PopulationMap> {
    run_population_map(spec, initial_state, t_rise_grid, 1.0, options)
}

/// One sweep per rise time from `initial_state`, sampled every
/// `sample_spacing` ns or slightly less so that `t_rise` is a sample.
/// Rows keep the order of `t_rise_grid`.
pub fn run_population_map(
    spec: &SystemSpec,
    initial_state: InitialState,
    t_rise_grid: &[f64],
    sample_spacing: f64,
    options: &EvolveOptions,
) -> Result<PopulationMap> {
    if t_rise_grid.is_empty() {
        return Err(Error::InvalidScenario("empty rise-time grid".into()));
    }
    if !(sample_spacing > 0.0 && sample_spacing.is_finite()) {
        return Err(Error::InvalidScenario(format!(
            "sample spacing must be positive, got {sample_spacing}"
        )));
    }
    let rows = t_rise_grid
        .par_iter()
        .map(|&t_rise| {
            let mut scenario = SweepScenario::new(t_rise, initial_state);
            if t_rise.is_finite() && t_rise > 0.0 {
                scenario =
                    scenario.with_samples(((t_rise / sample_spacing).ceil() as usize + 1).max(2));
            }
            run_row(spec, &scenario, options)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PopulationMap {
        rows,
        metadata: Some(MapMetadata {
            spec_fingerprint: spec.fingerprint(),
            coupling_model: spec.coupling_model,
            initial_state,
        }),
    })
}

/// Sweeps starting from an excited qubit, one per rise time, together with
/// the final populations and the analytic survival probability.
pub fn run_figure2(
    spec: &SystemSpec,
    t_rise_grid: &[f64],
    options: &EvolveOptions,
) -> Result<Figure2> {
    let map = run_map(spec, InitialState::QubitExcited, t_rise_grid, options)?;
    let couplings = spec.couplings();
    let formula = t_rise_grid
        .iter()
        .map(|&t| lz_formula(&couplings, (spec.omega_f - spec.omega_i) / t))
        .collect();
    let curve = LzCurve {
        t_rise: t_rise_grid.to_vec(),
        simulated: map.final_populations(),
        formula,
    };
    Ok(Figure2 { map, curve })
}

/// Sweeps with the qubit in its ground state and a single photon in
/// `excited_mode`.
pub fn run_figure3(
    spec: &SystemSpec,
    excited_mode: usize,
    t_rise_grid: &[f64],
    options: &EvolveOptions,
) -> Result<PopulationMap> {
    run_map(
        spec,
        InitialState::ModeFock {
            mode: excited_mode,
            n: 1,
        },
        t_rise_grid,
        options,
    )
}

/// One sweep per initial Fock number `n` in `mode`, at a fixed rise time.
pub fn run_fock_scan(
    spec: &SystemSpec,
    mode: usize,
    n_list: &[usize],
    t_rise: f64,
    options: &EvolveOptions,
) -> Result<Vec<FockTrace>> {
    let m = spec.modes.get(mode).ok_or(Error::ModeIndex {
        index: mode,
        n_modes: spec.modes.len(),
    })?;
    if let Some(&n_max) = n_list.iter().max() {
        if n_max + 1 > m.fock_cutoff {
            return Err(Error::InitialState(format!(
                "Fock number {n_max} needs cutoff {} but mode {mode} keeps {}",
                n_max + 1,
                m.fock_cutoff
            )));
        }
    }
    spec.validate()?;
    n_list
        .par_iter()
        .map(|&n| {
            let scenario = SweepScenario::new(t_rise, InitialState::ModeFock { mode, n });
            Ok(FockTrace {
                n,
                row: run_row(spec, &scenario, options)?,
            })
        })
        .collect()
}

/// First sample time at which the population reaches half of its maximum
/// over the trace. `None` for a trace that never leaves zero.
pub fn onset_time(times: &[f64], population: &[f64]) -> Option<f64> {
    let peak = population.iter().copied().fold(0.0, f64::max);
    if peak <= 1e-12 {
        return None;
    }
    times
        .iter()
        .zip(population)
        .find(|(_, &p)| p >= 0.5 * peak)
        .map(|(&t, _)| t)
}
