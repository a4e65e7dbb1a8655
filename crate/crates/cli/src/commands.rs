use std::path::{Path, PathBuf};

use mslz_core::calib::{
    biastee_highpass, biastee_predistort, iq_project, IqPoint, Waveform, WaveformUnit,
};
use mslz_core::hilbert::{angular_to_ghz, ghz_to_angular};
use mslz_core::protocol::{
    calibrate_offset, run_figure2, run_fock_scan, run_population_map, MapRow, OffsetWindow,
    PopulationMap,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{fmt_float, Table};

pub const SWEEP_COLUMNS: [&str; 4] = ["t_rise_ns", "t_ns", "omega_q_GHz", "P_q"];

pub fn cmd_sweep(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let spec = config.system.build(None)?;
    let map = run_population_map(
        &spec,
        config.sweep.initial_state.state(),
        &config.sweep.t_rise_ns,
        config.sweep.sample_spacing_ns,
        &config.tolerances.options()?,
    )?;
    let mut table = Table::new("sweep", config, spec.fingerprint(), &SWEEP_COLUMNS);
    for row in &map.rows {
        for ((&t, &w), &p) in row.times.iter().zip(&row.omega_q).zip(&row.population) {
            table.push_floats(&[row.t_rise, t, angular_to_ghz(w), p]);
        }
    }
    let path = out.join("sweep.csv");
    table.write(&path)?;
    Ok(path)
}

pub fn cmd_lzcurve(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let spec = config.system.build(None)?;
    let fig = run_figure2(
        &spec,
        &config.sweep.t_rise_ns,
        &config.tolerances.options()?,
    )?;
    let mut table = Table::new(
        "lzcurve",
        config,
        spec.fingerprint(),
        &["t_rise_ns", "P_q_sim", "P_q_formula"],
    );
    let c = &fig.curve;
    for i in 0..c.t_rise.len() {
        table.push_floats(&[c.t_rise[i], c.simulated[i], c.formula[i]]);
    }
    let path = out.join("lzcurve.csv");
    table.write(&path)?;
    Ok(path)
}

pub fn cmd_fock(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let f = &config.fock;
    let mut system = config.system.clone();
    system.n_modes = Some(f.n_modes);
    let spec = system.build(Some(f.fock_cutoff))?;
    let traces = run_fock_scan(
        &spec,
        f.mode,
        &f.n_list,
        f.t_rise_ns,
        &config.tolerances.options()?,
    )?;
    let mut table = Table::new(
        "fock",
        config,
        spec.fingerprint(),
        &["n", "t_rise_ns", "t_ns", "omega_q_GHz", "P_q"],
    );
    for tr in &traces {
        let row = &tr.row;
        for ((&t, &w), &p) in row.times.iter().zip(&row.omega_q).zip(&row.population) {
            table.push(vec![
                tr.n.to_string(),
                fmt_float(row.t_rise),
                fmt_float(t),
                fmt_float(angular_to_ghz(w)),
                fmt_float(p),
            ]);
        }
    }
    let path = out.join("fock.csv");
    table.write(&path)?;
    Ok(path)
}

fn read_columns(path: &Path, names: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let idx = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| bad(format!("missing column {n}")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        for (c, &i) in idx.iter().enumerate() {
            let v: f64 = record.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
                bad(format!(
                    "record {}: column {} is not a number",
                    line + 1,
                    names[c]
                ))
            })?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

fn input_current(config: &RunConfig) -> CliResult<Waveform> {
    let p = &config.predistort;
    match &p.input {
        Some(path) => {
            let cols = read_columns(path, &["t_ns", "I_mA"])?;
            let (t, i) = (&cols[0], &cols[1]);
            if t.len() < 2 {
                return Err(CliError::Config(
                    "waveform needs at least two samples".into(),
                ));
            }
            let dt = t[1] - t[0];
            let uniform = t
                .iter()
                .enumerate()
                .all(|(k, &tk)| (tk - k as f64 * dt).abs() <= 1e-9 * dt.abs().max(1.0));
            if t[0] != 0.0 || !uniform {
                return Err(CliError::Config(
                    "waveform must be uniformly sampled from t = 0".into(),
                ));
            }
            Ok(Waveform::new(dt, i.clone(), WaveformUnit::Milliampere)?)
        }
        None => {
            let pulse = &p.pulse;
            if !(pulse.dt_ns > 0.0 && pulse.total_ns > 0.0) {
                return Err(CliError::Config(
                    "pulse dt_ns and total_ns must be positive".into(),
                ));
            }
            let n = (pulse.total_ns / pulse.dt_ns).round() as usize + 1;
            let values = (0..n)
                .map(|k| {
                    if (k as f64) * pulse.dt_ns < pulse.length_ns {
                        pulse.amplitude_ma
                    } else {
                        0.0
                    }
                })
                .collect();
            Ok(Waveform::new(
                pulse.dt_ns,
                values,
                WaveformUnit::Milliampere,
            )?)
        }
    }
}

pub fn cmd_predistort(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let p = &config.predistort;
    if !(p.r_ohm > 0.0 && p.r_ohm.is_finite()) {
        return Err(CliError::Config(format!(
            "r_ohm must be positive, got {}",
            p.r_ohm
        )));
    }
    let current = input_current(config)?;
    let voltage = biastee_predistort(&current, p.tau_ns, p.r_ohm)?;
    let delivered = biastee_highpass(&voltage, p.tau_ns)?;
    let spec = config.system.build(None)?;
    let mut table = Table::new(
        "predistort",
        config,
        spec.fingerprint(),
        &["t_ns", "I_q_mA", "V_awg_mV", "I_delivered_mA"],
    );
    for (k, t) in current.times().enumerate() {
        table.push_floats(&[
            t,
            current.values[k],
            voltage.values[k],
            delivered.values[k] / p.r_ohm,
        ]);
    }
    let path = out.join("predistort.csv");
    table.write(&path)?;
    Ok(path)
}

pub fn cmd_iqproject(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let q = &config.iqproject;
    let mut points: Vec<IqPoint> = q
        .points
        .iter()
        .map(|&[i, qv]| IqPoint::new(i, qv))
        .collect();
    if let Some(path) = &q.input {
        let cols = read_columns(path, &["I", "Q"])?;
        points.extend(
            cols[0]
                .iter()
                .zip(&cols[1])
                .map(|(&i, &qv)| IqPoint::new(i, qv)),
        );
    }
    let proj = iq_project(
        &points,
        IqPoint::new(q.ref_g[0], q.ref_g[1]),
        IqPoint::new(q.ref_e[0], q.ref_e[1]),
    )?;
    let spec = config.system.build(None)?;
    let mut table = Table::new(
        "iqproject",
        config,
        spec.fingerprint(),
        &["I", "Q", "P_raw", "P_clamped"],
    );
    for (k, z) in points.iter().enumerate() {
        table.push_floats(&[z.re, z.im, proj.raw[k], proj.clamped[k]]);
    }
    let path = out.join("iqproject.csv");
    table.write(&path)?;
    Ok(path)
}

/// Population map from a `sweep` CSV; consecutive records with the same
/// rise time form one row.
pub fn read_map(path: &Path) -> CliResult<PopulationMap> {
    let cols = read_columns(path, &SWEEP_COLUMNS)?;
    let mut rows: Vec<MapRow> = Vec::new();
    for (k, &t_rise) in cols[0].iter().enumerate() {
        if rows.last().is_none_or(|r| r.t_rise != t_rise) {
            rows.push(MapRow {
                t_rise,
                times: Vec::new(),
                omega_q: Vec::new(),
                population: Vec::new(),
                max_norm_drift: 0.0,
                max_excitation_drift: 0.0,
            });
        }
        let row = rows.last_mut().unwrap();
        row.times.push(cols[1][k]);
        row.omega_q.push(ghz_to_angular(cols[2][k]));
        row.population.push(cols[3][k]);
    }
    if rows.is_empty() {
        return Err(CliError::Config(format!("{}: no map rows", path.display())));
    }
    Ok(PopulationMap::new(rows))
}

pub fn cmd_calibrate_offset(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let c = &config.calibrate_offset;
    let need = |p: &Option<PathBuf>, name: &str| {
        p.clone()
            .ok_or_else(|| CliError::Config(format!("calibrate_offset.{name} is required")))
    };
    let map_a = read_map(&need(&c.map_a, "map_a")?)?;
    let map_b = read_map(&need(&c.map_b, "map_b")?)?;
    let window = OffsetWindow {
        dt_ns: (c.dt_window_ns[0], c.dt_window_ns[1]),
        df_ghz: (c.df_window_mhz[0] * 1e-3, c.df_window_mhz[1] * 1e-3),
    };
    if !(window.dt_ns.0 <= window.dt_ns.1 && window.df_ghz.0 <= window.df_ghz.1) {
        return Err(CliError::Config(
            "offset windows must be ordered [low, high]".into(),
        ));
    }
    let fit = calibrate_offset(&map_a, &map_b, window)?;
    let spec = config.system.build(None)?;
    let mut table = Table::new(
        "calibrate-offset",
        config,
        spec.fingerprint(),
        &[
            "dt_ns",
            "df_GHz",
            "mse",
            "n_points",
            "dt_step_ns",
            "df_step_GHz",
        ],
    );
    table.push(vec![
        fmt_float(fit.dt_ns),
        fmt_float(fit.df_ghz),
        fmt_float(fit.mse),
        fit.n_points.to_string(),
        fmt_float(fit.dt_step_ns),
        fmt_float(fit.df_step_ghz),
    ]);
    let path = out.join("calibrate_offset.csv");
    table.write(&path)?;
    Ok(path)
}
