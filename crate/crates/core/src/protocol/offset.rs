//! Recovery of a rise-time / frequency offset between two population maps by
//! exhaustive grid search on the mean squared error.

use std::f64::consts::TAU;

use rayon::prelude::*;

use super::map::{MapRow, PopulationMap};
use crate::error::{Error, Result};

/// Grid step of the rise-time offset search, in ns.
pub const DT_STEP_NS: f64 = 0.1;
/// Grid step of the frequency offset search, in GHz (0.1 MHz).
pub const DF_STEP_GHZ: f64 = 1e-4;

/// Inclusive search windows for the offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetWindow {
    pub dt_ns: (f64, f64),
    pub df_ghz: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationFit {
    /// Rise-time offset in ns.
    pub dt_ns: f64,
    /// Ordinary frequency offset in GHz.
    pub df_ghz: f64,
    pub mse: f64,
    /// Number of points of the target map that overlapped at the optimum.
    pub n_points: usize,
    pub window: OffsetWindow,
    pub dt_step_ns: f64,
    pub df_step_ghz: f64,
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as i64;
    (0..=n.max(0)).map(|k| lo + k as f64 * step).collect()
}

/// Linear interpolation of a row's population at angular frequency `omega`.
fn row_at(row: &MapRow, omega: f64) -> Option<f64> {
    let w = &row.omega_q;
    if w.is_empty() || omega < w[0] || omega > w[w.len() - 1] {
        return None;
    }
    let k = w.partition_point(|&x| x < omega);
    if k == 0 {
        return Some(row.population[0]);
    }
    let (w0, w1) = (w[k - 1], w[k]);
    let s = if w1 > w0 {
        (omega - w0) / (w1 - w0)
    } else {
        0.0
    };
    Some(row.population[k - 1] * (1.0 - s) + row.population[k] * s)
}

/// Bilinear lookup over `(t_rise, ω_q)` between neighbouring rows.
fn map_at(rows: &[MapRow], t_rise: f64, omega: f64) -> Option<f64> {
    if rows.is_empty() || t_rise < rows[0].t_rise || t_rise > rows[rows.len() - 1].t_rise {
        return None;
    }
    let k = rows.partition_point(|r| r.t_rise < t_rise);
    if k == 0 || rows[k].t_rise == t_rise {
        return row_at(&rows[k], omega);
    }
    let (lo, hi) = (&rows[k - 1], &rows[k]);
    let s = (t_rise - lo.t_rise) / (hi.t_rise - lo.t_rise);
    Some(row_at(lo, omega)? * (1.0 - s) + row_at(hi, omega)? * s)
}

/// Mean squared error between `target` and `source` shifted by
/// `(dt, dω)`: the source is evaluated at `(t_rise - dt, ω_q - dω)`.
fn shifted_mse(
    source: &[MapRow],
    target: &PopulationMap,
    dt: f64,
    domega: f64,
) -> Option<(f64, usize)> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for row in &target.rows {
        for (&w, &p) in row.omega_q.iter().zip(&row.population) {
            if let Some(q) = map_at(source, row.t_rise - dt, w - domega) {
                sum += (q - p) * (q - p);
                n += 1;
            }
        }
    }
    (n > 0).then(|| (sum / n as f64, n))
}

/// Find the `(Δt, Δf)` on a 0.1 ns × 0.1 MHz grid that minimizes the MSE
/// between `map_a` shifted by the offsets and `map_b`.
pub fn calibrate_offset(
    map_a: &PopulationMap,
    map_b: &PopulationMap,
    window: OffsetWindow,
) -> Result<CalibrationFit> {
    let mut source = map_a.rows.clone();
    if source.iter().any(|r| !r.t_rise.is_finite()) {
        return Err(Error::InvalidScenario("non-finite rise time in map".into()));
    }
    source.sort_by(|a, b| a.t_rise.total_cmp(&b.t_rise));
    let dts = grid(window.dt_ns.0, window.dt_ns.1, DT_STEP_NS);
    let dfs = grid(window.df_ghz.0, window.df_ghz.1, DF_STEP_GHZ);

    let best = dts
        .par_iter()
        .map(|&dt| {
            let mut best: Option<(f64, f64, f64, usize)> = None;
            for &df in &dfs {
                if let Some((mse, n)) = shifted_mse(&source, map_b, dt, TAU * df) {
                    if best.is_none_or(|b| mse < b.2) {
                        best = Some((dt, df, mse, n));
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<(f64, f64, f64, usize)>, |acc, c| match acc {
            Some(a) if a.2 <= c.2 => Some(a),
            _ => Some(c),
        });

    let (dt_ns, df_ghz, mse, n_points) = best.ok_or(Error::EmptyOverlap)?;
    Ok(CalibrationFit {
        dt_ns,
        df_ghz,
        mse,
        n_points,
        window,
        dt_step_ns: DT_STEP_NS,
        df_step_ghz: DF_STEP_GHZ,
    })
}
