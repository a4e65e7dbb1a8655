//! Instantaneous frequency of the post-crossing population oscillations.
//!
//! Each analysis window is fitted by least squares with
//! `c0 + c1 x + A cos(2π f x) + B sin(2π f x)` (`x` centred on the window)
//! over a frequency scan; the frequency with the smallest residual wins and
//! is refined by golden-section search.

use std::f64::consts::TAU;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::hilbert::{angular_to_ghz, SystemSpec};
use crate::lzmodel::SweepScenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StueckelbergOptions {
    /// Length of each analysis window, ns.
    pub window_ns: f64,
    /// Distance between consecutive window starts, ns.
    pub hop_ns: f64,
    /// The post-crossing region starts once the qubit is this many collective
    /// couplings `sqrt(Σ g²)` above the highest mode.
    pub margin_couplings: f64,
    /// Minimum number of expected oscillation periods in the region.
    pub min_periods: f64,
    /// Relative tolerance on each window's frequency.
    pub tolerance: f64,
}

impl Default for StueckelbergOptions {
    fn default() -> Self {
        Self {
            window_ns: 15.0,
            hop_ns: 3.75,
            margin_couplings: 3.0,
            min_periods: 5.0,
            tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowEstimate {
    pub t_center: f64,
    /// Fitted oscillation frequency, GHz.
    pub measured_ghz: f64,
    /// `|ω_q(t_center) - ω_ensemble| / 2π`, GHz.
    pub expected_ghz: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StueckelbergReport {
    /// Reference frequency of the ensemble, GHz.
    pub ensemble_frequency_ghz: f64,
    pub ensemble_definition: &'static str,
    /// Start of the post-crossing region, ns.
    pub t_start: f64,
    pub expected_periods: f64,
    pub windows: Vec<WindowEstimate>,
    pub max_relative_error: f64,
    pub tolerance: f64,
}

impl StueckelbergReport {
    pub fn within_tolerance(&self) -> bool {
        self.max_relative_error <= self.tolerance
    }

    pub fn frequency_increasing(&self) -> bool {
        self.windows
            .windows(2)
            .all(|w| w[1].measured_ghz > w[0].measured_ghz)
    }
}

struct Window<'a> {
    x: Vec<f64>,
    y: &'a [f64],
}

impl Window<'_> {
    /// Residual sum of squares of the trend-plus-sinusoid fit at `f`.
    fn residual(&self, f: f64) -> f64 {
        let basis = |x: f64| {
            let ph = TAU * f * x;
            Vector4::new(1.0, x, ph.cos(), ph.sin())
        };
        let mut ata = Matrix4::<f64>::zeros();
        let mut aty = Vector4::<f64>::zeros();
        for (&x, &y) in self.x.iter().zip(self.y) {
            let b = basis(x);
            ata += b * b.transpose();
            aty += b * y;
        }
        let Some(c) = ata.lu().solve(&aty) else {
            return f64::INFINITY;
        };
        self.x
            .iter()
            .zip(self.y)
            .map(|(&x, &y)| {
                let r = y - basis(x).dot(&c);
                r * r
            })
            .sum()
    }

    fn best_frequency(&self, f_lo: f64, f_hi: f64, length: f64) -> f64 {
        let step = 1.0 / (16.0 * length);
        let n = ((f_hi - f_lo) / step).floor().max(1.0) as usize;
        let (mut best_f, mut best_r) = (f_lo, f64::INFINITY);
        for k in 0..=n {
            let f = f_lo + k as f64 * step;
            let r = self.residual(f);
            if r < best_r {
                best_r = r;
                best_f = f;
            }
        }
        // golden-section refinement inside the bracketing scan cells
        let (mut a, mut b) = ((best_f - step).max(f_lo), (best_f + step).min(f_hi));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut rc, mut rd) = (self.residual(c), self.residual(d));
        for _ in 0..60 {
            if rc < rd {
                b = d;
                d = c;
                rd = rc;
                c = b - phi * (b - a);
                rc = self.residual(c);
            } else {
                a = c;
                c = d;
                rc = rd;
                d = a + phi * (b - a);
                rd = self.residual(d);
            }
        }
        0.5 * (a + b)
    }
}

/// Sliding-window frequency estimates `(window centre, frequency in GHz)` of
/// a uniformly sampled signal. Frequencies are searched between one cycle
/// per window and the Nyquist frequency.
pub fn instantaneous_frequency(
    times: &[f64],
    signal: &[f64],
    window_ns: f64,
    hop_ns: f64,
) -> Result<Vec<(f64, f64)>> {
    if times.len() != signal.len() || times.len() < 8 {
        return Err(Error::InsufficientOscillations(
            "need at least 8 matching samples".into(),
        ));
    }
    let dt = times[1] - times[0];
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt.abs().max(1e-12));
    if !(dt > 0.0 && uniform) {
        return Err(Error::InvalidScenario(
            "samples must be uniformly spaced".into(),
        ));
    }
    if !(window_ns > 0.0 && hop_ns > 0.0) {
        return Err(Error::InvalidScenario(
            "window and hop must be positive".into(),
        ));
    }
    let nyquist = 0.5 / dt;
    let f_lo = 1.0 / window_ns;
    if f_lo >= nyquist {
        return Err(Error::InsufficientOscillations(
            "window too short for the sample spacing".into(),
        ));
    }
    let t_end = *times.last().unwrap();
    let eps = 1e-9 * window_ns;
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let start = times[0] + k as f64 * hop_ns;
        if start + window_ns > t_end + eps {
            break;
        }
        let lo = times.partition_point(|&t| t < start - eps);
        let hi = times.partition_point(|&t| t <= start + window_ns + eps);
        let centre = start + 0.5 * window_ns;
        let w = Window {
            x: times[lo..hi].iter().map(|t| t - centre).collect(),
            y: &signal[lo..hi],
        };
        if w.x.len() >= 5 {
            out.push((centre, w.best_frequency(f_lo, nyquist * 0.999, window_ns)));
        }
        k += 1;
    }
    Ok(out)
}

/// Compare the post-crossing oscillation frequency of a population trace with
/// the detuning `|ω_q(t) - ω_ensemble|`, where `ω_ensemble` is the
/// `g²`-weighted mean mode frequency.
pub fn stueckelberg_frequency_check(
    times: &[f64],
    population: &[f64],
    spec: &SystemSpec,
    scenario: &SweepScenario,
    options: &StueckelbergOptions,
) -> Result<StueckelbergReport> {
    let omega_ens = spec.ensemble_frequency();
    let g_eff = spec.couplings().iter().map(|g| g * g).sum::<f64>().sqrt();
    let omega_top = spec
        .modes
        .iter()
        .map(|m| m.frequency)
        .fold(f64::MIN, f64::max);
    let v = scenario.velocity(spec);
    let t_start = ((omega_top + options.margin_couplings * g_eff - spec.omega_i) / v).max(0.0);
    let t_end = times.last().copied().unwrap_or(0.0).min(scenario.t_rise);
    if t_start >= t_end {
        return Err(Error::InsufficientOscillations(format!(
            "sweep ends before the post-crossing region starts at {t_start:.2} ns"
        )));
    }
    // detuning is affine and positive on [t_start, t_end]
    let det = |t: f64| (scenario.omega_q(spec, t) - omega_ens).abs();
    let expected_periods = 0.5 * (det(t_start) + det(t_end)) * (t_end - t_start) / TAU;
    if expected_periods < options.min_periods {
        return Err(Error::InsufficientOscillations(format!(
            "{expected_periods:.2} periods expected after {t_start:.2} ns, need {}",
            options.min_periods
        )));
    }
    let first = times.partition_point(|&t| t < t_start);
    let last = times.partition_point(|&t| t <= t_end);
    let estimates = instantaneous_frequency(
        &times[first..last],
        &population[first..last],
        options.window_ns,
        options.hop_ns,
    )?;
    if estimates.is_empty() {
        return Err(Error::InsufficientOscillations(
            "no complete analysis window after the crossings".into(),
        ));
    }
    let windows: Vec<WindowEstimate> = estimates
        .into_iter()
        .map(|(t_center, measured_ghz)| {
            let expected_ghz = angular_to_ghz(det(t_center));
            WindowEstimate {
                t_center,
                measured_ghz,
                expected_ghz,
                relative_error: (measured_ghz - expected_ghz).abs() / expected_ghz,
            }
        })
        .collect();
    let max_relative_error = windows.iter().map(|w| w.relative_error).fold(0.0, f64::max);
    Ok(StueckelbergReport {
        ensemble_frequency_ghz: angular_to_ghz(omega_ens),
        ensemble_definition: "coupling-squared weighted mean mode frequency",
        t_start,
        expected_periods,
        windows,
        max_relative_error,
        tolerance: options.tolerance,
    })
}
