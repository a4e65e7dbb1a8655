use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Measured bias-tee time constant, ns.
pub const DEFAULT_BIASTEE_TAU_NS: f64 = 718.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformUnit {
    Milliampere,
    Millivolt,
}

/// Uniformly sampled real waveform starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    /// Sample period, ns.
    pub dt: f64,
    pub values: Vec<f64>,
    pub unit: WaveformUnit,
}

impl Waveform {
    pub fn new(dt: f64, values: Vec<f64>, unit: WaveformUnit) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidWaveform(format!(
                "sample period must be positive, got {dt}"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidWaveform(format!("sample {i} is not finite")));
        }
        Ok(Self { dt, values, unit })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| k as f64 * self.dt)
    }
}

/// Voltage that makes the bias tee deliver the current `i_q`:
/// `V(t) = R (I(t) + (1/τ) ∫₀ᵗ I dt')`, integrated with the trapezoidal rule.
/// Milliamperes times ohms gives millivolts.
pub fn biastee_predistort(i_q: &Waveform, tau: f64, r: f64) -> Result<Waveform> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidWaveform(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let mut out = Vec::with_capacity(i_q.len());
    let mut integral = 0.0;
    let mut prev = None;
    for &i in &i_q.values {
        if let Some(p) = prev {
            integral += 0.5 * (p + i) * i_q.dt;
        }
        prev = Some(i);
        out.push(r * (i + integral / tau));
    }
    Ok(Waveform {
        dt: i_q.dt,
        values: out,
        unit: WaveformUnit::Millivolt,
    })
}

/// First-order high-pass response of the bias tee,
/// `out_k = out_{k-1} + (in_k - in_{k-1}) - out_{k-1} dt/τ` with `out_0 = in_0`.
pub fn biastee_highpass(input: &Waveform, tau: f64) -> Result<Waveform> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidWaveform(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let mut out = Vec::with_capacity(input.len());
    for (k, &x) in input.values.iter().enumerate() {
        let y = match k {
            0 => x,
            _ => {
                let prev = out[k - 1];
                prev + (x - input.values[k - 1]) - prev * input.dt / tau
            }
        };
        out.push(y);
    }
    Ok(Waveform {
        dt: input.dt,
        values: out,
        unit: input.unit,
    })
}

/// Result of fitting `y(t) = A exp(-t/τ) + C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauFit {
    pub tau: f64,
    /// Standard error of `tau` from `s² (JᵀJ)⁻¹`.
    pub tau_stderr: f64,
    /// Amplitude referred to the first sample time.
    pub amplitude: f64,
    pub offset: f64,
    pub rss: f64,
    pub n_points: usize,
    pub iterations: usize,
}

const MIN_FIT_POINTS: usize = 10;
const MAX_LM_ITERATIONS: usize = 500;

/// Least-squares fit of an exponential decay with offset to `(t, y)` samples.
///
/// The starting point comes from the integral-equation linearization
/// `y - y₀ = -(1/τ) ∫(y - C) dt`, which needs neither `C` nor logarithms;
/// Levenberg-Marquardt then refines `(A, τ, C)`.
pub fn biastee_fit_tau(times: &[f64], values: &[f64]) -> Result<TauFit> {
    let n = times.len();
    if n != values.len() {
        return Err(Error::DegenerateData(
            "times and values differ in length".into(),
        ));
    }
    if n < MIN_FIT_POINTS {
        return Err(Error::DegenerateData(format!(
            "need at least {MIN_FIT_POINTS} samples, got {n}"
        )));
    }
    if times.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("non-finite sample".into()));
    }
    if !times.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::DegenerateData(
            "times must be strictly increasing".into(),
        ));
    }
    let t0 = times[0];
    let x: Vec<f64> = times.iter().map(|t| t - t0).collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    if hi - lo <= 1e-12 * scale {
        return Err(Error::DegenerateData("trace is constant".into()));
    }

    let (mut p, _) = initial_guess(&x, values)?;
    let mut lambda = 1e-3;
    let mut rss = residual_ss(&x, values, &p);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_LM_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(&x, values, &p);
        let mut improved = false;
        for _ in 0..40 {
            let mut damped = jtj;
            for d in 0..3 {
                damped[(d, d)] += lambda * jtj[(d, d)].max(f64::MIN_POSITIVE);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let trial_rss = if trial[1] > 0.0 {
                residual_ss(&x, values, &trial)
            } else {
                f64::INFINITY
            };
            if trial_rss <= rss {
                let small_step =
                    (0..3).all(|d| step[d].abs() <= 1e-12 * (p[d].abs() + 1e-12 * scale));
                let small_gain = rss - trial_rss <= 1e-15 * rss.max(f64::MIN_POSITIVE);
                p = trial;
                rss = trial_rss;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                converged = small_step || small_gain || rss == 0.0;
                break;
            }
            lambda *= 10.0;
        }
        if converged || !improved {
            // no downhill step left: we are at the minimum to working precision
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations });
    }

    let (jtj, _) = normal_equations(&x, values, &p);
    let dof = (n - 3) as f64;
    let tau_stderr = match jtj.try_inverse() {
        Some(cov) => ((rss / dof) * cov[(1, 1)]).max(0.0).sqrt(),
        None => return Err(Error::DegenerateData("singular fit Jacobian".into())),
    };
    Ok(TauFit {
        tau: p[1],
        tau_stderr,
        amplitude: p[0],
        offset: p[2],
        rss,
        n_points: n,
        iterations,
    })
}

fn initial_guess(x: &[f64], y: &[f64]) -> Result<(Vector3<f64>, f64)> {
    // y_k - y_0 = a x_k + c S_k with S the running trapezoid integral of y;
    // c = -1/τ.
    let mut s = vec![0.0; x.len()];
    for k in 1..x.len() {
        s[k] = s[k - 1] + 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1]);
    }
    let mut m = nalgebra::Matrix2::<f64>::zeros();
    let mut b = nalgebra::Vector2::<f64>::zeros();
    for k in 0..x.len() {
        let row = nalgebra::Vector2::new(x[k], s[k]);
        m += row * row.transpose();
        b += row * (y[k] - y[0]);
    }
    let sol = m
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::DegenerateData("linearized fit is singular".into()))?;
    let c = sol[1];
    if c.is_nan() || c >= 0.0 {
        return Err(Error::DegenerateData(
            "no decaying segment in the trace".into(),
        ));
    }
    let tau = -1.0 / c;
    // with τ fixed the model is linear in (A, C)
    let mut m = nalgebra::Matrix2::<f64>::zeros();
    let mut b = nalgebra::Vector2::<f64>::zeros();
    for k in 0..x.len() {
        let row = nalgebra::Vector2::new((-x[k] / tau).exp(), 1.0);
        m += row * row.transpose();
        b += row * y[k];
    }
    let ac = m
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::DegenerateData("decay is not resolved by the samples".into()))?;
    Ok((Vector3::new(ac[0], tau, ac[1]), tau))
}

fn residual_ss(x: &[f64], y: &[f64], p: &Vector3<f64>) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&t, &v)| {
            let r = v - (p[0] * (-t / p[1]).exp() + p[2]);
            r * r
        })
        .sum()
}

fn normal_equations(x: &[f64], y: &[f64], p: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>) {
    let (a, tau, c) = (p[0], p[1], p[2]);
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    for (&t, &v) in x.iter().zip(y) {
        let e = (-t / tau).exp();
        let j = Vector3::new(e, a * e * t / (tau * tau), 1.0);
        let r = v - (a * e + c);
        jtj += j * j.transpose();
        jtr += j * r;
    }
    (jtj, jtr)
}
