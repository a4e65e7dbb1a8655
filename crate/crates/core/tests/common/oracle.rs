//! Independent reference for the one-excitation sector.
//!
//! Basis: index 0 is the excited qubit with all modes empty, index k + 1 is
//! the ground qubit with one photon in mode k. Energies are taken relative to
//! the first mode; a common energy shift does not change populations, so the
//! frame differs from the library's on purpose. Fixed-step RK4 in plain
//! complex arithmetic.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub struct OneExcitation {
    /// Mode angular frequencies, rad/ns.
    pub modes: Vec<f64>,
    /// Couplings, rad/ns.
    pub couplings: Vec<f64>,
    pub omega_i: f64,
    pub omega_f: f64,
    pub t_rise: f64,
}

/// Largest RK4 step, ns.
pub const ORACLE_STEP: f64 = 2.5e-3;

impl OneExcitation {
    pub fn dim(&self) -> usize {
        self.modes.len() + 1
    }

    fn omega_q(&self, t: f64) -> f64 {
        self.omega_i + (self.omega_f - self.omega_i) * t / self.t_rise
    }

    /// `dψ/dt = -i H(t) ψ`.
    fn rhs(&self, t: f64, psi: &[C], out: &mut [C]) {
        let e0 = self.modes[0];
        let mut top = C::new(self.omega_q(t) - e0, 0.0) * psi[0];
        for k in 0..self.modes.len() {
            let g = self.couplings[k];
            top += psi[k + 1] * g;
            out[k + 1] = psi[k + 1] * (self.modes[k] - e0) + psi[0] * g;
        }
        out[0] = top;
        for v in out.iter_mut() {
            *v *= C::new(0.0, -1.0);
        }
    }

    fn rk4(&self, t: f64, h: f64, psi: &mut [C]) {
        let d = psi.len();
        let (mut k1, mut k2, mut k3, mut k4) = (
            vec![C::default(); d],
            vec![C::default(); d],
            vec![C::default(); d],
            vec![C::default(); d],
        );
        let mut tmp = vec![C::default(); d];
        self.rhs(t, psi, &mut k1);
        for i in 0..d {
            tmp[i] = psi[i] + k1[i] * (0.5 * h);
        }
        self.rhs(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..d {
            tmp[i] = psi[i] + k2[i] * (0.5 * h);
        }
        self.rhs(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..d {
            tmp[i] = psi[i] + k3[i] * h;
        }
        self.rhs(t + h, &tmp, &mut k4);
        for i in 0..d {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }

    /// Amplitudes at each of `times` (increasing, starting at or after 0).
    pub fn run(&self, psi0: &[C], times: &[f64]) -> Vec<Vec<C>> {
        let mut psi = psi0.to_vec();
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            let span = target - t;
            if span > 0.0 {
                let n = (span / ORACLE_STEP).ceil() as usize;
                let h = span / n as f64;
                for k in 0..n {
                    self.rk4(t + k as f64 * h, h, &mut psi);
                }
                t = target;
            }
            out.push(psi.clone());
        }
        out
    }

    /// Qubit excited-state population at each of `times`.
    pub fn qubit_population(&self, psi0: &[C], times: &[f64]) -> Vec<f64> {
        self.run(psi0, times)
            .iter()
            .map(|p| p[0].norm_sqr())
            .collect()
    }

    /// Initial vector with the qubit excited.
    pub fn qubit_excited(&self) -> Vec<C> {
        let mut v = vec![C::default(); self.dim()];
        v[0] = C::new(1.0, 0.0);
        v
    }

    /// Initial vector with one photon in `mode`.
    pub fn photon_in(&self, mode: usize) -> Vec<C> {
        let mut v = vec![C::default(); self.dim()];
        v[mode + 1] = C::new(1.0, 0.0);
        v
    }
}

/// The coupled resonator ensemble in plain numbers: (GHz, MHz) pairs, a
/// 400 MHz sweep starting 200 MHz below the lowest mode.
pub fn resonator_ensemble(t_rise: f64) -> OneExcitation {
    let table = [(5.507, 14.6), (5.513, 12.1), (5.518, 14.4), (5.531, 6.3)];
    let tau = std::f64::consts::TAU;
    let omega_i = tau * (5.507 - 0.2);
    OneExcitation {
        modes: table.iter().map(|&(f, _)| tau * f).collect(),
        couplings: table.iter().map(|&(_, g)| tau * g * 1e-3).collect(),
        omega_i,
        omega_f: omega_i + tau * 0.4,
        t_rise,
    }
}
