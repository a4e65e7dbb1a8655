//! Truncated tensor-product Hilbert space of one two-level qubit and a set of
//! bosonic modes, plus the embedded qubit and ladder operators.
//!
//! Units are ħ = 1, angular frequencies in rad/ns and times in ns. Ordinary
//! frequencies (GHz / MHz) are converted exactly once, through
//! [`ghz_to_angular`] and [`mhz_to_angular`].
//!
//! Basis order: the qubit level varies slowest, then mode 0, mode 1, ...,
//! with the last mode varying fastest. Flat index
//! `q * M + sum_k m_k * stride_k` where `M = prod_k cutoff_k`.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Default upper bound on the total Hilbert space dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 20;

pub fn ghz_to_angular(f_ghz: f64) -> f64 {
    TAU * f_ghz
}

pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TAU * f_mhz * 1e-3
}

pub fn angular_to_ghz(omega: f64) -> f64 {
    omega / TAU
}

/// One bosonic mode: angular frequency, coupling to the qubit and the number
/// of retained Fock levels (occupations `0..fock_cutoff`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub frequency: f64,
    pub coupling: f64,
    pub fock_cutoff: usize,
}

impl ModeSpec {
    pub fn new(frequency: f64, coupling: f64, fock_cutoff: usize) -> Result<Self> {
        let mode = Self {
            frequency,
            coupling,
            fock_cutoff,
        };
        mode.validate()?;
        Ok(mode)
    }

    /// Mode from an ordinary frequency in GHz and a coupling `g/2π` in MHz.
    pub fn from_ghz(frequency_ghz: f64, coupling_mhz: f64, fock_cutoff: usize) -> Result<Self> {
        Self::new(
            ghz_to_angular(frequency_ghz),
            mhz_to_angular(coupling_mhz),
            fock_cutoff,
        )
    }

    fn validate(&self) -> Result<()> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::InvalidSystem(format!(
                "mode frequency must be positive, got {}",
                self.frequency
            )));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::InvalidSystem(format!(
                "mode coupling must be non-negative, got {}",
                self.coupling
            )));
        }
        if self.fock_cutoff < 2 {
            return Err(Error::InvalidSystem(format!(
                "fock cutoff must be at least 2, got {}",
                self.fock_cutoff
            )));
        }
        Ok(())
    }
}

/// Which form of the qubit-mode coupling is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CouplingModel {
    /// Excitation-conserving Jaynes-Cummings coupling in a frame rotating at
    /// the reference frequency.
    #[default]
    Rwa,
    /// Lab-frame `g σx (a† + a)` coupling with absolute frequencies.
    Full,
}

/// Resonator ensemble used in the experiment: `(ω/2π in GHz, g/2π in MHz)`.
pub const RESONATOR_ENSEMBLE: [(f64, f64); 4] =
    [(5.507, 14.6), (5.513, 12.1), (5.518, 14.4), (5.531, 6.3)];

/// Sweep start below the lowest mode, in GHz.
pub const DEFAULT_START_DETUNING_GHZ: f64 = 0.2;
/// Total sweep span in GHz.
pub const DEFAULT_SPAN_GHZ: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    /// Qubit angular frequency at the start of the sweep.
    pub omega_i: f64,
    /// Qubit angular frequency at the end of the sweep.
    pub omega_f: f64,
    pub modes: Vec<ModeSpec>,
    pub coupling_model: CouplingModel,
    pub dimension_cap: usize,
}

impl SystemSpec {
    pub fn new(
        omega_i: f64,
        omega_f: f64,
        modes: Vec<ModeSpec>,
        coupling_model: CouplingModel,
    ) -> Result<Self> {
        let spec = Self {
            omega_i,
            omega_f,
            modes,
            coupling_model,
            dimension_cap: DEFAULT_DIMENSION_CAP,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The four coupled resonators with a uniform Fock cutoff, swept over
    /// 400 MHz starting 200 MHz below the lowest mode.
    pub fn resonator_ensemble(fock_cutoff: usize) -> Result<Self> {
        let modes = RESONATOR_ENSEMBLE
            .iter()
            .map(|&(f, g)| ModeSpec::from_ghz(f, g, fock_cutoff))
            .collect::<Result<Vec<_>>>()?;
        let omega_i = ghz_to_angular(RESONATOR_ENSEMBLE[0].0 - DEFAULT_START_DETUNING_GHZ);
        let omega_f = omega_i + ghz_to_angular(DEFAULT_SPAN_GHZ);
        Self::new(omega_i, omega_f, modes, CouplingModel::Rwa)
    }

    pub fn with_dimension_cap(mut self, cap: usize) -> Result<Self> {
        self.dimension_cap = cap;
        self.validate()?;
        Ok(self)
    }

    pub fn with_coupling_model(mut self, model: CouplingModel) -> Self {
        self.coupling_model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidSystem("at least one mode is required".into()));
        }
        if !(self.omega_i.is_finite() && self.omega_f.is_finite()) || self.omega_f <= self.omega_i {
            return Err(Error::InvalidSystem(format!(
                "sweep must increase: omega_i = {}, omega_f = {}",
                self.omega_i, self.omega_f
            )));
        }
        for mode in &self.modes {
            mode.validate()?;
        }
        let dim = self.dimension_u128();
        if dim > self.dimension_cap as u128 {
            return Err(Error::DimensionCap {
                dim,
                cap: self.dimension_cap,
            });
        }
        Ok(())
    }

    fn dimension_u128(&self) -> u128 {
        self.modes
            .iter()
            .try_fold(2u128, |acc, m| acc.checked_mul(m.fock_cutoff as u128))
            .unwrap_or(u128::MAX)
    }

    /// Total Hilbert space dimension `2 * prod cutoff`.
    pub fn dimension(&self) -> usize {
        self.dimension_u128() as usize
    }

    /// Stable 64-bit FNV-1a fingerprint of every model parameter.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |word: u64| {
            for b in word.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(self.omega_i.to_bits());
        feed(self.omega_f.to_bits());
        for m in &self.modes {
            feed(m.frequency.to_bits());
            feed(m.coupling.to_bits());
            feed(m.fock_cutoff as u64);
        }
        feed(match self.coupling_model {
            CouplingModel::Rwa => 0,
            CouplingModel::Full => 1,
        });
        h
    }

    pub fn couplings(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.coupling).collect()
    }

    pub fn mean_mode_frequency(&self) -> f64 {
        self.modes.iter().map(|m| m.frequency).sum::<f64>() / self.modes.len() as f64
    }

    /// Coupling-weighted (by `g²`) mean mode frequency; falls back to the
    /// plain mean when every coupling vanishes.
    pub fn ensemble_frequency(&self) -> f64 {
        let w: f64 = self.modes.iter().map(|m| m.coupling * m.coupling).sum();
        if w == 0.0 {
            return self.mean_mode_frequency();
        }
        self.modes
            .iter()
            .map(|m| m.coupling * m.coupling * m.frequency)
            .sum::<f64>()
            / w
    }
}

/// One basis state: qubit level (0 = ground, 1 = excited) and mode occupations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub qubit: usize,
    pub occupations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisLayout {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    mode_block: usize,
}

impl BasisLayout {
    pub fn new(cutoffs: &[usize]) -> Self {
        let mut strides = vec![1usize; cutoffs.len()];
        for k in (0..cutoffs.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * cutoffs[k + 1];
        }
        let mode_block = cutoffs.iter().product();
        Self {
            cutoffs: cutoffs.to_vec(),
            strides,
            mode_block,
        }
    }

    pub fn dimension(&self) -> usize {
        2 * self.mode_block
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    /// Number of states sharing one qubit level; the excited block is
    /// `mode_block()..dimension()`.
    pub fn mode_block(&self) -> usize {
        self.mode_block
    }

    pub fn state(&self, index: usize) -> BasisState {
        assert!(index < self.dimension(), "basis index {index} out of range");
        let qubit = index / self.mode_block;
        let mut rest = index % self.mode_block;
        let occupations = self
            .strides
            .iter()
            .map(|&s| {
                let m = rest / s;
                rest %= s;
                m
            })
            .collect();
        BasisState { qubit, occupations }
    }

    pub fn index(&self, qubit: usize, occupations: &[usize]) -> Option<usize> {
        if qubit > 1 || occupations.len() != self.cutoffs.len() {
            return None;
        }
        let mut idx = qubit * self.mode_block;
        for ((&m, &cut), &s) in occupations.iter().zip(&self.cutoffs).zip(&self.strides) {
            if m >= cut {
                return None;
            }
            idx += m * s;
        }
        Some(idx)
    }

    /// Occupation of `mode` in the basis state at `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index % self.mode_block) / self.strides[mode] % self.cutoffs[mode]
    }

    pub fn qubit_level(&self, index: usize) -> usize {
        index / self.mode_block
    }

    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        (0..self.dimension()).map(|i| self.state(i))
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.cutoffs.len() {
            return Err(Error::ModeIndex {
                index: mode,
                n_modes: self.cutoffs.len(),
            });
        }
        Ok(())
    }
}

pub fn build_layout(spec: &SystemSpec) -> Result<BasisLayout> {
    spec.validate()?;
    let cutoffs: Vec<usize> = spec.modes.iter().map(|m| m.fock_cutoff).collect();
    Ok(BasisLayout::new(&cutoffs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeOp {
    Lower,
    Raise,
    Number,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitOp {
    SigmaZ,
    SigmaX,
    /// `|e><g|`
    SigmaPlus,
    /// `|g><e|`
    SigmaMinus,
    /// `|e><e|`
    ExcitedProjector,
}

/// Truncated ladder or number operator of `mode`, embedded in the full space.
pub fn mode_operator(kind: ModeOp, mode: usize, layout: &BasisLayout) -> Result<CsrMatrix> {
    layout.check_mode(mode)?;
    let dim = layout.dimension();
    let stride = layout.strides[mode];
    let triplets = (0..dim).filter_map(|col| {
        let m = layout.occupation(col, mode);
        match kind {
            // a|m> = sqrt(m)|m-1>
            ModeOp::Lower if m > 0 => Some((col - stride, col, C64::new((m as f64).sqrt(), 0.0))),
            // a†|m> = sqrt(m+1)|m+1>, truncated at the top level
            ModeOp::Raise if m + 1 < layout.cutoffs[mode] => {
                Some((col + stride, col, C64::new(((m + 1) as f64).sqrt(), 0.0)))
            }
            ModeOp::Number if m > 0 => Some((col, col, C64::new(m as f64, 0.0))),
            _ => None,
        }
    });
    Ok(CsrMatrix::from_triplets(dim, dim, triplets))
}

/// Two-level qubit operator embedded on the qubit factor.
pub fn qubit_operator(kind: QubitOp, layout: &BasisLayout) -> CsrMatrix {
    let dim = layout.dimension();
    let block = layout.mode_block;
    let one = C64::new(1.0, 0.0);
    let triplets: Vec<(usize, usize, C64)> = match kind {
        QubitOp::SigmaZ => (0..dim)
            .map(|i| (i, i, if i >= block { one } else { -one }))
            .collect(),
        QubitOp::SigmaX => (0..block)
            .flat_map(|i| [(i + block, i, one), (i, i + block, one)])
            .collect(),
        QubitOp::SigmaPlus => (0..block).map(|i| (i + block, i, one)).collect(),
        QubitOp::SigmaMinus => (0..block).map(|i| (i, i + block, one)).collect(),
        QubitOp::ExcitedProjector => (block..dim).map(|i| (i, i, one)).collect(),
    };
    CsrMatrix::from_triplets(dim, dim, triplets)
}
