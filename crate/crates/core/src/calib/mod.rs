//! Classical calibration arithmetic: bias-tee pulse predistortion, extraction
//! of the bias-tee time constant and IQ-plane readout projection.

mod biastee;
mod iq;

pub use biastee::{
    biastee_fit_tau, biastee_highpass, biastee_predistort, TauFit, Waveform, WaveformUnit,
    DEFAULT_BIASTEE_TAU_NS,
};
pub use iq::{iq_project, IqPoint, IqProjection};
