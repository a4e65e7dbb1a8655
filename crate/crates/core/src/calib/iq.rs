use num_complex::Complex64;

use crate::error::{Error, Result};

/// Point in the IQ plane, in-phase as the real part.
pub type IqPoint = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct IqProjection {
    pub raw: Vec<f64>,
    /// `raw` clamped to `[0, 1]`.
    pub clamped: Vec<f64>,
}

/// Effective excited population of each point from its projection onto the
/// line through the ground and excited references:
/// `P = Re[(z - z_g) conj(z_e - z_g)] / |z_e - z_g|²`.
pub fn iq_project(points: &[IqPoint], ref_g: IqPoint, ref_e: IqPoint) -> Result<IqProjection> {
    let axis = ref_e - ref_g;
    let norm2 = axis.norm_sqr();
    if !(norm2 > 0.0 && norm2.is_finite()) {
        return Err(Error::CoincidentReferences);
    }
    let raw: Vec<f64> = points
        .iter()
        .map(|&z| ((z - ref_g) * axis.conj()).re / norm2)
        .collect();
    let clamped = raw.iter().map(|p| p.clamp(0.0, 1.0)).collect();
    Ok(IqProjection { raw, clamped })
}
