//! Independent semi-analytic estimate of guided-mode emission, used to
//! cross-validate the FDTD pipeline.
//!
//! For power-normalized modes, the power a unit dipole p radiates into one
//! direction of one mode is (w^2/16) |p . e_m(r0)|^2; normalizing by the
//! free-space rate w^4 |p|^2 / (12 pi) gives the per-mode rate ratio.
//! Combined with the FDTD Purcell factor (which supplies the total rate,
//! including the radiation continuum this module does not integrate), the
//! hybrid efficiency is directly comparable to the FDTD eta.

use crate::modesolver::{AzimuthalMember, Direction, GuidedMode, ModeId, ModeSpectrum};
use crate::scene::DipoleSource;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Guided emission rates normalized to the vacuum rate.
#[derive(Debug, Clone)]
pub struct GuidedRateEstimate {
    pub per_mode_rate: Vec<(ModeId, f64)>,
}

impl GuidedRateEstimate {
    pub fn total(&self) -> f64 {
        self.per_mode_rate.iter().map(|(_, r)| r).sum()
    }
}

/// Rate into one guided mode (both propagation directions, both degenerate
/// members) normalized to the free-space emission rate of the same dipole.
pub fn guided_rate(mode: &GuidedMode, source: &DipoleSource) -> f64 {
    let omega = source.pulse.omega0();
    let d = source.direction();
    let pos = source.position();
    let r = (pos[0] * pos[0] + pos[1] * pos[1]).sqrt();
    let phi = pos[1].atan2(pos[0]);
    let members: &[AzimuthalMember] = if mode.degeneracy() == 2 {
        &[AzimuthalMember::Plus, AzimuthalMember::Minus]
    } else {
        &[AzimuthalMember::Plus]
    };
    let mut sum = 0.0;
    for &member in members {
        for dir in [Direction::Forward, Direction::Backward] {
            let f = mode.field_member(r, phi, member, dir);
            let (ex, ey) = rotate_to_cartesian(f[0], f[1], phi);
            let proj: Complex64 = ex * d[0] + ey * d[1] + f[2] * d[2];
            sum += proj.norm_sqr();
        }
    }
    3.0 * PI / (4.0 * omega * omega) * sum
}

fn rotate_to_cartesian(er: Complex64, ephi: Complex64, phi: f64) -> (Complex64, Complex64) {
    let (s, c) = phi.sin_cos();
    (er * c - ephi * s, er * s + ephi * c)
}

/// Rates for every mode of a spectrum.
pub fn guided_rates(spectrum: &ModeSpectrum, source: &DipoleSource) -> GuidedRateEstimate {
    GuidedRateEstimate {
        per_mode_rate: spectrum
            .modes
            .iter()
            .map(|m| (m.id, guided_rate(m, source)))
            .collect(),
    }
}

/// Hybrid channeling efficiency: analytically computed guided rates over
/// the FDTD-measured total rate (Purcell factor).
pub fn hybrid_eta(estimate: &GuidedRateEstimate, purcell: f64) -> Result<f64, String> {
    if !(purcell > 0.0) {
        return Err(format!("purcell factor must be positive, got {purcell}"));
    }
    Ok(estimate.total() / purcell)
}
