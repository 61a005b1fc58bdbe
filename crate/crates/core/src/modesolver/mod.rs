//! Exact vectorial guided-mode solver for layered step-index cylindrical
//! waveguides.
//!
//! Fields in each uniform annular region are expanded in cylindrical Bessel
//! solutions (J/Y where k^2 n^2 > beta^2, I/K where evanescent); the four
//! tangential components (Ez, Hz, Ephi, Hphi) are matched at every interface.
//! Guided modes are the zeros of the resulting boundary determinant, located
//! by a dense scan over n_eff plus bisection.

mod radial;

use crate::scene::LayeredCylinderProfile;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub use radial::{cross_overlap, tangential_cartesian, FieldVec6, RadialProfile};

#[derive(Debug, Error, PartialEq)]
pub enum ModeError {
    #[error("no guidance: core index {core} must exceed cladding index {clad}")]
    NoGuidance { core: f64, clad: f64 },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mode solve failed: {0}")]
    SolveFailure(String),
}

/// Normalized frequency V = (pi D / lambda) sqrt(n_core^2 - n_clad^2).
/// Single-mode operation below the first J0 zero, 2.405.
pub fn v_number(
    diameter_nm: f64,
    n_core: f64,
    n_clad: f64,
    wavelength_nm: f64,
) -> Result<f64, ModeError> {
    if !(diameter_nm > 0.0) || !(wavelength_nm > 0.0) {
        return Err(ModeError::InvalidArgument(format!(
            "diameter and wavelength must be positive, got D={diameter_nm}, lambda={wavelength_nm}"
        )));
    }
    if !(n_core > n_clad) {
        return Err(ModeError::NoGuidance { core: n_core, clad: n_clad });
    }
    Ok(size_parameter(diameter_nm, wavelength_nm) * (n_core * n_core - n_clad * n_clad).sqrt())
}

/// Fiber size parameter ka = pi D / lambda.
pub fn size_parameter(diameter_nm: f64, wavelength_nm: f64) -> f64 {
    PI * diameter_nm / wavelength_nm
}

/// First zero of J0; higher-order modes appear above V = 2.405.
pub const SINGLE_MODE_V_LIMIT: f64 = 2.404_825_557_695_773;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeFamily {
    He,
    Eh,
    Te,
    Tm,
}

impl ModeFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeFamily::He => "HE",
            ModeFamily::Eh => "EH",
            ModeFamily::Te => "TE",
            ModeFamily::Tm => "TM",
        }
    }
}

/// Stable identifier of a guided mode: family, azimuthal order m and radial
/// order (1-based, counted downward in n_eff).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeId {
    pub family: ModeFamily,
    pub m: usize,
    pub radial_order: usize,
}

impl std::fmt::Display for ModeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}{}", self.family.as_str(), self.m, self.radial_order)
    }
}

/// Which member of a degenerate +-m pair, for m >= 1. Modes with m = 0 have
/// a single member and ignore the sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AzimuthalMember {
    Plus,
    Minus,
}

/// Propagation direction along the fiber axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// A solved guided eigenmode. Fields are normalized so the power carried
/// through an infinite cross-section is exactly 1 per member.
#[derive(Debug, Clone)]
pub struct GuidedMode {
    pub id: ModeId,
    pub wavelength_nm: f64,
    /// Propagation constant, rad/nm.
    pub beta: f64,
    pub n_eff: f64,
    /// Equilibrated boundary-determinant magnitude at the root.
    pub dispersion_residual: f64,
    /// Carried power per unit amplitude^2 after normalization (== 1).
    pub carried_power: f64,
    pub(crate) regions: Vec<radial::Region>,
    pub(crate) m: usize,
}

impl GuidedMode {
    /// Complex field 6-vector (e_r, e_phi, e_z, h_r, h_phi, h_z) at (r, phi)
    /// for the forward, +m member.
    pub fn field(&self, r_nm: f64, phi: f64) -> FieldVec6 {
        self.field_member(r_nm, phi, AzimuthalMember::Plus, Direction::Forward)
    }

    /// Field of a specific degenerate member and propagation direction.
    pub fn field_member(
        &self,
        r_nm: f64,
        phi: f64,
        member: AzimuthalMember,
        direction: Direction,
    ) -> FieldVec6 {
        radial::evaluate_field(self, r_nm, phi, member, direction)
    }

    /// Real-valued cylindrical field profile (no azimuthal phase); see
    /// `radial::RadialProfile` for component conventions.
    pub fn radial_profile(&self, r_nm: f64) -> radial::RadialProfile {
        radial::radial_profile(self, r_nm)
    }

    /// 1/e decay rate of the evanescent tail in the background, 1/nm.
    pub fn background_decay(&self) -> f64 {
        self.regions.last().expect("background region").q
    }

    pub fn degeneracy(&self) -> usize {
        if self.m == 0 {
            1
        } else {
            2
        }
    }
}

/// All guided modes of a profile at one wavelength, sorted by descending
/// effective index.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub profile: LayeredCylinderProfile,
    pub wavelength_nm: f64,
    pub modes: Vec<GuidedMode>,
    /// Near-degenerate root pairs and other solver notes.
    pub warnings: Vec<String>,
}

impl ModeSpectrum {
    pub fn find(&self, id: ModeId) -> Option<&GuidedMode> {
        self.modes.iter().find(|m| m.id == id)
    }

    pub fn fundamental(&self) -> Option<&GuidedMode> {
        self.modes.first()
    }

    pub fn is_single_mode(&self) -> bool {
        self.modes.len() == 1
            && self.modes[0].id
                == ModeId { family: ModeFamily::He, m: 1, radial_order: 1 }
    }
}

/// Guided modes of a single-layer (two-medium) profile.
pub fn solve_two_layer(
    profile: &LayeredCylinderProfile,
    wavelength_nm: f64,
    m_max: usize,
) -> Result<ModeSpectrum, ModeError> {
    if profile.layers.len() != 1 {
        return Err(ModeError::InvalidProfile(format!(
            "two-layer solve needs exactly one layer, profile has {}",
            profile.layers.len()
        )));
    }
    radial::solve_layered(profile, wavelength_nm, m_max)
}

/// Guided modes of a two-layer (three-medium) profile such as the NCF.
pub fn solve_three_layer(
    profile: &LayeredCylinderProfile,
    wavelength_nm: f64,
    m_max: usize,
) -> Result<ModeSpectrum, ModeError> {
    if profile.layers.len() != 2 {
        return Err(ModeError::InvalidProfile(format!(
            "three-layer solve needs exactly two layers, profile has {}",
            profile.layers.len()
        )));
    }
    radial::solve_layered(profile, wavelength_nm, m_max)
}

/// Guided modes of an arbitrary layered profile.
pub fn solve_layered(
    profile: &LayeredCylinderProfile,
    wavelength_nm: f64,
    m_max: usize,
) -> Result<ModeSpectrum, ModeError> {
    radial::solve_layered(profile, wavelength_nm, m_max)
}

/// Default azimuthal truncation: a dipole within ~50 nm of the axis couples
/// negligibly to |m| > 2 at the V-numbers of interest.
pub const DEFAULT_M_MAX: usize = 3;
