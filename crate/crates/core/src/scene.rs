//! Materials, waveguide geometry, dipole source and simulation-domain
//! parameters shared by every solver in the crate.
//!
//! All value types here are immutable after construction and safe to share
//! across parallel workers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Refractive index of fused silica at 620 nm.
///
/// Chosen so the single-mode cutoff diameters (450 nm in vacuum, 820 nm in
/// water) land on V = 2.405 within rounding; consistent with fused-silica
/// dispersion at 620 nm. Overridable per run through the config file.
pub const N_SILICA: f64 = 1.4537;
/// Refractive index of water at 620 nm.
pub const N_WATER: f64 = 1.3330;
/// Refractive index of vacuum.
pub const N_VACUUM: f64 = 1.0;

/// Design emission wavelength in nm.
pub const DEFAULT_WAVELENGTH_NM: f64 = 620.0;

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

/// A lossless, non-dispersive dielectric at the design wavelength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// Real refractive index, n >= 1.
    pub index: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, index: f64) -> Result<Self, SceneError> {
        if !(index >= 1.0) || !index.is_finite() {
            return Err(SceneError::InvalidMaterial(format!(
                "refractive index must be >= 1 and finite, got {index}"
            )));
        }
        Ok(Self { name: name.into(), index })
    }

    pub fn vacuum() -> Self {
        Self { name: "vacuum".into(), index: N_VACUUM }
    }

    pub fn water() -> Self {
        Self { name: "water".into(), index: N_WATER }
    }

    pub fn silica() -> Self {
        Self { name: "silica".into(), index: N_SILICA }
    }

    /// Look up one of the built-in materials by name.
    pub fn by_name(name: &str) -> Result<Self, SceneError> {
        match name {
            "vacuum" => Ok(Self::vacuum()),
            "water" => Ok(Self::water()),
            "silica" => Ok(Self::silica()),
            other => Err(SceneError::InvalidMaterial(format!(
                "unknown material '{other}' (expected vacuum, water or silica)"
            ))),
        }
    }

    pub fn permittivity(&self) -> f64 {
        self.index * self.index
    }
}

/// One concentric layer: all radii inside `outer_radius_nm` down to the
/// previous layer are filled with `material`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub outer_radius_nm: f64,
    pub material: Material,
}

/// Piecewise-constant cylindrical index profile, translationally invariant
/// along z. ONF = one silica layer in a background medium; NCF = a core hole
/// plus a silica annulus in a background medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredCylinderProfile {
    /// Innermost first, outer radii strictly increasing.
    pub layers: Vec<Layer>,
    /// Extends from the last layer radius to infinity.
    pub background: Material,
}

impl LayeredCylinderProfile {
    pub fn new(layers: Vec<Layer>, background: Material) -> Result<Self, SceneError> {
        if layers.is_empty() {
            return Err(SceneError::InvalidGeometry("profile needs at least one layer".into()));
        }
        let mut prev = 0.0;
        for layer in &layers {
            if !(layer.outer_radius_nm > prev) || !layer.outer_radius_nm.is_finite() {
                return Err(SceneError::InvalidGeometry(format!(
                    "layer radii must be strictly increasing and positive, got {} after {}",
                    layer.outer_radius_nm, prev
                )));
            }
            prev = layer.outer_radius_nm;
        }
        Ok(Self { layers, background })
    }

    /// Optical nanofiber: a silica cylinder of the given diameter in a
    /// uniform cladding medium.
    pub fn onf(diameter_nm: f64, clad: Material) -> Result<Self, SceneError> {
        if !(diameter_nm > 0.0) {
            return Err(SceneError::InvalidGeometry(format!(
                "ONF diameter must be positive, got {diameter_nm}"
            )));
        }
        Self::new(
            vec![Layer { outer_radius_nm: diameter_nm / 2.0, material: Material::silica() }],
            clad,
        )
    }

    /// Nanocapillary fiber: a core hole of diameter `d_in_nm` filled with
    /// `core`, a silica annulus out to `d_out_nm`, and `background` outside.
    pub fn ncf(
        d_in_nm: f64,
        d_out_nm: f64,
        core: Material,
        background: Material,
    ) -> Result<Self, SceneError> {
        if !(d_in_nm > 0.0) || !(d_in_nm < d_out_nm) {
            return Err(SceneError::InvalidGeometry(format!(
                "NCF requires 0 < d_in < d_out, got d_in={d_in_nm}, d_out={d_out_nm}"
            )));
        }
        Self::new(
            vec![
                Layer { outer_radius_nm: d_in_nm / 2.0, material: core },
                Layer { outer_radius_nm: d_out_nm / 2.0, material: Material::silica() },
            ],
            background,
        )
    }

    /// Material at radial distance r from the axis. Exactly on an interface
    /// the inner layer wins.
    pub fn material_at(&self, r_nm: f64) -> &Material {
        for layer in &self.layers {
            if r_nm <= layer.outer_radius_nm {
                return &layer.material;
            }
        }
        &self.background
    }

    pub fn permittivity_at(&self, r_nm: f64) -> f64 {
        self.material_at(r_nm).permittivity()
    }

    pub fn outer_radius_nm(&self) -> f64 {
        self.layers.last().expect("profile has at least one layer").outer_radius_nm
    }

    pub fn max_index(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.material.index)
            .fold(self.background.index, f64::max)
    }

    pub fn background_index(&self) -> f64 {
        self.background.index
    }
}

/// Dipole orientation relative to the fiber surface/axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Perpendicular to the cylinder surface (along the radial direction).
    Radial,
    /// Tangent to the cylinder surface.
    Azimuthal,
    /// Along the fiber axis (z).
    Axial,
}

impl Orientation {
    pub const ALL: [Orientation; 3] = [Orientation::Radial, Orientation::Azimuthal, Orientation::Axial];

    /// Unit vector in Cartesian coordinates for a dipole at azimuth phi.
    pub fn unit_vector(self, azimuth_rad: f64) -> [f64; 3] {
        let (s, c) = azimuth_rad.sin_cos();
        match self {
            Orientation::Radial => [c, s, 0.0],
            Orientation::Azimuthal => [-s, c, 0.0],
            Orientation::Axial => [0.0, 0.0, 1.0],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Radial => "radial",
            Orientation::Azimuthal => "azimuthal",
            Orientation::Axial => "axial",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SceneError> {
        match s {
            "radial" => Ok(Orientation::Radial),
            "azimuthal" => Ok(Orientation::Azimuthal),
            "axial" => Ok(Orientation::Axial),
            other => Err(SceneError::InvalidSource(format!(
                "unknown orientation '{other}' (expected radial, azimuthal or axial)"
            ))),
        }
    }
}

/// Band-limited temporal envelope of the dipole: a Gaussian-windowed carrier
/// at c/lambda analyzed by on-the-fly DFT at the carrier frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse {
    pub wavelength_nm: f64,
    /// Full spectral width (Gaussian sigma pair) relative to the carrier.
    pub fractional_bandwidth: f64,
    pub amplitude: f64,
}

impl GaussianPulse {
    pub fn new(wavelength_nm: f64, fractional_bandwidth: f64) -> Self {
        Self { wavelength_nm, fractional_bandwidth, amplitude: 1.0 }
    }

    /// Carrier angular frequency, rad per nm of light travel.
    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength_nm
    }

    /// Gaussian envelope width in time (nm of light travel).
    pub fn tau(&self) -> f64 {
        2.0 / (self.fractional_bandwidth * self.omega0())
    }

    /// Envelope peak time.
    pub fn t_peak(&self) -> f64 {
        4.5 * self.tau()
    }

    /// Time after which the envelope has decayed below 1e-8 of its peak.
    pub fn t_off(&self) -> f64 {
        self.t_peak() + 6.1 * self.tau()
    }

    /// Source waveform value at time t.
    pub fn value(&self, t: f64) -> f64 {
        let x = t - self.t_peak();
        let tau = self.tau();
        self.amplitude * (-x * x / (2.0 * tau * tau)).exp() * (self.omega0() * x).cos()
    }

    /// Spectral amplitude |s^(omega)| of the analytic envelope, up to a
    /// constant factor common to all frequencies.
    pub fn spectral_amplitude(&self, omega: f64) -> f64 {
        let tau = self.tau();
        let d = (omega - self.omega0()) * tau;
        self.amplitude * (-0.5 * d * d).exp()
    }
}

/// Point electric dipole: position in cylindrical coordinates around the
/// fiber axis, orientation resolved at that position, and emission pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipoleSource {
    pub radial_offset_nm: f64,
    pub azimuth_rad: f64,
    pub z_nm: f64,
    pub orientation: Orientation,
    pub pulse: GaussianPulse,
}

impl DipoleSource {
    pub fn new(
        radial_offset_nm: f64,
        azimuth_rad: f64,
        z_nm: f64,
        orientation: Orientation,
        wavelength_nm: f64,
    ) -> Result<Self, SceneError> {
        if !(wavelength_nm > 0.0) {
            return Err(SceneError::InvalidSource(format!(
                "wavelength must be positive, got {wavelength_nm}"
            )));
        }
        if radial_offset_nm < 0.0 {
            return Err(SceneError::InvalidSource(format!(
                "radial offset must be >= 0, got {radial_offset_nm}"
            )));
        }
        Ok(Self {
            radial_offset_nm,
            azimuth_rad,
            z_nm,
            orientation,
            pulse: GaussianPulse::new(wavelength_nm, 0.1),
        })
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.pulse.wavelength_nm
    }

    /// Dipole moment direction as a Cartesian unit vector.
    pub fn direction(&self) -> [f64; 3] {
        self.orientation.unit_vector(self.azimuth_rad)
    }

    /// Cartesian position relative to the fiber axis at z = z_nm.
    pub fn position(&self) -> [f64; 3] {
        let (s, c) = self.azimuth_rad.sin_cos();
        [self.radial_offset_nm * c, self.radial_offset_nm * s, self.z_nm]
    }
}

/// Uniform-grid simulation box with CPML-backed faces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDomain {
    /// (Lx, Ly, Lz) in nm; the fiber axis runs along z through the center.
    pub extents_nm: [f64; 3],
    pub dx_nm: f64,
    pub pml_cells: usize,
    /// dt = courant_factor * dx (c = 1); must stay <= 1/sqrt(3) in 3D.
    pub courant_factor: f64,
    /// Distances of the +z/-z guided-power monitor planes from the source.
    pub monitor_z_offsets_nm: Vec<f64>,
    /// Override for the automatic step budget.
    pub total_steps: Option<usize>,
}

pub const MAX_COURANT_3D: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

impl SimulationDomain {
    pub fn new(extents_nm: [f64; 3], dx_nm: f64) -> Self {
        Self {
            extents_nm,
            dx_nm,
            pml_cells: 10,
            courant_factor: 0.5,
            monitor_z_offsets_nm: vec![4000.0],
            total_steps: None,
        }
    }

    /// Desk-scale default: 3x3x9 um^3, monitors at +-4 um from the source.
    pub fn default_desk(dx_nm: f64) -> Self {
        Self::new([3000.0, 3000.0, 9000.0], dx_nm)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if !(self.dx_nm > 0.0) {
            return Err(SceneError::InvalidDomain(format!("dx must be > 0, got {}", self.dx_nm)));
        }
        if self.courant_factor > MAX_COURANT_3D + 1e-12 || self.courant_factor <= 0.0 {
            return Err(SceneError::InvalidDomain(format!(
                "courant factor must be in (0, 1/sqrt(3)], got {}",
                self.courant_factor
            )));
        }
        if self.pml_cells < 8 {
            return Err(SceneError::InvalidDomain(format!(
                "PML must be at least 8 cells thick, got {}",
                self.pml_cells
            )));
        }
        for &ext in &self.extents_nm {
            if !(ext > 2.0 * self.pml_thickness_nm()) {
                return Err(SceneError::InvalidDomain(format!(
                    "extent {ext} nm leaves no interior beyond the PML"
                )));
            }
        }
        let half_interior = self.extents_nm[2] / 2.0 - self.pml_thickness_nm();
        for &off in &self.monitor_z_offsets_nm {
            if !(off > 0.0) || off >= half_interior {
                return Err(SceneError::InvalidDomain(format!(
                    "monitor offset {off} nm must lie strictly between the source and the PML \
                     (interior half-length {half_interior} nm)"
                )));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.courant_factor * self.dx_nm
    }

    pub fn pml_thickness_nm(&self) -> f64 {
        self.pml_cells as f64 * self.dx_nm
    }

    /// Grid cell counts along x, y, z.
    pub fn dims(&self) -> [usize; 3] {
        let mut d = [0usize; 3];
        for (i, &ext) in self.extents_nm.iter().enumerate() {
            d[i] = (ext / self.dx_nm).round() as usize;
        }
        d
    }

    /// Fixed step budget: source ring-down plus guided transit to the far
    /// monitor with margin, unless overridden.
    pub fn step_budget(&self, pulse: &GaussianPulse, max_index: f64) -> usize {
        if let Some(n) = self.total_steps {
            return n;
        }
        let z_far = self
            .monitor_z_offsets_nm
            .iter()
            .cloned()
            .fold(0.0, f64::max)
            .max(self.extents_nm[2] / 4.0);
        let t_end = pulse.t_off() + 1.3 * max_index * z_far + 1000.0;
        (t_end / self.dt()).ceil() as usize
    }
}
