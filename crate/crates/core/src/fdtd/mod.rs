//! 3D Yee-grid FDTD with convolutional PML boundaries, a point-dipole soft
//! source and frequency-resolved DFT monitors.
//!
//! The field scalar is generic: production runs use f32 (the update loop is
//! memory-bandwidth bound), while accuracy tests that need the full Yee
//! dispersion relation instantiate f64. All DFT accumulation is f64 either
//! way, and every reduction runs in a fixed index order so results are
//! bit-identical across thread counts.

mod cpml;
mod engine;
mod monitor;
mod raster;
mod snapshot;
mod source;

pub use engine::{Boundary, Simulation, SimulationSpec, StepReport};
pub use monitor::{DftFace, FaceAxis, PlaneMonitor, PowerBox};
pub use raster::{disk_rect_area, CoefficientPlanes};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use source::DiscreteDipole;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FdtdError {
    #[error("geometry overflow: {0}")]
    GeometryOverflow(String),
    #[error("source placement: {0}")]
    InvalidSource(String),
    #[error("simulation diverged at step {step}: max field {max_field:.3e}")]
    Diverged { step: usize, max_field: f64 },
    #[error("invalid simulation setup: {0}")]
    InvalidSetup(String),
    #[error("snapshot io: {0}")]
    SnapshotIo(String),
}

/// Grid scalar. f32 for production runs, f64 where tests need machine-level
/// accuracy of the update stencil itself.
pub trait Field:
    Copy
    + Send
    + Sync
    + Default
    + PartialOrd
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::AddAssign
    + std::fmt::Debug
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Field for f32 {
    #[inline(always)]
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Field for f64 {
    #[inline(always)]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }
}

/// Yee numerical dispersion: given spatial frequency components and the grid
/// parameters, the discrete angular frequency satisfying
/// sin^2(w dt/2)/(c dt)^2 = sum_i sin^2(k_i dx/2)/dx^2.
pub fn yee_dispersion_omega(k_vec: [f64; 3], dx: f64, dt: f64) -> f64 {
    let rhs: f64 = k_vec
        .iter()
        .map(|&ki| {
            let s = (0.5 * ki * dx).sin() / dx;
            s * s
        })
        .sum();
    2.0 * (dt * rhs.sqrt()).asin() / dt
}
