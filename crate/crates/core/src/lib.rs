//! Channeling efficiency of single-dipole emission into guided modes of
//! optical nanofibers (ONF) and nanocapillary fibers (NCF).
//!
//! The crate couples three estimators of the same physics:
//!
//! * [`modesolver`] — exact vectorial guided modes of layered cylindrical
//!   waveguides (Bessel-basis transfer matrix),
//! * [`fdtd`] — a 3D Yee-grid time-domain solver with CPML boundaries and
//!   frequency-resolved monitors,
//! * [`channeling`] — combines both: total emitted power from a closed flux
//!   box, guided power by mode-overlap projection, and the channeling
//!   efficiency eta = Pc / P,
//! * [`oracle`] — an independent semi-analytic guided-rate estimate used to
//!   cross-validate the FDTD pipeline.
//!
//! Internally all lengths are nanometers and c = eps0 = mu0 = 1, so time is
//! measured in nanometers of light travel and powers are in arbitrary units
//! (only ratios of powers from matched runs are ever reported).

pub mod bessel;
pub mod channeling;
pub mod config;
pub mod fdtd;
pub mod figures;
pub mod modesolver;
pub mod oracle;
pub mod plot;
pub mod scene;
pub mod sweep;
pub mod util;

pub use channeling::{run_channeling, EfficiencyResult};
pub use scene::{DipoleSource, LayeredCylinderProfile, Material, Orientation, SimulationDomain};
