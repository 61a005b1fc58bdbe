//! Channeling efficiency from an FDTD run: total emitted power P through a
//! closed box, guided power Pc by mode-overlap projection on two
//! cross-section planes, vacuum normalization P0, and eta = Pc / P.

use crate::fdtd::{
    Boundary, CoefficientPlanes, DftFace, DiscreteDipole, FaceAxis, FdtdError, PlaneMonitor,
    PowerBox, Simulation, SimulationSpec,
};
use crate::modesolver::{
    self, AzimuthalMember, Direction, GuidedMode, ModeSpectrum, ModeError,
};
use crate::scene::{DipoleSource, LayeredCylinderProfile, SimulationDomain};
use crate::util::fnv1a64_hex;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
    #[error(transparent)]
    Fdtd(#[from] FdtdError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error("reference run failed: {0}")]
    Reference(String),
}

/// Everything needed to reproduce a result row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub scene_hash: String,
    pub dx_nm: f64,
    pub dims: [usize; 3],
    pub extents_nm: [f64; 3],
    pub pml_cells: usize,
    pub steps: usize,
    pub wavelength_nm: f64,
    pub orientation: String,
    pub r_in_nm: f64,
    pub indices: Vec<(String, f64)>,
    pub monitor_z_offsets_nm: Vec<f64>,
    pub estimator: String,
    pub stationarity: Option<f64>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EfficiencyResult {
    pub p: f64,
    pub p0: f64,
    pub pc_forward: f64,
    pub pc_backward: f64,
    pub eta: f64,
    pub purcell: f64,
    /// Guided power per mode id and direction sum, W per unit source.
    pub per_mode_power: Vec<(String, f64)>,
    /// Windowed raw-flux estimate of eta from the same planes, for
    /// estimator consistency checks.
    pub eta_flux: f64,
    pub metadata: RunMetadata,
    pub warnings: Vec<String>,
}

/// Raw-flux window half-width: wide enough to hold the guided mode, narrow
/// enough that the free-space radiation cone through it stays small at the
/// monitor distance.
const FLUX_WINDOW_NM: f64 = 800.0;

/// Cells between the dipole and each face of the total-power box.
const POWER_BOX_HALF: usize = 5;

pub fn cache_dir() -> PathBuf {
    std::env::var_os("NANOCHANNEL_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("nanochannel-cache"))
}

/// Bumped whenever a change alters computed physics, so stale cache entries
/// can never satisfy a newer solver.
pub const PHYSICS_REV: u32 = 1;

/// Content-addressed variant of [`run_channeling`]: deterministic scenes are
/// computed once and persisted under the cache directory. The stored
/// runtime_s is the original compute cost of the result.
pub fn run_channeling_cached(
    profile: &LayeredCylinderProfile,
    source: &DipoleSource,
    domain: &SimulationDomain,
) -> Result<EfficiencyResult, ChannelError> {
    let key = format!("result-r{}-{}", PHYSICS_REV, scene_hash(profile, source, domain));
    let dir = cache_dir().join("results");
    let path = dir.join(format!("{key}.json"));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(res) = serde_json::from_str::<EfficiencyResult>(&text) {
            return Ok(res);
        }
    }
    let res = run_channeling(profile, source, domain)?;
    std::fs::create_dir_all(&dir).ok();
    let tmp = dir.join(format!("{key}.tmp.{}", std::process::id()));
    if let Ok(payload) = serde_json::to_string(&res) {
        if std::fs::write(&tmp, payload).is_ok() {
            std::fs::rename(&tmp, &path).ok();
        }
    }
    Ok(res)
}

/// Channeling efficiency of a dipole next to / inside a layered cylinder.
pub fn run_channeling(
    profile: &LayeredCylinderProfile,
    source: &DipoleSource,
    domain: &SimulationDomain,
) -> Result<EfficiencyResult, ChannelError> {
    run_channeling_opts(profile, source, domain, None)
}

/// As [`run_channeling`], optionally dumping the final field state as
/// binary snapshots into `dump_dir`.
pub fn run_channeling_opts(
    profile: &LayeredCylinderProfile,
    source: &DipoleSource,
    domain: &SimulationDomain,
    dump_dir: Option<&std::path::Path>,
) -> Result<EfficiencyResult, ChannelError> {
    let t0 = std::time::Instant::now();
    domain.validate()?;
    let spectrum = modesolver::solve_layered(profile, source.wavelength_nm(), modesolver::DEFAULT_M_MAX)?;
    let dims = domain.dims();
    let dx = domain.dx_nm;
    let dt = domain.dt();
    let omega0 = source.pulse.omega0();

    let coeff =
        CoefficientPlanes::<f32>::rasterize(profile, dims[0], dims[1], dx, dt, domain.pml_cells)?;
    let spec = SimulationSpec {
        dims,
        dx,
        dt,
        pml_cells: domain.pml_cells,
        boundaries: [Boundary::Cpml; 3],
    };
    let mut sim = Simulation::new(spec, coeff)?;
    let dipole = DiscreteDipole::place(source, dims, dx, domain.pml_cells)?;
    let center = dipole.cell;
    sim.set_source(dipole, source.pulse.clone());
    sim.power_box = Some(PowerBox::new(center, POWER_BOX_HALF, vec![omega0]));

    // Two projection planes per monitor offset, covering the interior
    // cross-section.
    let margin = domain.pml_cells + 1;
    let range_u = (margin, dims[0] - margin);
    let range_v = (margin, dims[1] - margin);
    for &off in &domain.monitor_z_offsets_nm {
        let dk = (off / dx).round() as isize;
        for sign in [1isize, -1] {
            let k = (center[2] as isize + sign * dk) as usize;
            sim.planes.push(PlaneMonitor {
                face: DftFace::new(FaceAxis::Z, k, range_u, range_v, sign as f64, vec![omega0]),
                z_offset_nm: sign as f64 * off,
            });
        }
    }

    let steps = domain.step_budget(&source.pulse, profile.max_index());
    let report = sim.run(steps)?;
    let mut warnings = spectrum.warnings.clone();
    if !report.converged {
        warnings.push(format!(
            "box flux not stationary at termination: drift {:?}",
            report.stationarity
        ));
    }

    if let Some(dir) = dump_dir {
        std::fs::create_dir_all(dir).map_err(|e| FdtdError::SnapshotIo(e.to_string()))?;
        for (comp, name, field) in [
            (0u8, "ex", &sim.ex),
            (1, "ey", &sim.ey),
            (2, "ez", &sim.ez),
            (3, "hx", &sim.hx),
            (4, "hy", &sim.hy),
            (5, "hz", &sim.hz),
        ] {
            crate::fdtd::write_snapshot(
                &dir.join(format!("{name}.ncfs")),
                dims,
                dx,
                comp,
                field,
            )?;
        }
    }

    let p = sim.power_box.as_ref().expect("power box attached").power(0, dx);

    // Guided power per direction from the nearest plane pair.
    let mut pc_forward = 0.0;
    let mut pc_backward = 0.0;
    let mut per_mode: Vec<(String, f64)> = Vec::new();
    let window_cells = (FLUX_WINDOW_NM / dx).round() as usize;
    let mut flux_fwd = 0.0;
    let mut flux_bwd = 0.0;
    for plane in &sim.planes {
        let direction = if plane.z_offset_nm > 0.0 { Direction::Forward } else { Direction::Backward };
        let projected = project_guided(
            &plane.face,
            &spectrum,
            0,
            dx,
            dims,
            direction,
            &mut warnings,
        );
        let total: f64 = projected.iter().map(|(_, w)| w).sum();
        if direction == Direction::Forward {
            pc_forward = total;
        } else {
            pc_backward = total;
        }
        for (id, w) in projected {
            let name = format!("{}{}", id, if direction == Direction::Forward { "+" } else { "-" });
            per_mode.push((name, w));
        }
        // The face sign already makes outgoing flux positive on both planes.
        let raw = plane.face.flux_windowed(0, dx, window_cells);
        if direction == Direction::Forward {
            flux_fwd = raw;
        } else {
            flux_bwd = raw;
        }
    }
    per_mode.sort_by(|a, b| a.0.cmp(&b.0));
    let eta = (pc_forward + pc_backward) / p;
    let eta_flux = (flux_fwd + flux_bwd) / p;
    if pc_forward + pc_backward > p * 1.03 {
        warnings.push(format!(
            "guided power exceeds total: Pc {} vs P {}",
            pc_forward + pc_backward,
            p
        ));
    }

    let p0 = vacuum_reference_power(source, domain)?;
    let purcell = p / p0;

    let scene_hash = scene_hash(profile, source, domain);
    let indices = profile
        .layers
        .iter()
        .map(|l| (l.material.name.clone(), l.material.index))
        .chain(std::iter::once((
            profile.background.name.clone(),
            profile.background.index,
        )))
        .collect();
    Ok(EfficiencyResult {
        p,
        p0,
        pc_forward,
        pc_backward,
        eta,
        purcell,
        per_mode_power: per_mode,
        eta_flux,
        metadata: RunMetadata {
            scene_hash,
            dx_nm: dx,
            dims,
            extents_nm: domain.extents_nm,
            pml_cells: domain.pml_cells,
            steps,
            wavelength_nm: source.wavelength_nm(),
            orientation: source.orientation.as_str().to_string(),
            r_in_nm: source.radial_offset_nm,
            indices,
            monitor_z_offsets_nm: domain.monitor_z_offsets_nm.clone(),
            estimator: "mode-projection,both-directions".to_string(),
            stationarity: report.stationarity,
            runtime_s: t0.elapsed().as_secs_f64(),
        },
        warnings,
    })
}

/// Per-mode guided power extracted from the DFT'd tangential fields of a
/// z-normal plane via the overlap
/// P_m = |Int (E x h_m* + e_m* x H) . z dA|^2 / (16 P_m),
/// summed over both members of each degenerate pair.
pub fn project_guided(
    face: &DftFace,
    spectrum: &ModeSpectrum,
    fi: usize,
    dx: f64,
    dims: [usize; 3],
    direction: Direction,
    warnings: &mut Vec<String>,
) -> Vec<(modesolver::ModeId, f64)> {
    let half_x = dims[0] as f64 * dx / 2.0;
    let half_y = dims[1] as f64 * dx / 2.0;
    let plane_half_width =
        ((face.range_u.1 - face.range_u.0) as f64 * dx / 2.0).min((face.range_v.1 - face.range_v.0) as f64 * dx / 2.0);
    let mut out = Vec::new();
    for mode in &spectrum.modes {
        let outside = 1.0 - mode_power_within(mode, plane_half_width);
        if outside > 0.01 {
            warnings.push(format!(
                "{}: {:.1}% of mode power outside the projection plane",
                mode.id,
                100.0 * outside
            ));
        }
        let members: &[AzimuthalMember] = if mode.degeneracy() == 2 {
            &[AzimuthalMember::Plus, AzimuthalMember::Minus]
        } else {
            &[AzimuthalMember::Plus]
        };
        let mut power = 0.0;
        for &member in members {
            let mut overlap = Complex64::new(0.0, 0.0);
            let nu = face.points_u();
            for j in face.range_v.0..face.range_v.1 {
                for i in face.range_u.0..face.range_u.1 {
                    let p = (j - face.range_v.0) * nu + (i - face.range_u.0);
                    // Ex/Hy-bar sample position (i + 1/2, j).
                    let x = (i as f64 + 0.5) * dx - half_x;
                    let y = j as f64 * dx - half_y;
                    let m = modesolver::tangential_cartesian(mode, x, y, member, direction);
                    overlap += face.e_u[fi][p] * m[3].conj() + m[0].conj() * face.h_v[fi][p];
                    // Ey/Hx-bar sample position (i, j + 1/2).
                    let x = i as f64 * dx - half_x;
                    let y = (j as f64 + 0.5) * dx - half_y;
                    let m = modesolver::tangential_cartesian(mode, x, y, member, direction);
                    overlap -= face.e_v[fi][p] * m[2].conj() + m[1].conj() * face.h_u[fi][p];
                }
            }
            overlap *= dx * dx;
            power += overlap.norm_sqr() / (16.0 * mode.carried_power);
        }
        out.push((mode.id, power));
    }
    out
}

/// Fraction of a mode's carried power within radius r of the axis.
fn mode_power_within(mode: &GuidedMode, r_max: f64) -> f64 {
    let n = 2000;
    let h = r_max / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let r = (i as f64 * h).max(1e-9);
        let p = mode.radial_profile(r);
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * (p.er * p.hphi - p.ephi * p.hr) * r;
    }
    (std::f64::consts::PI * acc * h / 3.0).min(1.0)
}

/// Fraction of randomly oriented dipoles: the arithmetic mean over the three
/// orthogonal orientations.
pub fn average_random_orientation(eta_r: f64, eta_phi: f64, eta_z: f64) -> f64 {
    (eta_r + eta_phi + eta_z) / 3.0
}

/// Purcell factor P / P0.
pub fn purcell_factor(p: f64, p0: f64) -> f64 {
    p / p0
}

#[derive(Serialize, Deserialize)]
struct CachedReference {
    p0: f64,
    key: String,
}

/// Total power of the identical discrete dipole in an empty domain at the
/// same dx, dt, pulse and sub-cell placement, measured on the same-size
/// power box. Free-space emission is translation invariant, so the
/// reference dipole sits at the center of a compact domain; results are
/// cached on disk keyed by the discretization-relevant parameters.
pub fn vacuum_reference_power(
    source: &DipoleSource,
    domain: &SimulationDomain,
) -> Result<f64, ChannelError> {
    let dx = domain.dx_nm;
    let dt = domain.dt();
    let pos = source.position();
    let dims_scene = domain.dims();
    // Sub-cell fractional placement on the scene grid; the reference
    // reproduces it exactly so the discrete dipole has identical trilinear
    // weights.
    let mut frac = [0.0f64; 3];
    for a in 0..3 {
        frac[a] = (pos[a] / dx + dims_scene[a] as f64 / 2.0).rem_euclid(1.0);
    }
    let dir = source.direction();
    let key_src = format!(
        "vacuum-ref-v1|dx={dx}|dt={dt}|pml={}|lambda={}|fbw={}|amp={}|dir={:.9},{:.9},{:.9}|frac={:.6},{:.6},{:.6}|half={}",
        domain.pml_cells,
        source.pulse.wavelength_nm,
        source.pulse.fractional_bandwidth,
        source.pulse.amplitude,
        dir[0],
        dir[1],
        dir[2],
        frac[0],
        frac[1],
        frac[2],
        POWER_BOX_HALF,
    );
    let key = fnv1a64_hex(key_src.as_bytes());
    let dir_path = cache_dir();
    let path = dir_path.join(format!("{key}.json"));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(c) = serde_json::from_str::<CachedReference>(&text) {
            if c.key == key_src {
                return Ok(c.p0);
            }
        }
    }

    let n_side = 2 * (domain.pml_cells + POWER_BOX_HALF + 8);
    let dims = [n_side, n_side, n_side];
    let spec = SimulationSpec {
        dims,
        dx,
        dt,
        pml_cells: domain.pml_cells,
        boundaries: [Boundary::Cpml; 3],
    };
    let coeff = CoefficientPlanes::<f32>::uniform(dims[0], dims[1], 1.0, dt, dx);
    let mut sim = Simulation::new(spec, coeff)?;
    // Same direction and the same sub-cell fractional placement as the
    // scene dipole, shifted to the center of the compact domain.
    let pos_ref = [frac[0] * dx, frac[1] * dx, frac[2] * dx];
    let dipole = DiscreteDipole::place_at(pos_ref, dir, dims, dx, domain.pml_cells)?;
    let cell = dipole.cell;
    sim.set_source(dipole, source.pulse.clone());
    sim.power_box = Some(PowerBox::new(cell, POWER_BOX_HALF, vec![source.pulse.omega0()]));
    let steps = ((source.pulse.t_off() + n_side as f64 * dx) / dt).ceil() as usize;
    sim.run(steps)?;
    let p0 = sim.power_box.as_ref().expect("box").power(0, dx);
    if !(p0 > 0.0) {
        return Err(ChannelError::Reference(format!("non-positive reference power {p0}")));
    }

    std::fs::create_dir_all(&dir_path).ok();
    let tmp = dir_path.join(format!("{key}.tmp.{}", std::process::id()));
    let payload = serde_json::to_string(&CachedReference { p0, key: key_src }).expect("serialize");
    if std::fs::write(&tmp, payload).is_ok() {
        std::fs::rename(&tmp, &path).ok();
    }
    Ok(p0)
}

/// Stable content hash of a complete scene.
pub fn scene_hash(
    profile: &LayeredCylinderProfile,
    source: &DipoleSource,
    domain: &SimulationDomain,
) -> String {
    let canon = format!(
        "scene-v1|{}|{}|{}",
        serde_json::to_string(profile).expect("profile json"),
        serde_json::to_string(source).expect("source json"),
        serde_json::to_string(domain).expect("domain json"),
    );
    fnv1a64_hex(canon.as_bytes())
}
