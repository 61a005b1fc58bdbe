//! The leapfrog update loop: two-phase (E then H) with rayon-parallel
//! z-slab partitioning, CPML recursive-convolution corrections applied in
//! compact per-face passes, soft-source injection and per-point monitor
//! accumulation.

use super::cpml::AxisPml;
use super::monitor::{DftFace, FaceAxis, PlaneMonitor, PowerBox};
use super::raster::CoefficientPlanes;
use super::source::DiscreteDipole;
use super::{FdtdError, Field};
use crate::scene::GaussianPulse;
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Cpml,
    /// Wrap-around boundaries for eigenmode tests; supported only when all
    /// three axes are periodic.
    Periodic,
}

#[derive(Debug, Clone)]
pub struct SimulationSpec {
    pub dims: [usize; 3],
    pub dx: f64,
    pub dt: f64,
    pub pml_cells: usize,
    pub boundaries: [Boundary; 3],
}

/// Outcome of a completed run.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub steps: usize,
    /// Relative drift of the box power between the last two checkpoints;
    /// None when no power box is attached.
    pub stationarity: Option<f64>,
    pub converged: bool,
}

pub struct Simulation<T: Field> {
    pub spec: SimulationSpec,
    pub ex: Vec<T>,
    pub ey: Vec<T>,
    pub ez: Vec<T>,
    pub hx: Vec<T>,
    pub hy: Vec<T>,
    pub hz: Vec<T>,
    pub coeff: CoefficientPlanes<T>,
    ch: T,
    ik: [AxisIk<T>; 3],
    pml: [AxisPml; 3],
    // CPML auxiliary fields, E phase: [low slab | high slab] per axis.
    psi_ey_x: Vec<T>,
    psi_ez_x: Vec<T>,
    psi_ex_y: Vec<T>,
    psi_ez_y: Vec<T>,
    psi_ex_z: Vec<T>,
    psi_ey_z: Vec<T>,
    // H phase.
    psi_hy_x: Vec<T>,
    psi_hz_x: Vec<T>,
    psi_hx_y: Vec<T>,
    psi_hz_y: Vec<T>,
    psi_hx_z: Vec<T>,
    psi_hy_z: Vec<T>,
    source: Option<(DiscreteDipole, GaussianPulse)>,
    pub power_box: Option<PowerBox>,
    pub extra_boxes: Vec<PowerBox>,
    pub planes: Vec<PlaneMonitor>,
    max_injected: f64,
    checkpoint_power: Option<f64>,
    stationarity: Option<f64>,
}

struct AxisIk<T> {
    int: Vec<T>,
    half: Vec<T>,
}

impl<T: Field> Simulation<T> {
    pub fn new(spec: SimulationSpec, coeff: CoefficientPlanes<T>) -> Result<Self, FdtdError> {
        let [nx, ny, nz] = spec.dims;
        let n = nx * ny * nz;
        if coeff.nx != nx || coeff.ny != ny {
            return Err(FdtdError::InvalidSetup(format!(
                "coefficient planes {}x{} do not match grid {}x{}",
                coeff.nx, coeff.ny, nx, ny
            )));
        }
        let periodic = spec.boundaries.iter().any(|&b| b == Boundary::Periodic);
        if periodic && spec.boundaries.iter().any(|&b| b != Boundary::Periodic) {
            return Err(FdtdError::InvalidSetup(
                "periodic boundaries must apply to all axes".into(),
            ));
        }
        let npml = if periodic { 0 } else { spec.pml_cells };
        let pml = [
            AxisPml::new(nx, npml, spec.dx, spec.dt),
            AxisPml::new(ny, npml, spec.dx, spec.dt),
            AxisPml::new(nz, npml, spec.dx, spec.dt),
        ];
        let ik = [
            AxisIk {
                int: pml[0].inv_kappa_int.iter().map(|&v| T::from_f64(v)).collect(),
                half: pml[0].inv_kappa_half.iter().map(|&v| T::from_f64(v)).collect(),
            },
            AxisIk {
                int: pml[1].inv_kappa_int.iter().map(|&v| T::from_f64(v)).collect(),
                half: pml[1].inv_kappa_half.iter().map(|&v| T::from_f64(v)).collect(),
            },
            AxisIk {
                int: pml[2].inv_kappa_int.iter().map(|&v| T::from_f64(v)).collect(),
                half: pml[2].inv_kappa_half.iter().map(|&v| T::from_f64(v)).collect(),
            },
        ];
        let slab = if periodic { 0 } else { 2 * spec.pml_cells };
        Ok(Self {
            ch: T::from_f64(spec.dt / spec.dx),
            ex: vec![T::default(); n],
            ey: vec![T::default(); n],
            ez: vec![T::default(); n],
            hx: vec![T::default(); n],
            hy: vec![T::default(); n],
            hz: vec![T::default(); n],
            coeff,
            ik,
            pml,
            psi_ey_x: vec![T::default(); slab * ny * nz],
            psi_ez_x: vec![T::default(); slab * ny * nz],
            psi_ex_y: vec![T::default(); slab * nx * nz],
            psi_ez_y: vec![T::default(); slab * nx * nz],
            psi_ex_z: vec![T::default(); slab * nx * ny],
            psi_ey_z: vec![T::default(); slab * nx * ny],
            psi_hy_x: vec![T::default(); slab * ny * nz],
            psi_hz_x: vec![T::default(); slab * ny * nz],
            psi_hx_y: vec![T::default(); slab * nx * nz],
            psi_hz_y: vec![T::default(); slab * nx * nz],
            psi_hx_z: vec![T::default(); slab * nx * ny],
            psi_hy_z: vec![T::default(); slab * nx * ny],
            source: None,
            power_box: None,
            extra_boxes: Vec::new(),
            planes: Vec::new(),
            max_injected: 0.0,
            checkpoint_power: None,
            stationarity: None,
            spec,
        })
    }

    #[inline(always)]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.spec.dims[1] + j) * self.spec.dims[0] + i
    }

    pub fn set_source(&mut self, dipole: DiscreteDipole, pulse: GaussianPulse) {
        self.source = Some((dipole, pulse));
    }

    fn is_periodic(&self) -> bool {
        self.spec.boundaries[0] == Boundary::Periodic
    }

    /// One leapfrog step: E update (with source injection at the half-step
    /// current time) then H update, then monitor accumulation.
    pub fn step(&mut self, n: usize) {
        self.update_e();
        self.inject(n);
        self.update_h();
        self.accumulate(n);
    }

    pub fn run(&mut self, steps: usize) -> Result<StepReport, FdtdError> {
        let check_every = 256;
        let checkpoint = steps.saturating_sub(steps / 10).max(1);
        for n in 0..steps {
            self.step(n);
            if (n + 1) % check_every == 0 {
                let m = self.max_field_magnitude();
                let limit = 1e12 * self.max_injected.max(1e-300);
                if !m.is_finite() || m > limit {
                    return Err(FdtdError::Diverged { step: n, max_field: m });
                }
            }
            if n + 1 == checkpoint {
                self.checkpoint_power = self.box_power_now();
            }
        }
        let end_power = self.box_power_now();
        self.stationarity = match (self.checkpoint_power, end_power) {
            (Some(a), Some(b)) if b != 0.0 => Some(((b - a) / b).abs()),
            _ => None,
        };
        Ok(StepReport {
            steps,
            stationarity: self.stationarity,
            converged: self.stationarity.map(|s| s < 1e-3).unwrap_or(true),
        })
    }

    fn box_power_now(&self) -> Option<f64> {
        self.power_box.as_ref().map(|b| b.power(0, self.spec.dx))
    }

    pub fn max_field_magnitude(&self) -> f64 {
        let mx = |v: &Vec<T>| {
            v.par_chunks(1 << 16)
                .map(|c| c.iter().fold(0.0f64, |a, &x| a.max(x.to_f64().abs())))
                .reduce(|| 0.0, f64::max)
        };
        mx(&self.ex)
            .max(mx(&self.ey))
            .max(mx(&self.ez))
            .max(mx(&self.hx))
            .max(mx(&self.hy))
            .max(mx(&self.hz))
    }

    // -----------------------------------------------------------------
    // E phase
    // -----------------------------------------------------------------

    fn update_e(&mut self) {
        let [nx, ny, _nz] = self.spec.dims;
        let plane = nx * ny;
        let (hx, hy, hz) = (&self.hx, &self.hy, &self.hz);
        let (ikx, iky, ikz) = (&self.ik[0], &self.ik[1], &self.ik[2]);
        let coeff = &self.coeff;
        self.ex
            .par_chunks_mut(plane)
            .zip(self.ey.par_chunks_mut(plane))
            .zip(self.ez.par_chunks_mut(plane))
            .enumerate()
            .for_each(|(k, ((exs, eys), ezs))| {
                if k == 0 {
                    return;
                }
                let base = k * plane;
                let basem = base - plane;
                let ikzk = ikz.int[k];
                for j in 1..ny {
                    let row = j * nx;
                    let rowm = row - nx;
                    let ikyj = iky.int[j];
                    let cex = &coeff.cex[row..row + nx];
                    let cey = &coeff.cey[row..row + nx];
                    let cez = &coeff.cez[row..row + nx];
                    let ex_r = &mut exs[row..row + nx];
                    let ey_r = &mut eys[row..row + nx];
                    let ez_r = &mut ezs[row..row + nx];
                    let hz_r = &hz[base + row..base + row + nx];
                    let hz_jm = &hz[base + rowm..base + rowm + nx];
                    let hy_r = &hy[base + row..base + row + nx];
                    let hy_km = &hy[basem + row..basem + row + nx];
                    let hx_r = &hx[base + row..base + row + nx];
                    let hx_km = &hx[basem + row..basem + row + nx];
                    let hx_jm = &hx[base + rowm..base + rowm + nx];
                    for i in 1..nx {
                        let ikxi = ikx.int[i];
                        ex_r[i] += cex[i]
                            * ((hz_r[i] - hz_jm[i]) * ikyj - (hy_r[i] - hy_km[i]) * ikzk);
                        ey_r[i] += cey[i]
                            * ((hx_r[i] - hx_km[i]) * ikzk - (hz_r[i] - hz_r[i - 1]) * ikxi);
                        ez_r[i] += cez[i]
                            * ((hy_r[i] - hy_r[i - 1]) * ikxi - (hx_r[i] - hx_jm[i]) * ikyj);
                    }
                }
            });
        if self.is_periodic() {
            self.wrap_e();
        } else {
            self.psi_e_x();
            self.psi_e_y();
            self.psi_e_z();
        }
    }

    /// CPML correction for x-derivatives in the E phase (Ey from Hz, Ez
    /// from Hy), within the two x slabs.
    fn psi_e_x(&mut self) {
        let [nx, ny, _nz] = self.spec.dims;
        let npml = self.spec.pml_cells;
        let plane = nx * ny;
        let slab_w = 2 * npml;
        let (hy, hz) = (&self.hy, &self.hz);
        let pml = &self.pml[0];
        let coeff = &self.coeff;
        self.ey
            .par_chunks_mut(plane)
            .zip(self.ez.par_chunks_mut(plane))
            .zip(self.psi_ey_x.par_chunks_mut(slab_w * ny))
            .zip(self.psi_ez_x.par_chunks_mut(slab_w * ny))
            .enumerate()
            .for_each(|(k, (((eys, ezs), pys), pzs))| {
                if k == 0 {
                    return;
                }
                let base = k * plane;
                for j in 1..ny {
                    let row = j * nx;
                    for il in 0..slab_w {
                        let i = if il < npml { il } else { nx - 2 * npml + il };
                        if i == 0 {
                            continue;
                        }
                        let b = T::from_f64(pml.b_int[i]);
                        let c = T::from_f64(pml.c_int[i]);
                        let p = j * slab_w + il;
                        let d_hz = hz[base + row + i] - hz[base + row + i - 1];
                        pys[p] = b * pys[p] + c * d_hz;
                        eys[row + i] += T::from_f64(-1.0) * coeff.cey[row + i] * pys[p];
                        let d_hy = hy[base + row + i] - hy[base + row + i - 1];
                        pzs[p] = b * pzs[p] + c * d_hy;
                        ezs[row + i] += coeff.cez[row + i] * pzs[p];
                    }
                }
            });
    }

    /// CPML correction for y-derivatives in the E phase (Ex from Hz, Ez
    /// from Hx).
    fn psi_e_y(&mut self) {
        let [nx, ny, _nz] = self.spec.dims;
        let npml = self.spec.pml_cells;
        let plane = nx * ny;
        let slab_w = 2 * npml;
        let (hx, hz) = (&self.hx, &self.hz);
        let pml = &self.pml[1];
        let coeff = &self.coeff;
        self.ex
            .par_chunks_mut(plane)
            .zip(self.ez.par_chunks_mut(plane))
            .zip(self.psi_ex_y.par_chunks_mut(slab_w * nx))
            .zip(self.psi_ez_y.par_chunks_mut(slab_w * nx))
            .enumerate()
            .for_each(|(k, (((exs, ezs), pxs), pzs))| {
                if k == 0 {
                    return;
                }
                let base = k * plane;
                for jl in 0..slab_w {
                    let j = if jl < npml { jl } else { ny - 2 * npml + jl };
                    if j == 0 {
                        continue;
                    }
                    let b = T::from_f64(pml.b_int[j]);
                    let c = T::from_f64(pml.c_int[j]);
                    let row = j * nx;
                    let rowm = row - nx;
                    for i in 1..nx {
                        let p = jl * nx + i;
                        let d_hz = hz[base + row + i] - hz[base + rowm + i];
                        pxs[p] = b * pxs[p] + c * d_hz;
                        exs[row + i] += coeff.cex[row + i] * pxs[p];
                        let d_hx = hx[base + row + i] - hx[base + rowm + i];
                        pzs[p] = b * pzs[p] + c * d_hx;
                        ezs[row + i] += T::from_f64(-1.0) * coeff.cez[row + i] * pzs[p];
                    }
                }
            });
    }

    /// CPML correction for z-derivatives in the E phase (Ex from Hy, Ey
    /// from Hx), within the two z slabs.
    fn psi_e_z(&mut self) {
        let [nx, ny, nz] = self.spec.dims;
        let npml = self.spec.pml_cells;
        let plane = nx * ny;
        let (hx, hy) = (&self.hx, &self.hy);
        let pml = &self.pml[2];
        let coeff = &self.coeff;
        // Low slab (k in 0..npml) then high slab (k in nz-npml..nz).
        for (slab_idx, k0) in [(0usize, 0usize), (1, nz - npml)] {
            let e_range = k0 * plane..(k0 + npml) * plane;
            let p_range = slab_idx * npml * plane..(slab_idx + 1) * npml * plane;
            let ex_s = &mut self.ex[e_range.clone()];
            let ey_s = &mut self.ey[e_range];
            let px_s = &mut self.psi_ex_z[p_range.clone()];
            let py_s = &mut self.psi_ey_z[p_range];
            ex_s.par_chunks_mut(plane)
                .zip(ey_s.par_chunks_mut(plane))
                .zip(px_s.par_chunks_mut(plane))
                .zip(py_s.par_chunks_mut(plane))
                .enumerate()
                .for_each(|(kl, (((exs, eys), pxs), pys))| {
                    let k = k0 + kl;
                    if k == 0 {
                        return;
                    }
                    let base = k * plane;
                    let basem = base - plane;
                    let b = T::from_f64(pml.b_int[k]);
                    let c = T::from_f64(pml.c_int[k]);
                    for j in 1..ny {
                        let row = j * nx;
                        for i in 1..nx {
                            let p = row + i;
                            let d_hy = hy[base + p] - hy[basem + p];
                            pxs[p] = b * pxs[p] + c * d_hy;
                            exs[p] += T::from_f64(-1.0) * coeff.cex[p] * pxs[p];
                            let d_hx = hx[base + p] - hx[basem + p];
                            pys[p] = b * pys[p] + c * d_hx;
                            eys[p] += coeff.cey[p] * pys[p];
                        }
                    }
                });
        }
    }

    /// Periodic wrap: update the boundary planes the bulk pass skipped,
    /// reading neighbors modulo the axis length. All axes periodic.
    fn wrap_e(&mut self) {
        let [nx, ny, nz] = self.spec.dims;
        let _plane = nx * ny;
        let idx = |i: usize, j: usize, k: usize| (k * ny + j) * nx + i;
        let im = |i: usize, n: usize| if i == 0 { n - 1 } else { i - 1 };
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    if i != 0 && j != 0 && k != 0 {
                        continue;
                    }
                    let c = self.coeff.cex[j * nx + i];
                    let d_hz = self.hz[idx(i, j, k)] - self.hz[idx(i, im(j, ny), k)];
                    let d_hy = self.hy[idx(i, j, k)] - self.hy[idx(i, j, im(k, nz))];
                    self.ex[idx(i, j, k)] += c * (d_hz - d_hy);
                    let d_hx = self.hx[idx(i, j, k)] - self.hx[idx(i, j, im(k, nz))];
                    let d_hz2 = self.hz[idx(i, j, k)] - self.hz[idx(im(i, nx), j, k)];
                    self.ey[idx(i, j, k)] += c * (d_hx - d_hz2);
                    let d_hy2 = self.hy[idx(i, j, k)] - self.hy[idx(im(i, nx), j, k)];
                    let d_hx2 = self.hx[idx(i, j, k)] - self.hx[idx(i, im(j, ny), k)];
                    self.ez[idx(i, j, k)] += c * (d_hy2 - d_hx2);
                }
            }
        }
    }

    // -----------------------------------------------------------------
    // H phase
    // -----------------------------------------------------------------

    fn update_h(&mut self) {
        let [nx, ny, nz] = self.spec.dims;
        let plane = nx * ny;
        let (ex, ey, ez) = (&self.ex, &self.ey, &self.ez);
        let (ikx, iky, ikz) = (&self.ik[0], &self.ik[1], &self.ik[2]);
        let ch = self.ch;
        self.hx
            .par_chunks_mut(plane)
            .zip(self.hy.par_chunks_mut(plane))
            .zip(self.hz.par_chunks_mut(plane))
            .enumerate()
            .for_each(|(k, ((hxs, hys), hzs))| {
                if k >= nz - 1 {
                    return;
                }
                let base = k * plane;
                let basep = base + plane;
                let ikzk = ikz.half[k];
                for j in 0..ny - 1 {
                    let row = j * nx;
                    let rowp = row + nx;
                    let ikyj = iky.half[j];
                    let hx_r = &mut hxs[row..row + nx];
                    let hy_r = &mut hys[row..row + nx];
                    let hz_r = &mut hzs[row..row + nx];
                    let ey_r = &ey[base + row..base + row + nx];
                    let ey_kp = &ey[basep + row..basep + row + nx];
                    let ez_r = &ez[base + row..base + row + nx];
                    let ez_jp = &ez[base + rowp..base + rowp + nx];
                    let ex_r = &ex[base + row..base + row + nx];
                    let ex_kp = &ex[basep + row..basep + row + nx];
                    let ex_jp = &ex[base + rowp..base + rowp + nx];
                    for i in 0..nx - 1 {
                        let ikxi = ikx.half[i];
                        hx_r[i] += ch
                            * ((ey_kp[i] - ey_r[i]) * ikzk - (ez_jp[i] - ez_r[i]) * ikyj);
                        hy_r[i] += ch
                            * ((ez_r[i + 1] - ez_r[i]) * ikxi - (ex_kp[i] - ex_r[i]) * ikzk);
                        hz_r[i] += ch
                            * ((ex_jp[i] - ex_r[i]) * ikyj - (ey_r[i + 1] - ey_r[i]) * ikxi);
                    }
                }
            });
        if self.is_periodic() {
            self.wrap_h();
        } else {
            self.psi_h_x();
            self.psi_h_y();
            self.psi_h_z();
        }
    }

    fn psi_h_x(&mut self) {
        let [nx, ny, _nz_h] = self.spec.dims;
        let npml = self.spec.pml_cells;
        let plane = nx * ny;
        let slab_w = 2 * npml;
        let (ey, ez) = (&self.ey, &self.ez);
        let pml = &self.pml[0];
        let ch = self.ch;
        self.hy
            .par_chunks_mut(plane)
            .zip(self.hz.par_chunks_mut(plane))
            .zip(self.psi_hy_x.par_chunks_mut(slab_w * ny))
            .zip(self.psi_hz_x.par_chunks_mut(slab_w * ny))
            .enumerate()
            .for_each(|(k, (((hys, hzs), pys), pzs))| {
                if k + 1 >= _nz_h {
                    return;
                }
                let base = k * plane;
                for j in 0..ny - 1 {
                    let row = j * nx;
                    for il in 0..slab_w {
                        let i = if il < npml { il } else { nx - 2 * npml + il };
                        if i + 1 >= nx {
                            continue;
                        }
                        let b = T::from_f64(pml.b_half[i]);
                        let c = T::from_f64(pml.c_half[i]);
                        let p = j * slab_w + il;
                        let d_ez = ez[base + row + i + 1] - ez[base + row + i];
                        pys[p] = b * pys[p] + c * d_ez;
                        hys[row + i] += ch * pys[p];
                        let d_ey = ey[base + row + i + 1] - ey[base + row + i];
                        pzs[p] = b * pzs[p] + c * d_ey;
                        hzs[row + i] += T::from_f64(-1.0) * ch * pzs[p];
                    }
                }
            });
    }

    fn psi_h_y(&mut self) {
        let [nx, ny, _nz_h] = self.spec.dims;
        let npml = self.spec.pml_cells;
        let plane = nx * ny;
        let slab_w = 2 * npml;
        let (ex, ez) = (&self.ex, &self.ez);
        let pml = &self.pml[1];
        let ch = self.ch;
        self.hx
            .par_chunks_mut(plane)
            .zip(self.hz.par_chunks_mut(plane))
            .zip(self.psi_hx_y.par_chunks_mut(slab_w * nx))
            .zip(self.psi_hz_y.par_chunks_mut(slab_w * nx))
            .enumerate()
            .for_each(|(k, (((hxs, hzs), pxs), pzs))| {
                if k + 1 >= _nz_h {
                    return;
                }
                let base = k * plane;
                for jl in 0..slab_w {
                    let j = if jl < npml { jl } else { ny - 2 * npml + jl };
                    if j + 1 >= ny {
                        continue;
                    }
                    let b = T::from_f64(pml.b_half[j]);
                    let c = T::from_f64(pml.c_half[j]);
                    let row = j * nx;
                    let rowp = row + nx;
                    for i in 0..nx - 1 {
                        let p = jl * nx + i;
                        let d_ez = ez[base + rowp + i] - ez[base + row + i];
                        pxs[p] = b * pxs[p] + c * d_ez;
                        hxs[row + i] += T::from_f64(-1.0) * ch * pxs[p];
                        let d_ex = ex[base + rowp + i] - ex[base + row + i];
                        pzs[p] = b * pzs[p] + c * d_ex;
                        hzs[row + i] += ch * pzs[p];
                    }
                }
            });
    }

    fn psi_h_z(&mut self) {
        let [nx, ny, nz] = self.spec.dims;
        let npml = self.spec.pml_cells;
        let plane = nx * ny;
        let (ex, ey) = (&self.ex, &self.ey);
        let pml = &self.pml[2];
        let ch = self.ch;
        for (slab_idx, k0) in [(0usize, 0usize), (1, nz - npml)] {
            let h_range = k0 * plane..(k0 + npml) * plane;
            let p_range = slab_idx * npml * plane..(slab_idx + 1) * npml * plane;
            let hx_s = &mut self.hx[h_range.clone()];
            let hy_s = &mut self.hy[h_range];
            let px_s = &mut self.psi_hx_z[p_range.clone()];
            let py_s = &mut self.psi_hy_z[p_range];
            hx_s.par_chunks_mut(plane)
                .zip(hy_s.par_chunks_mut(plane))
                .zip(px_s.par_chunks_mut(plane))
                .zip(py_s.par_chunks_mut(plane))
                .enumerate()
                .for_each(|(kl, (((hxs, hys), pxs), pys))| {
                    let k = k0 + kl;
                    if k + 1 >= nz {
                        return;
                    }
                    let base = k * plane;
                    let basep = base + plane;
                    let b = T::from_f64(pml.b_half[k]);
                    let c = T::from_f64(pml.c_half[k]);
                    for j in 0..ny - 1 {
                        let row = j * nx;
                        for i in 0..nx - 1 {
                            let p = row + i;
                            let d_ey = ey[basep + p] - ey[base + p];
                            pxs[p] = b * pxs[p] + c * d_ey;
                            hxs[p] += ch * pxs[p];
                            let d_ex = ex[basep + p] - ex[base + p];
                            pys[p] = b * pys[p] + c * d_ex;
                            hys[p] += T::from_f64(-1.0) * ch * pys[p];
                        }
                    }
                });
        }
    }

    fn wrap_h(&mut self) {
        let [nx, ny, nz] = self.spec.dims;
        let idx = |i: usize, j: usize, k: usize| (k * ny + j) * nx + i;
        let ip = |i: usize, n: usize| if i + 1 == n { 0 } else { i + 1 };
        let ch = self.ch;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    if i != nx - 1 && j != ny - 1 && k != nz - 1 {
                        continue;
                    }
                    let d_ey_z = self.ey[idx(i, j, ip(k, nz))] - self.ey[idx(i, j, k)];
                    let d_ez_y = self.ez[idx(i, ip(j, ny), k)] - self.ez[idx(i, j, k)];
                    self.hx[idx(i, j, k)] += ch * (d_ey_z - d_ez_y);
                    let d_ez_x = self.ez[idx(ip(i, nx), j, k)] - self.ez[idx(i, j, k)];
                    let d_ex_z = self.ex[idx(i, j, ip(k, nz))] - self.ex[idx(i, j, k)];
                    self.hy[idx(i, j, k)] += ch * (d_ez_x - d_ex_z);
                    let d_ex_y = self.ex[idx(i, ip(j, ny), k)] - self.ex[idx(i, j, k)];
                    let d_ey_x = self.ey[idx(ip(i, nx), j, k)] - self.ey[idx(i, j, k)];
                    self.hz[idx(i, j, k)] += ch * (d_ex_y - d_ey_x);
                }
            }
        }
    }

    // -----------------------------------------------------------------
    // Source and monitors
    // -----------------------------------------------------------------

    fn inject(&mut self, n: usize) {
        let Some((dipole, pulse)) = &self.source else {
            return;
        };
        let dt = self.spec.dt;
        let dx = self.spec.dx;
        // Discrete time derivative of the dipole moment, centered on the
        // E-update interval.
        let amp = (pulse.value((n + 1) as f64 * dt) - pulse.value(n as f64 * dt)) / dt;
        let scale = -amp / (dx * dx);
        let mut peak = self.max_injected;
        for node in &dipole.nodes {
            let (i, j) = node.plane_ij;
            let c = match node.comp {
                0 => self.coeff.cex[j * self.coeff.nx + i],
                1 => self.coeff.cey[j * self.coeff.nx + i],
                _ => self.coeff.cez[j * self.coeff.nx + i],
            };
            let v = T::from_f64(scale * node.weight) * c;
            peak = peak.max(v.to_f64().abs());
            match node.comp {
                0 => self.ex[node.idx] += v,
                1 => self.ey[node.idx] += v,
                _ => self.ez[node.idx] += v,
            }
        }
        self.max_injected = peak;
    }

    fn accumulate(&mut self, n: usize) {
        let dt = self.spec.dt;
        let t_e = (n + 1) as f64 * dt;
        let t_h = ((n + 1) as f64 + 0.5) * dt;
        let [nx, ny, _] = self.spec.dims;
        let fields = FieldsRef {
            ex: &self.ex,
            ey: &self.ey,
            ez: &self.ez,
            hx: &self.hx,
            hy: &self.hy,
            hz: &self.hz,
            nx,
            ny,
        };
        // Each face owns disjoint buffers; accumulation is per-point with
        // no cross-point reductions, so parallelism cannot change results.
        let mut faces: Vec<&mut DftFace> = Vec::new();
        if let Some(b) = &mut self.power_box {
            faces.extend(b.faces.iter_mut());
        }
        for b in &mut self.extra_boxes {
            faces.extend(b.faces.iter_mut());
        }
        for p in &mut self.planes {
            faces.push(&mut p.face);
        }
        faces
            .into_par_iter()
            .for_each(|f| accumulate_face(f, &fields, t_e, t_h, dt));
    }
}

struct FieldsRef<'a, T> {
    ex: &'a [T],
    ey: &'a [T],
    ez: &'a [T],
    hx: &'a [T],
    hy: &'a [T],
    hz: &'a [T],
    nx: usize,
    ny: usize,
}

impl<'a, T: Field> FieldsRef<'a, T> {
    #[inline(always)]
    fn at(&self, arr: &[T], i: usize, j: usize, k: usize) -> f64 {
        arr[(k * self.ny + j) * self.nx + i].to_f64()
    }
}

/// Per-point DFT accumulation for one face. E components sample at the
/// plane; H components average the two half-planes adjacent along the
/// normal. Each frequency uses exact phase factors at the native E and H
/// sample times.
fn accumulate_face<T: Field>(
    face: &mut DftFace,
    f: &FieldsRef<'_, T>,
    t_e: f64,
    t_h: f64,
    dt: f64,
) {
    let nu = face.points_u();
    for (fi, &omega) in face.freqs.clone().iter().enumerate() {
        let ph_e = Complex64::from_polar(dt, omega * t_e);
        let ph_h = Complex64::from_polar(dt, omega * t_h);
        match face.axis {
            FaceAxis::Z => {
                let k = face.index;
                for j in face.range_v.0..face.range_v.1 {
                    for i in face.range_u.0..face.range_u.1 {
                        let p = (j - face.range_v.0) * nu + (i - face.range_u.0);
                        face.e_u[fi][p] += ph_e * f.at(f.ex, i, j, k);
                        face.e_v[fi][p] += ph_e * f.at(f.ey, i, j, k);
                        let hxm = 0.5 * (f.at(f.hx, i, j, k - 1) + f.at(f.hx, i, j, k));
                        let hym = 0.5 * (f.at(f.hy, i, j, k - 1) + f.at(f.hy, i, j, k));
                        face.h_u[fi][p] += ph_h * hxm;
                        face.h_v[fi][p] += ph_h * hym;
                    }
                }
            }
            FaceAxis::X => {
                // (E x H*)_x = Ey Hz* - Ez Hy*: e_u = Ey pairs h_v = Hz.
                let i = face.index;
                for k in face.range_v.0..face.range_v.1 {
                    for j in face.range_u.0..face.range_u.1 {
                        let p = (k - face.range_v.0) * nu + (j - face.range_u.0);
                        face.e_u[fi][p] += ph_e * f.at(f.ey, i, j, k);
                        face.e_v[fi][p] += ph_e * f.at(f.ez, i, j, k);
                        let hym = 0.5 * (f.at(f.hy, i - 1, j, k) + f.at(f.hy, i, j, k));
                        let hzm = 0.5 * (f.at(f.hz, i - 1, j, k) + f.at(f.hz, i, j, k));
                        face.h_v[fi][p] += ph_h * hzm;
                        face.h_u[fi][p] += ph_h * hym;
                    }
                }
            }
            FaceAxis::Y => {
                // (E x H*)_y = Ez Hx* - Ex Hz*: e_u = Ez pairs h_v = Hx.
                // For Y faces the in-plane axes are u = z, v = x.
                let j = face.index;
                for i in face.range_v.0..face.range_v.1 {
                    for k in face.range_u.0..face.range_u.1 {
                        let p = (i - face.range_v.0) * nu + (k - face.range_u.0);
                        face.e_u[fi][p] += ph_e * f.at(f.ez, i, j, k);
                        face.e_v[fi][p] += ph_e * f.at(f.ex, i, j, k);
                        let hzm = 0.5 * (f.at(f.hz, i, j - 1, k) + f.at(f.hz, i, j, k));
                        let hxm = 0.5 * (f.at(f.hx, i, j - 1, k) + f.at(f.hx, i, j, k));
                        face.h_v[fi][p] += ph_h * hxm;
                        face.h_u[fi][p] += ph_h * hzm;
                    }
                }
            }
        }
    }
}
