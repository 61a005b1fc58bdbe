//! Frequency-resolved field monitors: single cross-section planes for mode
//! projection and closed boxes for total radiated power.
//!
//! Accumulation is per-point into f64 buffers (no cross-point reductions at
//! step time), so results are independent of worker count; the spatial flux
//! integrals run once at readout in fixed index order.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceAxis {
    X,
    Y,
    Z,
}

/// One axis-aligned rectangle on the grid, at a fixed integer E-plane index
/// along its normal. Tangential E (at E time steps) and normal-interpolated
/// tangential H (at H time steps) are DFT-accumulated per frequency.
///
/// Component conventions per axis (u, v are the in-plane axes in cyclic
/// order): E_u, E_v, H_u, H_v sampled at the E_u/E_v in-plane Yee positions.
pub struct DftFace {
    pub axis: FaceAxis,
    /// Fixed E-plane index along the normal.
    pub index: usize,
    /// Inclusive start, exclusive end in the two in-plane axes.
    pub range_u: (usize, usize),
    pub range_v: (usize, usize),
    /// Outward direction sign used when this face is part of a closed box.
    pub sign: f64,
    pub freqs: Vec<f64>,
    /// [freq][point] accumulators.
    pub e_u: Vec<Vec<Complex64>>,
    pub e_v: Vec<Vec<Complex64>>,
    pub h_u: Vec<Vec<Complex64>>,
    pub h_v: Vec<Vec<Complex64>>,
}

impl DftFace {
    pub fn new(
        axis: FaceAxis,
        index: usize,
        range_u: (usize, usize),
        range_v: (usize, usize),
        sign: f64,
        freqs: Vec<f64>,
    ) -> Self {
        let n = (range_u.1 - range_u.0) * (range_v.1 - range_v.0);
        let zero = vec![Complex64::new(0.0, 0.0); n];
        Self {
            axis,
            index,
            range_u,
            range_v,
            sign,
            e_u: vec![zero.clone(); freqs.len()],
            e_v: vec![zero.clone(); freqs.len()],
            h_u: vec![zero.clone(); freqs.len()],
            h_v: vec![zero; freqs.len()],
            freqs,
        }
    }

    pub fn points_u(&self) -> usize {
        self.range_u.1 - self.range_u.0
    }

    pub fn points_v(&self) -> usize {
        self.range_v.1 - self.range_v.0
    }

    /// Net Poynting flux through the face at frequency index `fi`:
    /// sign * 1/2 Re sum (E_u H_v* - E_v H_u*) dA.
    pub fn flux(&self, fi: usize, dx: f64) -> f64 {
        let mut acc = 0.0;
        for p in 0..self.e_u[fi].len() {
            acc += (self.e_u[fi][p] * self.h_v[fi][p].conj()
                - self.e_v[fi][p] * self.h_u[fi][p].conj())
            .re;
        }
        0.5 * acc * dx * dx * self.sign
    }

    /// Flux restricted to points within `half_width` cells of the face
    /// center (for windowed raw-flux estimates).
    pub fn flux_windowed(&self, fi: usize, dx: f64, half_width_cells: usize) -> f64 {
        let nu = self.points_u();
        let nv = self.points_v();
        let (cu, cv) = (nu / 2, nv / 2);
        let mut acc = 0.0;
        for v in 0..nv {
            for u in 0..nu {
                if u.abs_diff(cu) > half_width_cells || v.abs_diff(cv) > half_width_cells {
                    continue;
                }
                let p = v * nu + u;
                acc += (self.e_u[fi][p] * self.h_v[fi][p].conj()
                    - self.e_v[fi][p] * self.h_u[fi][p].conj())
                .re;
            }
        }
        0.5 * acc * dx * dx * self.sign
    }
}

/// Six faces forming a closed box around a grid point; the net outward flux
/// measures the total power leaving the enclosed region.
pub struct PowerBox {
    pub faces: Vec<DftFace>,
}

impl PowerBox {
    /// Cube of half-size `half` cells centered on `center` (cell indices),
    /// clipped nowhere: the caller guarantees it fits inside the interior.
    pub fn new(center: [usize; 3], half: usize, freqs: Vec<f64>) -> Self {
        let lo = [center[0] - half, center[1] - half, center[2] - half];
        let hi = [center[0] + half, center[1] + half, center[2] + half];
        let mut faces = Vec::with_capacity(6);
        for (axis, u, v) in [
            (FaceAxis::X, 1usize, 2usize),
            (FaceAxis::Y, 2, 0),
            (FaceAxis::Z, 0, 1),
        ] {
            let a = match axis {
                FaceAxis::X => 0,
                FaceAxis::Y => 1,
                FaceAxis::Z => 2,
            };
            for (idx, sign) in [(lo[a], -1.0), (hi[a], 1.0)] {
                faces.push(DftFace::new(
                    axis,
                    idx,
                    (lo[u], hi[u]),
                    (lo[v], hi[v]),
                    sign,
                    freqs.clone(),
                ));
            }
        }
        Self { faces }
    }

    /// Net outward power at frequency index `fi`.
    pub fn power(&self, fi: usize, dx: f64) -> f64 {
        self.faces.iter().map(|f| f.flux(fi, dx)).sum()
    }
}

/// A full-cross-section z-plane monitor used for guided-mode projection:
/// the spatial DFT buffers with their Yee in-plane offsets.
pub struct PlaneMonitor {
    pub face: DftFace,
    /// z distance of the plane from the source, nm (signed).
    pub z_offset_nm: f64,
}
