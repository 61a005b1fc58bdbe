//! Discretization of a point dipole onto the staggered grid: each Cartesian
//! current component is spread with trilinear weights over the eight
//! surrounding nodes of that component's Yee sublattice.

use super::FdtdError;
use crate::scene::DipoleSource;

/// One driven grid node: component (0 = Ex, 1 = Ey, 2 = Ez), flat index and
/// trilinear weight times the dipole direction cosine.
#[derive(Debug, Clone)]
pub struct DrivenNode {
    pub comp: usize,
    pub idx: usize,
    pub weight: f64,
    pub plane_ij: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct DiscreteDipole {
    pub nodes: Vec<DrivenNode>,
    /// Cell indices of the cell containing the dipole.
    pub cell: [usize; 3],
}

/// Yee offsets of the E components in cell units.
const E_OFFSETS: [[f64; 3]; 3] = [
    [0.5, 0.0, 0.0], // Ex
    [0.0, 0.5, 0.0], // Ey
    [0.0, 0.0, 0.5], // Ez
];

impl DiscreteDipole {
    /// Place a dipole described by a scene source.
    pub fn place(
        source: &DipoleSource,
        dims: [usize; 3],
        dx: f64,
        pml_cells: usize,
    ) -> Result<Self, FdtdError> {
        Self::place_at(source.position(), source.direction(), dims, dx, pml_cells)
    }

    /// Place a dipole at an explicit position (nm, relative to the domain
    /// center) with an explicit moment direction.
    pub fn place_at(
        pos: [f64; 3],
        dir: [f64; 3],
        dims: [usize; 3],
        dx: f64,
        pml_cells: usize,
    ) -> Result<Self, FdtdError> {
        let mut grid_pos = [0.0f64; 3];
        for a in 0..3 {
            grid_pos[a] = pos[a] / dx + dims[a] as f64 / 2.0;
        }
        let cell = [
            grid_pos[0].floor() as isize,
            grid_pos[1].floor() as isize,
            grid_pos[2].floor() as isize,
        ];
        for a in 0..3 {
            let margin = pml_cells as isize + 1;
            if cell[a] < margin || cell[a] >= dims[a] as isize - margin {
                return Err(FdtdError::InvalidSource(format!(
                    "dipole cell {:?} lies in or beyond the PML (dims {:?}, pml {})",
                    cell, dims, pml_cells
                )));
            }
        }
        let (nx, ny) = (dims[0], dims[1]);
        let mut nodes = Vec::new();
        for comp in 0..3 {
            if dir[comp].abs() < 1e-15 {
                continue;
            }
            // Position in this component's sublattice coordinates.
            let mut s = [0.0f64; 3];
            for a in 0..3 {
                s[a] = grid_pos[a] - E_OFFSETS[comp][a];
            }
            let base = [s[0].floor(), s[1].floor(), s[2].floor()];
            let frac = [s[0] - base[0], s[1] - base[1], s[2] - base[2]];
            for dz in 0..2 {
                for dy in 0..2 {
                    for dxn in 0..2 {
                        let w = (if dxn == 0 { 1.0 - frac[0] } else { frac[0] })
                            * (if dy == 0 { 1.0 - frac[1] } else { frac[1] })
                            * (if dz == 0 { 1.0 - frac[2] } else { frac[2] });
                        if w < 1e-12 {
                            continue;
                        }
                        let i = base[0] as usize + dxn;
                        let j = base[1] as usize + dy;
                        let kk = base[2] as usize + dz;
                        nodes.push(DrivenNode {
                            comp,
                            idx: (kk * ny + j) * nx + i,
                            weight: w * dir[comp],
                            plane_ij: (i, j),
                        });
                    }
                }
            }
        }
        Ok(Self {
            nodes,
            cell: [cell[0] as usize, cell[1] as usize, cell[2] as usize],
        })
    }
}
