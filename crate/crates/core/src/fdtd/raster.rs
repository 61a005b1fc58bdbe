//! Rasterization of layered cylinder profiles onto the Yee grid.
//!
//! Each E-component's permittivity is the volume average of eps over that
//! component's cell. The geometry is z-invariant, so the averages reduce to
//! 2D disk/rectangle intersection areas and the coefficient arrays are
//! single (x, y) planes broadcast along z.

use super::{Field, FdtdError};
use crate::scene::LayeredCylinderProfile;

/// Area of the intersection of the disk r <= radius (centered at origin)
/// with the axis-aligned rectangle [x0, x1] x [y0, y1], in closed form.
///
/// The chord height min(y1, c(u)) - max(y0, -c(u)) with c = sqrt(R^2 - u^2)
/// is integrated piecewise: the clamp state only changes at the four
/// abscissae where c crosses |y0| or |y1|, and within each piece the
/// antiderivative of c is the circular-segment primitive.
pub fn disk_rect_area(radius: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    debug_assert!(x1 >= x0 && y1 >= y0);
    let lo = x0.max(-radius);
    let hi = x1.min(radius);
    if lo >= hi || radius <= 0.0 {
        return 0.0;
    }
    // Primitive of c(u) = sqrt(R^2 - u^2).
    let r2 = radius * radius;
    let prim = |u: f64| {
        let uc = u.clamp(-radius, radius);
        0.5 * (uc * (r2 - uc * uc).max(0.0).sqrt() + r2 * (uc / radius).asin())
    };
    let mut cuts = vec![lo, hi];
    for y in [y0, y1] {
        if y.abs() < radius {
            let u = (r2 - y * y).sqrt();
            for s in [-u, u] {
                if s > lo && s < hi {
                    cuts.push(s);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let c_mid = (r2 - mid * mid).max(0.0).sqrt();
        let top_is_circle = c_mid < y1;
        let bot_is_circle = -c_mid > y0;
        if c_mid.min(y1) <= (-c_mid).max(y0) {
            continue; // clamped band is empty on this piece
        }
        let top = if top_is_circle { prim(b) - prim(a) } else { y1 * (b - a) };
        let bot = if bot_is_circle { -(prim(b) - prim(a)) } else { y0 * (b - a) };
        area += top - bot;
    }
    area
}

/// Volume-averaged permittivity over a rectangle for a layered profile
/// centered at the origin.
fn average_permittivity(
    profile: &LayeredCylinderProfile,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
) -> f64 {
    let cell_area = (x1 - x0) * (y1 - y0);
    // Quick accept: cell entirely within one region.
    let corners = [(x0, y0), (x0, y1), (x1, y0), (x1, y1)];
    let r2 = |x: f64, y: f64| x * x + y * y;
    let r_min = if x0 <= 0.0 && x1 >= 0.0 && y0 <= 0.0 && y1 >= 0.0 {
        0.0
    } else {
        let cx = if x0 > 0.0 { x0 } else if x1 < 0.0 { x1 } else { 0.0 };
        let cy = if y0 > 0.0 { y0 } else if y1 < 0.0 { y1 } else { 0.0 };
        r2(cx, cy).sqrt()
    };
    let r_max = corners.iter().map(|&(x, y)| r2(x, y)).fold(0.0f64, f64::max).sqrt();
    let mut prev_r = 0.0;
    let mut uniform = None;
    for layer in &profile.layers {
        if r_min >= prev_r && r_max <= layer.outer_radius_nm {
            uniform = Some(layer.material.permittivity());
        }
        prev_r = layer.outer_radius_nm;
    }
    if r_min >= profile.outer_radius_nm() {
        uniform = Some(profile.background.permittivity());
    }
    if let Some(eps) = uniform {
        return eps;
    }

    // Interface cell: accumulate annulus areas from exact disk intersections.
    let mut area_prev = 0.0;
    let mut eps_cell = 0.0;
    for layer in &profile.layers {
        let a = disk_rect_area(layer.outer_radius_nm, x0, x1, y0, y1);
        eps_cell += (a - area_prev) * layer.material.permittivity();
        area_prev = a;
    }
    eps_cell += (cell_area - area_prev) * profile.background.permittivity();
    eps_cell / cell_area
}

/// Per-component E-update coefficient planes: dt / (eps dx) at each
/// component's in-plane Yee position, broadcast along z.
pub struct CoefficientPlanes<T> {
    pub nx: usize,
    pub ny: usize,
    pub cex: Vec<T>,
    pub cey: Vec<T>,
    pub cez: Vec<T>,
}

impl<T: Field> CoefficientPlanes<T> {
    pub fn uniform(nx: usize, ny: usize, eps: f64, dt: f64, dx: f64) -> Self {
        let c = T::from_f64(dt / (eps * dx));
        Self {
            nx,
            ny,
            cex: vec![c; nx * ny],
            cey: vec![c; nx * ny],
            cez: vec![c; nx * ny],
        }
    }

    /// Rasterize a profile whose axis runs along z through the domain center.
    pub fn rasterize(
        profile: &LayeredCylinderProfile,
        nx: usize,
        ny: usize,
        dx: f64,
        dt: f64,
        pml_cells: usize,
    ) -> Result<Self, FdtdError> {
        let half_x = nx as f64 * dx / 2.0;
        let half_y = ny as f64 * dx / 2.0;
        let interior = half_x.min(half_y) - pml_cells as f64 * dx;
        if profile.outer_radius_nm() >= interior {
            return Err(FdtdError::GeometryOverflow(format!(
                "profile radius {} nm reaches the PML (interior half-width {} nm)",
                profile.outer_radius_nm(),
                interior
            )));
        }
        let mut planes = Self::uniform(nx, ny, 1.0, dt, dx);
        // Component offsets in cell units: Ex at (i+1/2, j), Ey at (i, j+1/2),
        // Ez at (i, j); the averaging cell is centered on the component.
        let fill = |out: &mut Vec<T>, off_x: f64, off_y: f64| {
            for j in 0..ny {
                for i in 0..nx {
                    let cx = (i as f64 + off_x) * dx - half_x;
                    let cy = (j as f64 + off_y) * dx - half_y;
                    let eps = average_permittivity(
                        profile,
                        cx - 0.5 * dx,
                        cx + 0.5 * dx,
                        cy - 0.5 * dx,
                        cy + 0.5 * dx,
                    );
                    out[j * nx + i] = T::from_f64(dt / (eps * dx));
                }
            }
        };
        let (mut cex, mut cey, mut cez) = (planes.cex, planes.cey, planes.cez);
        fill(&mut cex, 0.5, 0.0);
        fill(&mut cey, 0.0, 0.5);
        fill(&mut cez, 0.0, 0.0);
        planes.cex = cex;
        planes.cey = cey;
        planes.cez = cez;
        Ok(planes)
    }

    /// Permittivity seen by a given component at plane position (i, j).
    pub fn eps_at(&self, comp: usize, i: usize, j: usize, dt: f64, dx: f64) -> f64 {
        let c = match comp {
            0 => self.cex[j * self.nx + i],
            1 => self.cey[j * self.nx + i],
            _ => self.cez[j * self.nx + i],
        };
        dt / (c.to_f64() * dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Material;

    #[test]
    fn disk_area_limits() {
        // Disk fully inside the rectangle.
        let a = disk_rect_area(1.0, -2.0, 2.0, -2.0, 2.0);
        assert!((a - std::f64::consts::PI).abs() < 1e-12);
        // Rectangle fully inside the disk.
        let a = disk_rect_area(10.0, -1.0, 1.0, -1.0, 1.0);
        assert!((a - 4.0).abs() < 1e-12);
        // Disjoint.
        assert_eq!(disk_rect_area(1.0, 2.0, 3.0, 0.0, 1.0), 0.0);
        // Half plane through the center.
        let a = disk_rect_area(1.0, 0.0, 5.0, -5.0, 5.0);
        assert!((a - std::f64::consts::PI / 2.0).abs() < 1e-12);
        // Quarter disk.
        let a = disk_rect_area(2.0, 0.0, 3.0, 0.0, 3.0);
        assert!((a - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn disk_area_matches_fine_riemann_sampling() {
        // Randomized rectangles against a dense midpoint-rule oracle.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..40 {
            let radius = 0.3 + 2.0 * rnd();
            let x0 = -2.5 + 4.0 * rnd();
            let y0 = -2.5 + 4.0 * rnd();
            let (w, h) = (0.05 + rnd(), 0.05 + rnd());
            let exact = disk_rect_area(radius, x0, x0 + w, y0, y0 + h);
            let n = 400;
            let mut hit = 0usize;
            for a in 0..n {
                for b in 0..n {
                    let x = x0 + (a as f64 + 0.5) * w / n as f64;
                    let y = y0 + (b as f64 + 0.5) * h / n as f64;
                    if x * x + y * y <= radius * radius {
                        hit += 1;
                    }
                }
            }
            let approx = hit as f64 / (n * n) as f64 * w * h;
            assert!(
                (exact - approx).abs() < 3e-3 * (w * h),
                "R={radius} rect=({x0},{y0},{w},{h}): exact {exact} vs sampled {approx}"
            );
        }
    }

    #[test]
    fn uniform_profile_rasterizes_to_bulk() {
        let vac = LayeredCylinderProfile::onf(1.0, Material::vacuum()).unwrap();
        // A 1 nm fiber in a 400 nm domain: everything except the center is
        // exactly vacuum.
        let planes = CoefficientPlanes::<f64>::rasterize(&vac, 40, 40, 10.0, 5.0, 8).unwrap();
        let eps = planes.eps_at(0, 3, 3, 5.0, 10.0);
        assert_eq!(eps, 1.0);
    }

    #[test]
    fn deep_interior_is_bulk_silica() {
        let onf = LayeredCylinderProfile::onf(280.0, Material::vacuum()).unwrap();
        let planes = CoefficientPlanes::<f64>::rasterize(&onf, 100, 100, 10.0, 5.0, 8).unwrap();
        // Ez at the exact center (i = nx/2 maps to x = 0).
        let eps = planes.eps_at(2, 50, 50, 5.0, 10.0);
        let n_s = Material::silica().index;
        assert!((eps - n_s * n_s).abs() < 1e-12);
    }

    #[test]
    fn interface_cell_matches_subsample_oracle() {
        // 10^3-subsample oracle for the volume fraction of a cell straddling
        // the silica/water interface of NCF(100, 360).
        let ncf = LayeredCylinderProfile::ncf(100.0, 360.0, Material::water(), Material::vacuum())
            .unwrap();
        let dx = 10.0;
        for (cx, cy) in [(45.0, 15.0), (175.0, 35.0), (125.0, 125.0), (50.0, 0.0)] {
            let exact = average_permittivity(
                &ncf,
                cx - 0.5 * dx,
                cx + 0.5 * dx,
                cy - 0.5 * dx,
                cy + 0.5 * dx,
            );
            let n = 1000usize; // 10^3 samples per cell axis pair
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let x = cx - 0.5 * dx + (a as f64 + 0.5) * dx / n as f64;
                    let y = cy - 0.5 * dx + (b as f64 + 0.5) * dx / n as f64;
                    acc += ncf.permittivity_at((x * x + y * y).sqrt());
                }
            }
            let oracle = acc / (n * n) as f64;
            assert!(
                (exact - oracle).abs() < 1e-3,
                "cell at ({cx},{cy}): exact {exact} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn overflow_is_rejected() {
        let onf = LayeredCylinderProfile::onf(900.0, Material::vacuum()).unwrap();
        assert!(CoefficientPlanes::<f32>::rasterize(&onf, 100, 100, 10.0, 5.0, 10).is_err());
    }
}
