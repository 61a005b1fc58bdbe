//! CPML coefficient profiles: polynomial-graded sigma and kappa with a
//! linearly tapered complex-frequency-shift alpha.

/// Per-axis CPML lookup tables at integer and half-integer positions.
/// `inv_kappa_*` cover the whole axis (1.0 outside the PML slabs); `b`/`c`
/// are recursive-convolution coefficients indexed by position.
pub struct AxisPml {
    pub inv_kappa_int: Vec<f64>,
    pub inv_kappa_half: Vec<f64>,
    pub b_int: Vec<f64>,
    pub c_int: Vec<f64>,
    pub b_half: Vec<f64>,
    pub c_half: Vec<f64>,
}

pub const PML_GRADING_ORDER: f64 = 3.0;
pub const PML_KAPPA_MAX: f64 = 5.0;

/// Graded coefficients at normalized depth rho in (0, 1], rho = 1 at the
/// outer wall.
fn graded(rho: f64, dx: f64, dt: f64) -> (f64, f64, f64) {
    let p = PML_GRADING_ORDER;
    let sigma_max = 0.8 * (p + 1.0) / dx;
    let alpha_max = 0.03 / dx;
    let g = rho.powf(p);
    let sigma = sigma_max * g;
    let kappa = 1.0 + (PML_KAPPA_MAX - 1.0) * g;
    let alpha = alpha_max * (1.0 - rho);
    let b = (-(sigma / kappa + alpha) * dt).exp();
    let denom = kappa * (sigma + kappa * alpha);
    let c = if denom > 0.0 { sigma * (b - 1.0) / denom } else { 0.0 };
    (1.0 / kappa, b, c)
}

impl AxisPml {
    /// Build tables for an axis with n cells and `npml`-cell slabs at both
    /// ends. Positions inside the slabs get graded coefficients keyed to
    /// their distance from the interior.
    pub fn new(n: usize, npml: usize, dx: f64, dt: f64) -> Self {
        let mut out = Self {
            inv_kappa_int: vec![1.0; n],
            inv_kappa_half: vec![1.0; n],
            b_int: vec![1.0; n],
            c_int: vec![0.0; n],
            b_half: vec![1.0; n],
            c_half: vec![0.0; n],
        };
        let l = npml as f64;
        for idx in 0..n {
            // Integer position idx, half position idx + 1/2.
            for (pos, inv_k, b, c) in [
                (
                    idx as f64,
                    &mut out.inv_kappa_int,
                    &mut out.b_int,
                    &mut out.c_int,
                ),
                (
                    idx as f64 + 0.5,
                    &mut out.inv_kappa_half,
                    &mut out.b_half,
                    &mut out.c_half,
                ),
            ] {
                let depth_lo = l - pos;
                let depth_hi = pos - (n as f64 - 1.0 - l);
                let depth = depth_lo.max(depth_hi);
                if depth > 0.0 {
                    let rho = (depth / l).min(1.0);
                    let (ik, bb, cc) = graded(rho, dx, dt);
                    inv_k[idx] = ik;
                    b[idx] = bb;
                    c[idx] = cc;
                }
            }
        }
        out
    }
}
