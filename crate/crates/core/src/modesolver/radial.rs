//! Radial machinery behind the mode solver: per-region Bessel bases, the
//! 4x4 tangential matching chain, the boundary determinant, root refinement,
//! field evaluation and power normalization.

use super::{AzimuthalMember, Direction, GuidedMode, ModeError, ModeFamily, ModeId, ModeSpectrum};
use crate::bessel::{
    bessel_i, bessel_i_deriv, bessel_j, bessel_j_deriv, bessel_k, bessel_k_deriv, bessel_y,
    bessel_y_deriv,
};
use crate::scene::LayeredCylinderProfile;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Complex (e_r, e_phi, e_z, h_r, h_phi, h_z) at a point.
pub type FieldVec6 = [Complex64; 6];

/// Real cylindrical component profile at fixed r: the actual complex fields
/// of the +m member are (i er, ephi, ez, hr, i hphi, i hz) * exp(i m phi).
#[derive(Debug, Clone, Copy, Default)]
pub struct RadialProfile {
    pub er: f64,
    pub ephi: f64,
    pub ez: f64,
    pub hr: f64,
    pub hphi: f64,
    pub hz: f64,
}

/// One uniform annular region with its solved expansion coefficients
/// [Ez-z1, Ez-z2, Hz-z1, Hz-z2] (z1 regular: J or I, z2 irregular: Y or K).
#[derive(Debug, Clone)]
pub(crate) struct Region {
    pub r_lo: f64,
    /// Infinity for the background.
    pub r_hi: f64,
    pub n: f64,
    pub kappa_sq: f64,
    pub q: f64,
    pub oscillatory: bool,
    pub coef: [f64; 4],
}

fn region_params(
    profile: &LayeredCylinderProfile,
    k: f64,
    beta: f64,
) -> Vec<Region> {
    let mut regions = Vec::with_capacity(profile.layers.len() + 1);
    let mut r_lo = 0.0;
    for layer in &profile.layers {
        regions.push(make_region(r_lo, layer.outer_radius_nm, layer.material.index, k, beta));
        r_lo = layer.outer_radius_nm;
    }
    regions.push(make_region(r_lo, f64::INFINITY, profile.background.index, k, beta));
    regions
}

fn make_region(r_lo: f64, r_hi: f64, n: f64, k: f64, beta: f64) -> Region {
    let kappa_sq = k * k * n * n - beta * beta;
    Region {
        r_lo,
        r_hi,
        n,
        kappa_sq,
        q: kappa_sq.abs().sqrt(),
        oscillatory: kappa_sq > 0.0,
        coef: [0.0; 4],
    }
}

/// Basis values (z1, z2, dz1/dr, dz2/dr) at radius r.
fn basis(m: usize, oscillatory: bool, q: f64, r: f64) -> [f64; 4] {
    let x = q * r;
    if oscillatory {
        [
            bessel_j(m, x),
            bessel_y(m, x),
            q * bessel_j_deriv(m, x),
            q * bessel_y_deriv(m, x),
        ]
    } else {
        [
            bessel_i(m, x),
            bessel_k(m, x),
            q * bessel_i_deriv(m, x),
            q * bessel_k_deriv(m, x),
        ]
    }
}

/// 4x4 matrix mapping region coefficients to the tangential field vector
/// (Ez, Hz, Ephi, Hphi) at radius r; `mat[row][col]`.
fn tangential_matrix(reg: &Region, m: usize, beta: f64, k: f64, r: f64) -> [[f64; 4]; 4] {
    let b = basis(m, reg.oscillatory, reg.q, r);
    let ks = reg.kappa_sq;
    let mf = m as f64;
    let n2 = reg.n * reg.n;
    let mut mat = [[0.0; 4]; 4];
    for j in 0..2 {
        let (z, dz) = (b[j], b[j + 2]);
        // Ez column j
        mat[0][j] = z;
        mat[2][j] = -mf * beta * z / (r * ks);
        mat[3][j] = k * n2 * dz / ks;
        // Hz column j+2
        mat[1][j + 2] = z;
        mat[2][j + 2] = k * dz / ks;
        mat[3][j + 2] = -mf * beta * z / (r * ks);
    }
    mat
}

fn mat4_mul_42(a: &[[f64; 4]; 4], b: &[[f64; 2]; 4]) -> [[f64; 2]; 4] {
    let mut out = [[0.0; 2]; 4];
    for r in 0..4 {
        for c in 0..2 {
            out[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

fn invert4(a: &[[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut m = *a;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let mut piv = col;
        for r in col + 1..4 {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col];
        for j in 0..4 {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for j in 0..4 {
                        m[r][j] -= f * m[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    // Expansion by 2x2 complements (Laplace along the first two rows).
    let s0 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let s1 = m[0][0] * m[1][2] - m[0][2] * m[1][0];
    let s2 = m[0][0] * m[1][3] - m[0][3] * m[1][0];
    let s3 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
    let s4 = m[0][1] * m[1][3] - m[0][3] * m[1][1];
    let s5 = m[0][2] * m[1][3] - m[0][3] * m[1][2];
    let c5 = m[2][2] * m[3][3] - m[2][3] * m[3][2];
    let c4 = m[2][1] * m[3][3] - m[2][3] * m[3][1];
    let c3 = m[2][1] * m[3][2] - m[2][2] * m[3][1];
    let c2 = m[2][0] * m[3][3] - m[2][3] * m[3][0];
    let c1 = m[2][0] * m[3][2] - m[2][2] * m[3][0];
    let c0 = m[2][0] * m[3][1] - m[2][1] * m[3][0];
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

/// Column- then row-equilibrated boundary matrix; returns (matrix, column
/// scales) so null vectors can be mapped back to the original coefficients.
fn equilibrate(mut m: [[f64; 4]; 4]) -> ([[f64; 4]; 4], [f64; 4]) {
    let mut col_scale = [1.0; 4];
    for c in 0..4 {
        let mut s: f64 = 0.0;
        for row in &m {
            s = s.max(row[c].abs());
        }
        if s > 0.0 {
            col_scale[c] = s;
            for row in &mut m {
                row[c] /= s;
            }
        }
    }
    for row in &mut m {
        let s = row.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if s > 0.0 {
            for v in row.iter_mut() {
                *v /= s;
            }
        }
    }
    (m, col_scale)
}

/// Boundary matrix whose determinant vanishes on guided modes, plus the
/// per-interface coefficient chain needed to reconstruct interior fields.
/// Columns: [inner Ez amplitude, inner Hz amplitude, -background Ez-K,
/// -background Hz-K].
fn boundary_matrix(
    regions: &[Region],
    m: usize,
    beta: f64,
    k: f64,
) -> Option<([[f64; 4]; 4], Vec<[[f64; 2]; 4]>)> {
    let n_regions = regions.len();
    // Chain: maps the two inner amplitudes to the current region's coef.
    let mut chain = vec![[[0.0; 2]; 4]; n_regions];
    chain[0] = [[1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
    for j in 0..n_regions - 2 {
        let r_if = regions[j].r_hi;
        let m_here = tangential_matrix(&regions[j], m, beta, k, r_if);
        let m_next = tangential_matrix(&regions[j + 1], m, beta, k, r_if);
        let t = mat4_mul_42(&m_here, &chain[j]);
        let inv = invert4(&m_next)?;
        chain[j + 1] = mat4_mul_42(&inv, &t);
    }
    let last_layer = n_regions - 2;
    let r_if = regions[last_layer].r_hi;
    let m_here = tangential_matrix(&regions[last_layer], m, beta, k, r_if);
    let t = mat4_mul_42(&m_here, &chain[last_layer]);
    let m_bg = tangential_matrix(&regions[n_regions - 1], m, beta, k, r_if);
    let mut bm = [[0.0; 4]; 4];
    for r in 0..4 {
        bm[r][0] = t[r][0];
        bm[r][1] = t[r][1];
        bm[r][2] = -m_bg[r][1]; // K column of Ez
        bm[r][3] = -m_bg[r][3]; // K column of Hz
    }
    Some((bm, chain))
}

/// Which determinant to scan. For m = 0 the boundary system decouples into
/// independent TM (Ez-chain) and TE (Hz-chain) 2x2 blocks; scanning them
/// separately avoids missing the near-cutoff TE01/TM01 pair whose two roots
/// would cancel each other's sign change in the full 4x4 product.
#[derive(Debug, Clone, Copy, PartialEq)]
enum DetKind {
    Full,
    BlockTe,
    BlockTm,
}

fn boundary_det(
    profile: &LayeredCylinderProfile,
    k: f64,
    m: usize,
    n_eff: f64,
    kind: DetKind,
) -> Option<f64> {
    let beta = k * n_eff;
    let regions = region_params(profile, k, beta);
    let (bm, _) = boundary_matrix(&regions, m, beta, k)?;
    match kind {
        DetKind::Full => {
            let (eq, _) = equilibrate(bm);
            Some(det4(&eq))
        }
        DetKind::BlockTe => Some(det2_normalized(&bm, [1, 2], [1, 3])),
        DetKind::BlockTm => Some(det2_normalized(&bm, [0, 3], [0, 2])),
    }
}

fn det2_normalized(bm: &[[f64; 4]; 4], rows: [usize; 2], cols: [usize; 2]) -> f64 {
    let mut b = [[0.0f64; 2]; 2];
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            b[i][j] = bm[r][c];
        }
    }
    for row in &mut b {
        let s = row[0].abs().max(row[1].abs());
        if s > 0.0 {
            row[0] /= s;
            row[1] /= s;
        }
    }
    b[0][0] * b[1][1] - b[0][1] * b[1][0]
}

/// Null vector of a (near-)singular 4x4 by full-pivot Gaussian elimination.
fn null_vector(a: &[[f64; 4]; 4]) -> [f64; 4] {
    let mut m = *a;
    let mut col_perm = [0usize, 1, 2, 3];
    let mut rank = 0;
    for step in 0..3 {
        // Full pivot over the remaining block.
        let (mut pr, mut pc, mut best) = (step, step, 0.0);
        for r in step..4 {
            for c in step..4 {
                if m[r][c].abs() > best {
                    best = m[r][c].abs();
                    pr = r;
                    pc = c;
                }
            }
        }
        if best < 1e-14 {
            break;
        }
        m.swap(step, pr);
        for row in &mut m {
            row.swap(step, pc);
        }
        col_perm.swap(step, pc);
        for r in step + 1..4 {
            let f = m[r][step] / m[step][step];
            for c in step..4 {
                m[r][c] -= f * m[step][c];
            }
        }
        rank += 1;
    }
    // Free variable = last permuted column; back-substitute.
    let mut v = [0.0; 4];
    v[3] = 1.0;
    for r in (0..rank).rev() {
        let mut s = 0.0;
        for c in r + 1..4 {
            s += m[r][c] * v[c];
        }
        v[r] = -s / m[r][r];
    }
    let mut out = [0.0; 4];
    for (i, &p) in col_perm.iter().enumerate() {
        out[p] = v[i];
    }
    out
}

struct ScanRoot {
    n_eff: f64,
    residual: f64,
    family_hint: Option<ModeFamily>,
}

/// Dense scan over n_eff plus bisection. Segments are split at every layer
/// index inside the bracket so the basis kind never changes mid-segment, and
/// each segment start carries a geometric point ladder: near-cutoff roots
/// crowd against the lower boundary faster than any uniform grid resolves.
fn scan_roots(
    profile: &LayeredCylinderProfile,
    k: f64,
    m: usize,
    warnings: &mut Vec<String>,
) -> Vec<ScanRoot> {
    let lo = profile.background_index() * (1.0 + 1e-9) + 1e-12;
    let hi = profile.max_index() * (1.0 - 1e-9);
    if lo >= hi {
        return Vec::new();
    }
    let mut cuts: Vec<f64> = vec![lo];
    for layer in &profile.layers {
        let n = layer.material.index;
        if n > lo + 1e-9 && n < hi - 1e-9 {
            cuts.push(n);
        }
    }
    cuts.push(hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let kinds: &[(DetKind, Option<ModeFamily>)] = if m == 0 {
        &[(DetKind::BlockTe, Some(ModeFamily::Te)), (DetKind::BlockTm, Some(ModeFamily::Tm))]
    } else {
        &[(DetKind::Full, None)]
    };

    const TOTAL_POINTS: usize = 2000;
    let span = hi - lo;
    let mut roots: Vec<ScanRoot> = Vec::new();
    for &(kind, family_hint) in kinds {
        for w in cuts.windows(2) {
            let (a, b) = (w[0] + 1e-9, w[1] - 1e-9);
            if b <= a {
                continue;
            }
            let n_pts = ((b - a) / span * TOTAL_POINTS as f64).ceil().max(64.0) as usize;
            let mut points: Vec<f64> = Vec::with_capacity(n_pts + 24);
            let first_step = (b - a) / n_pts as f64;
            let mut step = first_step / 3.0;
            while step > 1e-11 {
                points.push(a + step);
                step /= 3.0;
            }
            points.push(a);
            for i in 1..=n_pts {
                points.push(a + (b - a) * i as f64 / n_pts as f64);
            }
            points.sort_by(|x, y| x.partial_cmp(y).unwrap());

            let mut prev: Option<(f64, f64)> = None;
            for &x in &points {
                let f = match boundary_det(profile, k, m, x, kind) {
                    Some(f) => f,
                    None => continue,
                };
                if let Some((px, pf)) = prev {
                    if pf == 0.0 || pf * f < 0.0 {
                        if let Some(root) = bisect(profile, k, m, kind, family_hint, px, x, pf) {
                            roots.push(root);
                        }
                    }
                }
                prev = Some((x, f));
            }
        }
    }
    roots.sort_by(|a, b| a.n_eff.partial_cmp(&b.n_eff).unwrap());
    for w in roots.windows(2) {
        if (w[1].n_eff - w[0].n_eff).abs() < 1e-9 {
            warnings.push(format!(
                "near-degenerate roots at m={m}: n_eff {} and {}",
                w[0].n_eff, w[1].n_eff
            ));
        }
    }
    roots
}

fn bisect(
    profile: &LayeredCylinderProfile,
    k: f64,
    m: usize,
    kind: DetKind,
    family_hint: Option<ModeFamily>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
) -> Option<ScanRoot> {
    for _ in 0..90 {
        let mid = 0.5 * (a + b);
        if (b - a) < 1e-13 {
            break;
        }
        let fm = boundary_det(profile, k, m, mid, kind)?;
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    let n_eff = 0.5 * (a + b);
    let residual = boundary_det(profile, k, m, n_eff, DetKind::Full)?.abs();
    Some(ScanRoot { n_eff, residual, family_hint })
}

/// Tangential field mismatch across interfaces for a reconstructed mode,
/// relative to the field scale; used as a self-check.
fn continuity_error(mode_regions: &[Region], m: usize, beta: f64, k: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..mode_regions.len() - 1 {
        let r_if = mode_regions[j].r_hi;
        let a = tangential_at(&mode_regions[j], m, beta, k, r_if);
        let b = tangential_at(&mode_regions[j + 1], m, beta, k, r_if);
        let scale = a
            .iter()
            .chain(b.iter())
            .fold(0.0f64, |acc, &v| acc.max(v.abs()))
            .max(1e-300);
        for i in 0..4 {
            worst = worst.max((a[i] - b[i]).abs() / scale);
        }
    }
    worst
}

fn tangential_at(reg: &Region, m: usize, beta: f64, k: f64, r: f64) -> [f64; 4] {
    let mat = tangential_matrix(reg, m, beta, k, r);
    let mut out = [0.0; 4];
    for row in 0..4 {
        out[row] = (0..4).map(|c| mat[row][c] * reg.coef[c]).sum();
    }
    out
}

pub(crate) fn solve_layered(
    profile: &LayeredCylinderProfile,
    wavelength_nm: f64,
    m_max: usize,
) -> Result<ModeSpectrum, ModeError> {
    if !(wavelength_nm > 0.0) {
        return Err(ModeError::InvalidArgument(format!(
            "wavelength must be positive, got {wavelength_nm}"
        )));
    }
    let k = 2.0 * PI / wavelength_nm;
    let mut warnings = Vec::new();
    let mut modes: Vec<GuidedMode> = Vec::new();
    for m in 0..=m_max {
        for root in scan_roots(profile, k, m, &mut warnings) {
            match build_mode(profile, wavelength_nm, k, m, &root) {
                Ok(mode) => modes.push(mode),
                Err(e) => warnings.push(format!("m={m} n_eff={}: {e}", root.n_eff)),
            }
        }
    }
    modes.sort_by(|a, b| b.n_eff.partial_cmp(&a.n_eff).unwrap());
    assign_ids(&mut modes);
    Ok(ModeSpectrum { profile: clone_profile(profile), wavelength_nm, modes, warnings })
}

fn clone_profile(p: &LayeredCylinderProfile) -> LayeredCylinderProfile {
    p.clone()
}

fn assign_ids(modes: &mut [GuidedMode]) {
    use std::collections::HashMap;
    let mut counts: HashMap<(ModeFamily, usize), usize> = HashMap::new();
    for mode in modes.iter_mut() {
        let c = counts.entry((mode.id.family, mode.m)).or_insert(0);
        *c += 1;
        mode.id.radial_order = *c;
    }
}

fn build_mode(
    profile: &LayeredCylinderProfile,
    wavelength_nm: f64,
    k: f64,
    m: usize,
    root: &ScanRoot,
) -> Result<GuidedMode, ModeError> {
    let beta = k * root.n_eff;
    let mut regions = region_params(profile, k, beta);
    let (bm, chain) = boundary_matrix(&regions, m, beta, k)
        .ok_or_else(|| ModeError::SolveFailure("singular interface matrix".into()))?;
    let (eq, col_scale) = equilibrate(bm);
    let v_eq = null_vector(&eq);
    let mut v = [0.0; 4];
    for i in 0..4 {
        v[i] = v_eq[i] / col_scale[i];
    }
    let inner = [v[0], v[1]];
    let n_regions = regions.len();
    for (j, reg) in regions.iter_mut().enumerate().take(n_regions - 1) {
        let c = &chain[j];
        for slot in 0..4 {
            reg.coef[slot] = c[slot][0] * inner[0] + c[slot][1] * inner[1];
        }
    }
    // Background: decaying K components only; note boundary columns carried
    // a minus sign.
    regions[n_regions - 1].coef = [0.0, v[2], 0.0, v[3]];

    let cont = continuity_error(&regions, m, beta, k);
    if cont > 1e-7 {
        return Err(ModeError::SolveFailure(format!(
            "tangential continuity error {cont:.2e} exceeds tolerance"
        )));
    }

    let mut mode = GuidedMode {
        id: ModeId { family: ModeFamily::He, m, radial_order: 0 },
        wavelength_nm,
        beta,
        n_eff: root.n_eff,
        dispersion_residual: root.residual,
        carried_power: 0.0,
        regions,
        m,
    };
    let quad = power_quadrature(&mode);
    if !(quad.power > 0.0) || !quad.power.is_finite() {
        return Err(ModeError::SolveFailure(format!(
            "non-positive carried power {}",
            quad.power
        )));
    }
    let scale = 1.0 / quad.power.sqrt();
    for reg in &mut mode.regions {
        for c in &mut reg.coef {
            *c *= scale;
        }
    }
    mode.carried_power = 1.0;
    mode.id.family = root.family_hint.unwrap_or_else(|| classify(&mode, quad));
    Ok(mode)
}

struct Quadrature {
    power: f64,
    /// Integrated intensity of the co-rotating (l = m-1) and cross-rotating
    /// (l = m+1) circular components of the transverse field.
    q_co: f64,
    q_cross: f64,
    ez_scale: f64,
    hz_scale: f64,
}

fn classify(mode: &GuidedMode, quad: Quadrature) -> ModeFamily {
    if mode.m == 0 {
        // The boundary system decouples for m = 0; the null vector keeps
        // only one of the two chains.
        if quad.ez_scale < 1e-6 * quad.hz_scale {
            return ModeFamily::Te;
        }
        if quad.hz_scale < 1e-6 * quad.ez_scale {
            return ModeFamily::Tm;
        }
        // Accidental TE/TM degeneracy; label by the dominant chain.
        return if quad.ez_scale >= quad.hz_scale { ModeFamily::Tm } else { ModeFamily::Te };
    }
    // LP correspondence: HE_{m,n} is dominated by the l = m-1 circular
    // component, EH_{m,n} by l = m+1.
    if quad.q_co >= quad.q_cross {
        ModeFamily::He
    } else {
        ModeFamily::Eh
    }
}

/// Radial quadrature of carried power and classification integrals.
/// Simpson rule per region, background truncated once the evanescent tail
/// is negligible.
fn power_quadrature(mode: &GuidedMode) -> Quadrature {
    let mut power = 0.0;
    let mut q_co = 0.0;
    let mut q_cross = 0.0;
    let mut ez_scale: f64 = 0.0;
    let mut hz_scale: f64 = 0.0;
    for reg in &mode.regions {
        let r_hi = if reg.r_hi.is_finite() {
            reg.r_hi
        } else {
            reg.r_lo + 45.0 / reg.q.max(1e-6)
        };
        let width = r_hi - reg.r_lo;
        let cycles = reg.q * width / (2.0 * PI);
        let n = ((cycles * 24.0).ceil() as usize).clamp(256, 8192) * 2;
        let h = width / n as f64;
        let mut acc = [0.0f64; 3];
        for i in 0..=n {
            let r = reg.r_lo + i as f64 * h;
            let p = profile_in_region(mode, reg, r.max(1e-9));
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let sz = (p.er * p.hphi - p.ephi * p.hr) * r;
            acc[0] += w * sz;
            acc[1] += w * (p.er - p.ephi) * (p.er - p.ephi) * r;
            acc[2] += w * (p.er + p.ephi) * (p.er + p.ephi) * r;
            ez_scale = ez_scale.max(p.ez.abs());
            hz_scale = hz_scale.max(p.hz.abs());
        }
        power += acc[0] * h / 3.0;
        q_co += acc[1] * h / 3.0;
        q_cross += acc[2] * h / 3.0;
    }
    Quadrature { power: PI * power, q_co, q_cross, ez_scale, hz_scale }
}

fn find_region<'m>(mode: &'m GuidedMode, r: f64) -> &'m Region {
    for reg in &mode.regions {
        if r <= reg.r_hi {
            return reg;
        }
    }
    mode.regions.last().expect("background region")
}

fn profile_in_region(mode: &GuidedMode, reg: &Region, r: f64) -> RadialProfile {
    let m = mode.m as f64;
    let beta = mode.beta;
    let k = 2.0 * PI / mode.wavelength_nm;
    let b = basis(mode.m, reg.oscillatory, reg.q, r);
    let ez = reg.coef[0] * b[0] + reg.coef[1] * b[1];
    let dez = reg.coef[0] * b[2] + reg.coef[1] * b[3];
    let hz = reg.coef[2] * b[0] + reg.coef[3] * b[1];
    let dhz = reg.coef[2] * b[2] + reg.coef[3] * b[3];
    let ks = reg.kappa_sq;
    let n2 = reg.n * reg.n;
    RadialProfile {
        er: (beta * dez - m * k * hz / r) / ks,
        ephi: (-m * beta * ez / r + k * dhz) / ks,
        ez,
        hr: (m * k * n2 * ez / r - beta * dhz) / ks,
        hphi: (k * n2 * dez - m * beta * hz / r) / ks,
        hz,
    }
}

pub(crate) fn radial_profile(mode: &GuidedMode, r_nm: f64) -> RadialProfile {
    let r = r_nm.max(1e-9);
    // Exactly on an interface the normal components jump; return the
    // two-sided mean (the canonical value of a field at a jump), which is
    // also what a volume-smeared discrete dipole straddling the interface
    // couples to at leading order.
    for reg in &mode.regions {
        if reg.r_hi.is_finite() && (r - reg.r_hi).abs() < 1e-8 {
            // Probe offsets proportional to the radius keep the evaluation
            // exactly scale invariant.
            let d = reg.r_hi * 1e-7;
            let a = profile_in_region(mode, find_region(mode, reg.r_hi - d), reg.r_hi - d);
            let b = profile_in_region(mode, find_region(mode, reg.r_hi + d), reg.r_hi + d);
            return RadialProfile {
                er: 0.5 * (a.er + b.er),
                ephi: 0.5 * (a.ephi + b.ephi),
                ez: 0.5 * (a.ez + b.ez),
                hr: 0.5 * (a.hr + b.hr),
                hphi: 0.5 * (a.hphi + b.hphi),
                hz: 0.5 * (a.hz + b.hz),
            };
        }
    }
    profile_in_region(mode, find_region(mode, r), r)
}

/// Assemble the complex 6-vector for a member/direction at (r, phi).
///
/// Forward +m member: (i er, ephi, ez, hr, i hphi, i hz) e^{i m phi}.
/// The -m member flips (ephi, hr, hz) and conjugates the azimuthal phase;
/// the backward mode flips (ez, hr, hphi).
pub(crate) fn evaluate_field(
    mode: &GuidedMode,
    r_nm: f64,
    phi: f64,
    member: AzimuthalMember,
    direction: Direction,
) -> FieldVec6 {
    let p = radial_profile(mode, r_nm);
    let m_sign = match member {
        AzimuthalMember::Plus => 1.0,
        AzimuthalMember::Minus => -1.0,
    };
    let (er, ephi, mut ez) = (p.er, m_sign * p.ephi, p.ez);
    let (mut hr, mut hphi, hz) = (m_sign * p.hr, p.hphi, m_sign * p.hz);
    if direction == Direction::Backward {
        ez = -ez;
        hr = -hr;
        hphi = -hphi;
    }
    let phase = Complex64::from_polar(1.0, m_sign * mode.m as f64 * phi);
    let i = Complex64::new(0.0, 1.0);
    [
        i * er * phase,
        Complex64::from(ephi) * phase,
        Complex64::from(ez) * phase,
        Complex64::from(hr) * phase,
        i * hphi * phase,
        i * hz * phase,
    ]
}

/// Cartesian tangential components (e_x, e_y, h_x, h_y) at a point in the
/// cross-section; used by the monitor-plane mode projection.
pub fn tangential_cartesian(
    mode: &GuidedMode,
    x_nm: f64,
    y_nm: f64,
    member: AzimuthalMember,
    direction: Direction,
) -> [Complex64; 4] {
    let r = (x_nm * x_nm + y_nm * y_nm).sqrt();
    let phi = y_nm.atan2(x_nm);
    let f = evaluate_field(mode, r, phi, member, direction);
    let (s, c) = phi.sin_cos();
    [
        f[0] * c - f[1] * s,
        f[0] * s + f[1] * c,
        f[3] * c - f[4] * s,
        f[3] * s + f[4] * c,
    ]
}

/// Directed cross overlap integral between two modes of the same profile:
/// Integral (e_a x h_b* + e_b* x h_a) . z dA, which vanishes for distinct
/// guided modes and equals 4 * carried power for a == b.
///
/// Integration is split at every interface; the transverse profiles are
/// discontinuous there and a straddling quadrature panel would dominate the
/// error budget.
pub fn cross_overlap(a: &GuidedMode, b: &GuidedMode) -> f64 {
    if a.m != b.m {
        return 0.0; // azimuthal orthogonality is exact
    }
    let r2 = a.regions[a.regions.len() - 2].r_hi;
    let q_min = a.background_decay().min(b.background_decay()).max(1e-6);
    let mut edges: Vec<f64> = a.regions.iter().map(|r| r.r_lo).collect();
    edges.push(r2 + 45.0 / q_min);
    let mut acc = 0.0;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let n = 16_384;
        let h = (hi - lo) / n as f64;
        let mut seg = 0.0;
        for i in 0..=n {
            // Nudge the boundary nodes off the interfaces so each panel
            // samples its own region's side of the discontinuity.
            let r = if i == 0 {
                lo + 1e-6
            } else if i == n {
                hi - 1e-6
            } else {
                lo + i as f64 * h
            }
            .max(1e-9);
            let pa = radial_profile(a, r);
            let pb = radial_profile(b, r);
            let wt = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            seg += wt * (pa.er * pb.hphi - pa.ephi * pb.hr + pb.er * pa.hphi - pb.ephi * pa.hr) * r;
        }
        acc += seg * h / 3.0;
    }
    2.0 * PI * acc
}
