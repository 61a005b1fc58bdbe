//! Property and oracle tests for the FDTD core: Yee dispersion against the
//! closed form, CPML reflection against a longer reference domain, energy
//! conservation between nested boxes, the analytic free-space dipole
//! spectrum, linearity, mirror symmetry and thread-count determinism.

use nanochannel::fdtd::{
    yee_dispersion_omega, Boundary, CoefficientPlanes, DiscreteDipole, PowerBox, Simulation,
    SimulationSpec,
};
use nanochannel::scene::{DipoleSource, GaussianPulse, Orientation};
use std::f64::consts::PI;

fn vacuum_sim<T: nanochannel::fdtd::Field>(
    dims: [usize; 3],
    dx: f64,
    pml: usize,
    boundaries: [Boundary; 3],
) -> Simulation<T> {
    let dt = 0.5 * dx;
    let spec = SimulationSpec { dims, dx, dt, pml_cells: pml, boundaries };
    let coeff = CoefficientPlanes::uniform(dims[0], dims[1], 1.0, dt, dx);
    Simulation::new(spec, coeff).unwrap()
}

#[test]
fn zero_fields_stay_zero_without_source() {
    let mut sim = vacuum_sim::<f32>([24, 24, 24], 10.0, 8, [Boundary::Cpml; 3]);
    for n in 0..50 {
        sim.step(n);
    }
    assert_eq!(sim.max_field_magnitude(), 0.0);
}

#[test]
fn plane_wave_matches_yee_dispersion_closed_form() {
    // Periodic box, f64 fields: a single-k standing wave oscillates at the
    // discrete Yee frequency. cos(w dt) is recovered exactly (to rounding)
    // from the three-term recurrence of the modal amplitude.
    let (nx, ny, nz) = (64usize, 4usize, 4usize);
    let dx = 10.0;
    let mut sim = vacuum_sim::<f64>([nx, ny, nz], dx, 0, [Boundary::Periodic; 3]);
    let p = 5.0;
    let kx = 2.0 * PI * p / (nx as f64 * dx);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let idx = sim.index(i, j, k);
                sim.ey[idx] = (kx * i as f64 * dx).cos();
            }
        }
    }
    let project = |sim: &Simulation<f64>| -> f64 {
        let mut acc = 0.0;
        for i in 0..nx {
            acc += sim.ey[sim.index(i, 0, 0)] * (kx * i as f64 * dx).cos();
        }
        2.0 * acc / nx as f64
    };
    let steps = 400;
    let mut amps = Vec::with_capacity(steps + 1);
    amps.push(project(&sim));
    for n in 0..steps {
        sim.step(n);
        amps.push(project(&sim));
    }
    let peak = amps.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let mut estimates: Vec<f64> = Vec::new();
    for n in 1..steps {
        if amps[n].abs() > 0.5 * peak {
            estimates.push((amps[n + 1] + amps[n - 1]) / (2.0 * amps[n]));
        }
    }
    estimates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cos_wdt = estimates[estimates.len() / 2];
    let omega = cos_wdt.acos() / sim.spec.dt;
    let expected = yee_dispersion_omega([kx, 0.0, 0.0], dx, sim.spec.dt);
    let rel = ((omega - expected) / expected).abs();
    assert!(rel < 1e-10, "omega {omega} vs Yee closed form {expected}: rel {rel:.3e}");
    // And the discrete frequency differs measurably from the continuum one.
    assert!(((omega - kx) / kx).abs() > 1e-5);
}

fn dipole_source(wavelength: f64, fbw: f64, orientation: Orientation) -> DipoleSource {
    let mut s = DipoleSource::new(0.0, 0.0, 0.0, orientation, wavelength).unwrap();
    s.pulse = GaussianPulse::new(wavelength, fbw);
    s
}

/// Shared short vacuum dipole run used by several checks.
fn run_vacuum_dipole(
    dims: [usize; 3],
    dx: f64,
    amplitude: f64,
    freqs: Vec<f64>,
    halves: [usize; 2],
) -> (Vec<f64>, Vec<f64>, GaussianPulse, f64, usize) {
    let mut sim = vacuum_sim::<f32>(dims, dx, 10, [Boundary::Cpml; 3]);
    let mut src = dipole_source(620.0, 0.35, Orientation::Radial);
    src.pulse.amplitude = amplitude;
    let pulse = src.pulse.clone();
    let dipole = DiscreteDipole::place(&src, dims, dx, sim.spec.pml_cells).unwrap();
    let center = dipole.cell;
    sim.set_source(dipole, pulse.clone());
    sim.power_box = Some(PowerBox::new(center, halves[0], freqs.clone()));
    sim.extra_boxes.push(PowerBox::new(center, halves[1], freqs.clone()));
    let steps = ((pulse.t_off() + 700.0) / sim.spec.dt).ceil() as usize;
    sim.run(steps).unwrap();
    let p_small: Vec<f64> =
        (0..freqs.len()).map(|fi| sim.power_box.as_ref().unwrap().power(fi, dx)).collect();
    let p_big: Vec<f64> = (0..freqs.len()).map(|fi| sim.extra_boxes[0].power(fi, dx)).collect();
    (p_small, p_big, pulse, sim.spec.dt, steps)
}

#[test]
fn vacuum_dipole_nested_boxes_and_analytic_spectrum() {
    let omega0 = 2.0 * PI / 620.0;
    let freqs: Vec<f64> = [-1.0, -0.5, 0.0, 0.5, 1.0]
        .iter()
        .map(|s| omega0 * (1.0 + 0.1 * s))
        .collect();
    let (p_small, p_big, pulse, dt, steps) =
        run_vacuum_dipole([72, 72, 72], 10.0, 1.0, freqs.clone(), [5, 12]);

    for (fi, (&a, &b)) in p_small.iter().zip(p_big.iter()).enumerate() {
        assert!(a > 0.0 && b > 0.0, "radiated power must be positive");
        let rel = ((a - b) / b).abs();
        assert!(rel < 0.01, "nested boxes disagree at freq {fi}: {a} vs {b} ({rel:.4})");
    }

    // Analytic free-space dipole spectrum: P(w) = w^4 |p(w)|^2 / (12 pi)
    // with p(w) the DFT of the source envelope over the same run.
    for (fi, &omega) in freqs.iter().enumerate() {
        let mut spec = num_complex::Complex64::new(0.0, 0.0);
        for n in 0..steps {
            let t = (n as f64 + 0.5) * dt;
            spec += num_complex::Complex64::from_polar(pulse.value(t) * dt, omega * t);
        }
        let analytic = omega.powi(4) * spec.norm_sqr() / (12.0 * PI);
        let rel = ((p_big[fi] - analytic) / analytic).abs();
        assert!(
            rel < 0.02,
            "free-space spectrum at freq {fi}: measured {} vs analytic {} ({rel:.4})",
            p_big[fi],
            analytic
        );
    }
}

#[test]
fn doubling_amplitude_quadruples_power_exactly() {
    let omega0 = 2.0 * PI / 620.0;
    let (p1, q1, ..) = run_vacuum_dipole([48, 48, 48], 10.0, 1.0, vec![omega0], [5, 8]);
    let (p2, q2, ..) = run_vacuum_dipole([48, 48, 48], 10.0, 2.0, vec![omega0], [5, 8]);
    // Doubling is a power-of-two scale: every f32 operation scales exactly,
    // so measured powers quadruple to f64 rounding.
    let rel = (p2[0] / p1[0] - 4.0).abs();
    assert!(rel < 1e-10, "box power ratio {} (rel {rel:.3e})", p2[0] / p1[0]);
    let rel = (q2[0] / q1[0] - 4.0).abs();
    assert!(rel < 1e-10, "outer box power ratio {}", q2[0] / q1[0]);
}

#[test]
fn powers_are_bit_stable_across_thread_counts() {
    let omega0 = 2.0 * PI / 620.0;
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_vacuum_dipole([40, 40, 40], 10.0, 1.0, vec![omega0], [5, 8]))
    };
    let (a1, b1, ..) = run_with(1);
    let (a2, b2, ..) = run_with(2);
    assert_eq!(a1[0].to_bits(), a2[0].to_bits(), "{} vs {}", a1[0], a2[0]);
    assert_eq!(b1[0].to_bits(), b2[0].to_bits());
}

#[test]
fn cpml_reflection_below_1e6_energy() {
    // Field differencing at probe points against a domain twice as long in
    // z: the only difference is the reflection off the near +z wall.
    let dx = 10.0;
    let (nx, ny) = (32usize, 32usize);
    let run = |nz: usize, steps: usize| -> (Vec<f32>, Simulation<f32>) {
        let mut sim = vacuum_sim::<f32>([nx, ny, nz], dx, 10, [Boundary::Cpml; 3]);
        let mut src = dipole_source(620.0, 0.5, Orientation::Radial);
        // Same absolute source position in both domains.
        src.z_nm = 40.0 * dx - nz as f64 * dx / 2.0;
        let dipole = DiscreteDipole::place(&src, [nx, ny, nz], dx, 10).unwrap();
        sim.set_source(dipole, src.pulse.clone());
        let mut probes = Vec::new();
        for n in 0..steps {
            sim.step(n);
            let idx = sim.index(nx / 2, ny / 2, 52);
            probes.push(sim.ex[idx]);
        }
        (probes, sim)
    };
    let steps = 920;
    let (short, _) = run(160, steps);
    let (long, _) = run(320, steps);
    let peak = long.iter().fold(0.0f32, |a, &x| a.max(x.abs())) as f64;
    let mut worst = 0.0f64;
    for (s, l) in short.iter().zip(long.iter()) {
        worst = worst.max(((s - l).abs() as f64) / peak);
    }
    let energy_ratio = worst * worst;
    assert!(
        energy_ratio < 1e-6,
        "CPML reflected energy {energy_ratio:.3e} (amplitude {worst:.3e})"
    );
}

#[test]
fn mirror_reflected_scene_gives_identical_powers() {
    let dims = [48usize, 48, 64];
    let dx = 10.0;
    let omega0 = 2.0 * PI / 620.0;
    let run = |azimuth: f64| -> (f64, Vec<f64>) {
        let mut sim = vacuum_sim::<f32>(dims, dx, 10, [Boundary::Cpml; 3]);
        let mut src = DipoleSource::new(35.0, azimuth, 0.0, Orientation::Radial, 620.0).unwrap();
        src.pulse = GaussianPulse::new(620.0, 0.35);
        let dipole = DiscreteDipole::place(&src, dims, dx, 10).unwrap();
        let cell = dipole.cell;
        sim.set_source(dipole, src.pulse.clone());
        sim.power_box = Some(PowerBox::new([dims[0] / 2, dims[1] / 2, dims[2] / 2], 8, vec![omega0]));
        let steps = ((src.pulse.t_off() + 600.0) / sim.spec.dt) as usize;
        sim.run(steps).unwrap();
        let faces: Vec<f64> =
            sim.power_box.as_ref().unwrap().faces.iter().map(|f| f.flux(0, dx)).collect();
        let _ = cell;
        (sim.power_box.as_ref().unwrap().power(0, dx), faces)
    };
    // Dipole at +x with +x orientation vs the x-mirrored scene (azimuth pi).
    // Half-integer Yee components mirror exactly about the integer center
    // plane but integer-position sample sets shift by one cell, so the
    // discrete fluxes agree to an O(edge-row/area) sampling remainder, not
    // to reduction precision.
    let (p_a, faces_a) = run(0.0);
    let (p_b, faces_b) = run(PI);
    let rel = ((p_a - p_b) / p_a).abs();
    assert!(rel < 2e-3, "mirrored total power differs: {p_a} vs {p_b} (rel {rel:.3e})");
    // Per-face fluxes map x-lo <-> x-hi under the mirror.
    let remap = [1usize, 0, 2, 3, 4, 5];
    for (i, &m) in remap.iter().enumerate() {
        let rel = ((faces_a[i] - faces_b[m]) / p_a).abs();
        assert!(rel < 2e-3, "face {i} vs mirrored {m}: {} vs {}", faces_a[i], faces_b[m]);
    }
}

#[test]
fn source_in_pml_is_rejected() {
    let dims = [40usize, 40, 40];
    let mut src = dipole_source(620.0, 0.3, Orientation::Axial);
    src.z_nm = -190.0; // 1 cell from the wall, inside the 10-cell PML
    let err = DiscreteDipole::place(&src, dims, 10.0, 10);
    assert!(err.is_err());
}

#[test]
fn orientation_drives_matching_components_only() {
    let dims = [32usize, 32, 32];
    let axial = dipole_source(620.0, 0.3, Orientation::Axial);
    let d = DiscreteDipole::place(&axial, dims, 10.0, 8).unwrap();
    assert!(d.nodes.iter().all(|n| n.comp == 2), "axial dipole drives only Ez");
    let radial = dipole_source(620.0, 0.3, Orientation::Radial);
    let d = DiscreteDipole::place(&radial, dims, 10.0, 8).unwrap();
    assert!(d.nodes.iter().all(|n| n.comp == 0), "radial dipole at azimuth 0 drives only Ex");
    let az = dipole_source(620.0, 0.3, Orientation::Azimuthal);
    let d = DiscreteDipole::place(&az, dims, 10.0, 8).unwrap();
    assert!(d.nodes.iter().all(|n| n.comp == 1), "azimuthal dipole at azimuth 0 drives only Ey");
    // Weights sum to the direction cosine.
    let w: f64 = d.nodes.iter().map(|n| n.weight).sum();
    assert!((w - 1.0).abs() < 1e-12);
}

#[test]
fn fields_remain_finite_for_twice_the_budget() {
    let dims = [36usize, 36, 48];
    let dx = 20.0;
    let mut sim = vacuum_sim::<f32>(dims, dx, 8, [Boundary::Cpml; 3]);
    let src = dipole_source(620.0, 0.5, Orientation::Radial);
    let dipole = DiscreteDipole::place(&src, dims, dx, 8).unwrap();
    sim.set_source(dipole, src.pulse.clone());
    let budget = ((src.pulse.t_off() + 600.0) / sim.spec.dt) as usize;
    sim.run(2 * budget).expect("stable for twice the step budget");
    let m = sim.max_field_magnitude();
    assert!(m.is_finite() && m < 1.0, "ring-down amplitude {m}");
}
