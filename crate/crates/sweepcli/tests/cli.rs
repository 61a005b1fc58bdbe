//! CLI-level tests: argument handling, config errors with line numbers,
//! the modes table, plotting, and one cramped end-to-end run.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sweepcli"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sweepcli-test-{tag}-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const ONF_CONFIG: &str = "\
geometry.kind = onf
geometry.diameter_nm = 280
geometry.background = vacuum
source.orientation = radial
source.wavelength_nm = 620
tier = fast
";

#[test]
fn modes_emits_mode_table() {
    let dir = tmpdir("modes");
    let cfg = write(&dir, "onf.cfg", ONF_CONFIG);
    let out = bin().args(["modes", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("family,m,radial_order,n_eff,beta_rad_per_nm,V"));
    assert!(stdout.contains("HE,1,1,1.058663"), "{stdout}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_name_the_line() {
    let dir = tmpdir("badcfg");
    let cfg = write(&dir, "bad.cfg", "geometry.kind = onf\ngeometry.diameter_nm = oops\n");
    let out = bin().args(["modes", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_config_flag_is_a_usage_error() {
    let out = bin().arg("modes").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));
}

#[test]
fn unknown_figure_id_is_a_usage_error_listing_valid_ids() {
    let dir = tmpdir("badfig");
    let out = bin()
        .args(["reproduce-figure", "7q", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("3a") && stderr.contains("5b"), "{stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn plot_renders_deterministic_svg() {
    let dir = tmpdir("plot");
    let csv = write(
        &dir,
        "data.csv",
        "swept_param,swept_value,medium,orientation,eta\n\
         d_out,300,water,radial,0.40\n\
         d_out,360,water,radial,0.52\n",
    );
    let run = || {
        let out = bin().args(["plot"]).arg(&csv).args(["--out"]).arg(&dir).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(dir.join("data.svg")).unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a, b, "re-render must be byte-identical");
    assert!(String::from_utf8_lossy(&a).contains("<polyline"));

    let bad = write(&dir, "bad.csv", "no,header\n1,2\n");
    let out = bin().args(["plot"]).arg(&bad).args(["--out"]).arg(&dir).output().unwrap();
    assert!(!out.status.success());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn run_produces_csv_row_and_fields_dump() {
    // Cramped domain so the run costs seconds; plumbing is what is tested.
    let dir = tmpdir("run");
    let cfg = write(
        &dir,
        "tiny.cfg",
        "geometry.kind = ncf\n\
         geometry.d_in_nm = 200\n\
         geometry.d_out_nm = 360\n\
         geometry.core = water\n\
         geometry.background = vacuum\n\
         source.orientation = radial\n\
         tier = fast\n\
         domain.extents_um = 1.6 1.6 3.6\n\
         domain.dx_nm = 20\n\
         domain.monitor_um = 1\n",
    );
    let out_dir = dir.join("out");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .args(["--dump-fields", "--cross-check"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("eta ="), "{stdout}");
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert!(csv.contains("eta_hybrid"), "cross-check column present: {csv}");
    assert!(csv.lines().filter(|l| !l.starts_with('#')).count() >= 2);
    // Field snapshots decode through the documented format.
    let snap = nanochannel::fdtd::read_snapshot(&out_dir.join("fields").join("ex.ncfs")).unwrap();
    assert_eq!(snap.dims, [80, 80, 180]);
    assert_eq!(snap.component, 0);
    std::fs::remove_dir_all(&dir).ok();
}
