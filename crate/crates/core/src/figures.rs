//! Canned sweep sets that regenerate the reference parameter studies: ONF
//! diameter scans in vacuum and water, NCF inner/outer diameter scans, and
//! the dipole-position scan, each emitted as one CSV plus one SVG.

use crate::config::{RunConfig, SweepConfig, Tier};
use crate::plot;
use crate::sweep::{self, SweepError, SweepRecord};
use std::path::{Path, PathBuf};

pub const FIGURE_IDS: &[&str] = &["3a", "3b", "4a", "4b", "5a", "5b"];

/// The sweep set behind one figure: each entry is a complete single-curve
/// sweep config (one orientation, one medium).
#[derive(Debug)]
pub struct FigureSpec {
    pub id: &'static str,
    pub axis_label: &'static str,
    pub curves: Vec<RunConfig>,
}

fn range(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step).round() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

fn with_sweep(mut cfg: RunConfig, parameter: &str, values: Vec<f64>, tier: Tier) -> RunConfig {
    cfg.tier = tier;
    cfg.sweep = Some(SweepConfig {
        parameter: parameter.into(),
        values_nm: values,
        discrete: Vec::new(),
    });
    cfg
}

/// Build the sweep set for a figure id; `step_nm` overrides the default
/// grid spacing of the swept axis.
pub fn figure_spec(id: &str, tier: Tier, step_nm: Option<f64>) -> Result<FigureSpec, String> {
    let orientations = ["radial", "azimuthal", "axial"];
    let spec = match id {
        "3a" | "3b" => {
            // eta vs ONF diameter, three polarizations, one medium.
            let (medium, lo, hi, dflt) =
                if id == "3a" { ("vacuum", 160.0, 640.0, 20.0) } else { ("water", 240.0, 800.0, 20.0) };
            let step = step_nm.unwrap_or(dflt);
            let curves = orientations
                .iter()
                .map(|o| {
                    let mut c = RunConfig::onf(lo, medium);
                    c.orientation = crate::scene::Orientation::parse(o).expect("orientation");
                    with_sweep(c, "diameter", range(lo, hi, step), tier)
                })
                .collect();
            FigureSpec { id: if id == "3a" { "3a" } else { "3b" }, axis_label: "D (nm)", curves }
        }
        "4a" => {
            // eta vs d_in at d_out = 360, radial and axial, water and vacuum.
            let step = step_nm.unwrap_or(10.0);
            let mut curves = Vec::new();
            for medium in ["water", "vacuum"] {
                for o in ["radial", "axial"] {
                    let mut c = RunConfig::ncf(10.0, 360.0, medium, "vacuum");
                    c.orientation = crate::scene::Orientation::parse(o).expect("orientation");
                    curves.push(with_sweep(c, "d_in", range(10.0, 300.0, step), tier));
                }
            }
            FigureSpec { id: "4a", axis_label: "d_in (nm)", curves }
        }
        "4b" | "5a" => {
            // eta vs d_out at fixed d_in, radial and axial, water and vacuum.
            let d_in = if id == "4b" { 100.0 } else { 250.0 };
            let step = step_nm.unwrap_or(20.0);
            let lo = if d_in < 300.0 { 300.0 } else { d_in + 20.0 };
            let mut curves = Vec::new();
            for medium in ["water", "vacuum"] {
                for o in ["radial", "axial"] {
                    let mut c = RunConfig::ncf(d_in, lo, medium, "vacuum");
                    c.orientation = crate::scene::Orientation::parse(o).expect("orientation");
                    curves.push(with_sweep(c, "d_out", range(lo, 1000.0, step), tier));
                }
            }
            FigureSpec { id: if id == "4b" { "4b" } else { "5a" }, axis_label: "d_out (nm)", curves }
        }
        "5b" => {
            // eta vs dipole offset r_in for NCF(100, 360), three
            // polarizations, water and vacuum cores.
            let step = step_nm.unwrap_or(10.0);
            let mut curves = Vec::new();
            for medium in ["water", "vacuum"] {
                for o in orientations {
                    let mut c = RunConfig::ncf(100.0, 360.0, medium, "vacuum");
                    c.orientation = crate::scene::Orientation::parse(o).expect("orientation");
                    curves.push(with_sweep(c, "r_in", range(0.0, 50.0, step.min(50.0)), tier));
                }
            }
            FigureSpec { id: "5b", axis_label: "r_in (nm)", curves }
        }
        other => {
            return Err(format!(
                "unknown figure id '{other}'; valid ids: {}",
                FIGURE_IDS.join(", ")
            ))
        }
    };
    Ok(spec)
}

pub struct FigureOutput {
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
    pub records: Vec<SweepRecord>,
    pub failed: usize,
}

/// Run every curve of a figure (resumable per curve), then merge into one
/// CSV and render one SVG.
pub fn reproduce_figure(
    id: &str,
    tier: Tier,
    step_nm: Option<f64>,
    out_dir: &Path,
    cross_check: bool,
) -> Result<FigureOutput, SweepError> {
    let spec = figure_spec(id, tier, step_nm)
        .map_err(|m| SweepError::Csv { line: 0, message: m })?;
    std::fs::create_dir_all(out_dir)?;
    let mut all = Vec::new();
    let mut failed = 0;
    let mut merged = String::new();
    for (i, cfg) in spec.curves.iter().enumerate() {
        let curve_dir = out_dir.join(format!("fig{}-curve{}", spec.id, i));
        let outcome = sweep::run_sweep(cfg, &curve_dir, cross_check)?;
        failed += outcome.failed;
        let text = std::fs::read_to_string(&outcome.csv_path)?;
        if i == 0 {
            merged.push_str(&text);
        } else {
            // Append data rows only.
            for line in text.lines() {
                if line.starts_with('#') || line.starts_with("swept_param") {
                    continue;
                }
                merged.push_str(line);
                merged.push('\n');
            }
        }
        all.extend(outcome.records);
    }
    let csv_path = out_dir.join(format!("figure-{}.csv", spec.id));
    std::fs::write(&csv_path, &merged)?;
    let svg = plot::render_svg(&merged, spec.axis_label, "eta")?;
    let svg_path = out_dir.join(format!("figure-{}.svg", spec.id));
    std::fs::write(&svg_path, svg)?;
    Ok(FigureOutput { csv_path, svg_path, records: all, failed })
}
