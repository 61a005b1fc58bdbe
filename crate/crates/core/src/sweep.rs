//! Declarative parameter sweeps with a resumable journal and deterministic
//! CSV materialization.
//!
//! Each completed point is appended to `journal.jsonl` in the output
//! directory as soon as it finishes; rerunning the same config skips
//! journaled points and rewrites the CSV sorted by swept value, so an
//! interrupted sweep converges to the same bytes as an uninterrupted one.

use crate::channeling::{run_channeling_cached, EfficiencyResult};
use crate::config::{RunConfig, SweptValue};
use crate::modesolver;
use crate::oracle;
use crate::util::fmt_f64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("io: {0}")]
    Io(String),
    #[error("csv parse error at line {line}: {message}")]
    Csv { line: usize, message: String },
}

impl From<std::io::Error> for SweepError {
    fn from(e: std::io::Error) -> Self {
        SweepError::Io(e.to_string())
    }
}

/// One persisted sweep row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub config_hash: String,
    pub value: SweptValue,
    pub medium: String,
    pub orientation: String,
    pub d_in_nm: Option<f64>,
    pub d_out_nm: Option<f64>,
    pub r_in_nm: f64,
    pub result: Option<EfficiencyResult>,
    pub eta_hybrid: Option<f64>,
    pub status: String,
}

pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub csv_path: PathBuf,
    pub failed: usize,
    pub computed: usize,
    pub skipped: usize,
}

/// Run (or resume) the sweep described by `config` into `out_dir`.
pub fn run_sweep(
    config: &RunConfig,
    out_dir: &Path,
    cross_check: bool,
) -> Result<SweepOutcome, SweepError> {
    let values = if config.sweep.is_some() {
        config.swept_values()
    } else {
        // Degenerate sweep: the single configured scene.
        vec![SweptValue::Discrete("scene".into(), "base".into())]
    };
    std::fs::create_dir_all(out_dir)?;
    let journal_path = out_dir.join("journal.jsonl");
    let hash = config.hash();

    let mut done: Vec<SweepRecord> = Vec::new();
    if let Ok(text) = std::fs::read_to_string(&journal_path) {
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            if let Ok(rec) = serde_json::from_str::<SweepRecord>(line) {
                if rec.config_hash == hash {
                    done.push(rec);
                }
            }
        }
    }

    let mut journal = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&journal_path)?;
    let mut computed = 0;
    let mut skipped = 0;
    let mut failed = 0;
    let mut records: Vec<SweepRecord> = Vec::new();
    for value in values {
        if let Some(prev) = done.iter().find(|r| r.value == value) {
            records.push(prev.clone());
            skipped += 1;
            continue;
        }
        let rec = run_point(config, &value, cross_check, &hash);
        if rec.status != "ok" {
            failed += 1;
        }
        let line = serde_json::to_string(&rec).map_err(|e| SweepError::Io(e.to_string()))?;
        writeln!(journal, "{line}")?;
        journal.flush()?;
        computed += 1;
        records.push(rec);
    }

    // Sorted by swept value regardless of completion order.
    records.sort_by(|a, b| match (a.value.numeric(), b.value.numeric()) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap(),
        _ => a.value.label().cmp(&b.value.label()),
    });

    let csv_path = out_dir.join("sweep.csv");
    let csv = render_csv(config, &records, cross_check);
    std::fs::write(&csv_path, csv)?;
    Ok(SweepOutcome { records, csv_path, failed, computed, skipped })
}

fn run_point(config: &RunConfig, value: &SweptValue, cross_check: bool, hash: &str) -> SweepRecord {
    let mut point_cfg = config.clone();
    let is_base = matches!(value, SweptValue::Discrete(p, _) if p == "scene");
    let scene = if is_base {
        point_cfg.scene(None)
    } else {
        match point_cfg.apply_value(value) {
            Ok(()) => point_cfg.scene(None),
            Err(e) => Err(e),
        }
    };
    let mut rec = SweepRecord {
        config_hash: hash.to_string(),
        value: value.clone(),
        medium: point_cfg.medium_label(),
        orientation: point_cfg.orientation.as_str().to_string(),
        d_in_nm: point_cfg.d_in_nm,
        d_out_nm: point_cfg.d_out_nm.or(point_cfg.diameter_nm),
        r_in_nm: point_cfg.r_in_nm,
        result: None,
        eta_hybrid: None,
        status: String::new(),
    };
    let (profile, source, domain) = match scene {
        Ok(s) => s,
        Err(e) => {
            rec.status = format!("failed: {e}");
            return rec;
        }
    };
    match run_channeling_cached(&profile, &source, &domain) {
        Ok(result) => {
            if cross_check {
                rec.eta_hybrid = modesolver::solve_layered(
                    &profile,
                    source.wavelength_nm(),
                    modesolver::DEFAULT_M_MAX,
                )
                .ok()
                .and_then(|spectrum| {
                    oracle::hybrid_eta(&oracle::guided_rates(&spectrum, &source), result.purcell)
                        .ok()
                });
            }
            rec.result = Some(result);
            rec.status = "ok".into();
        }
        Err(e) => {
            rec.status = format!("failed: {e}");
        }
    }
    rec
}

pub const CSV_COLUMNS: &[&str] = &[
    "swept_param",
    "swept_value",
    "medium",
    "orientation",
    "d_in_nm",
    "d_out_nm",
    "r_in_nm",
    "eta",
    "P_W",
    "P0_W",
    "Pc_fwd_W",
    "Pc_bwd_W",
    "purcell",
    "dx_nm",
    "estimator",
    "eta_hybrid",
    "runtime_s",
    "status",
];

fn render_csv(config: &RunConfig, records: &[SweepRecord], cross_check: bool) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema_version = {}\n", crate::config::SCHEMA_VERSION));
    out.push_str(&format!("# config_hash = {}\n", config.hash()));
    for (name, v) in [
        ("silica", crate::scene::N_SILICA),
        ("water", crate::scene::N_WATER),
        ("vacuum", crate::scene::N_VACUUM),
    ] {
        let v = config.indices.get(name).copied().unwrap_or(v);
        out.push_str(&format!("# index.{name} = {v}\n"));
    }
    let cols: Vec<&str> = CSV_COLUMNS
        .iter()
        .copied()
        .filter(|c| cross_check || *c != "eta_hybrid")
        .collect();
    out.push_str(&cols.join(","));
    out.push('\n');
    let param = config
        .sweep
        .as_ref()
        .map(|s| s.parameter.clone())
        .unwrap_or_else(|| "scene".into());
    for rec in records {
        let mut fields: Vec<String> = Vec::with_capacity(cols.len());
        fields.push(param.clone());
        fields.push(rec.value.label());
        fields.push(rec.medium.clone());
        fields.push(rec.orientation.clone());
        fields.push(rec.d_in_nm.map(fmt_f64).unwrap_or_default());
        fields.push(rec.d_out_nm.map(fmt_f64).unwrap_or_default());
        fields.push(fmt_f64(rec.r_in_nm));
        match &rec.result {
            Some(r) => {
                fields.push(fmt_f64(r.eta));
                fields.push(fmt_f64(r.p));
                fields.push(fmt_f64(r.p0));
                fields.push(fmt_f64(r.pc_forward));
                fields.push(fmt_f64(r.pc_backward));
                fields.push(fmt_f64(r.purcell));
                fields.push(fmt_f64(r.metadata.dx_nm));
                fields.push(r.metadata.estimator.clone());
                if cross_check {
                    fields.push(rec.eta_hybrid.map(fmt_f64).unwrap_or_default());
                }
                fields.push(format!("{:.3}", r.metadata.runtime_s));
            }
            None => {
                for _ in 0..(if cross_check { 10 } else { 9 }) {
                    fields.push(String::new());
                }
            }
        }
        fields.push(rec.status.clone());
        // Cells must stay comma-free; free-text fields (estimator, status)
        // are sanitized rather than quoted.
        let fields: Vec<String> = fields.iter().map(|f| f.replace(',', ";")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// A parsed CSV row as a column-name -> value map, plus its line number.
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub line: usize,
    pub values: std::collections::HashMap<String, String>,
}

/// Parse a sweep CSV (comments allowed before the header).
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, SweepError> {
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cells: Vec<String> = raw.split(',').map(|c| c.trim().to_string()).collect();
        match &header {
            None => {
                if !cells.contains(&"eta".to_string()) || !cells.contains(&"swept_value".to_string())
                {
                    return Err(SweepError::Csv {
                        line: line_no,
                        message: "header must contain swept_value and eta columns".into(),
                    });
                }
                header = Some(cells);
            }
            Some(h) => {
                if cells.len() != h.len() {
                    return Err(SweepError::Csv {
                        line: line_no,
                        message: format!("expected {} cells, got {}", h.len(), cells.len()),
                    });
                }
                let values = h.iter().cloned().zip(cells).collect();
                rows.push(CsvRow { line: line_no, values });
            }
        }
    }
    if header.is_none() {
        return Err(SweepError::Csv { line: 1, message: "missing header row".into() });
    }
    Ok(rows)
}
