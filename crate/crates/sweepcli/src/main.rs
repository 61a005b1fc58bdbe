//! Command-line surface: mode tables, single runs, parameter sweeps,
//! reference-figure reproduction and CSV plotting.

use clap::{Args, Parser, Subcommand};
use nanochannel::channeling;
use nanochannel::config::{RunConfig, Tier};
use nanochannel::figures;
use nanochannel::modesolver;
use nanochannel::plot;
use nanochannel::sweep;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sweepcli",
    about = "Channeling efficiency of dipole emission into nanofiber and nanocapillary guided modes",
    after_help = "The vacuum-reference and result caches live under $NANOCHANNEL_CACHE_DIR \
                  (default: <tmp>/nanochannel-cache)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Run configuration file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Resolution tier preset, overriding the config.
    #[arg(long, value_parser = parse_tier)]
    tier: Option<Tier>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Append the semi-analytic eta_hybrid column to result rows.
    #[arg(long)]
    cross_check: bool,
}

fn parse_tier(s: &str) -> Result<Tier, String> {
    Tier::parse(s)
}

#[derive(Subcommand)]
enum Command {
    /// Solve the guided modes of the configured profile and emit a CSV.
    Modes {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the configured single scene and report its efficiency row.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Dump final field snapshots (binary, little-endian) to the output
        /// directory.
        #[arg(long)]
        dump_fields: bool,
    },
    /// Run the configured parameter sweep (resumable; failed points are
    /// recorded and skipped on rerun).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Override the swept-value grid step in nm.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Regenerate a reference figure (3a, 3b, 4a, 4b, 5a, 5b) as CSV + SVG.
    ReproduceFigure {
        /// Figure id.
        id: String,
        #[command(flatten)]
        common: CommonArgs,
        /// Override the swept-value grid step in nm.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Render a sweep CSV as an SVG chart.
    Plot {
        /// Input CSV produced by `run`, `sweep` or `reproduce-figure`.
        csv: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, String> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| "--config <path> is required for this command".to_string())?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(t) = common.tier {
        cfg.tier = t;
    }
    Ok(cfg)
}

fn init_threads(common: &CommonArgs) {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Modes { common } => {
            init_threads(&common);
            let cfg = load_config(&common)?;
            let (profile, source, _) = cfg.scene(None).map_err(|e| e.to_string())?;
            let spectrum = modesolver::solve_layered(
                &profile,
                source.wavelength_nm(),
                modesolver::DEFAULT_M_MAX,
            )
            .map_err(|e| e.to_string())?;
            let d_out = 2.0 * profile.outer_radius_nm();
            let v = modesolver::v_number(
                d_out,
                profile.max_index(),
                profile.background_index(),
                source.wavelength_nm(),
            )
            .map_err(|e| e.to_string())?;
            println!("family,m,radial_order,n_eff,beta_rad_per_nm,V");
            for m in &spectrum.modes {
                println!(
                    "{},{},{},{},{},{}",
                    m.id.family.as_str(),
                    m.id.m,
                    m.id.radial_order,
                    m.n_eff,
                    m.beta,
                    v
                );
            }
            for w in &spectrum.warnings {
                eprintln!("warning: {w}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { common, dump_fields } => {
            init_threads(&common);
            let cfg = load_config(&common)?;
            let (profile, source, domain) = cfg.scene(None).map_err(|e| e.to_string())?;
            let dump_dir = dump_fields.then(|| common.out.join("fields"));
            let result = if dump_fields {
                channeling::run_channeling_opts(&profile, &source, &domain, dump_dir.as_deref())
            } else {
                channeling::run_channeling_cached(&profile, &source, &domain)
            }
            .map_err(|e| e.to_string())?;
            println!(
                "eta = {:.4}  (Pc fwd {:.4e} + bwd {:.4e}) / P {:.4e};  purcell = {:.4}",
                result.eta, result.pc_forward, result.pc_backward, result.p, result.purcell
            );
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            // Persist the row through the sweep machinery (degenerate sweep).
            let outcome =
                sweep::run_sweep(&cfg, &common.out, common.cross_check).map_err(|e| e.to_string())?;
            println!("csv: {}", outcome.csv_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { common, step } => {
            init_threads(&common);
            let mut cfg = load_config(&common)?;
            if cfg.sweep.is_none() {
                return Err("config has no sweep section".into());
            }
            if let Some(step) = step {
                let sw = cfg.sweep.as_mut().expect("checked");
                if let (Some(&first), Some(&last)) =
                    (sw.values_nm.first(), sw.values_nm.last())
                {
                    let n = ((last - first) / step).round() as usize;
                    sw.values_nm = (0..=n).map(|i| first + i as f64 * step).collect();
                }
            }
            let outcome =
                sweep::run_sweep(&cfg, &common.out, common.cross_check).map_err(|e| e.to_string())?;
            println!(
                "sweep: {} computed, {} resumed, {} failed -> {}",
                outcome.computed,
                outcome.skipped,
                outcome.failed,
                outcome.csv_path.display()
            );
            Ok(if outcome.failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::ReproduceFigure { id, common, step } => {
            init_threads(&common);
            let tier = common.tier.unwrap_or(Tier::Fast);
            let out = figures::reproduce_figure(&id, tier, step, &common.out, common.cross_check)
                .map_err(|e| e.to_string())?;
            println!("csv: {}", out.csv_path.display());
            println!("svg: {}", out.svg_path.display());
            Ok(if out.failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Plot { csv, common } => {
            let text = std::fs::read_to_string(&csv)
                .map_err(|e| format!("cannot read {}: {e}", csv.display()))?;
            let rows = sweep::parse_csv(&text).map_err(|e| e.to_string())?;
            let param = rows
                .first()
                .and_then(|r| r.values.get("swept_param").cloned())
                .unwrap_or_else(|| "value".into());
            let svg =
                plot::render_svg(&text, &format!("{param} (nm)"), "eta").map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&common.out).map_err(|e| e.to_string())?;
            let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
            let path = common.out.join(format!("{stem}.svg"));
            std::fs::write(&path, svg).map_err(|e| e.to_string())?;
            println!("svg: {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
