use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use uirecon_cli::config::{DelayChoice, ScenarioConfig, SystemChoice};
use uirecon_cli::scenario::{build_estimator, prepare, OracleGain};
use uirecon_cli::{
    certify, emit_plot_data, invert_oracle, run_batch, run_scenario, save_report, save_trajectory,
    RunReport,
};

/// Data-driven reconstruction of unknown inputs from Hankel data.
#[derive(Parser)]
#[command(name = "uirecon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full experiment: offline data, gains, online estimation, report.
    Run {
        #[command(flatten)]
        common: Common,
        /// Report JSON path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-step plot data CSV.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Run this many scenarios with seeds seed, seed+1, ... in parallel.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Print the convergence certificate. Exit code 0 if stable, 1 if not.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Number of eigenvalues to list.
        #[arg(long, default_value_t = 5)]
        show: usize,
    },
    /// Write the offline data (and optionally the online trajectory) as CSV.
    GenData {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        online: Option<PathBuf>,
    },
    /// Model-based reconstruction of the online inputs, as CSV.
    InvertOracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OracleGain::MinNorm)]
        gain: OracleGain,
        /// Start the inverse from x = 0 instead of the true initial state.
        #[arg(long)]
        zero_state: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<SystemChoice>,
    #[arg(long = "N")]
    past: Option<usize>,
    /// Integer or `auto`.
    #[arg(long = "L")]
    delay: Option<DelayChoice>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.system {
            cfg.system = s;
        }
        if let Some(n) = self.past {
            cfg.past = n;
        }
        if let Some(l) = self.delay {
            cfg.delay = l;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `out.json` with index 2 becomes `out-2.json`.
fn indexed(path: &Path, index: usize) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{index}.{ext}"),
        None => format!("{stem}-{index}"),
    };
    path.with_file_name(name)
}

fn summary_line(report: &RunReport) -> String {
    let last_err = report
        .error_norms
        .as_ref()
        .and_then(|e| e.last())
        .map_or("n/a".to_string(), |e| format!("{e:.3e}"));
    format!(
        "{} seed={} N={} L={} rho={:.6} steps={} final_error={}",
        report.metadata.system,
        report.metadata.config.seed,
        report.metadata.config.past,
        report.metadata.delay,
        report.certificate.rho,
        report.len(),
        last_err
    )
}

fn write_outputs(report: &RunReport, out: Option<&Path>, plot: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            save_report(report, path)?;
            eprintln!("{}", summary_line(report));
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, report)?;
            writeln!(stdout)?;
        }
    }
    if let Some(path) = plot {
        emit_plot_data(report, path)?;
    }
    Ok(())
}

fn cmd_run(
    cfg: &ScenarioConfig,
    out: Option<&Path>,
    plot: Option<&Path>,
    parallel: Option<usize>,
) -> Result<()> {
    match parallel {
        None | Some(1) => write_outputs(&run_scenario(cfg)?, out, plot),
        Some(0) => bail!("--parallel must be positive"),
        Some(count) => {
            let Some(out) = out else {
                bail!("--parallel needs --out to name the per-scenario reports");
            };
            let mut failed = 0;
            for (i, result) in run_batch(cfg, count).into_iter().enumerate() {
                match result {
                    Ok(report) => {
                        let plot = plot.map(|p| indexed(p, i));
                        write_outputs(&report, Some(&indexed(out, i)), plot.as_deref())?;
                    }
                    Err(e) => {
                        failed += 1;
                        eprintln!(
                            "scenario {i} (seed {}): {e}",
                            cfg.seed.wrapping_add(i as u64)
                        );
                    }
                }
            }
            if failed > 0 {
                bail!("{failed} of {count} scenarios failed");
            }
            Ok(())
        }
    }
}

fn cmd_certify(cfg: &ScenarioConfig, show: usize) -> Result<bool> {
    let summary = certify(cfg)?;
    println!("system: {}", cfg.system);
    println!("rho(R): {:.12}", summary.rho);
    println!("|M_u|: {:.6e}", summary.m_u_norm);
    println!(
        "verdict: {}",
        if summary.schur_stable {
            "stable"
        } else {
            "unstable"
        }
    );
    println!("eigenvalues nearest the unit circle:");
    for [re, im] in summary.nearest_unit_circle(show) {
        println!("  {re:+.9} {im:+.9}i  |z| = {:.9}", re.hypot(im));
    }
    Ok(summary.schur_stable)
}

fn cmd_gen_data(cfg: &ScenarioConfig, out: &Path, online: Option<&Path>) -> Result<()> {
    let prepared = prepare(cfg)?;
    // Refuse to write data the estimator would reject.
    build_estimator(cfg, &prepared).context("generated data failed validation")?;
    save_trajectory(&prepared.offline, out)?;
    if let Some(path) = online {
        save_trajectory(&prepared.online, path)?;
    }
    Ok(())
}

fn cmd_invert_oracle(
    cfg: &ScenarioConfig,
    out: Option<&Path>,
    gain: OracleGain,
    zero_state: bool,
) -> Result<()> {
    let run = invert_oracle(cfg, gain, zero_state)?;
    let sink: Box<dyn Write> = match out {
        Some(path) => {
            Box::new(std::fs::File::create(path).with_context(|| path.display().to_string())?)
        }
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let m = run.truth.first().map_or(0, |u| u.len());
    let mut header = vec!["k".to_string()];
    header.extend((1..=m).map(|i| format!("u_hat_{i}")));
    header.extend((1..=m).map(|i| format!("u_{i}")));
    header.push("error_norm".into());
    w.write_record(&header)?;
    for (k, ((est, truth), err)) in run
        .estimates
        .iter()
        .zip(&run.truth)
        .zip(&run.error_norms)
        .enumerate()
    {
        let mut row = vec![k.to_string()];
        row.extend(est.iter().chain(truth.iter()).map(|v| format!("{v:e}")));
        row.push(format!("{err:e}"));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            common,
            out,
            plot,
            parallel,
        } => common
            .resolve()
            .and_then(|cfg| cmd_run(&cfg, out.as_deref(), plot.as_deref(), *parallel))
            .map(|_| true),
        Command::Certify { common, show } => {
            common.resolve().and_then(|cfg| cmd_certify(&cfg, *show))
        }
        Command::GenData {
            common,
            out,
            online,
        } => common
            .resolve()
            .and_then(|cfg| cmd_gen_data(&cfg, out, online.as_deref()))
            .map(|_| true),
        Command::InvertOracle {
            common,
            out,
            gain,
            zero_state,
        } => common
            .resolve()
            .and_then(|cfg| cmd_invert_oracle(&cfg, out.as_deref(), *gain, *zero_state))
            .map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
