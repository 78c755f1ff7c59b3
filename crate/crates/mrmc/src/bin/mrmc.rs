use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mrmc::harness::{load_experiment, parse_seeds, run_experiment, ExperimentSpec, Method, Mode, SweepAxis};

#[derive(Parser)]
#[command(name = "mrmc", version, about = "Joint radar code and full-duplex precoder design experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write its CSVs and manifest.
    Run {
        /// Scenario file (JSON or TOML); an optional `experiment` table holds harness settings.
        #[arg(long)]
        config: PathBuf,
        /// converge, roc or sweep.
        #[arg(long)]
        mode: Mode,
        /// Half-open range `a..b` or a single seed.
        #[arg(long)]
        seeds: String,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Monte Carlo trials per hypothesis (roc mode).
        #[arg(long)]
        trials: Option<usize>,
        /// Use the 200/200/1/2000 iteration caps.
        #[arg(long)]
        full_caps: bool,
        /// Comma-separated subset of uncoded,random,uniform_ul,bd_dl,nsp_dl,proposed.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        /// Sweep axis: snr_r, snr_ul or cnr.
        #[arg(long)]
        axis: Option<SweepAxis>,
    },
}

fn run(cmd: Cmd) -> mrmc::error::Result<()> {
    let Cmd::Run { config, mode, seeds, out, trials, full_caps, methods, axis } = cmd;
    let (mut cfg, mut settings) = load_experiment(&config)?;
    if full_caps {
        cfg = cfg.with_full_caps();
    }
    if let Some(n) = trials {
        settings.n_trials = n;
    }
    if let Some(m) = methods {
        settings.methods = m;
    }
    if let Some(a) = axis {
        settings.axis = a;
    }
    let spec = ExperimentSpec::new(cfg, parse_seeds(&seeds)?, mode, settings, out)?;
    let table = run_experiment(&spec)?;
    let failed = table.rows.iter().filter(|r| r.metric_name == "failed").count();
    eprintln!(
        "wrote {} result rows to {}{}",
        table.rows.len(),
        spec.out_dir.display(),
        if failed > 0 { format!(" ({failed} failed runs flagged)") } else { String::new() }
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
