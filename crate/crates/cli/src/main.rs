use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use lab_cli::bandwidth::cmd_bandwidth;
use lab_cli::config_file::load_config;
use lab_cli::experiment::{cmd_bench, cmd_run, parse_policies, parse_seeds};
use lab_cli::figures::{cmd_figures, Figure};
use lab_cli::manifest::Sweep;
use lab_cli::selftest::run_selftest;
use lab_core::SystemConfig;

#[derive(Parser)]
#[command(name = "lab", version, about = "Latency-accuracy balancing for edge video analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seeds, e.g. `1`, `1,2,3` or `1-10`.
    #[arg(long, visible_alias = "seed", default_value = "1")]
    seeds: String,
    /// Policies: lab, ideal, fullbo, delayobli, delaymin, random.
    #[arg(long, visible_alias = "policy", default_value = "lab")]
    policies: String,
    /// Overrides the configured horizon (slots).
    #[arg(long)]
    horizon: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Record per-slot decision time in the CSV.
    #[arg(long)]
    timing: bool,
    /// Worker threads for the seed fan-out.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run policies on one configuration.
    Run(Common),
    /// Paired multi-policy run, optionally over a parameter sweep.
    Bench {
        #[command(flatten)]
        common: Common,
        /// `weight=0,0.5,1`, `pathloss=2,2.4` or `devices=1-7`-style lists.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Export tidy plot data from bench results.
    Figures {
        #[arg(long, default_value = "results")]
        results: PathBuf,
        /// tradeoff, optgap, pathloss, scale, candidates; repeatable. All when omitted.
        #[arg(long)]
        figure: Vec<String>,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
    /// Solve one bandwidth-allocation instance.
    Bandwidth {
        #[arg(long)]
        instance: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle suites.
    Selftest {
        /// Smaller sample counts.
        #[arg(long)]
        quick: bool,
    },
}

/// Prints a line, ignoring a closed stdout (e.g. piped into `head`).
fn say(line: impl std::fmt::Display) {
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn config(path: Option<&Path>, horizon: Option<usize>) -> Result<SystemConfig> {
    let mut cfg = match path {
        Some(p) => load_config(p)?,
        None => SystemConfig::default(),
    };
    if let Some(t) = horizon {
        cfg.horizon = t;
        cfg.validate().context("--horizon")?;
    }
    Ok(cfg)
}

fn expand_sweep(s: &str) -> Result<Sweep> {
    // devices=1-7 shorthand
    if let Some((k, v)) = s.split_once('=') {
        if let Some((a, b)) = v.split_once('-').filter(|(a, _)| !a.is_empty()) {
            if let (Ok(a), Ok(b)) = (a.trim().parse::<u32>(), b.trim().parse::<u32>()) {
                let vals: Vec<String> = (a..=b).map(|x| x.to_string()).collect();
                return format!("{k}={}", vals.join(",")).parse();
            }
        }
    }
    s.parse()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(c) => {
            let cfg = config(c.config.as_deref(), c.horizon)?;
            let m = cmd_run(&cfg, &parse_policies(&c.policies)?, &parse_seeds(&c.seeds)?, &c.out, c.timing, c.jobs.max(1))?;
            say(format_args!("wrote {} files to {} (manifest {})", m.outputs.len(), c.out.display(), m.short_hash()));
        }
        Command::Bench { common: c, sweep } => {
            let cfg = config(c.config.as_deref(), c.horizon)?;
            let sweep = sweep.as_deref().map(expand_sweep).transpose()?;
            let m = cmd_bench(&cfg, &parse_policies(&c.policies)?, &parse_seeds(&c.seeds)?, sweep, &c.out, c.timing, c.jobs.max(1))?;
            say(format_args!("wrote {} files to {} (manifest {})", m.outputs.len(), c.out.display(), m.short_hash()));
        }
        Command::Figures { results, figure, out } => {
            let figs: Vec<Figure> = if figure.is_empty() {
                Figure::ALL.to_vec()
            } else {
                figure.iter().map(|f| f.parse()).collect::<Result<_>>()?
            };
            for p in cmd_figures(&results, &figs, &out)? {
                say(p.display());
            }
        }
        Command::Bandwidth { instance, out } => say(cmd_bandwidth(&instance, out.as_deref())?),
        Command::Selftest { quick } => {
            let checks = run_selftest(quick);
            for c in &checks {
                say(c.line());
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
