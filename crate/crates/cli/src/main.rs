use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ehrelay_cli::config::ExperimentConfig;
use ehrelay_cli::{presets, report, sweep, write_outputs, CliError, Result};

#[derive(Parser)]
#[command(name = "ehrelay", version, about = "Outage, capacity and diversity sweeps for an energy-harvesting two-way relay")]
struct Cli {
    /// Worker threads (default: the config's `workers`, else all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write the CSV plus a plot script.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a sweep and check every exact method against simulation.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Regenerate one of the figure presets.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        figure: u8,
        #[arg(long, default_value_t = presets::DEFAULT_N)]
        n: u64,
        #[arg(long, default_value_t = presets::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Grid-search the power splitting ratio maximizing a single analytic metric.
    LambdaStar {
        #[arg(long)]
        config: PathBuf,
    },
}

fn init_workers(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("workers = {n}: {e}")))?;
    }
    Ok(())
}

fn load(path: &Path, workers: Option<usize>) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path)?;
    init_workers(workers.or(cfg.workers))?;
    Ok(cfg)
}

/// Grid values without binary noise: 0.3999999999999999 prints as 0.4.
fn short(x: f64) -> f64 {
    sweep::format_number(x).parse().unwrap_or(x)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config, cli.workers)?;
            let result = sweep::run_sweep(&cfg)?;
            let script = write_outputs(&cfg, &result, &cfg.output_path)?;
            println!("wrote {} ({} rows) and {}", cfg.output_path.display(), result.rows.len(), script.display());
        }
        Command::Validate { config } => {
            let cfg = load(&config, cli.workers)?;
            let (result, rep) = report::validate(&cfg)?;
            write_outputs(&cfg, &result, &cfg.output_path)?;
            let path = report::write_report(&rep, &cfg.output_path)?;
            print!("{}", rep.render());
            println!("report: {}", path.display());
            if !rep.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Reproduce { figure, n, seed, out } => {
            init_workers(cli.workers)?;
            for p in presets::preset(figure)?.with_run(n, seed).reproduce(&out)? {
                println!("wrote {}", p.display());
            }
        }
        Command::LambdaStar { config } => {
            let cfg = load(&config, cli.workers)?;
            let s = report::find_lambda_star(&cfg)?;
            println!(
                "lambda* = {} ({} = {}), bracket [{}, {}]{}",
                short(s.lambda),
                s.method,
                sweep::format_number(s.value),
                short(s.bracket.0),
                short(s.bracket.1),
                if s.flat { " (flat grid)" } else { "" }
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
