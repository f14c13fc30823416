use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use icft_cli::{config, CliError, Format, Invocation, RunOptions, Task};

#[derive(Parser)]
#[command(name = "icft", version, about = "Inhomogeneous CFT dynamics and transport")]
struct Cli {
    #[command(subcommand)]
    task: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean energy, charge and current profiles on the (t, x) grid.
    Evolve(Common),
    /// Connected two-point functions against a fixed point.
    Correlate(Common),
    /// Drude weights and regular conductivities on the frequency grid.
    Transport(Common),
    /// Run the invariant suite; exit status 1 if any check fails.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config, or an earlier output file to rerun.
    #[arg(long)]
    config: PathBuf,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Add continuity residual columns (evolve).
    #[arg(long)]
    check: bool,
    /// closed, greenkubo, dynamical (comma-separated) or all (transport).
    #[arg(long)]
    routes: Option<String>,
    /// Residual histograms per check (verify).
    #[arg(long)]
    verbose: bool,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ICFT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(format!("ICFT_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("ICFT_THREADS: {e}")))
}

fn main_inner(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let (task, common) = match cli.task {
        Command::Evolve(c) => (Task::Evolve, c),
        Command::Correlate(c) => (Task::Correlate, c),
        Command::Transport(c) => (Task::Transport, c),
        Command::Verify(c) => (Task::Verify, c),
    };
    let cfg = config::load(&common.config)?;
    let inv = Invocation {
        options: RunOptions {
            check: common.check,
            routes: common.routes,
            verbose: common.verbose,
        },
        out: common.out,
        format: common.format.as_deref().map(str::parse::<Format>).transpose()?,
    };
    let to_stdout = inv.out.is_none() && cfg.output.path.is_none();
    let (text, passed) = icft_cli::execute(task, cfg, &inv)?;
    if to_stdout {
        print!("{text}");
    }
    Ok(passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("icft: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("icft: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
