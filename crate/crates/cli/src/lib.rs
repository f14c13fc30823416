//! Configuration-driven front end of `icft_core`: build scenarios from TOML,
//! run the evolution, correlator, transport and verification tasks, and
//! write the results as CSV or JSON.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod tasks;

use std::path::PathBuf;

pub use config::{Format, RunConfig, Task};
pub use error::{CliError, Result};
pub use tasks::{Outcome, RunOptions};

/// Everything a single invocation needs besides the config file itself.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub options: RunOptions,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Apply command-line overrides, check the task, and run it.
///
/// Returns the rendered document and whether every check passed.
pub fn execute(task: Task, mut cfg: RunConfig, inv: &Invocation) -> Result<(String, bool)> {
    if let Some(declared) = cfg.task {
        if declared != task {
            return Err(CliError::config(format!(
                "config declares task '{declared}' but '{task}' was requested"
            )));
        }
    }
    cfg.task = Some(task);
    if let Some(out) = &inv.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(f) = inv.format {
        cfg.output.format = f;
    }
    let outcome = run(task, &cfg, &inv.options)?;
    let config_text = cfg.to_toml();
    let flags = inv.options.flags();
    let doc = output::Document {
        task: &task.to_string(),
        flags: &flags,
        config: &config_text,
        table: &outcome.table,
        precision: cfg.output.precision,
    };
    let text = output::render(&doc, cfg.output.format);
    if let Some(path) = &cfg.output.path {
        std::fs::write(path, &text).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
    }
    Ok((text, outcome.passed))
}

/// Run a task on an already validated config.
pub fn run(task: Task, cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome> {
    Ok(match task {
        Task::Evolve => Outcome {
            table: tasks::run_evolve(cfg, opts)?,
            passed: true,
        },
        Task::Correlate => Outcome {
            table: tasks::run_correlate(cfg)?,
            passed: true,
        },
        Task::Transport => Outcome {
            table: tasks::run_transport(cfg, opts)?,
            passed: true,
        },
        Task::Verify => {
            let (table, passed) = tasks::run_verify(cfg, opts)?;
            Outcome { table, passed }
        }
    })
}
