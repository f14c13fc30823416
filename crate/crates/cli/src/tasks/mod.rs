//! The four tasks. Each turns a config into a [`Table`].

mod correlate;
mod evolve;
mod transport;
mod verify;

pub use correlate::run_correlate;
pub use evolve::run_evolve;
pub use transport::{run_transport, Route};
pub use verify::{run_verify, sinh_fourier_quadrature, verify_report, Check, VerifyReport};

use crate::output::Table;

/// Command-line switches that shape a run beyond the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub check: bool,
    /// Comma-separated transport routes, or `all`.
    pub routes: Option<String>,
    pub verbose: bool,
}

impl RunOptions {
    /// The switches as they appear on the command line, for the output header.
    pub fn flags(&self) -> String {
        let mut s = String::new();
        if self.check {
            s.push_str(" --check");
        }
        if let Some(r) = &self.routes {
            s.push_str(&format!(" --routes {r}"));
        }
        if self.verbose {
            s.push_str(" --verbose");
        }
        s
    }
}

/// A finished task: its table and whether every verification passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub passed: bool,
}
