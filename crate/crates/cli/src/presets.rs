//! Named starting points for configs. A config selects one with
//! `preset = "<name>"` and overrides any field on top of it.

use crate::error::{CliError, Result};

pub const NAMES: [&str; 4] = [
    "constant",
    "cosine-velocity",
    "kink-beta",
    "gaussian-bump-transport",
];

/// Used by `verify` when a config defines neither a scenario nor a transport block.
pub const DEFAULT: &str = "cosine-velocity";

const CONSTANT: &str = r#"
[scenario]
length = 6.283185307179586
c = 1.0
kappa = 1.0
v = { kind = "constant", value = 1.0 }
beta = { kind = "constant", value = 1.0 }
mu = { kind = "constant", value = 0.0 }

[grids]
x = { start = -3.0, stop = 3.0, count = 3 }
t = { start = 0.0, stop = 2.0, count = 3 }
"#;

const COSINE_VELOCITY: &str = r#"
[scenario]
length = 6.283185307179586
c = 1.0
kappa = 1.0
v = { kind = "inverse-cosine", base = 1.0, amplitude = 0.5 }
beta = { kind = "constant", value = 1.0 }
mu = { kind = "constant", value = 0.0 }

[grids]
x = { start = -3.0, stop = 3.0, count = 13 }
t = { start = 0.0, stop = 4.0, count = 9 }
"#;

// Step of width ~1 at x = 0 (eps = 2π/L); the antikink sits at x = ±100.
const KINK_BETA: &str = r#"
[scenario]
length = 200.0
c = 1.0
kappa = 1.0
v = { kind = "constant", value = 1.0 }
beta = { kind = "step", mean = 1.0, jump = 0.5, eps = 0.031415926535897934 }
mu = { kind = "constant", value = 0.0 }

[grids]
x = { start = -20.0, stop = 20.0, count = 9 }
t = { start = 0.0, stop = 60.0, count = 7 }
"#;

const GAUSSIAN_BUMP_TRANSPORT: &str = r#"
[transport]
beta = 1.0
mu = 0.0
c = 1.0
kappa = 1.0
velocity = { kind = "gaussian-bump", vbar = 1.0, a = 0.5, sigma = 1.0, window = 8.0 }
kink = { shape = "tanh", width = 1.0 }

[grids]
omega = [0.5, 1.0, 2.0]
"#;

pub fn text(name: &str) -> Result<&'static str> {
    Ok(match name {
        "constant" => CONSTANT,
        "cosine-velocity" => COSINE_VELOCITY,
        "kink-beta" => KINK_BETA,
        "gaussian-bump-transport" => GAUSSIAN_BUMP_TRANSPORT,
        other => {
            return Err(CliError::config(format!(
                "unknown preset '{other}' (available: {})",
                NAMES.join(", ")
            )))
        }
    })
}

pub fn table(name: &str) -> Result<toml::Table> {
    Ok(text(name)?.parse().expect("presets are valid TOML"))
}
