//! The run configuration: a TOML document, optionally layered over a preset.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use icft_core::observables::{CorrelatorKind, Scenario};
use icft_core::profiles::{make_smooth_kink, KinkShape, Profile};
use icft_core::transport::{DynamicalOptions, TransportSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::presets;

/// Marks the start of a config echoed into an output header.
pub const ECHO_BEGIN: &str = "# --- config ---";
pub const ECHO_END: &str = "# --- end config ---";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Evolve,
    Correlate,
    Transport,
    Verify,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Evolve => "evolve",
            Task::Correlate => "correlate",
            Task::Transport => "transport",
            Task::Verify => "verify",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<TransportConfig>,
    #[serde(default)]
    pub grids: GridsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlate: Option<CorrelateConfig>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Profiles on a circle of circumference `length`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub length: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    pub v: ProfileConfig,
    pub beta: ProfileConfig,
    pub mu: ProfileConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant {
        value: f64,
    },
    /// `mean + amplitude cos(2π n x / L + phase)`.
    Cosine {
        mean: f64,
        amplitude: f64,
        #[serde(default = "first_harmonic")]
        harmonic: u32,
        #[serde(default)]
        phase: f64,
    },
    /// `1 / (base + amplitude cos(2π n x / L + phase))`.
    InverseCosine {
        base: f64,
        amplitude: f64,
        #[serde(default = "first_harmonic")]
        harmonic: u32,
        #[serde(default)]
        phase: f64,
    },
    /// Smooth periodic step from `mean + jump/2` (left of 0) to `mean - jump/2`.
    Step { mean: f64, jump: f64, eps: f64 },
    /// Equispaced samples over one period, starting at `-L/2`.
    Samples { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportConfig {
    pub velocity: LineVelocityConfig,
    pub kink: KinkConfig,
    pub beta: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    /// Asymptotic velocity; taken from the velocity profile when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamical: Option<DynamicalConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LineVelocityConfig {
    Constant {
        value: f64,
    },
    /// `vbar / (1 - a exp(-x²/2σ²))`, equal to `vbar` outside `[-window, window]`.
    GaussianBump {
        vbar: f64,
        a: f64,
        sigma: f64,
        window: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinkConfig {
    #[serde(default = "tanh")]
    pub shape: String,
    #[serde(default = "one")]
    pub width: f64,
}

/// Overrides of the dynamical-route numerics; unset fields keep the defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicalConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_panel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_panel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_refinement: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<GridSpec>,
}

/// Either explicit points or `count` equispaced points from `start` to `stop`
/// inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl GridSpec {
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let values = match self {
            GridSpec::Points(p) => p.clone(),
            GridSpec::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => {
                    let h = (stop - start) / (*n - 1) as f64;
                    (0..*n).map(|k| start + h * k as f64).collect()
                }
            },
        };
        if values.is_empty() {
            return Err(CliError::config(format!("grids.{name}: grid is empty")));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(CliError::config(format!(
                "grids.{name}: grid value {bad} is not finite"
            )));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelateConfig {
    /// `JJ`, `jj`, `Jj`, `jJ` or `fermion`.
    pub kind: String,
    pub x2: f64,
    #[serde(default)]
    pub t2: f64,
    #[serde(default)]
    pub g2: f64,
    #[serde(default)]
    pub g4: f64,
    #[serde(default = "right_mover")]
    pub r: i8,
    #[serde(default = "one")]
    pub ell_tilde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Also run the dynamical transport route (slow).
    #[serde(default)]
    pub dynamical: bool,
    /// Test hook: perturb the inverse of `f` so the group property fails.
    #[serde(default)]
    pub corrupt_inverse: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            seed: default_seed(),
            dynamical: false,
            corrupt_inverse: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::config(format!(
                "unknown output format '{other}' (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Significant decimal digits of every float.
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: None,
            format: Format::Csv,
            precision: default_precision(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn first_harmonic() -> u32 {
    1
}
fn tanh() -> String {
    "tanh".into()
}
fn right_mover() -> i8 {
    1
}
fn default_samples() -> usize {
    1000
}
fn default_seed() -> u64 {
    7
}
fn default_precision() -> usize {
    17
}

/// Read a config file. An output file produced by `icft` is accepted too:
/// its echoed config block is used.
pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parse config text, resolving `preset = "..."` by merging the document
/// over the named preset.
pub fn parse(text: &str) -> Result<RunConfig> {
    let text = extract_echo(text)
        .or_else(|| crate::output::json_config(text))
        .unwrap_or_else(|| text.to_string());
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        CliError::config(e.to_string().trim_end().to_string())
    })?;
    let Some(preset) = table.remove("preset") else {
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        return Ok(cfg);
    };
    let name = preset
        .as_str()
        .ok_or_else(|| CliError::config("preset: expected a string"))?;
    let mut base = presets::table(name)?;
    merge(&mut base, table);
    let cfg = RunConfig::deserialize(toml::Value::Table(base))
        .map_err(|e| CliError::config(format!("after applying preset '{name}': {}", e.to_string().trim_end())))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Deep merge of `over` into `base`. Tables merge key by key, except that a
/// table whose `kind` differs replaces the base table wholesale.
pub fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o))
                if b.get("kind") == o.get("kind") || o.get("kind").is_none() =>
            {
                merge(b, o)
            }
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// The config block echoed into an output header, if `text` has one.
pub fn extract_echo(text: &str) -> Option<String> {
    let mut lines = text.lines();
    lines.find(|l| l.trim_end() == ECHO_BEGIN)?;
    let mut body = String::new();
    for line in lines {
        if line.trim_end() == ECHO_END {
            return Some(body);
        }
        let line = line.strip_prefix("# ").or_else(|| line.strip_prefix('#'))?;
        body.push_str(line);
        body.push('\n');
    }
    None
}

impl RunConfig {
    /// TOML text of the effective configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    /// Checks that do not need the core library.
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = &self.scenario {
            positive("scenario.length", s.length)?;
            positive("scenario.c", s.c)?;
            positive("scenario.kappa", s.kappa)?;
            s.v.validate("scenario.v", true)?;
            s.beta.validate("scenario.beta", true)?;
            s.mu.validate("scenario.mu", false)?;
        }
        if let Some(t) = &self.transport {
            positive("transport.beta", t.beta)?;
            positive("transport.c", t.c)?;
            positive("transport.kappa", t.kappa)?;
            finite("transport.mu", t.mu)?;
            positive("transport.kink.width", t.kink.width)?;
            KinkShape::from_str(&t.kink.shape)
                .map_err(|e| CliError::config(format!("transport.kink.shape: {e}")))?;
            if let Some(v) = t.vbar {
                positive("transport.vbar", v)?;
            }
            match t.velocity {
                LineVelocityConfig::Constant { value } => {
                    positive("transport.velocity.value", value)?
                }
                LineVelocityConfig::GaussianBump {
                    vbar,
                    a,
                    sigma,
                    window,
                } => {
                    positive("transport.velocity.vbar", vbar)?;
                    positive("transport.velocity.sigma", sigma)?;
                    positive("transport.velocity.window", window)?;
                    if !(a < 1.0) {
                        return Err(CliError::config(format!(
                            "transport.velocity.a: must be below 1 for a positive velocity, got {a}"
                        )));
                    }
                }
            }
        }
        for (name, grid) in [
            ("x", &self.grids.x),
            ("t", &self.grids.t),
            ("omega", &self.grids.omega),
        ] {
            if let Some(g) = grid {
                g.values(name)?;
            }
        }
        if let Some(omegas) = &self.grids.omega {
            if let Some(w) = omegas.values("omega")?.into_iter().find(|w| *w < 0.0) {
                return Err(CliError::config(format!(
                    "grids.omega: frequencies must be non-negative, got {w}"
                )));
            }
        }
        if let Some(c) = &self.correlate {
            if c.kind != "fermion" {
                CorrelatorKind::from_str(&c.kind)
                    .map_err(|e| CliError::config(format!("correlate.kind: {e}")))?;
            }
            if c.r != 1 && c.r != -1 {
                return Err(CliError::config(format!(
                    "correlate.r: chirality must be 1 or -1, got {}",
                    c.r
                )));
            }
            finite("correlate.x2", c.x2)?;
            finite("correlate.t2", c.t2)?;
            positive("correlate.ell_tilde", c.ell_tilde)?;
        }
        if self.verify.samples == 0 {
            return Err(CliError::config("verify.samples: must be at least 1"));
        }
        if !(1..=17).contains(&self.output.precision) {
            return Err(CliError::config(format!(
                "output.precision: must be between 1 and 17, got {}",
                self.output.precision
            )));
        }
        Ok(())
    }

    pub fn grid(&self, name: &str) -> Result<Vec<f64>> {
        let spec = match name {
            "x" => &self.grids.x,
            "t" => &self.grids.t,
            _ => &self.grids.omega,
        };
        spec.as_ref()
            .ok_or_else(|| CliError::config(format!("grids.{name}: missing")))?
            .values(name)
    }

    pub fn build_scenario(&self) -> Result<Scenario> {
        let s = self
            .scenario
            .as_ref()
            .ok_or_else(|| CliError::config("missing [scenario] block"))?;
        let v = s.v.build(s.length, true).map_err(at("scenario.v"))?;
        let beta = s.beta.build(s.length, true).map_err(at("scenario.beta"))?;
        let mu = s.mu.build(s.length, false).map_err(at("scenario.mu"))?;
        Scenario::new(v, beta, mu, s.c, s.kappa).map_err(at("scenario"))
    }

    /// The transport spec on the configured frequency grid.
    pub fn build_transport(&self) -> Result<TransportSpec> {
        let t = self
            .transport
            .as_ref()
            .ok_or_else(|| CliError::config("missing [transport] block"))?;
        let (v, vbar) = match t.velocity {
            LineVelocityConfig::Constant { value } => {
                (Profile::constant_line(value, true), value)
            }
            LineVelocityConfig::GaussianBump {
                vbar,
                a,
                sigma,
                window,
            } => (Profile::gaussian_bump(vbar, a, sigma, window), vbar),
        };
        let v = v.map_err(at("transport.velocity"))?;
        let shape = KinkShape::from_str(&t.kink.shape).map_err(at("transport.kink.shape"))?;
        let kink = make_smooth_kink(t.kink.width, shape).map_err(at("transport.kink"))?;
        TransportSpec::new(
            v,
            kink,
            t.beta,
            t.mu,
            t.c,
            t.kappa,
            self.grid("omega")?,
            t.vbar.unwrap_or(vbar),
        )
        .map_err(at("transport"))
    }

    pub fn dynamical_options(&self) -> DynamicalOptions {
        let mut o = DynamicalOptions::default();
        if let Some(d) = self.transport.as_ref().and_then(|t| t.dynamical.as_ref()) {
            o.delta_mu = d.delta_mu.unwrap_or(o.delta_mu);
            o.time_step = d.time_step.unwrap_or(o.time_step);
            o.x_panel = d.x_panel.unwrap_or(o.x_panel);
            o.t_panel = d.t_panel.unwrap_or(o.t_panel);
            o.plateau_length = d.plateau_length.unwrap_or(o.plateau_length);
            o.check_refinement = d.check_refinement.unwrap_or(o.check_refinement);
        }
        o
    }
}

impl ProfileConfig {
    fn validate(&self, name: &str, positivity: bool) -> Result<()> {
        let values: Vec<f64> = match self {
            ProfileConfig::Constant { value } => vec![*value],
            ProfileConfig::Cosine {
                mean,
                amplitude,
                phase,
                ..
            } => vec![*mean, *amplitude, *phase],
            ProfileConfig::InverseCosine {
                base,
                amplitude,
                phase,
                ..
            } => vec![*base, *amplitude, *phase],
            ProfileConfig::Step { mean, jump, eps } => {
                positive(&format!("{name}.eps"), *eps)?;
                vec![*mean, *jump]
            }
            ProfileConfig::Samples { values } => {
                if values.len() < 4 {
                    return Err(CliError::config(format!(
                        "{name}.values: need at least 4 samples, got {}",
                        values.len()
                    )));
                }
                values.clone()
            }
        };
        for v in &values {
            finite(name, *v)?;
        }
        if positivity {
            self.check_positive(name)?;
        }
        Ok(())
    }

    /// Cheap positivity screen from the parameters alone.
    fn check_positive(&self, name: &str) -> Result<()> {
        let low = match self {
            ProfileConfig::Constant { value } => *value,
            ProfileConfig::Cosine {
                mean, amplitude, ..
            } => mean - amplitude.abs(),
            ProfileConfig::InverseCosine {
                base, amplitude, ..
            } => base - amplitude.abs(),
            ProfileConfig::Step { mean, jump, .. } => mean - 0.5 * jump.abs(),
            ProfileConfig::Samples { values } => values.iter().copied().fold(f64::INFINITY, f64::min),
        };
        if !(low > 0.0) {
            return Err(CliError::config(format!(
                "{name}: must be positive everywhere (minimum {low})"
            )));
        }
        Ok(())
    }

    fn build(&self, length: f64, positivity: bool) -> icft_core::Result<Profile> {
        match self {
            ProfileConfig::Constant { value } => Profile::constant_circle(length, *value, positivity),
            ProfileConfig::Cosine {
                mean,
                amplitude,
                harmonic,
                phase,
            } => Profile::cosine(length, *mean, *amplitude, *harmonic, *phase, positivity),
            ProfileConfig::InverseCosine {
                base,
                amplitude,
                harmonic,
                phase,
            } => Profile::inverse_cosine(length, *base, *amplitude, *harmonic, *phase, positivity),
            ProfileConfig::Step { mean, jump, eps } => {
                Profile::periodic_step(length, *mean, *jump, *eps, positivity)
            }
            ProfileConfig::Samples { values } => {
                Profile::circle_sampled(length, values.clone(), positivity)
            }
        }
    }
}

fn at(field: &'static str) -> impl Fn(icft_core::Error) -> CliError {
    move |e| CliError::config(format!("{field}: {e}"))
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(format!(
            "{name}: must be positive and finite, got {value}"
        )))
    }
}

fn finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(format!("{name}: must be finite, got {value}")))
    }
}
