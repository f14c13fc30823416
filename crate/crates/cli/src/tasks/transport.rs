use std::f64::consts::PI;
use std::fmt;

use icft_core::transport::{
    closed_form, green_kubo_drude, green_kubo_regular, ConductivityResult, DynamicalOptions,
    DynamicalResponse, Matrix2, TransportSpec,
};
use rayon::prelude::*;

use super::RunOptions;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{format_float, Cell, Table};

/// Entries below this on both sides count as agreeing exactly.
const DEV_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Closed,
    GreenKubo,
    Dynamical,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Closed, Route::GreenKubo, Route::Dynamical];

    /// Parse `all` or a comma-separated list; duplicates are dropped.
    pub fn parse_list(s: &str) -> Result<Vec<Route>> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let routes: &[Route] = match item {
                "all" => &Route::ALL,
                "closed" => &[Route::Closed],
                "greenkubo" => &[Route::GreenKubo],
                "dynamical" => &[Route::Dynamical],
                other => {
                    return Err(CliError::config(format!(
                        "--routes: unknown route '{other}' (expected closed, greenkubo, dynamical or all)"
                    )))
                }
            };
            for r in routes {
                if !out.contains(r) {
                    out.push(*r);
                }
            }
        }
        if out.is_empty() {
            return Err(CliError::config("--routes: no route selected"));
        }
        Ok(out)
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Closed => "closed",
            Route::GreenKubo => "greenkubo",
            Route::Dynamical => "dynamical",
        })
    }
}

/// One route's output on the frequency grid.
struct RouteOutput {
    route: Route,
    drude: Option<Matrix2>,
    rows: Vec<std::result::Result<Matrix2, String>>,
    i_values: Vec<f64>,
    wf: Vec<f64>,
    wf_drude: f64,
    notes: Vec<(String, String)>,
}

impl RouteOutput {
    fn failed(route: Route, n: usize, msg: String) -> Self {
        Self {
            route,
            drude: None,
            rows: vec![Err(msg.clone()); n],
            i_values: vec![f64::NAN; n],
            wf: vec![f64::NAN; n],
            wf_drude: f64::NAN,
            notes: vec![(format!("error_{route}"), msg)],
        }
    }

    /// Fill `I` and the WF ratios from the successful rows.
    fn finish(
        route: Route,
        spec: &TransportSpec,
        drude: Matrix2,
        rows: Vec<std::result::Result<Matrix2, String>>,
        notes: Vec<(String, String)>,
    ) -> Self {
        let n = rows.len();
        let ok: Vec<usize> = (0..n).filter(|&k| rows[k].is_ok()).collect();
        let omegas: Vec<f64> = ok.iter().map(|&k| spec.omega_grid()[k]).collect();
        let regs: Vec<Matrix2> = ok.iter().map(|&k| *rows[k].as_ref().unwrap()).collect();
        let implied: Vec<f64> = regs
            .iter()
            .map(|m| 2.0 * PI * spec.beta() * m[0][0] / spec.kappa())
            .collect();
        let r = ConductivityResult::assemble(spec, omegas, drude, regs, implied.clone());
        let (mut i_values, mut wf) = (vec![f64::NAN; n], vec![f64::NAN; n]);
        for (j, &k) in ok.iter().enumerate() {
            i_values[k] = implied[j];
            wf[k] = r.wf_regular_ratio[j];
        }
        Self {
            route,
            drude: Some(drude),
            rows,
            i_values,
            wf,
            wf_drude: r.wf_drude_ratio,
            notes,
        }
    }
}

fn run_closed(spec: &TransportSpec) -> RouteOutput {
    let n = spec.omega_grid().len();
    match closed_form(spec) {
        Ok(r) => RouteOutput {
            route: Route::Closed,
            drude: Some(r.drude),
            rows: r.regular.iter().map(|m| Ok(*m)).collect(),
            i_values: r.i_values.clone(),
            wf: r.wf_regular_ratio.clone(),
            wf_drude: r.wf_drude_ratio,
            notes: Vec::new(),
        },
        Err(e) => RouteOutput::failed(Route::Closed, n, e.to_string()),
    }
}

fn run_green_kubo(spec: &TransportSpec) -> RouteOutput {
    let n = spec.omega_grid().len();
    let drude = match green_kubo_drude(spec) {
        Ok(d) => d,
        Err(e) => return RouteOutput::failed(Route::GreenKubo, n, e.to_string()),
    };
    let rows = spec
        .omega_grid()
        .par_iter()
        .map(|&w| green_kubo_regular(spec, w).map_err(|e| e.to_string()))
        .collect();
    RouteOutput::finish(Route::GreenKubo, spec, drude, rows, Vec::new())
}

fn run_dynamical(spec: &TransportSpec, opts: &DynamicalOptions) -> RouteOutput {
    let n = spec.omega_grid().len();
    let resp = match DynamicalResponse::compute(spec, opts) {
        Ok(r) => r,
        Err(e) => return RouteOutput::failed(Route::Dynamical, n, e.to_string()),
    };
    let rows = spec
        .omega_grid()
        .iter()
        .map(|&w| resp.regular(w).map_err(|e| e.to_string()))
        .collect();
    let mut notes = vec![
        ("transit_time".to_string(), format!("{:e}", resp.transit_time())),
        ("plateau_spread".to_string(), format!("{:e}", resp.plateau_spread())),
    ];
    if let Some(c) = resp.refinement_change() {
        notes.push(("refinement_change".to_string(), format!("{c:e}")));
    }
    RouteOutput::finish(Route::Dynamical, spec, resp.drude(), rows, notes)
}

/// `(π²/3β)(1 + (ωβ/2π)²)`.
pub fn wf_expected(beta: f64, omega: f64) -> f64 {
    PI * PI / (3.0 * beta) * (1.0 + (omega * beta / (2.0 * PI)).powi(2))
}

/// Largest relative deviation of `a` from `reference`, entries tiny on both
/// sides counting as zero.
pub fn deviation(a: &Matrix2, reference: &Matrix2) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let (x, y) = (a[i][j], reference[i][j]);
            if x.abs() < DEV_FLOOR && y.abs() < DEV_FLOOR {
                continue;
            }
            worst = worst.max((x - y).abs() / y.abs().max(DEV_FLOOR));
        }
    }
    worst
}

fn matrix_text(m: &Matrix2, precision: usize) -> String {
    let f = |x: f64| format_float(x, precision);
    format!(
        "[[{}, {}], [{}, {}]]",
        f(m[0][0]),
        f(m[0][1]),
        f(m[1][0]),
        f(m[1][1])
    )
}

/// Per-frequency conductivities of every requested route side by side,
/// deviations from the closed form, and a summary of Drude weights and
/// Wiedemann-Franz ratios. A failing route only blanks its own columns.
pub fn run_transport(cfg: &RunConfig, opts: &RunOptions) -> Result<Table> {
    let routes = Route::parse_list(opts.routes.as_deref().unwrap_or("closed"))?;
    let spec = cfg.build_transport()?;
    let dyn_opts = cfg.dynamical_options();
    let outputs: Vec<RouteOutput> = routes
        .iter()
        .map(|r| {
            let started = std::time::Instant::now();
            let out = match r {
                Route::Closed => run_closed(&spec),
                Route::GreenKubo => run_green_kubo(&spec),
                Route::Dynamical => run_dynamical(&spec, &dyn_opts),
            };
            log::info!("route {r}: {:.2?}", started.elapsed());
            out
        })
        .collect();

    let mut columns = vec!["omega".to_string(), "wf_expected".to_string()];
    for o in &outputs {
        for c in ["k11", "k12", "k21", "k22", "I", "wf", "error"] {
            columns.push(format!("{}_{c}", o.route));
        }
    }
    let closed = outputs.iter().find(|o| o.route == Route::Closed);
    let compared: Vec<&RouteOutput> = match closed {
        Some(_) => outputs.iter().filter(|o| o.route != Route::Closed).collect(),
        None => Vec::new(),
    };
    columns.extend(compared.iter().map(|o| format!("dev_{}", o.route)));

    let mut table = Table::new(columns);
    let precision = cfg.output.precision;
    table.note(
        "drude_reference",
        matrix_text(&spec.drude_reference(), precision),
    );
    for o in &outputs {
        if let Some(d) = &o.drude {
            table.note(format!("drude_{}", o.route), matrix_text(d, precision));
            table.note(
                format!("wf_drude_{}", o.route),
                format_float(o.wf_drude, precision),
            );
        }
        for (k, v) in &o.notes {
            table.note(format!("{}_{k}", o.route), v.clone());
        }
    }

    for (k, &w) in spec.omega_grid().iter().enumerate() {
        let mut row: Vec<Cell> = vec![w.into(), wf_expected(spec.beta(), w).into()];
        for o in &outputs {
            match &o.rows[k] {
                Ok(m) => {
                    row.extend([m[0][0], m[0][1], m[1][0], m[1][1]].map(Cell::Num));
                    row.push(o.i_values[k].into());
                    row.push(o.wf[k].into());
                    row.push("ok".into());
                }
                Err(e) => {
                    row.extend([f64::NAN; 6].map(Cell::Num));
                    row.push(e.clone().into());
                }
            }
        }
        if let Some(c) = closed {
            for o in &compared {
                let dev = match (&o.rows[k], &c.rows[k]) {
                    (Ok(a), Ok(b)) => deviation(a, b),
                    _ => f64::NAN,
                };
                row.push(dev.into());
            }
        }
        table.push(row);
    }
    Ok(table)
}
