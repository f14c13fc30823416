use icft_core::observables::{continuity_residuals, mean_values_grid};
use rayon::prelude::*;

use super::RunOptions;
use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{Cell, Table};

pub const COLUMNS: [&str; 6] = [
    "t",
    "x",
    "energy_density",
    "heat_current",
    "charge_density",
    "charge_current",
];

pub const RESIDUAL_COLUMNS: [&str; 4] = [
    "residual_energy",
    "residual_heat_current",
    "residual_charge",
    "residual_charge_current",
];

/// Mean values on the `t × x` grid, time-major. With `check`, the four
/// continuity residuals follow each row.
pub fn run_evolve(cfg: &RunConfig, opts: &RunOptions) -> Result<Table> {
    let s = cfg.build_scenario()?;
    let xs = cfg.grid("x")?;
    let ts = cfg.grid("t")?;
    let means = mean_values_grid(&s, &xs, &ts);
    let points: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| xs.iter().map(move |&x| (t, x)))
        .collect();
    let residuals: Vec<[f64; 4]> = if opts.check {
        points
            .par_iter()
            .map(|&(t, x)| continuity_residuals(&s, x, t))
            .collect()
    } else {
        Vec::new()
    };

    let mut columns: Vec<&str> = COLUMNS.to_vec();
    if opts.check {
        columns.extend(RESIDUAL_COLUMNS);
    }
    let mut table = Table::new(columns);
    for (k, (&(t, x), m)) in points.iter().zip(&means).enumerate() {
        let mut row: Vec<Cell> = vec![
            t.into(),
            x.into(),
            m.energy_density.into(),
            m.heat_current.into(),
            m.charge_density.into(),
            m.charge_current.into(),
        ];
        if let Some(r) = residuals.get(k) {
            row.extend(r.iter().map(|v| Cell::Num(*v)));
        }
        table.push(row);
    }
    if opts.check {
        let worst = residuals
            .iter()
            .flat_map(|r| r.iter().map(|v| v.abs()))
            .fold(0.0, f64::max);
        table.note("max_continuity_residual", format!("{worst:e}"));
    }
    log::info!("evolve: {} rows", table.rows.len());
    Ok(table)
}
