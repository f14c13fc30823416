use std::str::FromStr;

use icft_core::observables::{
    current_current, fermion_two_point, luttinger_params, CorrelatorKind, LuttingerCouplings,
};
use icft_core::Error;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{Cell, Table};

/// Two-point functions between every `(x1, t1)` of the grid and the fixed
/// point `(x2, t2)`. Values are complex and emitted as re/im pairs; points
/// that coincide on a light cone get NaN and a status marker.
pub fn run_correlate(cfg: &RunConfig) -> Result<Table> {
    let c = cfg
        .correlate
        .as_ref()
        .ok_or_else(|| CliError::config("missing [correlate] block"))?;
    let s = cfg.build_scenario()?;
    let xs = cfg.grid("x")?;
    let ts = cfg.grid("t")?;

    let eval: Box<dyn Fn(f64, f64) -> icft_core::Result<Complex64> + Sync> =
        if c.kind == "fermion" {
            let couplings = LuttingerCouplings::new(c.g2, c.g4, s.constants().v0)
                .map_err(|e| CliError::config(format!("correlate: {e}")))?;
            let params = luttinger_params(&couplings)
                .map_err(|e| CliError::config(format!("correlate: {e}")))?;
            let field = params
                .psi_minus(c.r, c.ell_tilde)
                .map_err(|e| CliError::config(format!("correlate: {e}")))?;
            let s = &s;
            Box::new(move |x1, t1| fermion_two_point(s, &field, c.r, c.r, x1, t1, c.x2, c.t2))
        } else {
            let kind = CorrelatorKind::from_str(&c.kind)
                .map_err(|e| CliError::config(format!("correlate.kind: {e}")))?;
            let s = &s;
            Box::new(move |x1, t1| {
                current_current(s, kind, x1, t1, c.x2, c.t2).map(|v| Complex64::new(v, 0.0))
            })
        };

    let points: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| xs.iter().map(move |&x| (t, x)))
        .collect();
    let values: Vec<icft_core::Result<Complex64>> =
        points.par_iter().map(|&(t, x)| eval(x, t)).collect();

    let mut table = Table::new(["t1", "x1", "re", "im", "status"]);
    for (&(t, x), v) in points.iter().zip(values) {
        let (z, status) = match v {
            Ok(z) => (z, "ok".to_string()),
            Err(Error::CoincidentPoints { .. }) => {
                (Complex64::new(f64::NAN, f64::NAN), "coincident".to_string())
            }
            Err(e) => return Err(e.into()),
        };
        table.push(vec![t.into(), x.into(), z.re.into(), z.im.into(), Cell::Text(status)]);
    }
    table.note("kind", c.kind.clone());
    table.note("x2", format!("{:e}", c.x2));
    table.note("t2", format!("{:e}", c.t2));
    Ok(table)
}
