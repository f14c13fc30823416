use std::f64::consts::PI;

use icft_core::circlemaps::{anomaly_s, bott_cocycle, schwarzian, CircleMap, Lift};
use icft_core::lightcone::{check_group_property, check_pde, LightConeFrame};
use icft_core::numerics::{integrate, Jet, QuadratureSpec};
use icft_core::observables::{
    continuity_residuals, current_current, luttinger_params, mean_values, CorrelatorKind,
    LuttingerCouplings, Normalization, Scenario,
};
use icft_core::transport::{
    closed_form, green_kubo_drude, green_kubo_regular, sinh_fourier, thermal_electrical,
    ConductivityResult, DynamicalResponse, TransportSpec,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::transport::{deviation, wf_expected};
use super::RunOptions;
use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{Cell, Table};
use crate::presets;

/// Size of the perturbation injected by the corrupt-inverse hook.
const CORRUPTION: f64 = 1e-6;

/// One invariant with its per-sample residuals.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub threshold: f64,
    pub residuals: Vec<f64>,
}

impl Check {
    fn new(name: &str, threshold: f64, residuals: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            threshold,
            residuals,
        }
    }

    /// Largest residual; NaN if any residual is NaN.
    pub fn residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m: f64, r| {
            if r.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(r.abs())
            }
        })
    }

    pub fn passed(&self) -> bool {
        self.residual() <= self.threshold
    }

    /// Counts of residuals per decade, `(exponent, count)` ascending; zeros
    /// are grouped under exponent `-inf` (rendered as `0`).
    pub fn histogram(&self) -> Vec<(Option<i32>, usize)> {
        let mut bins: std::collections::BTreeMap<Option<i32>, usize> = Default::default();
        for r in &self.residuals {
            let key = if *r == 0.0 || r.is_nan() {
                None
            } else {
                Some(r.abs().log10().floor() as i32)
            };
            *bins.entry(key).or_default() += 1;
        }
        bins.into_iter().collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn table(&self, verbose: bool) -> Table {
        let mut t = Table::new(["check", "residual", "threshold", "samples", "status"]);
        for c in &self.checks {
            t.push(vec![
                c.name.clone().into(),
                c.residual().into(),
                c.threshold.into(),
                Cell::Text(c.residuals.len().to_string()),
                if c.passed() { "PASS" } else { "FAIL" }.into(),
            ]);
            if verbose {
                let bins: Vec<String> = c
                    .histogram()
                    .into_iter()
                    .map(|(e, n)| match e {
                        Some(e) => format!("1e{e}:{n}"),
                        None => format!("0:{n}"),
                    })
                    .collect();
                t.note(format!("histogram_{}", c.name), bins.join(" "));
            }
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        t.note("failed", failed.to_string());
        t
    }
}

/// `f` with an inverse that is off by up to [`CORRUPTION`]; a negative control
/// for the group-property check.
struct CorruptInverse(CircleMap);

impl Lift for CorruptInverse {
    fn period(&self) -> f64 {
        self.0.period()
    }
    fn image_period(&self) -> f64 {
        self.0.image_period()
    }
    fn jet(&self, x: f64) -> Jet {
        self.0.jet(x)
    }
    fn inverse(&self, y: f64) -> f64 {
        self.0.inverse(y) + CORRUPTION * (y * 1.3).sin()
    }
    fn describe(&self) -> String {
        format!("corrupt inverse of {:?}", self.0)
    }
}

/// Run every invariant that applies to the configured scenario and transport
/// spec. Without either block, the default preset's scenario is used.
pub fn run_verify(cfg: &RunConfig, opts: &RunOptions) -> Result<(Table, bool)> {
    let report = verify_report(cfg)?;
    Ok((report.table(opts.verbose), report.passed()))
}

pub fn verify_report(cfg: &RunConfig) -> Result<VerifyReport> {
    let mut cfg = cfg.clone();
    if cfg.scenario.is_none() && cfg.transport.is_none() {
        let base = crate::config::parse(&format!("preset = \"{}\"\n", presets::DEFAULT))?;
        cfg.scenario = base.scenario;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.verify.seed);
    let n = cfg.verify.samples;
    let mut checks = Vec::new();
    if cfg.scenario.is_some() {
        let s = cfg.build_scenario()?;
        scenario_checks(&s, n, cfg.verify.corrupt_inverse, &mut rng, &mut checks)?;
    }
    generic_checks(&mut rng, &mut checks)?;
    if cfg.transport.is_some() {
        let spec = cfg.build_transport()?;
        transport_checks(&spec, &cfg, &mut checks)?;
    }
    for c in &checks {
        log::info!(
            "{}: {:e} (threshold {:e})",
            c.name,
            c.residual(),
            c.threshold
        );
    }
    Ok(VerifyReport { checks })
}

fn scenario_checks(
    s: &Scenario,
    n: usize,
    corrupt: bool,
    rng: &mut ChaCha8Rng,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let l = s.length();
    let v0 = s.constants().v0;
    let f = if corrupt {
        CircleMap::new(CorruptInverse(s.f().clone()))
    } else {
        s.f().clone()
    };
    let frame = LightConeFrame::new(f.clone(), v0)?;
    let v = &s.profiles().v;
    let c = s.profiles().c;
    let t_max = 0.5 * l / v0;
    let mut x = || rng.gen_range(-0.5 * l..0.5 * l);
    let xs: Vec<f64> = (0..n).map(|_| x()).collect();
    let mut t = || rng.gen_range(-t_max..t_max);
    let ts: Vec<(f64, f64)> = (0..n).map(|_| (t(), t())).collect();

    let lift: Vec<f64> = xs
        .iter()
        .flat_map(|&x| {
            [
                (f.value(x + l) - f.value(x) - l) / l,
                (s.g().value(x + l) - s.g().value(x) - l) / l,
            ]
        })
        .collect();
    checks.push(Check::new("circlemaps.lift_property", 1e-10, lift));
    let inverse: Vec<f64> = xs.iter().map(|&x| f.inverse(f.value(x)) - x).collect();
    checks.push(Check::new("circlemaps.inverse", 1e-10, inverse));

    let group: Vec<f64> = xs
        .par_iter()
        .zip(&ts)
        .map(|(&x, &(t1, t2))| check_group_property(&frame, x, t1, t2))
        .collect();
    checks.push(Check::new("lightcone.group_property", 1e-9, group));
    let pde: Vec<f64> = xs
        .par_iter()
        .zip(&ts)
        .map(|(&x, &(t, _))| check_pde(&frame, v, x, t))
        .collect();
    checks.push(Check::new("lightcone.pde", 1e-6, pde));

    let m = n.min(256);
    let continuity: Vec<f64> = xs[..m]
        .par_iter()
        .zip(&ts[..m])
        .flat_map_iter(|(&x, &(t, _))| continuity_residuals(s, x, t))
        .collect();
    checks.push(Check::new("observables.continuity", 1e-6, continuity));

    let renorm = s.renormalized(Normalization {
        f_scale: 1.7,
        f_offset: 0.3,
        g_scale: 0.6,
        g_offset: -0.2,
        mu0: Some(s.constants().mu0 + 0.25),
    })?;
    let m = n.min(128);
    let mut invariance = Vec::with_capacity(6 * m);
    for k in 0..m {
        let (x, (t, _)) = (xs[k], ts[k]);
        let (a, b) = (mean_values(s, x, t), mean_values(&renorm, x, t));
        invariance.extend([
            a.energy_density - b.energy_density,
            a.heat_current - b.heat_current,
            a.charge_density - b.charge_density,
            a.charge_current - b.charge_current,
        ]);
        let (x2, t2) = (xs[(k + 1) % n], ts[(k + 1) % n].1);
        for kind in [CorrelatorKind::HeatHeat, CorrelatorKind::HeatCharge] {
            if let (Ok(a), Ok(b)) = (
                current_current(s, kind, x, t, x2, t2),
                current_current(&renorm, kind, x, t, x2, t2),
            ) {
                invariance.push((a - b) / a.abs().max(1.0));
            }
        }
    }
    checks.push(Check::new("observables.normalization", 1e-9, invariance));

    let fmap = s.f();
    let grid: Vec<f64> = (0..64).map(|k| -0.5 * l + l * k as f64 / 64.0).collect();
    let anomaly: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let vx = v.value(x);
            anomaly_s(v, c, x) - c * vx * vx * schwarzian(fmap, x) / (12.0 * PI)
        })
        .collect();
    checks.push(Check::new("circlemaps.anomaly_s", 1e-8, anomaly));

    let inv = fmap.inverse_map();
    let fg = fmap.compose(s.g())?;
    let mut schwarz = Vec::with_capacity(128);
    for &x in &xs[..n.min(64)] {
        let d = fmap.derivative(x);
        schwarz.push(schwarzian(&inv, fmap.value(x)) + schwarzian(fmap, x) / (d * d));
        let gx = s.g().value(x);
        let chain = schwarzian(fmap, gx) * s.g().derivative(x).powi(2) + schwarzian(s.g(), x);
        schwarz.push(schwarzian(&fg, x) - chain);
    }
    checks.push(Check::new("circlemaps.schwarzian_laws", 1e-8, schwarz));

    let id = CircleMap::identity(l);
    let vanishing = vec![bott_cocycle(fmap, &id)?, bott_cocycle(fmap, &inv)?];
    checks.push(Check::new("circlemaps.bott_vanishing", 1e-9, vanishing));

    let mut cocycle = Vec::new();
    for _ in 0..3 {
        let h = random_trig(l, rng)?;
        let (f1, f2, f3) = (fmap, s.g(), &h);
        let f12 = f1.compose(f2)?;
        let f23 = f2.compose(f3)?;
        let lhs = bott_cocycle(f1, f2)? + bott_cocycle(&f12, f3)?;
        let rhs = bott_cocycle(f2, f3)? + bott_cocycle(f1, &f23)?;
        cocycle.push(lhs - rhs);
    }
    checks.push(Check::new("circlemaps.bott_cocycle", 1e-8, cocycle));

    let mut gf = Vec::new();
    for k in 1..=3u32 {
        let phase = rng.gen_range(0.0..2.0 * PI);
        gf.push(gelfand_fuchs_defect(fmap, l, k, phase)?);
    }
    checks.push(Check::new("circlemaps.gelfand_fuchs", 1e-6, gf));
    Ok(())
}

/// `x + Σ a_k sin(2π k x / L + φ_k)` with total slope excursion below 0.6.
fn random_trig(l: f64, rng: &mut ChaCha8Rng) -> Result<CircleMap> {
    let mut harmonics = Vec::new();
    for k in 1..=2u32 {
        let a = rng.gen_range(-0.3..0.3) * l / (2.0 * PI * f64::from(k));
        harmonics.push((k, a, rng.gen_range(0.0..2.0 * PI)));
    }
    Ok(CircleMap::trig(l, harmonics)?)
}

/// `d/dε B(F, id + εζ)` at 0 by central difference, minus `½∫ ζ (F‴/F′ − (F″/F′)²)`.
fn gelfand_fuchs_defect(f: &CircleMap, l: f64, k: u32, phase: f64) -> Result<f64> {
    let eps = 1e-5;
    let amp = l / (2.0 * PI * f64::from(k));
    let shift = |e: f64| CircleMap::trig(l, vec![(k, e * amp, phase)]);
    let slope = (bott_cocycle(f, &shift(eps)?)? - bott_cocycle(f, &shift(-eps)?)?) / (2.0 * eps);
    let w = 2.0 * PI * f64::from(k) / l;
    let points = 4096;
    let h = l / points as f64;
    let expected = 0.5
        * h
        * (0..points)
            .map(|j| {
                let x = -0.5 * l + h * j as f64;
                let jet = f.jet(x);
                let r = jet.d2 / jet.d1;
                amp * (w * x + phase).sin() * (jet.d3 / jet.d1 - r * r)
            })
            .sum::<f64>();
    Ok(slope - expected)
}

/// `∫ e^{ibξ} / sinh^p(ξ + ia) dξ` by adaptive quadrature along
/// `Im ξ = π/2 - a`, where the denominator is `(i cosh u)^p`. No pole lies
/// between this contour and the real line for `0 < a < π`, and the integrand
/// stays bounded by `e^{-b(π/2 - a)}` instead of peaking like `1/a^p`.
pub fn sinh_fourier_quadrature(a: f64, b: f64, power: u32) -> Result<(f64, f64)> {
    const EDGES: [f64; 11] = [-40.0, -12.0, -4.0, -1.5, -0.5, 0.0, 0.5, 1.5, 4.0, 12.0, 40.0];
    let c = 0.5 * PI - a;
    let scale = (-b * c).exp();
    let spec = QuadratureSpec::new(1e-11, 1e-13 * scale, 20_000)?;
    let integrand =
        |u: f64| Complex64::from_polar(scale, b * u) / (Complex64::i() * u.cosh()).powi(power as i32);
    let mut total = (0.0, 0.0);
    for w in EDGES.windows(2) {
        total.0 += integrate(|u| integrand(u).re, w[0], w[1], &spec)?;
        total.1 += integrate(|u| integrand(u).im, w[0], w[1], &spec)?;
    }
    Ok(total)
}

/// Checks that do not depend on the configured physics.
fn generic_checks(rng: &mut ChaCha8Rng, checks: &mut Vec<Check>) -> Result<()> {
    let mut table = Vec::new();
    for _ in 0..20 {
        let a = rng.gen_range(0.1..PI - 0.1);
        let b = rng.gen_range(-4.0..4.0);
        let power = if rng.gen_bool(0.5) { 4 } else { 2 };
        let closed = sinh_fourier(a, b, power)?;
        let (re, im) = sinh_fourier_quadrature(a, b, power)?;
        table.push((re - closed.re) / closed.re.abs());
        table.push(im / closed.re.abs());
    }
    let limits = [
        sinh_fourier(PI / 2.0, 0.0, 2)?.re + 2.0,
        sinh_fourier(PI / 2.0, 0.0, 4)?.re - 4.0 / 3.0,
    ];
    checks.push(Check::new("transport.sinh_fourier", 1e-8, table));
    checks.push(Check::new("transport.sinh_fourier_limits", 1e-10, limits.to_vec()));

    let mut sugawara = Vec::new();
    for _ in 0..50 {
        let g4 = rng.gen_range(-1.0..3.0);
        let g2 = rng.gen_range(-0.99..0.99) * (2.0 + g4);
        let p = luttinger_params(&LuttingerCouplings::new(g2, g4, 1.0)?)?;
        for r in [1, -1] {
            sugawara.push(p.psi_plus(r, 1.0)?.sugawara_defect(p.kappa()));
        }
    }
    checks.push(Check::new("observables.sugawara", 1e-12, sugawara));

    let free = luttinger_params(&LuttingerCouplings::new(0.0, 0.0, 1.3)?)?;
    let mut reduction = vec![free.v - 1.3, free.k - 1.0];
    let (dp, dm) = free.weights(1);
    reduction.extend([dp - 0.5, dm]);
    let (dp, dm) = free.weights(-1);
    reduction.extend([dp, dm - 0.5]);
    checks.push(Check::new("observables.free_fermion", 1e-14, reduction));
    Ok(())
}

fn transport_checks(spec: &TransportSpec, cfg: &RunConfig, checks: &mut Vec<Check>) -> Result<()> {
    let reference = spec.drude_reference();
    let closed = closed_form(spec)?;
    let positive: Vec<usize> = (0..spec.omega_grid().len())
        .filter(|&k| spec.omega_grid()[k] > 0.0)
        .collect();

    let wf_closed: Vec<f64> = closed
        .omegas
        .iter()
        .zip(&closed.wf_regular_ratio)
        .filter(|(_, r)| r.is_finite())
        .map(|(&w, r)| r / wf_expected(spec.beta(), w) - 1.0)
        .collect();
    checks.push(Check::new("transport.wf_closed", 1e-12, wf_closed));

    let gk_drude = green_kubo_drude(spec)?;
    checks.push(Check::new(
        "transport.drude_greenkubo",
        1e-4,
        vec![deviation(&gk_drude, &reference)],
    ));
    let gk: Vec<f64> = positive
        .par_iter()
        .map(|&k| {
            green_kubo_regular(spec, spec.omega_grid()[k])
                .map(|m| deviation(&m, &closed.regular[k]))
                .unwrap_or(f64::NAN)
        })
        .collect();
    checks.push(Check::new("transport.closed_vs_greenkubo", 2e-3, gk));

    if cfg.verify.dynamical {
        let resp = DynamicalResponse::compute(spec, &cfg.dynamical_options())?;
        checks.push(Check::new(
            "transport.drude_dynamical",
            1e-4,
            vec![deviation(&resp.drude(), &reference)],
        ));
        let mut dev = Vec::new();
        let mut regs = Vec::new();
        for &k in &positive {
            let m = resp.regular(spec.omega_grid()[k])?;
            dev.push(deviation(&m, &closed.regular[k]));
            regs.push(m);
        }
        checks.push(Check::new("transport.closed_vs_dynamical", 2e-3, dev));
        let omegas: Vec<f64> = positive.iter().map(|&k| spec.omega_grid()[k]).collect();
        let r = ConductivityResult::assemble(spec, omegas.clone(), resp.drude(), regs, vec![]);
        let te = thermal_electrical(&r, spec.beta(), spec.mu());
        let wf: Vec<f64> = omegas
            .iter()
            .zip(&te.wf_regular_ratio)
            .filter(|(_, r)| r.is_finite())
            .map(|(&w, r)| r / wf_expected(spec.beta(), w) - 1.0)
            .collect();
        checks.push(Check::new("transport.wf_dynamical", 3e-3, wf));
    }
    Ok(())
}
