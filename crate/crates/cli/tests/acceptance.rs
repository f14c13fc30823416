//! Acceptance criteria 1 to 12, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach the test log;
//! the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use icft_cli::config::parse;
use icft_cli::tasks::sinh_fourier_quadrature;
use icft_core::circlemaps::{anomaly_s, bott_cocycle, schwarzian, CircleMap};
use icft_core::lightcone::{max_group_residual, max_pde_residual};
use icft_core::observables::{
    continuity_residuals, current_current, fermion_two_point, luttinger_params, mean_values,
    CorrelatorKind, LuttingerCouplings, Normalization, Scenario,
};
use icft_core::transport::{
    closed_form, green_kubo_drude, green_kubo_regular, sinh_fourier, thermal_electrical,
    ConductivityResult, DynamicalOptions, DynamicalResponse, Matrix2, TransportSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn preset_scenario(name: &str) -> Scenario {
    parse(&format!("preset = \"{name}\"\n"))
        .unwrap()
        .build_scenario()
        .unwrap()
}

fn bump_spec() -> TransportSpec {
    parse("preset = \"gaussian-bump-transport\"\n")
        .unwrap()
        .build_transport()
        .unwrap()
}

/// Inhomogeneous in all three profiles at once.
fn mixed_scenario() -> Scenario {
    parse(
        r#"
preset = "cosine-velocity"
[scenario]
v = { kind = "inverse-cosine", base = 1.0, amplitude = 0.3 }
beta = { kind = "cosine", mean = 1.0, amplitude = 0.2, harmonic = 2, phase = 0.4 }
mu = { kind = "cosine", mean = 0.1, amplitude = 0.3, phase = 1.1 }
"#,
    )
    .unwrap()
    .build_scenario()
    .unwrap()
}

fn trig_map(rng: &mut ChaCha8Rng) -> CircleMap {
    let l = 2.0 * PI;
    let a1: f64 = rng.gen_range(-0.4..0.4);
    let k = rng.gen_range(2..=4u32);
    let a2 = rng.gen_range(-0.35..0.35) * (1.0 - a1.abs() / 0.4).max(0.1) / f64::from(k);
    CircleMap::trig(
        l,
        vec![
            (1, a1, rng.gen_range(0.0..l)),
            (k, a2, rng.gen_range(0.0..l)),
        ],
    )
    .unwrap()
}

/// Largest relative deviation, entries below 1e-6 on both sides counting as equal.
fn rel_dev(a: &Matrix2, b: &Matrix2) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            if a[i][j].abs() < 1e-6 && b[i][j].abs() < 1e-6 {
                continue;
            }
            worst = worst.max((a[i][j] - b[i][j]).abs() / b[i][j].abs());
        }
    }
    worst
}

fn max_abs(m: &Matrix2) -> f64 {
    m.iter().flatten().fold(0.0, |a: f64, b| a.max(b.abs()))
}

fn c1_homogeneous() -> Outcome {
    let s = preset_scenario("constant");
    let mut worst: f64 = 0.0;
    for k in 0..64 {
        let (x, t) = (-3.0 + 0.1 * k as f64, 0.37 * k as f64);
        let m = mean_values(&s, x, t);
        worst = worst
            .max((m.energy_density - PI / 6.0).abs())
            .max(m.heat_current.abs())
            .max(m.charge_density.abs())
            .max(m.charge_current.abs());
    }
    outcome(worst < 1e-12, format!("max deviation {worst:.2e} (tol 1e-12)"))
}

fn c2_light_cone() -> Outcome {
    let s = preset_scenario("cosine-velocity");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let triples: Vec<(f64, f64, f64)> = (0..1000)
        .map(|_| {
            (
                rng.gen_range(-PI..PI),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
            )
        })
        .collect();
    let pairs: Vec<(f64, f64)> = triples.iter().map(|&(x, t, _)| (x, t)).collect();
    let group = max_group_residual(s.frame(), &triples);
    let pde = max_pde_residual(s.frame(), &s.profiles().v, &pairs);
    outcome(
        group < 1e-9 && pde < 1e-6,
        format!("group {group:.2e} (tol 1e-9), pde {pde:.2e} (tol 1e-6) on 1000 points"),
    )
}

fn c3_continuity() -> Outcome {
    let s = mixed_scenario();
    let mut worst = [0.0f64; 4];
    for i in 0..32 {
        for j in 0..32 {
            let x = -PI + 2.0 * PI * i as f64 / 32.0;
            let t = 3.0 * j as f64 / 31.0;
            for (w, r) in worst.iter_mut().zip(continuity_residuals(&s, x, t)) {
                *w = w.max(r.abs());
            }
        }
    }
    let max = worst.iter().fold(0.0f64, |a, b| a.max(*b));
    outcome(
        max < 1e-6,
        format!(
            "residuals E {:.2e}, J {:.2e}, rho {:.2e}, j {:.2e} on 32x32 (tol 1e-6)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn c4_normalization() -> Outcome {
    let s = mixed_scenario();
    let mu0 = s.constants().mu0;
    let norms = [
        Normalization {
            f_scale: 2.5,
            f_offset: -0.7,
            ..Default::default()
        },
        Normalization {
            g_scale: 0.4,
            g_offset: 1.3,
            ..Default::default()
        },
        Normalization {
            mu0: Some(mu0 - 0.6),
            ..Default::default()
        },
        Normalization {
            f_scale: 0.8,
            f_offset: 0.2,
            g_scale: 1.9,
            g_offset: -0.5,
            mu0: Some(mu0 + 0.35),
        },
    ];
    let kinds = [
        CorrelatorKind::HeatHeat,
        CorrelatorKind::ChargeCharge,
        CorrelatorKind::HeatCharge,
        CorrelatorKind::ChargeHeat,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for n in norms {
        let r = s.renormalized(n).unwrap();
        for _ in 0..40 {
            let (x, t) = (rng.gen_range(-PI..PI), rng.gen_range(0.0..4.0));
            let (a, b) = (mean_values(&s, x, t), mean_values(&r, x, t));
            for d in [
                a.energy_density - b.energy_density,
                a.heat_current - b.heat_current,
                a.charge_density - b.charge_density,
                a.charge_current - b.charge_current,
            ] {
                worst = worst.max(d.abs());
            }
            let (x2, t2) = (rng.gen_range(-PI..PI), rng.gen_range(0.0..4.0));
            for kind in kinds {
                if let (Ok(a), Ok(b)) = (
                    current_current(&s, kind, x, t, x2, t2),
                    current_current(&r, kind, x, t, x2, t2),
                ) {
                    // Near the light cone the correlator grows without bound;
                    // compare it on its own scale there.
                    worst = worst.max((a - b).abs() / a.abs().max(1.0));
                }
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("max change {worst:.2e} over 4 reparametrizations, relative above unit size (tol 1e-9)"),
    )
}

fn c5_anomaly() -> Outcome {
    let s = preset_scenario("cosine-velocity");
    let (v, c) = (&s.profiles().v, s.profiles().c);
    let mut anomaly: f64 = 0.0;
    for k in 0..64 {
        let x = -PI + 2.0 * PI * k as f64 / 64.0;
        let vx = v.value(x);
        let d = anomaly_s(v, c, x) - c * vx * vx * schwarzian(s.f(), x) / (12.0 * PI);
        anomaly = anomaly.max(d.abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut comp, mut inv): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let (f, g) = (trig_map(&mut rng), trig_map(&mut rng));
        let fg = f.compose(&g).unwrap();
        let finv = f.inverse_map();
        for _ in 0..8 {
            let x = rng.gen_range(-PI..PI);
            let chain = schwarzian(&f, g.value(x)) * g.derivative(x).powi(2) + schwarzian(&g, x);
            comp = comp.max((schwarzian(&fg, x) - chain).abs());
            let d = f.derivative(x);
            inv = inv.max((schwarzian(&finv, f.value(x)) + schwarzian(&f, x) / (d * d)).abs());
        }
    }
    outcome(
        anomaly < 1e-8 && comp < 1e-8 && inv < 1e-8,
        format!("anomaly {anomaly:.2e}, composition {comp:.2e}, inversion {inv:.2e} (tol 1e-8)"),
    )
}

fn c6_bott() -> Outcome {
    let l = 2.0 * PI;
    let s = preset_scenario("cosine-velocity");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut maps = vec![s.f().clone(), s.g().clone()];
    maps.extend((0..4).map(|_| trig_map(&mut rng)));
    let id = CircleMap::identity(l);
    let mut vanish: f64 = 0.0;
    for f in &maps {
        vanish = vanish
            .max(bott_cocycle(f, &id).unwrap().abs())
            .max(bott_cocycle(f, &f.inverse_map()).unwrap().abs());
    }
    let mut cocycle: f64 = 0.0;
    for _ in 0..20 {
        let (f1, f2, f3) = (trig_map(&mut rng), trig_map(&mut rng), trig_map(&mut rng));
        let f12 = f1.compose(&f2).unwrap();
        let f23 = f2.compose(&f3).unwrap();
        let lhs = bott_cocycle(&f1, &f2).unwrap() + bott_cocycle(&f12, &f3).unwrap();
        let rhs = bott_cocycle(&f2, &f3).unwrap() + bott_cocycle(&f1, &f23).unwrap();
        cocycle = cocycle.max((lhs - rhs).abs());
    }
    let mut gf: f64 = 0.0;
    let eps = 1e-5;
    for f in &maps {
        for k in 1..=3u32 {
            let (amp, phase) = (rng.gen_range(0.2..1.0), rng.gen_range(0.0..l));
            let shift = |e: f64| CircleMap::trig(l, vec![(k, e * amp, phase)]).unwrap();
            let slope = (bott_cocycle(f, &shift(eps)).unwrap()
                - bott_cocycle(f, &shift(-eps)).unwrap())
                / (2.0 * eps);
            let n = 4096;
            let h = l / n as f64;
            let expected = 0.5
                * h
                * (0..n)
                    .map(|j| {
                        let x = -PI + h * j as f64;
                        let jet = f.jet(x);
                        let r = jet.d2 / jet.d1;
                        amp * (f64::from(k) * x + phase).sin() * (jet.d3 / jet.d1 - r * r)
                    })
                    .sum::<f64>();
            gf = gf.max((slope - expected).abs());
        }
    }
    outcome(
        vanish < 1e-9 && cocycle < 1e-8 && gf < 1e-6,
        format!(
            "vanishing {vanish:.2e} (tol 1e-9), cocycle {cocycle:.2e} on 20 triples (tol 1e-8), \
             Gelfand-Fuchs {gf:.2e} (tol 1e-6)"
        ),
    )
}

fn c7_sinh_table() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = rng.gen_range(0.1..PI - 0.1);
        let b = rng.gen_range(-4.0..4.0);
        let power = if rng.gen_bool(0.5) { 4 } else { 2 };
        let closed = sinh_fourier(a, b, power).unwrap();
        let (re, im) = sinh_fourier_quadrature(a, b, power).unwrap();
        worst = worst
            .max((re - closed.re).abs() / closed.re.abs())
            .max((im - closed.im).abs() / closed.re.abs());
    }
    let mut limit: f64 = 0.0;
    for a in [0.3, PI / 2.0, 2.9] {
        limit = limit
            .max((sinh_fourier(a, 0.0, 2).unwrap().re + 2.0).abs())
            .max((sinh_fourier(a, 0.0, 4).unwrap().re - 4.0 / 3.0).abs())
            .max((sinh_fourier(a, 1e-12, 2).unwrap().re + 2.0).abs())
            .max((sinh_fourier(a, -1e-12, 4).unwrap().re - 4.0 / 3.0).abs());
    }
    outcome(
        worst < 1e-8 && limit < 1e-10,
        format!("quadrature {worst:.2e} relative on 20 draws (tol 1e-8), b -> 0 limits {limit:.2e} (tol 1e-10)"),
    )
}

fn c8_drude(resp: &DynamicalResponse, spec: &TransportSpec) -> Outcome {
    let dev = rel_dev(&resp.drude(), &spec.drude_reference());
    outcome(
        dev < 1e-4,
        format!("dynamical Drude vs [[1/pi, 0], [0, pi/3]]: {dev:.2e} relative (tol 1e-4)"),
    )
}

fn c9_routes(resp: &DynamicalResponse, spec: &TransportSpec) -> Outcome {
    let closed = closed_form(spec).unwrap();
    let (mut gk, mut dy): (f64, f64) = (0.0, 0.0);
    for (k, &w) in spec.omega_grid().iter().enumerate() {
        let c = &closed.regular[k];
        gk = gk.max(rel_dev(&green_kubo_regular(spec, w).unwrap(), c));
        dy = dy.max(rel_dev(&resp.regular(w).unwrap(), c));
    }
    let flat = parse(
        "preset = \"gaussian-bump-transport\"\n[transport]\nvelocity = { kind = \"constant\", value = 1.0 }\n",
    )
    .unwrap()
    .build_transport()
    .unwrap();
    let flat_resp = DynamicalResponse::compute(&flat, &DynamicalOptions::default()).unwrap();
    let flat_closed = closed_form(&flat).unwrap();
    let mut vanish: f64 = 0.0;
    for (k, &w) in flat.omega_grid().iter().enumerate() {
        vanish = vanish
            .max(max_abs(&flat_closed.regular[k]))
            .max(max_abs(&green_kubo_regular(&flat, w).unwrap()))
            .max(max_abs(&flat_resp.regular(w).unwrap()));
    }
    outcome(
        gk < 2e-3 && dy < 2e-3 && vanish < 1e-6,
        format!(
            "greenkubo {gk:.2e}, dynamical {dy:.2e} vs closed (tol 2e-3); constant v max {vanish:.2e} (tol 1e-6)"
        ),
    )
}

fn c10_wiedemann_franz(resp: &DynamicalResponse, spec: &TransportSpec) -> Outcome {
    let beta = spec.beta();
    let expected = |w: f64| PI * PI / (3.0 * beta) * (1.0 + (w * beta / (2.0 * PI)).powi(2));
    let closed = closed_form(spec).unwrap();
    let exact = closed
        .omegas
        .iter()
        .zip(&closed.wf_regular_ratio)
        .map(|(&w, r)| (r / expected(w) - 1.0).abs())
        .fold(0.0, f64::max);
    let omegas = spec.omega_grid().to_vec();
    let gk_regs: Vec<Matrix2> = omegas
        .iter()
        .map(|&w| green_kubo_regular(spec, w).unwrap())
        .collect();
    let dy_regs: Vec<Matrix2> = omegas.iter().map(|&w| resp.regular(w).unwrap()).collect();
    let mut numeric: f64 = 0.0;
    for (drude, regs) in [
        (green_kubo_drude(spec).unwrap(), gk_regs),
        (resp.drude(), dy_regs),
    ] {
        let r = ConductivityResult::assemble(spec, omegas.clone(), drude, regs, vec![]);
        let te = thermal_electrical(&r, beta, spec.mu());
        for (&w, ratio) in omegas.iter().zip(&te.wf_regular_ratio) {
            numeric = numeric.max((ratio / expected(w) - 1.0).abs());
        }
    }
    outcome(
        exact < 1e-13 && numeric < 3e-3,
        format!("closed {exact:.2e} (tol 1e-13), numeric routes {numeric:.2e} (tol 3e-3)"),
    )
}

fn c11_luttinger() -> Outcome {
    let vf = 1.3;
    let free = luttinger_params(&LuttingerCouplings::new(0.0, 0.0, vf).unwrap()).unwrap();
    let mut reduction = (free.v - vf).abs().max((free.k - 1.0).abs());
    for r in [1i8, -1] {
        let (dp, dm) = free.weights(r);
        let (ep, em) = if r == 1 { (0.5, 0.0) } else { (0.0, 0.5) };
        reduction = reduction.max((dp - ep).abs()).max((dm - em).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut sugawara: f64 = 0.0;
    for _ in 0..50 {
        let g4 = rng.gen_range(-1.0..3.0);
        let g2 = rng.gen_range(-0.99..0.99) * (2.0 + g4);
        let p = luttinger_params(&LuttingerCouplings::new(g2, g4, 1.0).unwrap()).unwrap();
        for r in [1, -1] {
            for field in [p.psi_plus(r, 1.0).unwrap(), p.psi_minus(r, 1.0).unwrap()] {
                sugawara = sugawara.max(field.sugawara_defect(p.kappa()));
            }
        }
    }
    let (v, beta) = (1.3, 0.7);
    let s = parse(&format!(
        "preset = \"constant\"\n[scenario]\nv = {{ kind = \"constant\", value = {v} }}\nbeta = {{ kind = \"constant\", value = {beta} }}\n"
    ))
    .unwrap()
    .build_scenario()
    .unwrap();
    let field = free.psi_minus(1, 2.3).unwrap();
    let mut two_point: f64 = 0.0;
    for (x1, t1, x2, t2) in [
        (0.5, 0.0, -0.5, 0.0),
        (-1.2, 0.0, 0.3, 0.0),
        (0.4, 0.7, -0.9, 0.2),
        (2.0, -0.3, 1.1, 0.5),
    ] {
        let z = fermion_two_point(&s, &field, 1, 1, x1, t1, x2, t2).unwrap();
        let d = (x1 - v * t1) - (x2 - v * t2);
        let expected = 1.0 / (2.0 * v * beta * (PI * d / (v * beta)).sinh());
        two_point = two_point.max(z.re.abs()).max((z.im - expected).abs());
    }
    outcome(
        reduction < 1e-15 && sugawara < 1e-12 && two_point < 1e-10,
        format!(
            "free point {reduction:.2e}, Sugawara {sugawara:.2e} on 50 couplings (tol 1e-12), \
             K = 1 two-point {two_point:.2e} (tol 1e-10)"
        ),
    )
}

fn c12_plateau() -> Outcome {
    let s = preset_scenario("kink-beta");
    let (beta_l, beta_r): (f64, f64) = (1.25, 0.75);
    let plateau = PI / 12.0 * (beta_l.powi(-2) - beta_r.powi(-2));
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let x = -10.0 + i as f64;
        for j in 0..=6 {
            let t = 30.0 + 5.0 * j as f64;
            worst = worst.max((mean_values(&s, x, t).heat_current - plateau).abs());
        }
    }
    outcome(
        worst < 1e-6,
        format!("<J> vs (pi c/12)(beta_L^-2 - beta_R^-2) = {plateau:.6}: {worst:.2e} (tol 1e-6)"),
    )
}

fn main() {
    let budgets = [1, 10, 30, 10, 5, 30, 10, 120, 300, 60, 10, 10].map(Duration::from_secs);
    let spec = bump_spec();
    let mut results: Vec<(Outcome, Duration)> = Vec::new();
    let mut timed = |f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        results.push((o, start.elapsed()));
    };
    timed(&mut c1_homogeneous);
    timed(&mut c2_light_cone);
    timed(&mut c3_continuity);
    timed(&mut c4_normalization);
    timed(&mut c5_anomaly);
    timed(&mut c6_bott);
    timed(&mut c7_sinh_table);
    // The dynamical response is computed once, inside criterion 8's clock,
    // and reused by 9 and 10.
    let mut resp = None;
    timed(&mut || {
        let r = DynamicalResponse::compute(&spec, &DynamicalOptions::default()).unwrap();
        let o = c8_drude(&r, &spec);
        resp = Some(r);
        o
    });
    let resp = resp.unwrap();
    timed(&mut || c9_routes(&resp, &spec));
    timed(&mut || c10_wiedemann_franz(&resp, &spec));
    timed(&mut c11_luttinger);
    timed(&mut c12_plateau);

    let mut failed = 0;
    for (k, ((o, elapsed), budget)) in results.iter().zip(budgets).enumerate() {
        let in_time = *elapsed <= budget;
        let pass = o.passed && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2}: {} [{:.2}s of {}s] {}{}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            o.detail,
            if in_time { "" } else { "; over time budget" }
        );
    }
    println!("acceptance: {} of 12 criteria pass", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
