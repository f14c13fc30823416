use std::f64::consts::PI;

use icft_core::profiles::{make_smooth_kink, KinkShape, Profile};
use icft_core::transport::*;

fn spec(a: f64, sigma: f64, shape: KinkShape, beta: f64, mu: f64) -> TransportSpec {
    TransportSpec::new(
        Profile::gaussian_bump(1.0, a, sigma, 8.0 * sigma).unwrap(),
        make_smooth_kink(1.0, shape).unwrap(),
        beta,
        mu,
        1.0,
        1.0,
        vec![0.5 / beta, 1.0 / beta, 2.0 / beta],
        1.0,
    )
    .unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-12)
}

#[test]
fn drude_weights_are_universal_across_bumps() {
    let quick = DynamicalOptions {
        check_refinement: false,
        ..Default::default()
    };
    for s in [
        spec(0.5, 1.0, KinkShape::Tanh, 1.0, 0.2),
        spec(-0.8, 0.6, KinkShape::Erf, 1.0, 0.2),
    ] {
        let te = thermal_electrical(
            &ConductivityResult::assemble(
                &s,
                vec![],
                DynamicalResponse::compute(&s, &quick).unwrap().drude(),
                vec![],
                vec![],
            ),
            s.beta(),
            s.mu(),
        );
        assert!(close(te.d_th, PI / 3.0, 1e-6), "{}", te.d_th);
        assert!(close(te.d_el, 1.0 / PI, 1e-6), "{}", te.d_el);
    }
}

#[test]
fn green_kubo_tracks_closed_form_at_other_temperature() {
    let s = spec(0.3, 1.5, KinkShape::Erf, 2.0, -0.4);
    let closed = closed_form(&s).unwrap();
    for (w, c) in s.omega_grid().iter().zip(&closed.regular) {
        let g = green_kubo_regular(&s, *w).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(g[i][j], c[i][j], 1e-6), "{w} {i}{j}");
            }
        }
    }
}

#[test]
fn refined_dynamical_route_with_chemical_potential() {
    let s = spec(0.5, 1.0, KinkShape::Tanh, 1.0, 0.3);
    let r = DynamicalResponse::compute(&s, &DynamicalOptions::default()).unwrap();
    assert!(r.refinement_change().unwrap() < 1.0);
    let closed = closed_form(&s).unwrap();
    for (w, c) in s.omega_grid().iter().zip(&closed.regular) {
        let d = r.regular(*w).unwrap();
        assert!((d[0][1] - d[1][0]).abs() < 1e-6);
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(d[i][j], c[i][j], 1e-4), "{w} {i}{j}");
            }
        }
    }
}

#[test]
fn slow_velocity_bump_has_negative_i() {
    // v below v̄ makes 1 − v̄/v negative, so the regular parts flip sign.
    let s = spec(-0.8, 1.0, KinkShape::Tanh, 1.0, 0.0);
    let r = closed_form(&s.with_omegas(vec![0.0]).unwrap()).unwrap();
    assert!((r.i_values[0] + 0.8 * (2.0 * PI).sqrt()).abs() < 1e-10);
    assert!(r.regular[0][0][0] < 0.0);
}
