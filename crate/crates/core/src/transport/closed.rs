use std::f64::consts::PI;

use super::{quad_spec, ConductivityResult, Matrix2, TransportSpec};
use crate::error::Result;
use crate::lightcone::Warp;
use crate::numerics::integrate;

/// `I(ω) = ∬ (1 − v̄/v(x)) (−W′(x′)) cos(ω ∫_{x′}^{x} 1/v)`.
///
/// The cosine of a difference splits the double integral into products of
/// single integrals, one over the velocity window and one over the kink.
pub fn i_omega(spec: &TransportSpec, omega: f64) -> Result<f64> {
    let q = quad_spec();
    let map = spec.line_map();
    let v = spec.v_line();
    let (vbar, x, lam) = (spec.vbar(), spec.window(), spec.kink_radius());
    let k = omega / vbar;
    let a = |x: f64| 1.0 - vbar / v.value(x);
    let b = |x: f64| spec.kink().density(x);
    let ac = integrate(|s| a(s) * (k * map.forward(s)).cos(), -x, x, &q)?;
    let bc = integrate(|s| b(s) * (k * map.forward(s)).cos(), -lam, lam, &q)?;
    if omega == 0.0 {
        return Ok(ac * bc);
    }
    let as_ = integrate(|s| a(s) * (k * map.forward(s)).sin(), -x, x, &q)?;
    let bs = integrate(|s| b(s) * (k * map.forward(s)).sin(), -lam, lam, &q)?;
    Ok(ac * bc + as_ * bs)
}

/// Universal Drude weights and regular parts proportional to `I(ω)`.
/// At `ω = 0` the regular part is its continuous limit.
pub fn closed_form(spec: &TransportSpec) -> Result<ConductivityResult> {
    let (b, m, c, k) = (spec.beta(), spec.mu(), spec.c(), spec.kappa());
    let omegas = spec.omega_grid().to_vec();
    let i_values = omegas
        .iter()
        .map(|&w| i_omega(spec, w))
        .collect::<Result<Vec<_>>>()?;
    let regular = omegas
        .iter()
        .zip(&i_values)
        .map(|(&w, &i)| {
            let charge = k * i / (2.0 * PI * b);
            let boost = 1.0 + (w * b / (2.0 * PI)).powi(2);
            [
                [charge, m * charge],
                [m * charge, PI * c / (6.0 * b.powi(3)) * boost * i + m * m * charge],
            ]
        })
        .collect();
    Ok(ConductivityResult::assemble(
        spec,
        omegas,
        spec.drude_reference(),
        regular,
        i_values,
    ))
}

/// Thermal and electrical responses obtained from the `(μ₁, μ₂)` matrix by
/// `∂/∂(1/β) = −μβ² ∂/∂μ₁ + β² ∂/∂μ₂` and `∂/∂μ = β ∂/∂μ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalElectrical {
    pub d_th: f64,
    pub kappa_th_reg: Vec<f64>,
    pub d_el: f64,
    pub sigma_el_reg: Vec<f64>,
    pub wf_drude_ratio: f64,
    /// `NaN` where the electrical regular part vanishes.
    pub wf_regular_ratio: Vec<f64>,
}

pub fn thermal_electrical(result: &ConductivityResult, beta: f64, mu: f64) -> ThermalElectrical {
    let thermal = |m: &Matrix2| beta * beta * (m[1][1] - mu * m[1][0]);
    let electrical = |m: &Matrix2| beta * m[0][0];
    let scale = result.kappa / result.c;
    let ratio = |th: f64, el: f64| if el == 0.0 { f64::NAN } else { scale * th / el };
    let d_th = thermal(&result.drude);
    let d_el = electrical(&result.drude);
    let kappa_th_reg: Vec<f64> = result.regular.iter().map(thermal).collect();
    let sigma_el_reg: Vec<f64> = result.regular.iter().map(electrical).collect();
    let wf_regular_ratio = kappa_th_reg
        .iter()
        .zip(&sigma_el_reg)
        .map(|(&t, &e)| ratio(t, e))
        .collect();
    ThermalElectrical {
        d_th,
        kappa_th_reg,
        d_el,
        sigma_el_reg,
        wf_drude_ratio: ratio(d_th, d_el),
        wf_regular_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn constant_velocity_has_no_regular_part() {
        let r = closed_form(&constant_spec()).unwrap();
        assert!(r.i_values.iter().all(|&i| i == 0.0));
        assert!(r.regular.iter().flatten().flatten().all(|&v| v == 0.0));
        assert!((r.drude[1][1] - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_i_at_zero() {
        let i0 = i_omega(&bump_spec(0.0), 0.0).unwrap();
        assert!((i0 - 0.5 * (2.0 * PI).sqrt()).abs() < 1e-11, "{i0}");
    }

    #[test]
    fn i_is_even_in_omega() {
        let s = bump_spec(0.0);
        for w in [0.3, 1.7] {
            let d = i_omega(&s, w).unwrap() - i_omega(&s, -w).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn riemann_lebesgue_decay() {
        let s = bump_spec(0.0);
        let i0 = i_omega(&s, 0.0).unwrap();
        assert!(i_omega(&s, 100.0).unwrap().abs() < 1e-2 * i0);
    }

    #[test]
    fn heat_regular_part_at_two_pi() {
        let s = bump_spec(0.0).with_omegas(vec![2.0 * PI]).unwrap();
        let r = closed_form(&s).unwrap();
        let expected = PI / 6.0 * 2.0 * r.i_values[0];
        assert!((r.regular[0][1][1] - expected).abs() < 1e-15);
    }

    #[test]
    fn symmetric_with_chemical_potential() {
        let r = closed_form(&bump_spec(0.3)).unwrap();
        assert_eq!(r.drude[0][1], r.drude[1][0]);
        for m in &r.regular {
            assert_eq!(m[0][1], m[1][0]);
        }
    }

    #[test]
    fn wiedemann_franz_ratios() {
        let s = bump_spec(0.4).with_omegas(vec![0.0, 1.0, 2.0 * PI]).unwrap();
        let r = closed_form(&s).unwrap();
        let base = PI * PI / 3.0;
        assert!((r.wf_drude_ratio - base).abs() < 1e-14);
        for (&w, &ratio) in r.omegas.iter().zip(&r.wf_regular_ratio) {
            let expected = base * (1.0 + (w / (2.0 * PI)).powi(2));
            assert!((ratio - expected).abs() < 1e-14 * expected, "{w}");
        }
        let te = thermal_electrical(&r, 1.0, 0.4);
        assert!((te.d_th - PI / 3.0).abs() < 1e-14);
        assert!((te.d_el - 1.0 / PI).abs() < 1e-15);
    }
}
