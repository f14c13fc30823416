//! Green-Kubo route: the equilibrium current correlators are reduced with
//! the closed-form sinh integrals and the remaining position-space kernel is
//! integrated causally in `y = f(x)`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{quad_spec, Matrix2, TransportSpec};
use crate::error::{Error, Result};
use crate::lightcone::Warp;
use crate::numerics::quadrature::{gl20, panel_nodes};
use crate::numerics::integrate;

const POLE_DISTANCE: f64 = 1e-10;
const OUTER_PANEL: f64 = 0.25;

/// `∫ dξ e^{ibξ} / sinh^P(ξ + ia)` over the real line for `P ∈ {2, 4}`.
///
/// The value is real; at `b = 0` the analytic limits `−2` and `4/3` are used.
pub fn sinh_fourier(a: f64, b: f64, power: u32) -> Result<Complex64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sinh_fourier needs finite arguments, got a = {a}, b = {b}"
        )));
    }
    let r = a - PI * (a / PI).floor();
    if r.min(PI - r) < POLE_DISTANCE {
        return Err(Error::PoleOnContour { a });
    }
    // b e^{b r} / (e^{bπ} − 1) without overflow or cancellation.
    let factor = if b == 0.0 {
        1.0 / PI
    } else if b > 0.0 {
        b * (b * (r - PI)).exp() / -(-b * PI).exp_m1()
    } else {
        b * (b * r).exp() / (b * PI).exp_m1()
    };
    let value = match power {
        2 => -2.0 * PI * factor,
        4 => PI * (b * b + 4.0) / 3.0 * factor,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "sinh_fourier power must be 2 or 4, got {power}"
            )))
        }
    };
    Ok(Complex64::new(value, 0.0))
}

/// `∫₀^β dτ sinh_fourier(rπτ/β, b, P)`.
fn tau_integral(beta: f64, r: f64, b: f64, power: u32) -> Result<f64> {
    let failure = RefCell::new(None);
    let value = integrate(
        |tau| match sinh_fourier(r * PI * tau / beta, b, power) {
            Ok(z) => z.re,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        beta,
        &quad_spec(),
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

fn integrate_complex<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64) -> Result<Complex64> {
    let q = quad_spec();
    Ok(Complex64::new(
        integrate(|y| f(y).re, a, b, &q)?,
        integrate(|y| f(y).im, a, b, &q)?,
    ))
}

/// Velocity and kink data pulled back to `y = f(x)`.
struct YSpace<'a> {
    spec: &'a TransportSpec,
}

impl YSpace<'_> {
    /// `v(f⁻¹(y))/v̄ − 1`, supported in the image of the velocity window.
    fn a(&self, y: f64) -> f64 {
        let x = self.spec.line_map().backward(y);
        self.spec.v_line().value(x) / self.spec.vbar() - 1.0
    }

    /// `∂_y[−W(f⁻¹(y))]`.
    fn b(&self, y: f64) -> f64 {
        let x = self.spec.line_map().backward(y);
        self.spec.kink().density(x) * self.spec.v_line().value(x) / self.spec.vbar()
    }

    fn kink_range(&self) -> (f64, f64) {
        let lam = self.spec.kink_radius();
        let map = self.spec.line_map();
        (map.forward(-lam), map.forward(lam))
    }

    /// `(J₊, J₋)`: `∫dy A(y) ∫dy′ B(y′) e^{iω|y−y′|/v̄}` split into `y′ < y` and `y′ > y`.
    fn causal_pair(&self, omega: f64) -> Result<(Complex64, Complex64)> {
        let k = omega / self.spec.vbar();
        let (ylo, yhi) = self.spec.y_window();
        let (klo, khi) = self.kink_range();
        let panels = ((yhi - ylo) / OUTER_PANEL).ceil().max(1.0) as usize;
        let mut nodes = panel_nodes(gl20(), ylo, yhi, panels);
        nodes.sort_by(|p, q| p.0.total_cmp(&q.0));
        let phase = |y: f64| Complex64::from_polar(1.0, k * y);
        let weighted = |y: f64| self.b(y) * phase(y);

        let mut prev = klo.min(ylo);
        let mut cumulative = Complex64::new(0.0, 0.0);
        let (mut plus, mut rows) = (Complex64::new(0.0, 0.0), Vec::with_capacity(nodes.len()));
        for &(y, w) in &nodes {
            cumulative += integrate_complex(weighted, prev, y)?;
            prev = y;
            let a = w * self.a(y);
            plus += a * phase(y) * cumulative.conj();
            rows.push((a, y, cumulative));
        }
        let total = cumulative + integrate_complex(weighted, prev, khi.max(yhi))?;
        let minus = rows
            .iter()
            .map(|&(a, y, d)| a * phase(-y) * (total - d))
            .sum();
        Ok((plus, minus))
    }
}

/// Position-space `ΔI₁(ω) = ∬ K(y, y′) e^{iω|y−y′|/v̄}`; its real part is `I(ω)`.
pub fn delta_i(spec: &TransportSpec, omega: f64) -> Result<Complex64> {
    let (plus, minus) = YSpace { spec }.causal_pair(omega)?;
    Ok(plus + minus)
}

/// Correlator prefactors `(A⁴, A²)` of the quartic and quadratic sinh terms
/// for each matrix entry.
fn prefactors(spec: &TransportSpec) -> [[(f64, f64); 2]; 2] {
    let (b, m, c, k) = (spec.beta(), spec.mu(), spec.c(), spec.kappa());
    let quad = -k / (4.0 * b * b);
    [
        [(0.0, quad), (0.0, m * quad)],
        [(0.0, m * quad), (PI * PI * c / (8.0 * b.powi(4)), m * m * quad)],
    ]
}

fn assemble<F: Fn(u32, f64) -> Result<f64>>(spec: &TransportSpec, term: F) -> Result<Matrix2> {
    let t4 = term(4, spec.beta())?;
    let t2 = term(2, spec.beta())?;
    let mut out = [[0.0; 2]; 2];
    for (row, pre) in out.iter_mut().zip(prefactors(spec)) {
        for (cell, (a4, a2)) in row.iter_mut().zip(pre) {
            *cell = (a4 * t4 + a2 * t2) / PI;
        }
    }
    Ok(out)
}

/// `Re κ^reg(ω)` from the Green-Kubo reduction.
pub fn green_kubo_regular(spec: &TransportSpec, omega: f64) -> Result<Matrix2> {
    if omega == 0.0 {
        return Err(Error::OmegaZero);
    }
    let (plus, minus) = YSpace { spec }.causal_pair(omega)?;
    let b = omega * spec.beta() / PI;
    assemble(spec, |power, beta| {
        let tp = tau_integral(beta, 1.0, -b, power)?;
        let tm = tau_integral(beta, -1.0, b, power)?;
        Ok((tp * plus + tm * minus).re)
    })
}

/// Drude weights from the homogeneous part of the Green-Kubo reduction.
pub fn green_kubo_drude(spec: &TransportSpec) -> Result<Matrix2> {
    let vbar = spec.vbar();
    assemble(spec, |power, beta| {
        Ok(vbar * (tau_integral(beta, 1.0, 0.0, power)? + tau_integral(beta, -1.0, 0.0, power)?))
    })
}

/// The kernel `k(y)` and its regular spectrum `Δk(p)`.
pub struct KernelK<'a> {
    y: YSpace<'a>,
}

pub fn kernel_k(spec: &TransportSpec) -> KernelK<'_> {
    KernelK {
        y: YSpace { spec },
    }
}

impl KernelK<'_> {
    /// `k(y) = ∫dy′ [v(f⁻¹(y + y′))/v̄] ∂_{y′}[−W(f⁻¹(y′))]`.
    pub fn k_of_y(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.y.kink_range();
        integrate(
            |s| (self.y.a(y + s) + 1.0) * self.y.b(s),
            lo,
            hi,
            &quad_spec(),
        )
    }

    /// `Δk(p) = k(p) − 2πδ(p)`; the delta cancels exactly and the rest
    /// factorizes into transforms of the velocity and kink data.
    pub fn delta_k(&self, p: f64) -> Result<Complex64> {
        let (ylo, yhi) = self.y.spec.y_window();
        let (klo, khi) = self.y.kink_range();
        let a = integrate_complex(|y| self.y.a(y) * Complex64::from_polar(1.0, -p * y), ylo, yhi)?;
        let b = integrate_complex(|y| self.y.b(y) * Complex64::from_polar(1.0, p * y), klo, khi)?;
        Ok(a * b)
    }

    /// `Δk` sampled on `ps`.
    pub fn spectrum(&self, ps: &[f64]) -> Result<Vec<Complex64>> {
        ps.iter().map(|&p| self.delta_k(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{closed_form, i_omega};
    use super::*;

    #[test]
    fn small_b_limits() {
        for a in [PI / 2.0, 0.3, -2.0] {
            assert!((sinh_fourier(a, 0.0, 2).unwrap().re + 2.0).abs() < 1e-15);
            assert!((sinh_fourier(a, 0.0, 4).unwrap().re - 4.0 / 3.0).abs() < 1e-15);
            assert!((sinh_fourier(a, 1e-9, 2).unwrap().re + 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn quadratic_at_b_two() {
        let z = sinh_fourier(PI / 2.0, 2.0, 2).unwrap();
        assert!((z.re + 2.0 * PI / PI.sinh()).abs() < 1e-14);
        assert!((z.re + 0.5440581099642663).abs() < 1e-15);
        assert_eq!(z.im, 0.0);
    }

    #[test]
    fn large_b_is_finite() {
        for b in [-800.0, 800.0] {
            assert!(sinh_fourier(1.0, b, 4).unwrap().re.is_finite());
        }
    }

    #[test]
    fn poles_and_bad_powers_rejected() {
        assert!(matches!(sinh_fourier(0.0, 1.0, 2), Err(Error::PoleOnContour { .. })));
        assert!(matches!(sinh_fourier(3.0 * PI, 1.0, 4), Err(Error::PoleOnContour { .. })));
        assert!(sinh_fourier(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn tau_integrals_are_analytic() {
        for b in [-1.3, 0.0, 0.7, 2.0] {
            for r in [1.0, -1.0] {
                let t2 = tau_integral(2.0, r, b, 2).unwrap();
                let t4 = tau_integral(2.0, r, b, 4).unwrap();
                assert!((t2 + 4.0).abs() < 1e-12);
                assert!((t4 - 2.0 * (b * b + 4.0) / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_velocity_kernel() {
        let s = constant_spec();
        let k = kernel_k(&s);
        for y in [-3.0, 0.0, 5.0] {
            assert!((k.k_of_y(y).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(k.delta_k(0.7).unwrap().norm() < 1e-14);
        let g = green_kubo_regular(&s, 1.0).unwrap();
        assert!(g.iter().flatten().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn kernel_tends_to_one_and_matches_i0() {
        let s = bump_spec(0.0);
        let k = kernel_k(&s);
        assert!((k.k_of_y(40.0).unwrap() - 1.0).abs() < 1e-10);
        assert!((k.k_of_y(-40.0).unwrap() - 1.0).abs() < 1e-10);
        assert!((k.k_of_y(0.0).unwrap() - 1.0).abs() > 1e-2);
        let dk0 = k.delta_k(0.0).unwrap();
        assert!((dk0.re - i_omega(&s, 0.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn position_space_delta_i_matches_i() {
        let s = bump_spec(0.0);
        for w in [0.5, 1.0, 2.0] {
            let d = delta_i(&s, w).unwrap().re - i_omega(&s, w).unwrap();
            assert!(d.abs() < 1e-6, "{w}: {d}");
        }
    }

    #[test]
    fn agrees_with_closed_form() {
        let s = bump_spec(0.3);
        let closed = closed_form(&s).unwrap();
        for (w, c) in s.omega_grid().iter().zip(&closed.regular) {
            let g = green_kubo_regular(&s, *w).unwrap();
            assert_eq!(g[0][1], g[1][0]);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((g[i][j] - c[i][j]).abs() <= 1e-6 * c[i][j].abs(), "{w} {i}{j}");
                }
            }
        }
    }

    #[test]
    fn omega_zero_is_rejected() {
        assert!(matches!(green_kubo_regular(&bump_spec(0.0), 0.0), Err(Error::OmegaZero)));
    }

    #[test]
    fn drude_matches_universal_values() {
        let s = bump_spec(0.3);
        let d = green_kubo_drude(&s).unwrap();
        let r = s.drude_reference();
        for i in 0..2 {
            for j in 0..2 {
                assert!((d[i][j] - r[i][j]).abs() < 1e-12);
            }
        }
    }
}
