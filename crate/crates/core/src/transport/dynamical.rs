//! Dynamical route: response of the integrated currents to kink-shaped
//! perturbations `μ_n(x) = μ_n + δμ_n W(x)`, evolved with the line light-cone
//! coordinates.
//!
//! The time derivative of `∫dx j_m` is differentiated in `δμ_n` to give the
//! response `R_mn(t)`. Once both kink images have left the velocity window
//! `R` is constant; that constant is the Drude weight, and the regular part is
//! the transform of `R − D`, which vanishes after the transit time.

use std::sync::Arc;

use rayon::prelude::*;

use super::{Matrix2, TransportSpec};
use crate::error::{Error, Result};
use crate::lightcone::Warp;
use crate::numerics::quadrature::{gl16, panel_nodes};
use crate::numerics::Jet;
use crate::observables::{currents_at_points, ProfileTriple};
use crate::profiles::{Domain, Profile};

/// Kinks wider than this (support radius) make the transit too long.
const MAX_KINK_RADIUS: f64 = 1e3;
const PLATEAU_SAMPLES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicalOptions {
    /// Central-difference step in the perturbation heights.
    pub delta_mu: f64,
    /// Central-difference step in time.
    pub time_step: f64,
    /// Quadrature panel widths in `x` and `t` (16-point Gauss each).
    pub x_panel: f64,
    pub t_panel: f64,
    /// Length of the window after transit over which `R` is averaged.
    pub plateau_length: f64,
    /// Repeat on a grid of half the panel widths and compare.
    pub check_refinement: bool,
}

impl Default for DynamicalOptions {
    fn default() -> Self {
        Self {
            delta_mu: 1e-4,
            time_step: 1e-4,
            x_panel: 1.0,
            t_panel: 1.0,
            plateau_length: 10.0,
            check_refinement: true,
        }
    }
}

/// Tabulated response `R_mn(t)` with its Drude plateau.
#[derive(Debug, Clone)]
pub struct DynamicalResponse {
    nodes: Vec<(f64, f64)>,
    response: Vec<Matrix2>,
    drude: Matrix2,
    transit: f64,
    plateau_spread: f64,
    refinement_change: Option<f64>,
}

impl DynamicalResponse {
    pub fn compute(spec: &TransportSpec, opts: &DynamicalOptions) -> Result<Self> {
        validate(opts)?;
        let coarse = Grid::new(spec, opts, opts.x_panel, opts.t_panel)?.evaluate()?;
        if !opts.check_refinement {
            return Ok(coarse);
        }
        let mut fine = Grid::new(spec, opts, 0.5 * opts.x_panel, 0.5 * opts.t_panel)?.evaluate()?;
        let mut worst: f64 = 0.0;
        let mut check = |what: &str, a: f64, b: f64, rel: f64| -> Result<()> {
            let change = (a - b).abs();
            let allowed = rel * b.abs() + 5e-7;
            worst = worst.max(change / allowed);
            if change > allowed {
                return Err(Error::GridUnderResolved {
                    what: what.to_string(),
                    change,
                    allowed,
                });
            }
            Ok(())
        };
        for (a, b) in coarse.drude.iter().flatten().zip(fine.drude.iter().flatten()) {
            check("dynamical Drude weight", *a, *b, 5e-5)?;
        }
        let mut omegas: Vec<f64> = spec.omega_grid().iter().copied().filter(|&w| w > 0.0).collect();
        if omegas.is_empty() {
            omegas.push(1.0 / spec.beta());
        }
        for w in omegas {
            let (a, b) = (coarse.regular(w)?, fine.regular(w)?);
            for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                check("dynamical regular part", *x, *y, 1e-3)?;
            }
        }
        fine.refinement_change = Some(worst);
        Ok(fine)
    }

    pub fn drude(&self) -> Matrix2 {
        self.drude
    }

    /// Time after which both kink images have left the velocity window.
    pub fn transit_time(&self) -> f64 {
        self.transit
    }

    /// Largest deviation of `R` from its mean over the plateau.
    pub fn plateau_spread(&self) -> f64 {
        self.plateau_spread
    }

    /// Largest coarse/fine change relative to its allowance, when checked.
    pub fn refinement_change(&self) -> Option<f64> {
        self.refinement_change
    }

    /// `(t, R(t))` on the quadrature nodes of `[0, transit]`.
    pub fn response(&self) -> impl Iterator<Item = (f64, Matrix2)> + '_ {
        self.nodes.iter().map(|n| n.0).zip(self.response.iter().copied())
    }

    /// Damping used at `ω`; the smaller of `ω/50` and `0.01/transit`.
    pub fn damping(&self, omega: f64) -> f64 {
        (omega.abs() / 50.0).min(0.01 / self.transit)
    }

    /// `Re ∫₀^∞ e^{(iω−η)t} (R − D) dt`, extrapolated to `η → 0` from `η` and `η/2`.
    pub fn regular(&self, omega: f64) -> Result<Matrix2> {
        if omega == 0.0 {
            return Err(Error::OmegaZero);
        }
        let eta = self.damping(omega);
        let (full, half) = (self.damped(omega, eta), self.damped(omega, 0.5 * eta));
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = 2.0 * half[i][j] - full[i][j];
            }
        }
        Ok(out)
    }

    fn damped(&self, omega: f64, eta: f64) -> Matrix2 {
        let mut out = [[0.0; 2]; 2];
        for (&(t, w), r) in self.nodes.iter().zip(&self.response) {
            let kernel = w * (-eta * t).exp() * (omega * t).cos();
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] += kernel * (r[i][j] - self.drude[i][j]);
                }
            }
        }
        out
    }
}

/// Drude weights from the plateau of the dynamical response.
pub fn dynamical_drude(spec: &TransportSpec) -> Result<Matrix2> {
    Ok(DynamicalResponse::compute(spec, &DynamicalOptions::default())?.drude())
}

/// `Re κ^reg(ω)` from the dynamical response.
pub fn dynamical_conductivity(spec: &TransportSpec, omega: f64) -> Result<Matrix2> {
    if omega == 0.0 {
        return Err(Error::OmegaZero);
    }
    DynamicalResponse::compute(spec, &DynamicalOptions::default())?.regular(omega)
}

fn validate(opts: &DynamicalOptions) -> Result<()> {
    for (name, value) in [
        ("delta_mu", opts.delta_mu),
        ("time_step", opts.time_step),
        ("x_panel", opts.x_panel),
        ("t_panel", opts.t_panel),
        ("plateau_length", opts.plateau_length),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dynamical option {name} must be positive, got {value}"
            )));
        }
    }
    Ok(())
}

/// Profiles for the perturbation `(δμ₁, δμ₂)`: `β(x) = β − δμ₂ W(x)` and
/// `μ(x) = (βμ + δμ₁ W(x)) / β(x)`.
fn perturbed(spec: &TransportSpec, d1: f64, d2: f64) -> Result<ProfileTriple> {
    let kink = spec.kink().profile();
    let Domain::Line { window, .. } = kink.domain() else {
        unreachable!("kinks live on the line")
    };
    let (b, m) = (spec.beta(), spec.mu());
    let wb = kink.jet_fn();
    let wm = kink.jet_fn();
    let beta = Profile::line(
        b - 0.5 * d2,
        b + 0.5 * d2,
        window,
        Arc::new(move |x: Jet| wb(x) * -d2 + b),
        true,
    )?;
    let mu = Profile::line(
        (b * m + 0.5 * d1) / (b - 0.5 * d2),
        (b * m - 0.5 * d1) / (b + 0.5 * d2),
        window,
        Arc::new(move |x: Jet| {
            let w = wm(x);
            (w * d1 + b * m) / (w * -d2 + b)
        }),
        false,
    )?;
    Ok(ProfileTriple {
        v: spec.v_line().clone(),
        beta,
        mu,
        c: spec.c(),
        kappa: spec.kappa(),
    })
}

struct Grid<'a> {
    spec: &'a TransportSpec,
    opts: &'a DynamicalOptions,
    x_panel: f64,
    /// `+δμ₁, −δμ₁, +δμ₂, −δμ₂`.
    states: [ProfileTriple; 4],
    kink_image: (f64, f64),
    transit: f64,
    t_nodes: Vec<(f64, f64)>,
}

impl<'a> Grid<'a> {
    fn new(spec: &'a TransportSpec, opts: &'a DynamicalOptions, x_panel: f64, t_panel: f64) -> Result<Self> {
        let lam = spec.kink_radius();
        if lam > MAX_KINK_RADIUS {
            return Err(Error::InvalidParameter(format!(
                "kink support radius {lam:e} is too large for the dynamical route"
            )));
        }
        let d = opts.delta_mu;
        let states = [
            perturbed(spec, d, 0.0)?,
            perturbed(spec, -d, 0.0)?,
            perturbed(spec, 0.0, d)?,
            perturbed(spec, 0.0, -d)?,
        ];
        let map = spec.line_map();
        let kink_image = (map.forward(-lam), map.forward(lam));
        let (ylo, yhi) = spec.y_window();
        let transit = (yhi - kink_image.0).max(kink_image.1 - ylo).max(0.0) / spec.vbar() + 1.0;
        let panels = (transit / t_panel).ceil() as usize;
        let t_nodes = panel_nodes(gl16(), 0.0, transit, panels);
        Ok(Self {
            spec,
            opts,
            x_panel,
            states,
            kink_image,
            transit,
            t_nodes,
        })
    }

    /// Intervals of `x` where either kink image sits at time `t`, merged.
    fn support(&self, t: f64) -> Vec<(f64, f64)> {
        let map = self.spec.line_map();
        let shift = self.spec.vbar() * t;
        let pad = 0.5 + self.spec.vbar() * self.opts.time_step;
        let mut parts: Vec<(f64, f64)> = [1.0, -1.0]
            .iter()
            .map(|r| {
                (
                    map.backward(self.kink_image.0 + r * shift) - pad,
                    map.backward(self.kink_image.1 + r * shift) + pad,
                )
            })
            .collect();
        parts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if parts[1].0 <= parts[0].1 {
            vec![(parts[0].0, parts[0].1.max(parts[1].1))]
        } else {
            parts
        }
    }

    /// `R_mn(t)`; row 0 is the charge current, row 1 the heat current.
    fn response_at(&self, t: f64) -> Matrix2 {
        let map = self.spec.line_map();
        let (h, v) = (self.opts.time_step, self.spec.vbar());
        // Σ w ∂ₜ(j(+δ) − j(−δ)) per driven channel n and current m.
        let mut acc = [[0.0; 2]; 2];
        for (a, b) in self.support(t) {
            let panels = ((b - a) / self.x_panel).ceil().max(1.0) as usize;
            for (x, w) in panel_nodes(gl16(), a, b, panels) {
                let y = map.forward(x);
                let points = [t + h, t - h].map(|s| (map.backward(y - v * s), map.backward(y + v * s)));
                let mut dj = [[0.0; 2]; 4];
                for (k, state) in self.states.iter().enumerate() {
                    let (heat_p, charge_p) = currents_at_points(state, points[0].0, points[0].1);
                    let (heat_m, charge_m) = currents_at_points(state, points[1].0, points[1].1);
                    dj[k] = [charge_p - charge_m, heat_p - heat_m];
                }
                for m in 0..2 {
                    acc[m][0] += w * (dj[0][m] - dj[1][m]);
                    acc[m][1] += w * (dj[2][m] - dj[3][m]);
                }
            }
        }
        let scale = 1.0 / (4.0 * h * self.opts.delta_mu);
        acc.map(|row| row.map(|q| q * scale))
    }

    fn evaluate(self) -> Result<DynamicalResponse> {
        let response: Vec<Matrix2> = self
            .t_nodes
            .par_iter()
            .map(|&(t, _)| self.response_at(t))
            .collect();
        let plateau: Vec<Matrix2> = (0..PLATEAU_SAMPLES)
            .into_par_iter()
            .map(|j| {
                let t = self.transit + self.opts.plateau_length * (j as f64 + 0.5) / PLATEAU_SAMPLES as f64;
                self.response_at(t)
            })
            .collect();
        let mut drude = [[0.0; 2]; 2];
        for r in &plateau {
            for i in 0..2 {
                for j in 0..2 {
                    drude[i][j] += r[i][j] / PLATEAU_SAMPLES as f64;
                }
            }
        }
        let mut spread: f64 = 0.0;
        for r in &plateau {
            for i in 0..2 {
                for j in 0..2 {
                    let change = (r[i][j] - drude[i][j]).abs();
                    let allowed = 5e-5 * drude[i][j].abs() + 5e-7;
                    spread = spread.max(change);
                    if change > allowed {
                        return Err(Error::GridUnderResolved {
                            what: "Drude plateau".into(),
                            change,
                            allowed,
                        });
                    }
                }
            }
        }
        Ok(DynamicalResponse {
            nodes: self.t_nodes,
            response,
            drude,
            transit: self.transit,
            plateau_spread: spread,
            refinement_change: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn quick() -> DynamicalOptions {
        DynamicalOptions {
            check_refinement: false,
            ..Default::default()
        }
    }

    #[test]
    fn constant_velocity_is_purely_ballistic() {
        let s = constant_spec();
        let r = DynamicalResponse::compute(&s, &quick()).unwrap();
        let d = r.drude();
        let e = s.drude_reference();
        for i in 0..2 {
            for j in 0..2 {
                assert!((d[i][j] - e[i][j]).abs() < 1e-6, "{i}{j}: {} vs {}", d[i][j], e[i][j]);
            }
        }
        for w in [0.5, 1.0, 2.0] {
            assert!(r.regular(w).unwrap().iter().flatten().all(|v| v.abs() < 1e-6));
        }
    }

    #[test]
    fn omega_zero_rejected() {
        let r = DynamicalResponse::compute(&constant_spec(), &quick()).unwrap();
        assert!(matches!(r.regular(0.0), Err(Error::OmegaZero)));
    }

    #[test]
    fn bad_options_rejected() {
        let opts = DynamicalOptions {
            delta_mu: 0.0,
            ..Default::default()
        };
        assert!(DynamicalResponse::compute(&constant_spec(), &opts).is_err());
    }
}
