//! Heat and charge conductivities of an inhomogeneous CFT on the line.
//!
//! Index 0 (`m = 1`) is the charge channel, driven by `μ₁ = βμ`; index 1
//! (`m = 2`) is the heat channel, driven by `μ₂ = −β`. Three routes compute the
//! regular parts: the closed form, the Green-Kubo reduction and the dynamical
//! response to kink-shaped perturbations.

mod closed;
mod dynamical;
mod greenkubo;
mod linemap;

pub use closed::{closed_form, i_omega, thermal_electrical, ThermalElectrical};
pub use dynamical::{dynamical_conductivity, dynamical_drude, DynamicalOptions, DynamicalResponse};
pub use greenkubo::{
    delta_i, green_kubo_drude, green_kubo_regular, kernel_k, sinh_fourier, KernelK,
};
pub use linemap::LineMap;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lightcone::Warp;
use crate::numerics::QuadratureSpec;
use crate::profiles::{Domain, KinkProfile, Profile};

pub type Matrix2 = [[f64; 2]; 2];

/// Kink densities below this are treated as zero when truncating the line.
pub const KINK_TAIL_TOL: f64 = 1e-14;

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-12, 1e-13, 20_000).expect("valid tolerances")
}

/// Inputs of a conductivity computation.
#[derive(Debug, Clone)]
pub struct TransportSpec {
    v_line: Profile,
    kink: KinkProfile,
    beta: f64,
    mu: f64,
    c: f64,
    kappa: f64,
    omega_grid: Vec<f64>,
    vbar: f64,
    map: LineMap,
}

impl TransportSpec {
    /// `vbar` must be the asymptote of `v_line` on both sides.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        v_line: Profile,
        kink: KinkProfile,
        beta: f64,
        mu: f64,
        c: f64,
        kappa: f64,
        omega_grid: Vec<f64>,
        vbar: f64,
    ) -> Result<Self> {
        let Domain::Line { left, right, .. } = v_line.domain() else {
            return Err(Error::InvalidParameter(
                "transport velocity must live on the line".into(),
            ));
        };
        for side in [left, right] {
            if (side - vbar).abs() > 1e-12 * vbar.abs() {
                return Err(Error::InvalidParameter(format!(
                    "velocity asymptote {side} differs from vbar = {vbar}"
                )));
            }
        }
        for (name, value) in [("beta", beta), ("c", c), ("kappa", kappa)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        if let Some(w) = omega_grid.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frequencies must be finite and non-negative, got {w}"
            )));
        }
        let map = LineMap::new(&v_line, vbar)?;
        Ok(Self {
            v_line,
            kink,
            beta,
            mu,
            c,
            kappa,
            omega_grid,
            vbar,
            map,
        })
    }

    pub fn v_line(&self) -> &Profile {
        &self.v_line
    }
    pub fn kink(&self) -> &KinkProfile {
        &self.kink
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn omega_grid(&self) -> &[f64] {
        &self.omega_grid
    }
    pub fn vbar(&self) -> f64 {
        self.vbar
    }
    /// `f(x) = ∫₀ˣ v̄/v`.
    pub fn line_map(&self) -> &LineMap {
        &self.map
    }

    /// Half-width of the inhomogeneity window of `v`.
    pub fn window(&self) -> f64 {
        self.map.window()
    }

    /// Radius outside which the kink density is negligible.
    pub fn kink_radius(&self) -> f64 {
        self.kink.support_radius(KINK_TAIL_TOL)
    }

    /// The same spec with another frequency grid.
    pub fn with_omegas(&self, omega_grid: Vec<f64>) -> Result<Self> {
        Self::new(
            self.v_line.clone(),
            self.kink.clone(),
            self.beta,
            self.mu,
            self.c,
            self.kappa,
            omega_grid,
            self.vbar,
        )
    }

    /// The universal Drude matrix.
    pub fn drude_reference(&self) -> Matrix2 {
        let (v, b, m, c, k) = (self.vbar, self.beta, self.mu, self.c, self.kappa);
        let d12 = v * k * m / (PI * b);
        [
            [v * k / (PI * b), d12],
            [d12, PI * v * c / (3.0 * b.powi(3)) + v * k * m * m / (PI * b)],
        ]
    }

    pub(crate) fn y_window(&self) -> (f64, f64) {
        let x = self.window();
        (self.map.forward(-x), self.map.forward(x))
    }
}

/// Drude matrix, regular parts and Wiedemann-Franz diagnostics on a
/// frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductivityResult {
    pub omegas: Vec<f64>,
    pub drude: Matrix2,
    /// `Re κ^reg(ω)` per frequency.
    pub regular: Vec<Matrix2>,
    /// `I(ω)` per frequency; for numeric routes the value implied by `κ₁₁`.
    pub i_values: Vec<f64>,
    pub wf_drude_ratio: f64,
    pub wf_regular_ratio: Vec<f64>,
    pub beta: f64,
    pub mu: f64,
    pub c: f64,
    pub kappa: f64,
}

impl ConductivityResult {
    /// Assemble a result from route outputs; the ratios are derived here.
    /// Off-diagonal pairs are replaced by their mean, so numeric routes
    /// should check their raw asymmetry before assembling.
    pub fn assemble(
        spec: &TransportSpec,
        omegas: Vec<f64>,
        drude: Matrix2,
        regular: Vec<Matrix2>,
        i_values: Vec<f64>,
    ) -> Self {
        let mut r = Self {
            omegas,
            drude: symmetrized(drude),
            regular: regular.into_iter().map(symmetrized).collect(),
            i_values,
            wf_drude_ratio: f64::NAN,
            wf_regular_ratio: Vec::new(),
            beta: spec.beta,
            mu: spec.mu,
            c: spec.c,
            kappa: spec.kappa,
        };
        let te = thermal_electrical(&r, spec.beta, spec.mu);
        r.wf_drude_ratio = te.wf_drude_ratio;
        r.wf_regular_ratio = te.wf_regular_ratio;
        r
    }
}

fn symmetrized(mut m: Matrix2) -> Matrix2 {
    let off = 0.5 * (m[0][1] + m[1][0]);
    m[0][1] = off;
    m[1][0] = off;
    m
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::profiles::{make_smooth_kink, KinkShape};

    pub fn bump_spec(mu: f64) -> TransportSpec {
        TransportSpec::new(
            Profile::gaussian_bump(1.0, 0.5, 1.0, 8.0).unwrap(),
            make_smooth_kink(1.0, KinkShape::Tanh).unwrap(),
            1.0,
            mu,
            1.0,
            1.0,
            vec![0.5, 1.0, 2.0],
            1.0,
        )
        .unwrap()
    }

    pub fn constant_spec() -> TransportSpec {
        TransportSpec::new(
            Profile::constant_line(1.0, true).unwrap(),
            make_smooth_kink(1.0, KinkShape::Tanh).unwrap(),
            1.0,
            0.0,
            1.0,
            1.0,
            vec![0.5, 1.0, 2.0],
            1.0,
        )
        .unwrap()
    }
}
