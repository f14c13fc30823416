//! Non-equilibrium expectation values and correlators.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circlemaps::{
    anomaly_s, anomaly_t, build_f, build_g, build_h, CircleMap, GaugeFunction, ScenarioConstants,
};
use crate::error::{Error, Result};
use crate::lightcone::{LightConeFrame, Warp};
use crate::profiles::{Domain, Profile};

/// Smallest admissible `|sinh|` argument in correlators.
pub const COINCIDENCE_THRESHOLD: f64 = 1e-8;
/// Finite-difference step for the continuity checks.
pub const CONTINUITY_STEP: f64 = 1e-5;

/// The profiles `(v, β, μ)` together with `c` and `κ`.
#[derive(Debug, Clone)]
pub struct ProfileTriple {
    pub v: Profile,
    pub beta: Profile,
    pub mu: Profile,
    pub c: f64,
    pub kappa: f64,
}

impl ProfileTriple {
    /// `F(x) = π c / 6 β² + κ μ² / 2π - T(x)`.
    pub fn big_f(&self, x: f64) -> f64 {
        let b = self.beta.value(x);
        let m = self.mu.value(x);
        PI * self.c / (6.0 * b * b) + self.kappa * m * m / (2.0 * PI)
            - anomaly_t(&self.v, &self.beta, self.c, x)
    }

    /// `G(x) = κ μ / π`.
    pub fn big_g(&self, x: f64) -> f64 {
        self.kappa * self.mu.value(x) / PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanValues {
    pub energy_density: f64,
    pub heat_current: f64,
    pub charge_density: f64,
    pub charge_current: f64,
}

/// Mean values from a profile triple and any light-cone frame. Profile
/// arguments are reduced into `[-L/2, L/2)` when `period` is given.
pub fn mean_values_with<W: Warp>(
    p: &ProfileTriple,
    frame: &LightConeFrame<W>,
    period: Option<f64>,
    x: f64,
    t: f64,
) -> MeanValues {
    let (xm, xp) = frame.tilde_pair(x, t);
    let (xm, xp) = match period {
        Some(l) => (reduce(xm, l), reduce(xp, l)),
        None => (xm, xp),
    };
    mean_values_at_points(p, x, xm, xp)
}

/// Mean values at `x` given the light-cone points `x̃⁻`, `x̃⁺` (already reduced).
pub fn mean_values_at_points(p: &ProfileTriple, x: f64, xm: f64, xp: f64) -> MeanValues {
    let vx = p.v.value(x);
    let (fm, fp) = (p.big_f(xm), p.big_f(xp));
    let (gm, gp) = (p.big_g(xm), p.big_g(xp));
    MeanValues {
        energy_density: (fm + fp) / (2.0 * vx) - anomaly_s(&p.v, p.c, x) / vx,
        heat_current: 0.5 * (fm - fp),
        charge_density: (gm + gp) / (2.0 * vx),
        charge_current: 0.5 * (gm - gp),
    }
}

/// `(J, j)`: heat and charge currents from the light-cone points alone.
pub fn currents_at_points(p: &ProfileTriple, xm: f64, xp: f64) -> (f64, f64) {
    (
        0.5 * (p.big_f(xm) - p.big_f(xp)),
        0.5 * (p.big_g(xm) - p.big_g(xp)),
    )
}

/// `x` reduced into `[-L/2, L/2)`.
pub fn reduce(x: f64, l: f64) -> f64 {
    let r = x - l * ((x + 0.5 * l) / l).floor();
    if r >= 0.5 * l {
        r - l
    } else {
        r
    }
}

/// Optional reparametrization of the reference data. None of the physical
/// outputs depend on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub f_scale: f64,
    pub f_offset: f64,
    pub g_scale: f64,
    pub g_offset: f64,
    /// Replacement for `μ0`; the gauge function is shifted to compensate.
    pub mu0: Option<f64>,
}

impl Default for Normalization {
    fn default() -> Self {
        Self {
            f_scale: 1.0,
            f_offset: 0.0,
            g_scale: 1.0,
            g_offset: 0.0,
            mu0: None,
        }
    }
}

/// Full scenario data on a circle of circumference `L`.
#[derive(Debug, Clone)]
pub struct Scenario {
    profiles: ProfileTriple,
    constants: ScenarioConstants,
    f: CircleMap,
    g: CircleMap,
    h: GaugeFunction,
    /// `h_eff = h + h_shift ∫_0^x 1/(v β)`; non-zero only after `μ0` is renormalized.
    h_shift: f64,
    frame: LightConeFrame,
}

impl Scenario {
    pub fn new(v: Profile, beta: Profile, mu: Profile, c: f64, kappa: f64) -> Result<Self> {
        let length = match v.domain() {
            Domain::Circle { period } => period,
            Domain::Line { .. } => {
                return Err(Error::InvalidParameter(
                    "scenario profiles must live on a circle".into(),
                ))
            }
        };
        let (f, v0) = build_f(&v)?;
        let (g, v0b0) = build_g(&v, &beta)?;
        let (h, mu0) = build_h(&v, &beta, &mu)?;
        let constants = ScenarioConstants {
            v0,
            beta0: v0b0 / v0,
            mu0,
            c,
            kappa,
            length,
        };
        constants.validate()?;
        let frame = LightConeFrame::new(f.clone(), v0)?;
        Ok(Self {
            profiles: ProfileTriple {
                v,
                beta,
                mu,
                c,
                kappa,
            },
            constants,
            f,
            g,
            h,
            h_shift: 0.0,
            frame,
        })
    }

    /// The same physical scenario with reference data `f -> a f + b`,
    /// `v0 -> a v0`, `g -> a' g + b'`, `v0 β0 -> a' v0 β0` and optionally a
    /// different `μ0`. The mean relations for `(v0, β0, μ0)` no longer hold
    /// for the result.
    pub fn renormalized(&self, n: Normalization) -> Result<Self> {
        let f = self.f.affine(n.f_scale, n.f_offset)?;
        let g = self.g.affine(n.g_scale, n.g_offset)?;
        let v0 = n.f_scale * self.constants.v0;
        let v0b0 = n.g_scale * self.v0_beta0();
        let mu0 = n.mu0.unwrap_or(self.constants.mu0);
        let beta0 = v0b0 / v0;
        let h_shift =
            self.h_shift + self.constants.mu0 * self.constants.beta0 - mu0 * beta0;
        let constants = ScenarioConstants {
            v0,
            beta0,
            mu0,
            ..self.constants
        };
        constants.validate()?;
        Ok(Self {
            profiles: self.profiles.clone(),
            constants,
            frame: LightConeFrame::new(f.clone(), v0)?,
            f,
            g,
            h: self.h.clone(),
            h_shift,
        })
    }

    pub fn profiles(&self) -> &ProfileTriple {
        &self.profiles
    }
    pub fn constants(&self) -> &ScenarioConstants {
        &self.constants
    }
    pub fn f(&self) -> &CircleMap {
        &self.f
    }
    pub fn g(&self) -> &CircleMap {
        &self.g
    }
    pub fn h(&self) -> &GaugeFunction {
        &self.h
    }
    pub fn frame(&self) -> &LightConeFrame {
        &self.frame
    }
    pub fn length(&self) -> f64 {
        self.constants.length
    }
    pub fn v0_beta0(&self) -> f64 {
        self.constants.v0 * self.constants.beta0
    }

    /// `∫_0^x dx'/(v β)`, unreduced.
    fn inv_vb_primitive(&self, x: f64) -> f64 {
        (self.g.value(x) - self.g.value(0.0)) / self.v0_beta0()
    }

    /// The gauge function in the current normalization.
    pub fn h_value(&self, x: f64) -> f64 {
        let base = self.h.value(x);
        if self.h_shift == 0.0 {
            base
        } else {
            base + self.h_shift * self.inv_vb_primitive(x)
        }
    }

    /// `∫_a^b μ/v dx = [h + μ0 β0 ∫ 1/(vβ)]_a^b`.
    pub fn mu_over_v_integral(&self, a: f64, b: f64) -> f64 {
        let m = self.constants.mu0 * self.constants.beta0;
        (self.h_value(b) - self.h_value(a))
            + m * (self.inv_vb_primitive(b) - self.inv_vb_primitive(a))
    }

    fn reduce(&self, x: f64) -> f64 {
        reduce(x, self.constants.length)
    }
}

/// `(⟨E⟩, ⟨J⟩, ⟨ρ⟩, ⟨j⟩)` at `(x, t)`.
pub fn mean_values(s: &Scenario, x: f64, t: f64) -> MeanValues {
    mean_values_with(&s.profiles, &s.frame, Some(s.length()), x, t)
}

/// Mean values on the tensor grid `ts × xs`, time-major, in parallel.
pub fn mean_values_grid(s: &Scenario, xs: &[f64], ts: &[f64]) -> Vec<MeanValues> {
    let points: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| xs.iter().map(move |&x| (x, t)))
        .collect();
    points
        .par_iter()
        .map(|&(x, t)| mean_values(s, x, t))
        .collect()
}

/// Residuals of the four continuity equations at `(x, t)`, by central
/// differences with step [`CONTINUITY_STEP`]:
/// `∂t E + ∂x J`, `∂t J + v ∂x (v E + S)`, `∂t ρ + ∂x j`, `∂t j + v ∂x (v ρ)`.
pub fn continuity_residuals(s: &Scenario, x: f64, t: f64) -> [f64; 4] {
    let h = CONTINUITY_STEP;
    let p = &s.profiles;
    let at = |x: f64, t: f64| mean_values(s, x, t);
    let (tp, tm) = (at(x, t + h), at(x, t - h));
    let (xp, xm) = (at(x + h, t), at(x - h, t));
    let d = |a: f64, b: f64| (a - b) / (2.0 * h);
    let vx = p.v.value(x);
    let (vp, vm) = (p.v.value(x + h), p.v.value(x - h));
    let (sp, sm) = (anomaly_s(&p.v, p.c, x + h), anomaly_s(&p.v, p.c, x - h));
    [
        d(tp.energy_density, tm.energy_density) + d(xp.heat_current, xm.heat_current),
        d(tp.heat_current, tm.heat_current)
            + vx * d(vp * xp.energy_density + sp, vm * xm.energy_density + sm),
        d(tp.charge_density, tm.charge_density) + d(xp.charge_current, xm.charge_current),
        d(tp.charge_current, tm.charge_current)
            + vx * d(vp * xp.charge_density, vm * xm.charge_density),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelatorKind {
    /// `⟨J J⟩`, heat current with heat current.
    HeatHeat,
    /// `⟨j j⟩`, charge current with charge current.
    ChargeCharge,
    /// `⟨J j⟩`.
    HeatCharge,
    /// `⟨j J⟩`.
    ChargeHeat,
}

impl std::str::FromStr for CorrelatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "JJ" | "heat-heat" => Ok(Self::HeatHeat),
            "jj" | "charge-charge" => Ok(Self::ChargeCharge),
            "Jj" | "heat-charge" => Ok(Self::HeatCharge),
            "jJ" | "charge-heat" => Ok(Self::ChargeHeat),
            other => Err(Error::InvalidParameter(format!(
                "unknown correlator kind '{other}' (expected JJ, jj, Jj or jJ)"
            ))),
        }
    }
}

fn sinh_argument(s: &Scenario, a: f64, b: f64) -> Result<f64> {
    let arg = PI * (s.g.value(a) - s.g.value(b)) / s.v0_beta0();
    if arg.abs() < COINCIDENCE_THRESHOLD {
        return Err(Error::CoincidentPoints { argument: arg });
    }
    Ok(arg)
}

/// Connected current-current correlator in the thermodynamic limit.
pub fn current_current(
    s: &Scenario,
    kind: CorrelatorKind,
    x1: f64,
    t1: f64,
    x2: f64,
    t2: f64,
) -> Result<f64> {
    let p = &s.profiles;
    let (m1, p1) = s.frame.tilde_pair(x1, t1);
    let (m2, p2) = s.frame.tilde_pair(x2, t2);
    let mut total = 0.0;
    // r = + uses x̃⁻, r = - uses x̃⁺.
    for (a, b) in [(m1, m2), (p1, p2)] {
        let arg = sinh_argument(s, a, b)?;
        let (ra, rb) = (s.reduce(a), s.reduce(b));
        let (ba, bb) = (p.beta.value(ra), p.beta.value(rb));
        let sh2 = arg.sinh().powi(2);
        let sh2_term = -p.kappa / (4.0 * ba * bb * sh2);
        total += match kind {
            CorrelatorKind::HeatHeat => {
                PI * PI * p.c / (8.0 * ba * ba * bb * bb * sh2 * sh2)
                    + p.mu.value(ra) * p.mu.value(rb) * sh2_term
            }
            CorrelatorKind::ChargeCharge => sh2_term,
            CorrelatorKind::HeatCharge => p.mu.value(ra) * sh2_term,
            CorrelatorKind::ChargeHeat => p.mu.value(rb) * sh2_term,
        };
    }
    Ok(total)
}

/// Weights and charges of a primary field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryFieldSpec {
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    /// Renormalization length; results depend on it unless `2(Δ⁺ + Δ⁻) = 1`.
    pub ell_tilde: f64,
}

impl PrimaryFieldSpec {
    /// Checks `Δ± ≥ 0`, `ℓ̃ > 0` and the Sugawara constraint `(τ±)² = 2κΔ±` to 1e-12.
    pub fn new(
        delta_plus: f64,
        delta_minus: f64,
        tau_plus: f64,
        tau_minus: f64,
        ell_tilde: f64,
        kappa: f64,
    ) -> Result<Self> {
        if !(delta_plus >= 0.0 && delta_minus >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "conformal weights must be non-negative (got {delta_plus}, {delta_minus})"
            )));
        }
        if !(ell_tilde > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "renormalization length must be positive, got {ell_tilde}"
            )));
        }
        for (tau, delta) in [(tau_plus, delta_plus), (tau_minus, delta_minus)] {
            let (tau_sq, expected) = (tau * tau, 2.0 * kappa * delta);
            if (tau_sq - expected).abs() > 1e-12 * expected.abs().max(1.0) {
                return Err(Error::SugawaraViolated { tau_sq, expected });
            }
        }
        Ok(Self {
            delta_plus,
            delta_minus,
            tau_plus,
            tau_minus,
            ell_tilde,
        })
    }

    /// Largest Sugawara defect `|(τ±)² - 2κΔ±|`.
    pub fn sugawara_defect(&self, kappa: f64) -> f64 {
        let a = (self.tau_plus.powi(2) - 2.0 * kappa * self.delta_plus).abs();
        let b = (self.tau_minus.powi(2) - 2.0 * kappa * self.delta_minus).abs();
        a.max(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuttingerCouplings {
    pub g2: f64,
    pub g4: f64,
    pub v_fermi: f64,
}

impl LuttingerCouplings {
    pub fn new(g2: f64, g4: f64, v_fermi: f64) -> Result<Self> {
        let bound = 2.0 + g4;
        if !(g2.abs() < bound) {
            return Err(Error::CouplingOutOfRange {
                g2_abs: g2.abs(),
                bound,
            });
        }
        if !(v_fermi > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Fermi velocity must be positive, got {v_fermi}"
            )));
        }
        Ok(Self { g2, g4, v_fermi })
    }
}

/// Renormalized velocity, Luttinger parameter and fermion weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuttingerParams {
    pub v: f64,
    pub k: f64,
}

impl LuttingerParams {
    /// `κ = K` for the conserved current of the model.
    pub fn kappa(&self) -> f64 {
        self.k
    }

    /// `Δ±_{ψ_r} = (1 ± r K)² / 8K` (the same for `ψ⁺_r` and `ψ⁻_r`).
    pub fn weights(&self, r: i8) -> (f64, f64) {
        let rk = f64::from(r.signum()) * self.k;
        (
            (1.0 + rk).powi(2) / (8.0 * self.k),
            (1.0 - rk).powi(2) / (8.0 * self.k),
        )
    }

    /// `τ±_{ψ⁺_r} = (1 ± r K)/2`.
    pub fn charges_psi_plus(&self, r: i8) -> (f64, f64) {
        let rk = f64::from(r.signum()) * self.k;
        (0.5 * (1.0 + rk), 0.5 * (1.0 - rk))
    }

    /// The field `ψ⁻_r` (charges `-τ±_{ψ⁺_r}`), as used in the two-point function.
    pub fn psi_minus(&self, r: i8, ell_tilde: f64) -> Result<PrimaryFieldSpec> {
        let (dp, dm) = self.weights(r);
        let (tp, tm) = self.charges_psi_plus(r);
        PrimaryFieldSpec::new(dp, dm, -tp, -tm, ell_tilde, self.kappa())
    }

    pub fn psi_plus(&self, r: i8, ell_tilde: f64) -> Result<PrimaryFieldSpec> {
        let (dp, dm) = self.weights(r);
        let (tp, tm) = self.charges_psi_plus(r);
        PrimaryFieldSpec::new(dp, dm, tp, tm, ell_tilde, self.kappa())
    }
}

pub fn luttinger_params(c: &LuttingerCouplings) -> Result<LuttingerParams> {
    let c = LuttingerCouplings::new(c.g2, c.g4, c.v_fermi)?;
    let v = c.v_fermi * ((1.0 + 0.5 * c.g4).powi(2) - (0.5 * c.g2).powi(2)).sqrt();
    let k = ((1.0 + 0.5 * (c.g4 - c.g2)) / (1.0 + 0.5 * (c.g4 + c.g2))).sqrt();
    Ok(LuttingerParams { v, k })
}

/// `⟨ψ⁺_r(x1; t1) ψ⁻_{r'}(x2; t2)⟩` for `field` the weights of `ψ⁻_r`.
///
/// The powers `z^{2Δ}` use the principal branch; the bases are `±i` times a
/// positive or negative real, so `arg z = ±π/2`.
#[allow(clippy::too_many_arguments)]
pub fn fermion_two_point(
    s: &Scenario,
    field: &PrimaryFieldSpec,
    r: i8,
    r_prime: i8,
    x1: f64,
    t1: f64,
    x2: f64,
    t2: f64,
) -> Result<Complex64> {
    if r != r_prime {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let p = &s.profiles;
    let ell = field.ell_tilde;
    let (m1, p1) = s.frame.tilde_pair(x1, t1);
    let (m2, p2) = s.frame.tilde_pair(x2, t2);
    let arg_m = sinh_argument(s, m1, m2)?;
    let arg_p = sinh_argument(s, p1, p2)?;
    let vv = p.v.value(x1) * p.v.value(x2);
    let beta = |x: f64| p.beta.value(s.reduce(x));
    let denom_m = (vv * beta(m1) * beta(m2)).sqrt() / (PI * ell) * arg_m.sinh();
    let denom_p = (vv * beta(p1) * beta(p2)).sqrt() / (PI * ell) * arg_p.sinh();
    let phase = field.tau_plus * s.mu_over_v_integral(m2, m1)
        - field.tau_minus * s.mu_over_v_integral(p2, p1);
    let i = Complex64::i();
    let factor_m = principal_power(i / denom_m, 2.0 * field.delta_plus);
    let factor_p = principal_power(-i / denom_p, 2.0 * field.delta_minus);
    Ok(Complex64::from_polar(1.0 / (2.0 * PI * ell), phase) * factor_m * factor_p)
}

fn principal_power(z: Complex64, p: f64) -> Complex64 {
    if p == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if p == 1.0 {
        z
    } else {
        Complex64::from_polar(z.norm().powf(p), p * z.arg())
    }
}

/// Equilibrium one-point values and connected two-point functions of the
/// chiral components in the thermodynamic limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    /// `⟨T±⟩`.
    T,
    /// `⟨J±⟩`.
    J,
    /// Connected `⟨T± T±⟩`.
    TTSame,
    /// Connected `⟨T± T∓⟩`.
    TTCross,
    JJSame,
    JJCross,
    /// Connected `⟨T± J±⟩ = ⟨J± T±⟩`.
    TJSame,
    TJCross,
}

impl std::str::FromStr for EquilibriumKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "T" => Self::T,
            "J" => Self::J,
            "TT" | "TT-same" => Self::TTSame,
            "TT-cross" => Self::TTCross,
            "JJ" | "JJ-same" => Self::JJSame,
            "JJ-cross" => Self::JJCross,
            "TJ" | "TJ-same" => Self::TJSame,
            "TJ-cross" => Self::TJCross,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown equilibrium kind '{other}'"
                )))
            }
        })
    }
}

pub fn equilibrium_reference(
    kind: EquilibriumKind,
    separation: f64,
    v0: f64,
    beta0: f64,
    mu0: f64,
    c: f64,
    kappa: f64,
) -> Result<f64> {
    let vb = v0 * beta0;
    let sinh_sq = || -> Result<f64> {
        let arg = PI * separation / vb;
        if arg.abs() < COINCIDENCE_THRESHOLD {
            return Err(Error::CoincidentPoints { argument: arg });
        }
        Ok(arg.sinh().powi(2))
    };
    Ok(match kind {
        EquilibriumKind::T => PI * c / (12.0 * vb * vb) + kappa * mu0 * mu0 / (4.0 * PI * v0 * v0),
        EquilibriumKind::J => kappa * mu0 / (2.0 * PI * v0),
        EquilibriumKind::TTSame => {
            let s2 = sinh_sq()?;
            PI * PI * c / (8.0 * vb.powi(4) * s2 * s2)
                - kappa * mu0 * mu0 / (v0 * v0) / (4.0 * vb * vb * s2)
        }
        EquilibriumKind::JJSame => -kappa / (4.0 * vb * vb * sinh_sq()?),
        EquilibriumKind::TJSame => -kappa * mu0 / v0 / (4.0 * vb * vb * sinh_sq()?),
        EquilibriumKind::TTCross | EquilibriumKind::JJCross | EquilibriumKind::TJCross => {
            sinh_sq()?;
            0.0
        }
    })
}
