//! Smooth input profiles on the circle or the line, and kink functions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{integrate, Jet, QuadratureSpec, SampledPeriodic};

/// A profile written once as a function of a [`Jet`].
pub type JetFn = Arc<dyn Fn(Jet) -> Jet + Send + Sync>;

/// Where a profile lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Circle {
        period: f64,
    },
    /// The line, with `p(x) = left` for `x < -window` and `p(x) = right` for
    /// `x > window` to working precision.
    Line {
        left: f64,
        right: f64,
        window: f64,
    },
}

#[derive(Clone)]
enum Evaluator {
    Closed(JetFn),
    Sampled(Arc<SampledPeriodic>),
}

#[derive(Clone)]
pub struct Profile {
    domain: Domain,
    evaluator: Evaluator,
    positivity_required: bool,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.evaluator {
            Evaluator::Closed(_) => "closed-form",
            Evaluator::Sampled(_) => "sampled",
        };
        f.debug_struct("Profile")
            .field("domain", &self.domain)
            .field("evaluator", &kind)
            .field("positivity_required", &self.positivity_required)
            .finish()
    }
}

const POSITIVITY_GRID: usize = 4096;
const PERIODICITY_GRID: usize = 64;
const PERIODICITY_TOL: f64 = 1e-10;
const ASYMPTOTE_TOL: f64 = 1e-12;

impl Profile {
    /// Closed-form profile on a circle of circumference `period`.
    pub fn circle(period: f64, f: JetFn, positivity_required: bool) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "circle period must be positive, got {period}"
            )));
        }
        let p = Self {
            domain: Domain::Circle { period },
            evaluator: Evaluator::Closed(f),
            positivity_required,
        };
        p.validate()?;
        Ok(p)
    }

    /// Circle profile given by samples on `x_j = -L/2 + j L / N`.
    pub fn circle_sampled(period: f64, samples: Vec<f64>, positivity_required: bool) -> Result<Self> {
        let sampled = SampledPeriodic::new(period, samples)?;
        if !sampled.is_resolved() {
            log::warn!(
                "sampled profile is under-resolved (tail ratio {:e}); derivatives are unreliable",
                sampled.tail_ratio()
            );
        }
        let p = Self {
            domain: Domain::Circle { period },
            evaluator: Evaluator::Sampled(Arc::new(sampled)),
            positivity_required,
        };
        p.validate()?;
        Ok(p)
    }

    /// Closed-form profile on the line equal to `left` / `right` outside `[-window, window]`.
    pub fn line(
        left: f64,
        right: f64,
        window: f64,
        f: JetFn,
        positivity_required: bool,
    ) -> Result<Self> {
        if !(window > 0.0) || !window.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "inhomogeneity window must be positive, got {window}"
            )));
        }
        let p = Self {
            domain: Domain::Line {
                left,
                right,
                window,
            },
            evaluator: Evaluator::Closed(f),
            positivity_required,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn constant_circle(period: f64, value: f64, positivity_required: bool) -> Result<Self> {
        Self::circle(period, Arc::new(move |_| Jet::constant(value)), positivity_required)
    }

    pub fn constant_line(value: f64, positivity_required: bool) -> Result<Self> {
        Self::line(
            value,
            value,
            1.0,
            Arc::new(move |_| Jet::constant(value)),
            positivity_required,
        )
    }

    /// `mean + amplitude * cos(2 pi n x / L + phase)` on the circle.
    pub fn cosine(
        period: f64,
        mean: f64,
        amplitude: f64,
        harmonic: u32,
        phase: f64,
        positivity_required: bool,
    ) -> Result<Self> {
        let k = 2.0 * PI * f64::from(harmonic) / period;
        Self::circle(
            period,
            Arc::new(move |x| (x * k + phase).cos() * amplitude + mean),
            positivity_required,
        )
    }

    /// `1 / (base + amplitude * cos(2 pi n x / L + phase))` on the circle.
    pub fn inverse_cosine(
        period: f64,
        base: f64,
        amplitude: f64,
        harmonic: u32,
        phase: f64,
        positivity_required: bool,
    ) -> Result<Self> {
        if base.abs() <= amplitude.abs() {
            return Err(Error::InvalidParameter(format!(
                "inverse cosine needs |base| > |amplitude| (got {base}, {amplitude})"
            )));
        }
        let k = 2.0 * PI * f64::from(harmonic) / period;
        Self::circle(
            period,
            Arc::new(move |x| ((x * k + phase).cos() * amplitude + base).recip()),
            positivity_required,
        )
    }

    /// Smooth periodic step: `mean - (jump/2) tanh(sin(2 pi x / L) / eps)`.
    ///
    /// Near `x = 0` it interpolates from `mean + jump/2` on the left to
    /// `mean - jump/2` on the right over a width of about `eps L / 2 pi`; an
    /// antikink sits at `x = ±L/2`.
    pub fn periodic_step(
        period: f64,
        mean: f64,
        jump: f64,
        eps: f64,
        positivity_required: bool,
    ) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step sharpness eps must be positive, got {eps}"
            )));
        }
        let k = 2.0 * PI / period;
        Self::circle(
            period,
            Arc::new(move |x| ((x * k).sin() / eps).tanh() * (-0.5 * jump) + mean),
            positivity_required,
        )
    }

    /// `vbar / (1 - a exp(-x^2 / 2 sigma^2))` on the line, so that
    /// `1 - vbar / v(x)` is a Gaussian of height `a`.
    pub fn gaussian_bump(vbar: f64, a: f64, sigma: f64, window: f64) -> Result<Self> {
        if !(a < 1.0) || !(sigma > 0.0) || !(vbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian bump needs vbar > 0, a < 1, sigma > 0 (got {vbar}, {a}, {sigma})"
            )));
        }
        let s2 = 2.0 * sigma * sigma;
        Self::line(
            vbar,
            vbar,
            window,
            Arc::new(move |x| ((x * x / -s2).exp() * (-a) + 1.0).recip() * vbar),
            true,
        )
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn positivity_required(&self) -> bool {
        self.positivity_required
    }

    pub fn period(&self) -> Option<f64> {
        match self.domain {
            Domain::Circle { period } => Some(period),
            Domain::Line { .. } => None,
        }
    }

    /// Value and first three derivatives at `x`.
    pub fn jet(&self, x: f64) -> Jet {
        match &self.evaluator {
            Evaluator::Closed(f) => f(Jet::var(x)),
            Evaluator::Sampled(s) => s.eval_jet(x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.evaluator {
            Evaluator::Closed(f) => f(Jet::constant(x)).v,
            Evaluator::Sampled(s) => s.eval(x),
        }
    }

    /// `p^(order)(x)` for `order <= 3`.
    pub fn eval(&self, x: f64, order: usize) -> Result<f64> {
        if order > 3 {
            return Err(Error::OrderUnavailable(order));
        }
        Ok(self.jet(x).derivative(order).expect("order checked"))
    }

    /// The profile as a reusable jet function.
    pub fn jet_fn(&self) -> JetFn {
        match &self.evaluator {
            Evaluator::Closed(f) => f.clone(),
            Evaluator::Sampled(s) => {
                let s = s.clone();
                Arc::new(move |x: Jet| s.eval_jet(x.v).after(x))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self.domain {
            Domain::Circle { period } => {
                for j in 0..PERIODICITY_GRID {
                    let x = -0.5 * period + (j as f64 + 0.37) * period / PERIODICITY_GRID as f64;
                    let a = self.value(x);
                    let b = self.value(x + period);
                    let mismatch = (a - b).abs();
                    if !a.is_finite() || mismatch > PERIODICITY_TOL * a.abs().max(1.0) {
                        return Err(Error::NotPeriodic {
                            period,
                            x,
                            mismatch,
                        });
                    }
                }
                if self.positivity_required {
                    self.check_positive(-0.5 * period, 0.5 * period)?;
                }
            }
            Domain::Line {
                left,
                right,
                window,
            } => {
                for (x, asym) in [
                    (-2.0 * window, left),
                    (-4.0 * window, left),
                    (2.0 * window, right),
                    (4.0 * window, right),
                ] {
                    let deviation = (self.value(x) - asym).abs();
                    let allowed = if asym == 0.0 {
                        ASYMPTOTE_TOL
                    } else {
                        ASYMPTOTE_TOL * asym.abs()
                    };
                    if !(deviation <= allowed) {
                        return Err(Error::AsymptoteViolated { x, deviation });
                    }
                }
                if self.positivity_required {
                    for (x, value) in [(-window, left), (window, right)] {
                        if !(value > 0.0) {
                            return Err(Error::PositivityViolated {
                                what: "profile asymptote",
                                x,
                                value,
                            });
                        }
                    }
                    self.check_positive(-2.0 * window, 2.0 * window)?;
                }
            }
        }
        Ok(())
    }

    fn check_positive(&self, a: f64, b: f64) -> Result<()> {
        for j in 0..POSITIVITY_GRID {
            let x = a + j as f64 * (b - a) / POSITIVITY_GRID as f64;
            let value = self.value(x);
            if !(value > 0.0) {
                return Err(Error::PositivityViolated {
                    what: "profile",
                    x,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Shape of a smooth kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KinkShape {
    Tanh,
    Arctan,
    Erf,
}

impl std::str::FromStr for KinkShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Self::Tanh),
            "arctan" | "atan" => Ok(Self::Arctan),
            "erf" => Ok(Self::Erf),
            other => Err(Error::InvalidParameter(format!(
                "unknown kink shape '{other}' (expected tanh, arctan or erf)"
            ))),
        }
    }
}

/// A monotone decreasing profile on the line from +1/2 (left) to -1/2 (right).
#[derive(Debug, Clone)]
pub struct KinkProfile {
    base: Profile,
    width: f64,
    shape: KinkShape,
}

/// Build the kink of the given shape and width:
/// tanh: `-tanh(x/w)/2`, arctan: `-atan(x/w)/pi`, erf: `-erf(x/w)/2`.
pub fn make_smooth_kink(width: f64, shape: KinkShape) -> Result<KinkProfile> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "kink width must be positive, got {width}"
        )));
    }
    let w = width;
    let (f, window): (JetFn, f64) = match shape {
        KinkShape::Tanh => (Arc::new(move |x: Jet| (x / w).tanh() * -0.5), 15.0 * w),
        KinkShape::Erf => (Arc::new(move |x: Jet| (x / w).erf() * -0.5), 6.0 * w),
        // Algebraic tails: |W -/+ 1/2| ~ w / (pi |x|) only drops below 1e-12
        // relative far out.
        KinkShape::Arctan => (Arc::new(move |x: Jet| (x / w).atan() * -PI.recip()), 7e11 * w),
    };
    let base = Profile::line(0.5, -0.5, window, f, false)?;
    Ok(KinkProfile { base, width, shape })
}

impl KinkProfile {
    pub fn profile(&self) -> &Profile {
        &self.base
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn shape(&self) -> KinkShape {
        self.shape
    }

    pub fn w(&self, x: f64) -> f64 {
        self.base.value(x)
    }

    pub fn jet(&self, x: f64) -> Jet {
        self.base.jet(x)
    }

    /// `-W'(x)`, the non-negative kink density.
    pub fn density(&self, x: f64) -> f64 {
        -self.base.jet(x).d1
    }

    /// Radius beyond which `-W'` is below `tol`.
    pub fn support_radius(&self, tol: f64) -> f64 {
        let w = self.width;
        let r = match self.shape {
            KinkShape::Tanh => 0.5 * w * (2.0 / (w * tol)).ln(),
            KinkShape::Erf => w * (1.0 / (w * PI.sqrt() * tol)).ln().max(0.0).sqrt(),
            KinkShape::Arctan => w * (1.0 / (PI * w * tol)).max(0.0).sqrt(),
        };
        r.max(w)
    }

    /// `∫ -W'(x) dx` over the whole line, computed with `x = w tan(theta)`.
    pub fn integrated_weight(&self) -> Result<f64> {
        let w = self.width;
        let spec = QuadratureSpec::with_tolerances(1e-13, 1e-15);
        let h = 0.5 * PI;
        integrate(
            |theta: f64| {
                let c = theta.cos();
                if c <= 0.0 {
                    return 0.0;
                }
                let x = w * theta.tan();
                let d = self.density(x) * w / (c * c);
                if d.is_finite() {
                    d
                } else {
                    0.0
                }
            },
            -h,
            h,
            &spec,
        )
    }

    /// Largest `W'` on a uniform grid over `[-20w, 20w]` (non-positive for a valid kink).
    pub fn max_slope(&self, points: usize) -> f64 {
        let r = 20.0 * self.width;
        (0..=points)
            .map(|j| self.base.jet(-r + 2.0 * r * j as f64 / points as f64).d1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `base + height * W(x)` on the line.
pub fn perturb(
    base_value: f64,
    kink: &KinkProfile,
    height: f64,
    positivity_required: bool,
) -> Result<Profile> {
    let left = base_value + 0.5 * height;
    let right = base_value - 0.5 * height;
    if positivity_required {
        for (x, value) in [(f64::NEG_INFINITY, left), (f64::INFINITY, right)] {
            if !(value > 0.0) {
                return Err(Error::PositivityViolated {
                    what: "perturbed profile",
                    x,
                    value,
                });
            }
        }
    }
    let w = kink.base.jet_fn();
    let window = match kink.base.domain {
        Domain::Line { window, .. } => window,
        Domain::Circle { .. } => unreachable!("kinks live on the line"),
    };
    Profile::line(
        left,
        right,
        window,
        Arc::new(move |x| w(x) * height + base_value),
        positivity_required,
    )
}
