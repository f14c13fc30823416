//! Generalized light-cone coordinates `x̃±(x, t) = f^{-1}(f(x) ± v0 t)`.

use rayon::prelude::*;

use crate::circlemaps::CircleMap;
use crate::error::{Error, Result};
use crate::numerics::Jet;
use crate::profiles::Profile;

/// An increasing map with an inverse, on the circle (as a lift) or the line.
pub trait Warp: Send + Sync {
    fn forward(&self, x: f64) -> f64;
    fn forward_jet(&self, x: f64) -> Jet;
    fn backward(&self, y: f64) -> f64;
}

impl Warp for CircleMap {
    fn forward(&self, x: f64) -> f64 {
        self.value(x)
    }
    fn forward_jet(&self, x: f64) -> Jet {
        self.jet(x)
    }
    fn backward(&self, y: f64) -> f64 {
        self.inverse(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }
}

/// Finite-difference step used by [`check_pde`].
pub const PDE_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct LightConeFrame<W = CircleMap> {
    f: W,
    v0: f64,
}

impl<W: Warp> LightConeFrame<W> {
    pub fn new(f: W, v0: f64) -> Result<Self> {
        if !(v0 > 0.0) || !v0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "reference velocity v0 must be positive, got {v0}"
            )));
        }
        Ok(Self { f, v0 })
    }

    pub fn map(&self) -> &W {
        &self.f
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// `f^{-1}(f(x) ± v0 t)`; the winding is carried by the lift, so the
    /// result is not reduced modulo the period.
    pub fn tilde_x(&self, x: f64, t: f64, sign: Sign) -> f64 {
        if t == 0.0 {
            return x;
        }
        self.f.backward(self.f.forward(x) + sign.factor() * self.v0 * t)
    }

    /// `(x̃⁻, x̃⁺)` sharing one forward evaluation.
    pub fn tilde_pair(&self, x: f64, t: f64) -> (f64, f64) {
        if t == 0.0 {
            return (x, x);
        }
        let y = self.f.forward(x);
        let s = self.v0 * t;
        (self.f.backward(y - s), self.f.backward(y + s))
    }
}

impl LightConeFrame<CircleMap> {
    /// The same frame described by `scale * f + offset` and `scale * v0`.
    /// Light-cone coordinates are unchanged by this reparametrization.
    pub fn reparametrized(&self, scale: f64, offset: f64) -> Result<Self> {
        Self::new(self.f.affine(scale, offset)?, scale * self.v0)
    }

    pub fn period(&self) -> f64 {
        self.f.period()
    }
}

/// `|x̃_{t1+t2}(x) - x̃_{t1}(x̃_{t2}(x))|`, maximized over both signs.
pub fn check_group_property<W: Warp>(frame: &LightConeFrame<W>, x: f64, t1: f64, t2: f64) -> f64 {
    Sign::both()
        .into_iter()
        .map(|s| {
            let direct = frame.tilde_x(x, t1 + t2, s);
            let stepped = frame.tilde_x(frame.tilde_x(x, t2, s), t1, s);
            (direct - stepped).abs()
        })
        .fold(0.0, f64::max)
}

/// `|∂t x̃± ∓ v(x) ∂x x̃±|` by central differences with step [`PDE_STEP`],
/// maximized over both signs.
pub fn check_pde<W: Warp>(frame: &LightConeFrame<W>, v: &Profile, x: f64, t: f64) -> f64 {
    let h = PDE_STEP;
    let vx = v.value(x);
    Sign::both()
        .into_iter()
        .map(|s| {
            let dt = (frame.tilde_x(x, t + h, s) - frame.tilde_x(x, t - h, s)) / (2.0 * h);
            let dx = (frame.tilde_x(x + h, t, s) - frame.tilde_x(x - h, t, s)) / (2.0 * h);
            (dt - s.factor() * vx * dx).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest group-property residual over `(x, t1, t2)` samples, in parallel.
pub fn max_group_residual<W: Warp>(frame: &LightConeFrame<W>, samples: &[(f64, f64, f64)]) -> f64 {
    samples
        .par_iter()
        .map(|&(x, t1, t2)| check_group_property(frame, x, t1, t2))
        .reduce(|| 0.0, f64::max)
}

/// Largest PDE residual over `(x, t)` samples, in parallel.
pub fn max_pde_residual<W: Warp>(frame: &LightConeFrame<W>, v: &Profile, samples: &[(f64, f64)]) -> f64 {
    samples
        .par_iter()
        .map(|&(x, t)| check_pde(frame, v, x, t))
        .reduce(|| 0.0, f64::max)
}
