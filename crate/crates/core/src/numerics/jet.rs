//! Third-order forward-mode derivatives.
//!
//! A [`Jet`] carries a value together with its first three derivatives with
//! respect to a single scalar variable. Closed-form profiles are written once
//! as functions `Jet -> Jet` and every derivative up to order three falls out
//! of the arithmetic.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Self { v, d1, d2, d3 }
    }

    /// The independent variable evaluated at `x`.
    pub const fn var(x: f64) -> Self {
        Self::new(x, 1.0, 0.0, 0.0)
    }

    pub const fn constant(c: f64) -> Self {
        Self::new(c, 0.0, 0.0, 0.0)
    }

    /// Derivative of the given order (0 returns the value).
    pub fn derivative(&self, order: usize) -> Option<f64> {
        match order {
            0 => Some(self.v),
            1 => Some(self.d1),
            2 => Some(self.d2),
            3 => Some(self.d3),
            _ => None,
        }
    }

    /// Chain rule: apply an outer function given its value and derivatives
    /// `g0..g3` evaluated at `self.v`.
    pub fn compose(self, g0: f64, g1: f64, g2: f64, g3: f64) -> Self {
        let (u1, u2, u3) = (self.d1, self.d2, self.d3);
        Self {
            v: g0,
            d1: g1 * u1,
            d2: g2 * u1 * u1 + g1 * u2,
            d3: g3 * u1 * u1 * u1 + 3.0 * g2 * u1 * u2 + g1 * u3,
        }
    }

    /// Compose with an inner jet: treats `self` as the jet of an outer map
    /// evaluated at `inner.v`.
    pub fn after(self, inner: Jet) -> Self {
        inner.compose(self.v, self.d1, self.d2, self.d3)
    }

    pub fn recip(self) -> Self {
        let u = self.v;
        let r = 1.0 / u;
        self.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e, e)
    }

    pub fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.compose(self.v.ln(), r, -r * r, 2.0 * r * r * r)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s, -c)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c, s)
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let s = 1.0 - t * t;
        self.compose(t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0))
    }

    pub fn atan(self) -> Self {
        let u = self.v;
        let q = 1.0 / (1.0 + u * u);
        self.compose(
            u.atan(),
            q,
            -2.0 * u * q * q,
            (6.0 * u * u - 2.0) * q * q * q,
        )
    }

    pub fn erf(self) -> Self {
        let u = self.v;
        let g = std::f64::consts::FRAC_2_SQRT_PI * (-u * u).exp();
        self.compose(libm::erf(u), g, -2.0 * u * g, (4.0 * u * u - 2.0) * g)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let r = 1.0 / self.v;
        self.compose(s, 0.5 / s, -0.25 * r / s, 0.375 * r * r / s)
    }

    pub fn powi(self, n: i32) -> Self {
        let u = self.v;
        let nf = f64::from(n);
        let g0 = u.powi(n);
        let g1 = nf * u.powi(n - 1);
        let g2 = nf * (nf - 1.0) * u.powi(n - 2);
        let g3 = nf * (nf - 1.0) * (nf - 2.0) * u.powi(n - 3);
        self.compose(g0, g1, g2, g3)
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.v, c * self.d1, c * self.d2, c * self.d3)
    }

    pub fn offset(self, c: f64) -> Self {
        Self::new(self.v + c, self.d1, self.d2, self.d3)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2, self.d3 + o.d3)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2, self.d3 - o.d3)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
            self.d3 * o.v + 3.0 * self.d2 * o.d1 + 3.0 * self.d1 * o.d2 + self.v * o.d3,
        )
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        self.offset(c)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        self.offset(-c)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self.scale(1.0 / c)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j.offset(self)
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        (-j).offset(self)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, j: Jet) -> Jet {
        j.recip().scale(self)
    }
}
