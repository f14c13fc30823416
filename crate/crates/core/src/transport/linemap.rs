use crate::error::{Error, Result};
use crate::lightcone::Warp;
use crate::numerics::quadrature::gl16;
use crate::numerics::{integrate, newton_monotone, Jet, QuadratureSpec};
use crate::profiles::{Domain, Profile};

const PANEL_WIDTH: f64 = 0.25;
const MAX_PANELS: usize = 1 << 18;

/// `f(x) = ∫₀ˣ v̄/v` for a line profile that equals `v̄` outside its window.
///
/// Inside the window the map is tabulated at panel edges and completed with a
/// 16-point Gauss rule on the partial panel; outside it is an exact shift.
#[derive(Debug, Clone)]
pub struct LineMap {
    v: Profile,
    vbar: f64,
    edges: Vec<f64>,
    cum: Vec<f64>,
}

impl LineMap {
    pub fn new(v: &Profile, vbar: f64) -> Result<Self> {
        let window = match v.domain() {
            Domain::Line { window, .. } => window,
            Domain::Circle { .. } => {
                return Err(Error::InvalidParameter(
                    "line map needs a line-domain velocity".into(),
                ))
            }
        };
        if !(vbar > 0.0) || !vbar.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "reference velocity must be positive, got {vbar}"
            )));
        }
        let spec = QuadratureSpec::with_tolerances(1e-13, 1e-15);
        let ratio = |x: f64| vbar / v.value(x);
        let mut panels = ((2.0 * window / PANEL_WIDTH).ceil() as usize).max(1);
        loop {
            let h = 2.0 * window / panels as f64;
            let edges: Vec<f64> = (0..=panels).map(|k| -window + h * k as f64).collect();
            let mut cum = vec![0.0; panels + 1];
            let mut resolved = true;
            for k in 0..panels {
                let (a, b) = (edges[k], edges[k + 1]);
                let exact = integrate(ratio, a, b, &spec)?;
                if !exact.is_finite() {
                    return Err(Error::PositivityViolated {
                        what: "velocity",
                        x: a,
                        value: v.value(a),
                    });
                }
                let quick = gauss16(&ratio, a, b);
                if (quick - exact).abs() > 1e-14 * exact.abs().max(1.0) {
                    resolved = false;
                    break;
                }
                cum[k + 1] = cum[k] + exact;
            }
            if resolved {
                let mut map = Self {
                    v: v.clone(),
                    vbar,
                    edges,
                    cum,
                };
                let origin = map.forward(0.0);
                map.cum.iter_mut().for_each(|c| *c -= origin);
                return Ok(map);
            }
            if panels >= MAX_PANELS {
                return Err(Error::GridUnderResolved {
                    what: "line map panels".into(),
                    change: f64::NAN,
                    allowed: 1e-14,
                });
            }
            panels *= 2;
        }
    }

    pub fn vbar(&self) -> f64 {
        self.vbar
    }

    pub fn velocity(&self) -> &Profile {
        &self.v
    }

    pub fn window(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    fn panels(&self) -> usize {
        self.edges.len() - 1
    }

    fn in_panel(&self, k: usize, x: f64) -> f64 {
        let vbar = self.vbar;
        self.cum[k] + gauss16(&|s| vbar / self.v.value(s), self.edges[k], x)
    }
}

fn gauss16<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl16();
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(c + r * x))
        .sum::<f64>()
}

impl Warp for LineMap {
    fn forward(&self, x: f64) -> f64 {
        let n = self.panels();
        let (lo, hi) = (self.edges[0], self.edges[n]);
        if x <= lo {
            return self.cum[0] + (x - lo);
        }
        if x >= hi {
            return self.cum[n] + (x - hi);
        }
        let h = (hi - lo) / n as f64;
        let k = (((x - lo) / h) as usize).min(n - 1);
        self.in_panel(k, x)
    }

    fn forward_jet(&self, x: f64) -> Jet {
        let r = self.v.jet(x).recip() * self.vbar;
        Jet::new(self.forward(x), r.v, r.d1, r.d2)
    }

    fn backward(&self, y: f64) -> f64 {
        let n = self.panels();
        if y <= self.cum[0] {
            return self.edges[0] + (y - self.cum[0]);
        }
        if y >= self.cum[n] {
            return self.edges[n] + (y - self.cum[n]);
        }
        let k = (self.cum.partition_point(|&c| c <= y) - 1).min(n - 1);
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        let guess = a + (b - a) * (y - self.cum[k]) / (self.cum[k + 1] - self.cum[k]);
        let vbar = self.vbar;
        newton_monotone(
            |x| self.in_panel(k, x),
            |x| vbar / self.v.value(x),
            y,
            a,
            b,
            guess,
        )
        .unwrap_or(guess)
    }
}
