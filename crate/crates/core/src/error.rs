use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    NonConvergent { estimate: f64, error_bound: f64 },

    #[error("target {target} lies outside the bracket image [{lo_value}, {hi_value}]")]
    BracketInvalid {
        target: f64,
        lo_value: f64,
        hi_value: f64,
    },

    #[error("spectrum not resolved: trailing/peak ratio {tail_ratio:e}")]
    UnderResolved { tail_ratio: f64 },

    #[error("derivative of order {0} is not available")]
    OrderUnavailable(usize),

    #[error("{what} must be positive, found {value} at x = {x}")]
    PositivityViolated {
        what: &'static str,
        x: f64,
        value: f64,
    },

    #[error("profile is not {period}-periodic: mismatch {mismatch:e} at x = {x}")]
    NotPeriodic { period: f64, x: f64, mismatch: f64 },

    #[error("line profile deviates from its asymptote by {deviation:e} at x = {x}")]
    AsymptoteViolated { x: f64, deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coincident light-cone points: sinh argument {argument:e}")]
    CoincidentPoints { argument: f64 },

    #[error("Luttinger couplings out of range: |g2| = {g2_abs} must be < 2 + g4 = {bound}")]
    CouplingOutOfRange { g2_abs: f64, bound: f64 },

    #[error("Sugawara constraint violated: tau^2 = {tau_sq}, 2*kappa*delta = {expected}")]
    SugawaraViolated { tau_sq: f64, expected: f64 },

    #[error("the Green-Kubo regular part is not defined at omega = 0")]
    OmegaZero,

    #[error("pole on the integration contour: a = {a} is within 1e-10 of a multiple of pi")]
    PoleOnContour { a: f64 },

    #[error("grid under-resolved: {what} changed by {change:e} (allowed {allowed:e})")]
    GridUnderResolved {
        what: String,
        change: f64,
        allowed: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
