//! Root finding for strictly increasing functions.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Residual tolerance guaranteed by the solvers: `1e-12 * max(1, |y|)`.
pub fn residual_tolerance(y: f64) -> f64 {
    1e-12 * y.abs().max(1.0)
}

/// Solve `f(x) = y` on `[lo, hi]` for strictly increasing `f`.
///
/// Uses a secant (regula falsi with the Illinois modification) step that is
/// replaced by bisection whenever it stalls.
pub fn find_root_monotone<F: Fn(f64) -> f64>(f: F, y: f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a) - y, f(b) - y);
    check_bracket(y, fa, fb)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let target = 1e-3 * residual_tolerance(y);
    let mut side = 0i8;
    for _ in 0..MAX_ITER {
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x) - y;
        if fx.abs() <= target || x <= a || x >= b {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
    }
    Ok(pick_best(a, fa, b, fb))
}

/// Newton iteration for strictly increasing `f` with derivative `df`,
/// safeguarded by bisection on the bracket `[lo, hi]`.
pub fn newton_monotone<F, D>(f: F, df: D, y: f64, lo: f64, hi: f64, guess: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a) - y, f(b) - y);
    check_bracket(y, fa, fb)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let target = 1e-3 * residual_tolerance(y);
    let mut x = if guess > a && guess < b {
        guess
    } else {
        0.5 * (a + b)
    };
    let mut best = (f64::INFINITY, x);
    for _ in 0..MAX_ITER {
        let fx = f(x) - y;
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
        if fx.abs() <= target {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !(d > 0.0) || !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if next == x || a >= b || 0.5 * (a + b) <= a || 0.5 * (a + b) >= b {
            break;
        }
        x = next;
    }
    Ok(best.1)
}

fn check_bracket(y: f64, fa: f64, fb: f64) -> Result<()> {
    if !(fa <= 0.0 && fb >= 0.0) {
        return Err(Error::BracketInvalid {
            target: y,
            lo_value: fa + y,
            hi_value: fb + y,
        });
    }
    Ok(())
}

fn pick_best(a: f64, fa: f64, b: f64, fb: f64) -> f64 {
    if fa.abs() <= fb.abs() {
        a
    } else {
        b
    }
}
