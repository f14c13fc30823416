//! Uniformly sampled periodic functions and Fourier pseudospectral calculus.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::jet::Jet;
use crate::error::{Error, Result};

/// Smallest admissible grid.
pub const MIN_SAMPLES: usize = 16;
/// First grid tried by [`SampledPeriodic::adaptive`].
pub const ADAPTIVE_START: usize = 256;
/// Largest grid tried by [`SampledPeriodic::adaptive`].
pub const ADAPTIVE_CAP: usize = 16384;
/// Trailing-third spectral magnitude, relative to the peak, below which a
/// sampled function counts as resolved.
pub const RESOLUTION_THRESHOLD: f64 = 1e-10;

/// A real `period`-periodic function sampled at `x_j = -L/2 + j L / N`.
#[derive(Debug, Clone)]
pub struct SampledPeriodic {
    period: f64,
    samples: Vec<f64>,
    /// `c_k = (1/N) sum_j s_j exp(-2 pi i k j / N)` for `k = 0..=N/2`.
    coefficients: Vec<Complex64>,
    /// Highest mode with a non-negligible coefficient; evaluation stops there.
    active_modes: usize,
}

impl SampledPeriodic {
    pub fn new(period: f64, samples: Vec<f64>) -> Result<Self> {
        let n = samples.len();
        if n < MIN_SAMPLES || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "sample count must be a power of two >= {MIN_SAMPLES}, got {n}"
            )));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite sample value {bad}"
            )));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let coefficients: Vec<Complex64> = buf[..=n / 2].iter().map(|c| c * scale).collect();
        Ok(Self::from_parts(period, samples, coefficients))
    }

    fn from_parts(period: f64, samples: Vec<f64>, coefficients: Vec<Complex64>) -> Self {
        let peak = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cutoff = peak * 1e-18;
        let active_modes = coefficients
            .iter()
            .rposition(|c| c.norm() > cutoff)
            .unwrap_or(0);
        Self {
            period,
            samples,
            coefficients,
            active_modes,
        }
    }

    pub fn grid(period: f64, n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |j| -0.5 * period + j as f64 * period / n as f64)
    }

    pub fn from_fn<F: Fn(f64) -> f64>(f: F, period: f64, n: usize) -> Result<Self> {
        let samples = Self::grid(period, n).map(f).collect();
        Self::new(period, samples)
    }

    /// Sample `f` on grids of 256, 512, ... points until the spectrum is
    /// resolved; fails with `UnderResolved` at the 16384-point cap.
    pub fn adaptive<F: Fn(f64) -> f64>(f: F, period: f64) -> Result<Self> {
        let mut n = ADAPTIVE_START;
        loop {
            let p = Self::from_fn(&f, period, n)?;
            let ratio = p.tail_ratio();
            if ratio < RESOLUTION_THRESHOLD {
                return Ok(p);
            }
            if n >= ADAPTIVE_CAP {
                return Err(Error::UnderResolved { tail_ratio: ratio });
            }
            n *= 2;
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Average over one period (the zero mode).
    pub fn mean(&self) -> f64 {
        self.coefficients[0].re
    }

    /// Largest coefficient magnitude in the trailing third of the spectrum,
    /// relative to the peak magnitude.
    pub fn tail_ratio(&self) -> f64 {
        let mags: Vec<f64> = self.coefficients.iter().map(|c| c.norm()).collect();
        let peak = mags.iter().copied().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let start = 2 * (mags.len() - 1) / 3;
        mags[start..].iter().copied().fold(0.0, f64::max) / peak
    }

    pub fn is_resolved(&self) -> bool {
        self.tail_ratio() < RESOLUTION_THRESHOLD
    }

    fn theta(&self, x: f64) -> f64 {
        2.0 * PI * (x + 0.5 * self.period) / self.period
    }

    /// Trigonometric interpolant and its first three derivatives at `x`.
    pub fn eval_jet(&self, x: f64) -> Jet {
        let n = self.samples.len();
        let half = n / 2;
        let w = 2.0 * PI / self.period;
        let theta = self.theta(x);
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut out = Jet::constant(self.coefficients[0].re);
        let top = self.active_modes.min(half - 1);
        for k in 1..=top {
            if k % 32 == 0 {
                rot = Complex64::from_polar(1.0, k as f64 * theta);
            } else {
                rot *= step;
            }
            let term = 2.0 * self.coefficients[k] * rot;
            let kw = k as f64 * w;
            out.v += term.re;
            out.d1 -= kw * term.im;
            out.d2 -= kw * kw * term.re;
            out.d3 += kw * kw * kw * term.im;
        }
        if self.active_modes >= half {
            let c = self.coefficients[half].re;
            let kw = half as f64 * w;
            let (s, co) = (half as f64 * theta).sin_cos();
            out.v += c * co;
            out.d1 -= c * kw * s;
            out.d2 -= c * kw * kw * co;
            out.d3 += c * kw * kw * kw * s;
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_jet(x).v
    }

    /// Periodic primitive `P` of `p - mean(p)` with `P(-L/2)` fixed by the
    /// zero-mean Fourier convention; returns `P(x)` together with its three
    /// derivatives.
    pub fn primitive_jet(&self, x: f64) -> Jet {
        let n = self.samples.len();
        let half = n / 2;
        let w = 2.0 * PI / self.period;
        let theta = self.theta(x);
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut out = Jet::default();
        let top = self.active_modes.min(half - 1);
        for k in 1..=top {
            if k % 32 == 0 {
                rot = Complex64::from_polar(1.0, k as f64 * theta);
            } else {
                rot *= step;
            }
            let kw = k as f64 * w;
            // Integrate 2 Re(c e^{ik theta}): 2 Re(c e^{ik theta} / (i k w)).
            let term = 2.0 * self.coefficients[k] * rot;
            out.v += term.im / kw;
            out.d1 += term.re;
            out.d2 -= kw * term.im;
            out.d3 -= kw * kw * term.re;
        }
        out
    }
}

/// Derivative of the given order (1, 2 or 3) by multiplication with
/// `(2 pi i k / L)^order` in Fourier space. An under-resolved input is
/// differentiated anyway with a logged warning.
pub fn spectral_derivative(p: &SampledPeriodic, order: usize) -> Result<SampledPeriodic> {
    if !(1..=3).contains(&order) {
        return Err(Error::OrderUnavailable(order));
    }
    let ratio = p.tail_ratio();
    if ratio >= RESOLUTION_THRESHOLD {
        log::warn!(
            "spectral derivative of an under-resolved function (tail ratio {ratio:e}); \
             result is unreliable"
        );
    }
    let n = p.len();
    let w = 2.0 * PI / p.period;
    let mut coefficients = p.coefficients.clone();
    coefficients[0] = Complex64::new(0.0, 0.0);
    for (k, c) in coefficients.iter_mut().enumerate().skip(1) {
        if k == n / 2 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, k as f64 * w).powi(order as i32);
        }
    }
    // Rebuild the grid values with an inverse transform of the Hermitian spectrum.
    let mut full = vec![Complex64::new(0.0, 0.0); n];
    full[..=n / 2].copy_from_slice(&coefficients);
    for k in 1..n / 2 {
        full[n - k] = coefficients[k].conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut full);
    let samples = full.iter().map(|c| c.re).collect();
    Ok(SampledPeriodic::from_parts(p.period, samples, coefficients))
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: f64 = 3.7;

    fn max_dev(p: &SampledPeriodic, f: impl Fn(f64) -> f64) -> f64 {
        SampledPeriodic::grid(p.period(), p.len())
            .zip(p.samples())
            .map(|(x, s)| (s - f(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SampledPeriodic::new(1.0, vec![0.0; 8]).is_err());
        assert!(SampledPeriodic::new(1.0, vec![0.0; 24]).is_err());
        assert!(SampledPeriodic::new(0.0, vec![0.0; 16]).is_err());
    }

    #[test]
    fn reconstruction_at_grid_points() {
        let f = |x: f64| (1.0 + 0.3 * (2.0 * PI * x / L).cos()).recip();
        let p = SampledPeriodic::from_fn(f, L, 64).unwrap();
        for (x, s) in SampledPeriodic::grid(L, 64).zip(p.samples()) {
            assert!((p.eval(x) - s).abs() <= 1e-12 * s.abs());
        }
    }

    #[test]
    fn cosine_first_derivative() {
        let k = 2.0 * PI / L;
        let p = SampledPeriodic::from_fn(|x| (k * x).cos(), L, 32).unwrap();
        let d = spectral_derivative(&p, 1).unwrap();
        assert!(max_dev(&d, |x| -k * (k * x).sin()) < 1e-10);
    }

    #[test]
    fn constant_has_zero_derivative() {
        let p = SampledPeriodic::from_fn(|_| 2.5, L, 16).unwrap();
        let d = spectral_derivative(&p, 1).unwrap();
        assert!(max_dev(&d, |_| 0.0) < 1e-14);
    }

    #[test]
    fn sine_second_derivative() {
        let k = 4.0 * PI / L;
        let p = SampledPeriodic::from_fn(|x| (k * x).sin(), L, 32).unwrap();
        let d = spectral_derivative(&p, 2).unwrap();
        assert!(max_dev(&d, |x| -k * k * (k * x).sin()) < 1e-9);
    }

    #[test]
    fn order_composition() {
        let f = |x: f64| (0.4 * (2.0 * PI * x / L).sin()).exp();
        let p = SampledPeriodic::adaptive(f, L).unwrap();
        let twice = spectral_derivative(&spectral_derivative(&p, 1).unwrap(), 1).unwrap();
        let direct = spectral_derivative(&p, 2).unwrap();
        let dev = twice
            .samples()
            .iter()
            .zip(direct.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-9);
        assert!(spectral_derivative(&p, 4).is_err());
    }

    #[test]
    fn off_grid_jet_matches_analytic() {
        let k = 2.0 * PI / L;
        let f = |x: f64| (0.5 * (k * x).cos()).exp();
        let p = SampledPeriodic::adaptive(f, L).unwrap();
        let x = 0.123;
        let j = p.eval_jet(x);
        let exact = (Jet::var(x) * k).cos().scale(0.5).exp();
        assert!((j.v - exact.v).abs() < 1e-13);
        assert!((j.d1 - exact.d1).abs() < 1e-12);
        assert!((j.d2 - exact.d2).abs() < 1e-11);
        assert!((j.d3 - exact.d3).abs() < 1e-10);
    }

    #[test]
    fn primitive_of_zero_mean_part() {
        let k = 2.0 * PI / L;
        let p = SampledPeriodic::from_fn(|x| 1.0 + (k * x).cos(), L, 32).unwrap();
        assert!((p.mean() - 1.0).abs() < 1e-15);
        for x in [-1.0, 0.3, 2.2] {
            let pr = p.primitive_jet(x);
            let pr0 = p.primitive_jet(0.0);
            assert!((pr.v - pr0.v - (k * x).sin() / k).abs() < 1e-13);
            assert!((pr.d1 - (k * x).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn adaptive_gives_up_on_kinks() {
        let err = SampledPeriodic::adaptive(|x: f64| x.abs(), L).unwrap_err();
        assert!(matches!(err, Error::UnderResolved { .. }));
    }
}
