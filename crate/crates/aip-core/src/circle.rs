//! Unit-circle quadrature and Fourier helpers: offset trapezoid grids,
//! Fourier coefficients, Hardy projections, Poisson kernel.
//!
//! Grids are offset by half a step (t_j = exp(iπ(2j+1)/n)) so that t = 1,
//! the typical boundary-interpolation node, never coincides with a sample.

use crate::linalg::{c, C64};
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Offset uniform grid of n points on the unit circle.
pub fn grid(n: usize) -> Vec<C64> {
    (0..n)
        .map(|j| {
            let theta = PI * (2 * j + 1) as f64 / n as f64;
            c(theta.cos(), theta.sin())
        })
        .collect()
}

/// Poisson kernel (1−|z|²)/|t−z|².
pub fn poisson(z: C64, t: C64) -> f64 {
    (1.0 - z.norm_sqr()) / (t - z).norm_sqr()
}

/// Fourier coefficients of samples taken on the offset grid, normalized so
/// that `coeffs[k]` multiplies t^freq with `freq = signed_freq(k, n)`.
pub fn fourier_coeffs(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> =
        samples.iter().copied().collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // Undo the half-step grid offset: the coefficient at signed frequency m
    // lands in bin m mod n with an extra factor e^{iπm/n}.
    (0..n)
        .map(|k| {
            let m = signed_freq(k, n) as f64;
            let phase = c(0.0, -PI * m / n as f64).exp();
            buf[k] * phase / n as f64
        })
        .collect()
}

/// Signed frequency of FFT bin k on an n-point grid.
pub fn signed_freq(k: usize, n: usize) -> i64 {
    if (k as i64) < (n as i64 + 1) / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Squared-ℓ² Fourier mass split into (nonnegative, negative) frequencies.
pub fn hardy_mass_split(samples: &[C64]) -> (f64, f64) {
    let n = samples.len();
    let coeffs = fourier_coeffs(samples);
    let mut plus = 0.0;
    let mut minus = 0.0;
    for (k, ck) in coeffs.iter().enumerate() {
        if signed_freq(k, n) >= 0 {
            plus += ck.norm_sqr();
        } else {
            minus += ck.norm_sqr();
        }
    }
    (plus, minus)
}

/// Relative mass at negative frequencies (how far from H²₊ the samples are).
pub fn h2plus_defect(samples: &[C64]) -> f64 {
    let (plus, minus) = hardy_mass_split(samples);
    minus / (plus + minus).max(1e-300)
}

/// Relative mass at nonnegative frequencies (how far from H²₋).
pub fn h2minus_defect(samples: &[C64]) -> f64 {
    let (plus, minus) = hardy_mass_split(samples);
    plus / (plus + minus).max(1e-300)
}

fn project(samples: &[C64], keep_nonnegative: bool) -> Vec<C64> {
    let n = samples.len();
    let mut coeffs = fourier_coeffs(samples);
    for (k, ck) in coeffs.iter_mut().enumerate() {
        let nonneg = signed_freq(k, n) >= 0;
        if nonneg != keep_nonnegative {
            *ck = c(0.0, 0.0);
        }
    }
    // Resynthesize on the offset grid: g_j = Σ_k c_k t_j^{m_k}.
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> = (0..n)
        .map(|k| {
            let m = signed_freq(k, n) as f64;
            let phase = c(0.0, PI * m / n as f64).exp();
            coeffs[k] * phase
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.into_iter().collect()
}

/// Projection onto nonnegative frequencies (P₊), resampled on the same grid.
pub fn project_plus(samples: &[C64]) -> Vec<C64> {
    project(samples, true)
}

/// Projection onto negative frequencies (P₋), resampled on the same grid.
pub fn project_minus(samples: &[C64]) -> Vec<C64> {
    project(samples, false)
}
