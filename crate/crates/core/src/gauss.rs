//! Scalar Gaussian helpers shared across the crate.
//!
//! Variances are passed as `t` (the squared bandwidth) throughout.

use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};

/// `φ(x, y; t)`: normal density in `x` with mean `y` and variance `t`.
#[inline]
pub fn phi(x: f64, y: f64, t: f64) -> f64 {
    let d = x - y;
    (-d * d / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// Standard normal density.
#[inline]
pub fn std_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function.
#[inline]
pub fn std_cdf(u: f64) -> f64 {
    0.5 * erfc(-u / SQRT_2)
}

/// Probabilists' Hermite polynomial `He_n(u)`.
pub fn hermite_e(n: usize, u: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, u);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = u * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `n`-th derivative in `d` of the zero-mean normal density with variance `t`.
pub fn phi_deriv(n: usize, d: f64, t: f64) -> f64 {
    let s = t.sqrt();
    let u = d / s;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * hermite_e(n, u) * std_pdf(u) / s.powi(n as i32 + 1)
}

/// `(2j - 1)!!` with the convention `(-1)!! = 1`.
pub fn odd_double_factorial(j: usize) -> f64 {
    (1..=j).map(|i| (2 * i - 1) as f64).product()
}

/// `‖f^{(j)}‖²` for a normal density with standard deviation `sigma`.
pub fn normal_functional(j: usize, sigma: f64) -> f64 {
    odd_double_factorial(j) / (2f64.powi(j as i32 + 1) * PI.sqrt() * sigma.powi(2 * j as i32 + 1))
}
