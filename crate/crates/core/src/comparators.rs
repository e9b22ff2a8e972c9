//! Reference estimators the diffusion estimator is compared against.
//!
//! - least-squares cross-validation (LSCV) for the Gaussian bandwidth,
//! - Abramson's square-root law variable-bandwidth estimator,
//! - the sinc-kernel estimator,
//! - the Hall–Park boundary-corrected estimator for data truncated above.

use crate::error::{KdeError, Result};
use crate::gauss::{std_cdf, std_pdf};
use crate::grid::Sample1D;
use crate::kde1d::check_t;
use serde::Serialize;
use std::f64::consts::PI;

/// Number of log-spaced trial bandwidths scanned by [`lscv_select`].
pub const LSCV_LADDER: usize = 61;

#[derive(Debug, Clone, Serialize)]
pub struct LscvReport {
    pub t: f64,
    pub score: f64,
    /// `(t, LSCV(t))` on the ladder.
    pub ladder: Vec<(f64, f64)>,
    /// The minimum sat at the smallest ladder value, as happens with heavily
    /// duplicated data.
    pub at_lower_edge: bool,
    pub at_upper_edge: bool,
    /// The score was numerically constant; the ladder midpoint is returned.
    pub flat: bool,
}

/// Pairwise squared distances, computed once per sample.
struct Pairs {
    d2: Vec<f64>,
    n: usize,
}

impl Pairs {
    fn new(x: &[f64]) -> Self {
        let n = x.len();
        let mut d2 = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let d = x[i] - x[j];
                d2.push(d * d);
            }
        }
        Self { d2, n }
    }

    /// `‖f̂‖² - (2/N) Σ f̂_{-i}(X_i)` via `∫φ_t(x-a)φ_t(x-b) = φ_{2t}(a-b)`.
    fn score(&self, t: f64) -> f64 {
        let n = self.n as f64;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for &d2 in &self.d2 {
            let e = (-d2 / (4.0 * t)).exp();
            s2 += e;
            s1 += e * e;
        }
        let c1 = 1.0 / (2.0 * PI * t).sqrt();
        let c2 = 1.0 / (4.0 * PI * t).sqrt();
        let roughness = (n * c2 + 2.0 * c2 * s2) / (n * n);
        let loo = 2.0 * c1 * s1 / (n * (n - 1.0));
        roughness - 2.0 * loo
    }
}

/// LSCV score of the Gaussian estimate at squared bandwidth `t`.
pub fn lscv_score(sample: &Sample1D, t: f64) -> Result<f64> {
    check_t(t)?;
    if sample.len() < 2 {
        return Err(KdeError::param("sample", "LSCV needs at least two points"));
    }
    Ok(Pairs::new(sample.values()).score(t))
}

/// Minimises the LSCV score over a log-spaced ladder on
/// `[1e-4, 1] · range²`, then refines by golden-section search between the
/// neighbours of the best rung.
pub fn lscv_select(sample: &Sample1D) -> Result<LscvReport> {
    if sample.len() < 2 {
        return Err(KdeError::param("sample", "LSCV needs at least two points"));
    }
    let range = sample.max() - sample.min();
    if !(range > 0.0) {
        return Err(KdeError::param("sample", "LSCV needs a non-zero range"));
    }
    let pairs = Pairs::new(sample.values());
    let (lo, hi) = (1e-4f64.ln() + 2.0 * range.ln(), 2.0 * range.ln());
    let step = (hi - lo) / (LSCV_LADDER - 1) as f64;
    let ladder: Vec<(f64, f64)> = (0..LSCV_LADDER)
        .map(|i| {
            let t = (lo + i as f64 * step).exp();
            (t, pairs.score(t))
        })
        .collect();
    let (best, _) = ladder
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty ladder");
    let smax = ladder.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let smin = ladder[best].1;
    if (smax - smin).abs() <= 1e-12 * smin.abs().max(f64::MIN_POSITIVE) {
        let (t, score) = ladder[LSCV_LADDER / 2];
        return Ok(LscvReport { t, score, ladder, at_lower_edge: false, at_upper_edge: false, flat: true });
    }
    let at_lower_edge = best == 0;
    let at_upper_edge = best == LSCV_LADDER - 1;
    let a = lo + best.saturating_sub(1) as f64 * step;
    let b = lo + (best + 1).min(LSCV_LADDER - 1) as f64 * step;
    let (lt, score) = golden_min(|lt| pairs.score(lt.exp()), a, b, 1e-7);
    let (t, score) = if score <= smin { (lt.exp(), score) } else { ladder[best] };
    Ok(LscvReport { t, score, ladder, at_lower_edge, at_upper_edge, flat: false })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Gaussian estimate at each sample point, `f̂(X_i; t)`.
fn pilot_at_sample(x: &[f64], t: f64) -> Vec<f64> {
    let c = 1.0 / ((2.0 * PI * t).sqrt() * x.len() as f64);
    x.iter()
        .map(|&xi| x.iter().map(|&xj| (-(xi - xj) * (xi - xj) / (2.0 * t)).exp()).sum::<f64>() * c)
        .collect()
}

/// Abramson's local factors `λ_i = √(G / f̂(X_i; t_pilot))`, with `G` the
/// geometric mean of the pilot values.
pub fn abramson_lambdas(sample: &Sample1D, t_pilot: f64) -> Result<Vec<f64>> {
    check_t(t_pilot)?;
    let f = pilot_at_sample(sample.values(), t_pilot);
    if f.iter().any(|&v| !(v > 0.0)) {
        return Err(KdeError::SolverFailed("pilot vanished at a sample point".into()));
    }
    let log_g = f.iter().map(|v| v.ln()).sum::<f64>() / f.len() as f64;
    Ok(f.iter().map(|v| (log_g - v.ln()).exp().sqrt()).collect())
}

/// `(1/N) Σ φ(x, X_i; t λ_i²)`, the square-root law adaptive estimate.
pub fn abramson_estimate(sample: &Sample1D, xs: &[f64], t: f64, t_pilot: f64) -> Result<Vec<f64>> {
    check_t(t)?;
    let lambdas = abramson_lambdas(sample, t_pilot)?;
    let inv_n = 1.0 / sample.len() as f64;
    let h: Vec<f64> = lambdas.iter().map(|l| t.sqrt() * l).collect();
    Ok(xs
        .iter()
        .map(|&x| {
            sample
                .values()
                .iter()
                .zip(&h)
                .map(|(&xi, &hi)| {
                    let u = (x - xi) / hi;
                    if u.abs() > 40.0 {
                        0.0
                    } else {
                        std_pdf(u) / hi
                    }
                })
                .sum::<f64>()
                * inv_n
        })
        .collect())
}

/// Sinc-kernel estimate with kernel `sin(u)/(πu)` and scale `√t`.
pub fn sinc_kde(sample: &Sample1D, xs: &[f64], t: f64) -> Result<Vec<f64>> {
    check_t(t)?;
    let h = t.sqrt();
    let c = 1.0 / (sample.len() as f64 * h);
    Ok(xs
        .iter()
        .map(|&x| {
            sample
                .values()
                .iter()
                .map(|&xi| {
                    let u = (x - xi) / h;
                    if u == 0.0 {
                        1.0 / PI
                    } else {
                        u.sin() / (PI * u)
                    }
                })
                .sum::<f64>()
                * c
        })
        .collect())
}

/// `ρ(u) = -φ(u)/Φ(u)`; it vanishes deep inside the support and equals
/// `-√(2/π)` at the end point.
pub fn hall_park_rho(u: f64) -> f64 {
    -std_pdf(u) / std_cdf(u)
}

/// Hall–Park estimate for data truncated above at `beta`.
///
/// The plain estimate is renormalised by the kernel mass left of `beta`, and
/// each kernel is shifted by `α(x) = t (f̂₀'/f̂₀)(x) ρ((β - x)/h)` where `f̂₀`
/// is the renormalised estimate. The shift is clamped to `|α| <= h`.
pub fn hall_park_estimate(sample: &Sample1D, xs: &[f64], t: f64, beta: f64) -> Result<Vec<f64>> {
    hall_park_impl(sample, xs, t, beta, true)
}

/// The renormalised estimate `f̂₀` with no shift.
pub fn hall_park_unshifted(sample: &Sample1D, xs: &[f64], t: f64, beta: f64) -> Result<Vec<f64>> {
    hall_park_impl(sample, xs, t, beta, false)
}

fn hall_park_impl(sample: &Sample1D, xs: &[f64], t: f64, beta: f64, shift: bool) -> Result<Vec<f64>> {
    check_t(t)?;
    if let Some(&x) = sample.values().iter().find(|&&x| x > beta) {
        return Err(KdeError::OutOfDomain { value: x, lo: f64::NEG_INFINITY, hi: beta });
    }
    let h = t.sqrt();
    let n = sample.len() as f64;
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        if x > beta {
            out.push(0.0);
            continue;
        }
        let v = (beta - x) / h;
        let denom = n * h * std_cdf(v);
        let (mut s0, mut s1) = (0.0, 0.0);
        for &xi in sample.values() {
            let u = (x - xi) / h;
            let k = std_pdf(u);
            s0 += k;
            s1 -= u * k / h;
        }
        let alpha = if shift && s0 > 0.0 {
            let ratio = s1 / s0 + std_pdf(v) / (h * std_cdf(v));
            (t * ratio * hall_park_rho(v)).clamp(-h, h)
        } else {
            0.0
        };
        let s: f64 = if alpha == 0.0 {
            s0
        } else {
            sample.values().iter().map(|&xi| std_pdf((x - xi + alpha) / h)).sum()
        };
        out.push(s / denom);
    }
    Ok(out)
}
