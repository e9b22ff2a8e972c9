use super::pilot::PilotModel;
use crate::error::{KdeError, Result};
use crate::grid::{cumulative, integrate, interpolate, Grid1D};
use serde::Serialize;
use std::f64::consts::PI;

/// Small-time approximation of the diffusion kernel,
/// `p(x) / (√(2πt) (p(x)a(x)a(y)p(y))^{1/4}) · exp(-s(x,y)²/(2t))`, where
/// `s(x, y) = ∫_y^x √(p/a)` is the distance in the metric of the process.
pub fn asymptotic_kernel(pilot: &PilotModel, x: f64, y: f64, t: f64) -> Result<f64> {
    crate::kde1d::check_t(t)?;
    let g = &pilot.grid;
    for v in [x, y] {
        if !g.contains(v) {
            return Err(KdeError::OutOfDomain { value: v, lo: g.lo, hi: g.hi });
        }
    }
    let root: Vec<f64> = pilot.p.iter().zip(&pilot.a).map(|(p, a)| (p / a).sqrt()).collect();
    let s_cum = cumulative(&root, g);
    let s = interpolate(&s_cum, g, x) - interpolate(&s_cum, g, y);
    let (px, py) = (interpolate(&pilot.p, g, x), interpolate(&pilot.p, g, y));
    let (ax, ay) = (interpolate(&pilot.a, g, x), interpolate(&pilot.a, g, y));
    Ok(px / ((2.0 * PI * t).sqrt() * (px * ax * ay * py).powf(0.25)) * (-s * s / (2.0 * t)).exp())
}

/// Result of the explosion test on both tails.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FellerReport {
    pub explosive: bool,
    pub left_converges: bool,
    pub right_converges: bool,
    pub left_integral: f64,
    pub right_integral: f64,
}

/// Tests whether `∫∫ p(y)/a(x) dy dx` over either tail is finite, which is
/// when the process can reach infinity in finite time.
///
/// The grid ends stand in for ±∞. A tail integral is judged finite when its
/// integrand has decayed, on the outermost 5% of nodes, to below `1e-3` of
/// its largest value and is still falling.
pub fn feller_explosion_check(pilot: &PilotModel) -> FellerReport {
    let g = &pilot.grid;
    let n = g.n;
    let pc = cumulative(&pilot.p, g);
    let iz = (0..n).max_by(|&i, &j| pilot.p[i].total_cmp(&pilot.p[j])).unwrap_or(n / 2);
    let q: Vec<f64> = (0..n).map(|i| (pc[i] - pc[iz]).abs() / pilot.a[i]).collect();

    let left: Vec<f64> = q[..=iz].iter().rev().cloned().collect();
    let right: Vec<f64> = q[iz..].to_vec();
    let (lc, li) = tail_converges(&left, g);
    let (rc, ri) = tail_converges(&right, g);
    FellerReport { explosive: lc || rc, left_converges: lc, right_converges: rc, left_integral: li, right_integral: ri }
}

/// `tail[0]` sits at the interior reference point, `tail.last()` at the end.
fn tail_converges(tail: &[f64], g: &Grid1D) -> (bool, f64) {
    let m = tail.len();
    let h = g.step();
    let integral = if m >= 2 { h * (tail.iter().sum::<f64>() - 0.5 * (tail[0] + tail[m - 1])) } else { 0.0 };
    if m < 20 {
        return (false, integral);
    }
    let max = tail.iter().cloned().fold(0.0, f64::max);
    let end = tail[m - 1];
    let inner = tail[m - 1 - m / 20];
    let converges = max > 0.0 && end <= 1e-3 * max && end < inner;
    (converges, integral)
}

/// `∫ p ψ(g/p)` with `ψ(x) = (x^α - x)/(α(α-1))`. At `α = 1` this is
/// `∫ g log(g/p)` and at `α = 0` it is `∫ p log(p/g)`.
pub fn csiszar_divergence(g: &[f64], p: &[f64], grid: &Grid1D, alpha: f64) -> Result<f64> {
    if g.len() != grid.n || p.len() != grid.n {
        return Err(KdeError::LengthMismatch { expected: grid.n, got: g.len().min(p.len()) });
    }
    if p.iter().any(|&v| v <= 0.0) {
        return Err(KdeError::param("p", "reference density must be positive"));
    }
    let f: Vec<f64> = g
        .iter()
        .zip(p)
        .map(|(&g, &p)| {
            let g = g.max(0.0);
            if alpha == 1.0 {
                if g == 0.0 {
                    0.0
                } else {
                    g * (g / p).ln()
                }
            } else if alpha == 0.0 {
                p * (p / g).ln()
            } else {
                let x = g / p;
                p * (x.powf(alpha) - x) / (alpha * (alpha - 1.0))
            }
        })
        .collect();
    Ok(integrate(&f, grid))
}
