//! Uniform evaluation grids, linear binning and trapezoid quadrature.
//!
//! A [`Grid1D`] is a lattice of `n` nodes with `lo` and `hi` themselves
//! nodes. Binned weights live on the nodes and sum to one.

use crate::error::{KdeError, Result};
use serde::{Deserialize, Serialize};

/// Default number of grid nodes for one-dimensional estimation.
pub const DEFAULT_GRID_SIZE: usize = 1 << 14;
/// Default padding, as a fraction of the sample range, on each side.
pub const DEFAULT_PAD: f64 = 0.1;

/// A validated, non-empty sample of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample1D {
    values: Vec<f64>,
}

impl Sample1D {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(KdeError::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(KdeError::NonFinite);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Sample standard deviation (divisor `N - 1`; zero for a single point).
    pub fn std_dev(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - m) * (v - m)).sum();
        (ss / (n - 1) as f64).sqrt()
    }
}

/// Uniform lattice on `[lo, hi]` with `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(KdeError::NonFinite);
        }
        if !(hi > lo) {
            return Err(KdeError::param("grid", format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(KdeError::param("n", format!("must be a power of two >= 16, got {n}")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// Node spacing.
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Trapezoid weight of node `i` (half a step at the two ends).
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.step()
        } else {
            self.step()
        }
    }
}

/// Builds the grid spanning the sample range padded by `pad * range` on
/// each side. A zero range is first widened to one unit.
pub fn make_grid(sample: &Sample1D, n: usize, pad: f64) -> Result<Grid1D> {
    make_grid_bounded(sample, n, pad, None, None)
}

/// Like [`make_grid`], but a known support bound replaces the padded end.
pub fn make_grid_bounded(
    sample: &Sample1D,
    n: usize,
    pad: f64,
    lower: Option<f64>,
    upper: Option<f64>,
) -> Result<Grid1D> {
    if !(pad >= 0.0 && pad.is_finite()) {
        return Err(KdeError::param("pad", format!("must be finite and >= 0, got {pad}")));
    }
    let (mut lo, mut hi) = (sample.min(), sample.max());
    if hi == lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let r = hi - lo;
    lo -= pad * r;
    hi += pad * r;
    if let Some(b) = lower {
        if sample.min() < b {
            return Err(KdeError::OutOfDomain { value: sample.min(), lo: b, hi: f64::INFINITY });
        }
        lo = b;
    }
    if let Some(b) = upper {
        if sample.max() > b {
            return Err(KdeError::OutOfDomain { value: sample.max(), lo: f64::NEG_INFINITY, hi: b });
        }
        hi = b;
    }
    Grid1D::new(lo, hi, n)
}

/// Histogram of node weights produced by linear binning.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedHistogram {
    pub grid: Grid1D,
    pub weights: Vec<f64>,
    pub n_samples: usize,
}

/// Splits each point's mass `1/N` between its two neighbouring nodes in
/// proportion to proximity.
pub fn bin_linear(sample: &Sample1D, grid: &Grid1D) -> Result<BinnedHistogram> {
    let n = grid.n;
    let h = grid.step();
    let w = 1.0 / sample.len() as f64;
    let mut weights = vec![0.0; n];
    for &x in sample.values() {
        if !grid.contains(x) {
            return Err(KdeError::OutOfDomain { value: x, lo: grid.lo, hi: grid.hi });
        }
        let u = (x - grid.lo) / h;
        let i = (u.floor() as usize).min(n - 2);
        let f = (u - i as f64).clamp(0.0, 1.0);
        weights[i] += (1.0 - f) * w;
        weights[i + 1] += f * w;
    }
    Ok(BinnedHistogram { grid: *grid, weights, n_samples: sample.len() })
}

/// Trapezoid integral of node values.
pub fn integrate(values: &[f64], grid: &Grid1D) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    grid.step() * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Piecewise-linear interpolation of node values; zero outside the grid.
pub fn interpolate(values: &[f64], grid: &Grid1D, x: f64) -> f64 {
    if !grid.contains(x) {
        return 0.0;
    }
    let u = (x - grid.lo) / grid.step();
    let i = (u.floor() as usize).min(grid.n - 2);
    let f = u - i as f64;
    values[i] * (1.0 - f) + values[i + 1] * f
}

/// Cumulative trapezoid integral of node values, starting at zero.
pub fn cumulative(values: &[f64], grid: &Grid1D) -> Vec<f64> {
    let h = grid.step();
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}
