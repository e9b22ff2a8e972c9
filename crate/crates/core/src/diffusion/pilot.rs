use crate::error::{KdeError, Result};
use crate::grid::{integrate, BinnedHistogram, Grid1D};
use crate::kde1d::spectral_smooth;
use serde::Serialize;

/// Relative floor applied to pilot densities before they enter `a = p^α`.
pub const PILOT_FLOOR: f64 = 1e-12;

/// Coefficients of the diffusion operator `½ (a (g/p)')'` on a grid.
///
/// `mu = a'/(2p)` and `sigma2 = a/p` are the drift and squared diffusion
/// coefficient of the matching stochastic differential equation.
#[derive(Debug, Clone, Serialize)]
pub struct PilotModel {
    pub grid: Grid1D,
    pub p: Vec<f64>,
    pub a: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub alpha: Option<f64>,
    /// Integral of the pilot before flooring and renormalisation.
    pub raw_integral: f64,
}

impl PilotModel {
    /// Pilot from explicit `p` and `a` node values. `p` is floored at
    /// [`PILOT_FLOOR`] times its maximum and renormalised; `a` is taken as
    /// given and must be positive.
    pub fn from_values(grid: Grid1D, p: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if p.len() != grid.n {
            return Err(KdeError::LengthMismatch { expected: grid.n, got: p.len() });
        }
        if a.len() != grid.n {
            return Err(KdeError::LengthMismatch { expected: grid.n, got: a.len() });
        }
        if p.iter().chain(&a).any(|v| !v.is_finite()) {
            return Err(KdeError::NonFinite);
        }
        if a.iter().any(|&v| v <= 0.0) {
            return Err(KdeError::param("a", "diffusion coefficient must be positive"));
        }
        let (p, raw_integral) = floor_and_normalise(p, &grid)?;
        Ok(Self::assemble(grid, p, a, None, raw_integral))
    }

    fn assemble(grid: Grid1D, p: Vec<f64>, a: Vec<f64>, alpha: Option<f64>, raw_integral: f64) -> Self {
        let n = grid.n;
        let h = grid.step();
        let mu = (0..n)
            .map(|i| {
                let da = if i == 0 {
                    (a[1] - a[0]) / h
                } else if i == n - 1 {
                    (a[n - 1] - a[n - 2]) / h
                } else {
                    (a[i + 1] - a[i - 1]) / (2.0 * h)
                };
                da / (2.0 * p[i])
            })
            .collect();
        let sigma2 = a.iter().zip(&p).map(|(a, p)| a / p).collect();
        Self { grid, p, a, mu, sigma2, alpha, raw_integral }
    }

    /// Uniform `p = a` on the grid, so `σ ≡ 1`: plain heat flow.
    pub fn uniform(grid: Grid1D) -> Self {
        let p = vec![1.0 / grid.len(); grid.n];
        Self::assemble(grid, p.clone(), p, Some(1.0), 1.0)
    }

    pub fn sigma(&self, x: f64) -> f64 {
        crate::grid::interpolate(&self.sigma2, &self.grid, x).sqrt()
    }
}

fn floor_and_normalise(mut p: Vec<f64>, grid: &Grid1D) -> Result<(Vec<f64>, f64)> {
    let raw = integrate(&p, grid);
    let max = p.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(KdeError::param("p", "pilot density must be positive somewhere"));
    }
    let floor = PILOT_FLOOR * max;
    for v in &mut p {
        if *v < floor {
            *v = floor;
        }
    }
    let mass = integrate(&p, grid);
    for v in &mut p {
        *v /= mass;
    }
    Ok((p, raw))
}

/// Pilot from a Gaussian estimate of the binned data at squared bandwidth
/// `t_pilot`, with `a = p^α`.
pub fn build_pilot(binned: &BinnedHistogram, t_pilot: f64, alpha: f64) -> Result<PilotModel> {
    crate::kde1d::check_t(t_pilot)?;
    if !alpha.is_finite() {
        return Err(KdeError::param("alpha", "must be finite"));
    }
    let grid = binned.grid;
    let raw = spectral_smooth(binned, t_pilot);
    let (p, raw_integral) = floor_and_normalise(raw, &grid)?;
    let a = if alpha == 1.0 { p.clone() } else { p.iter().map(|v| v.powf(alpha)).collect() };
    Ok(PilotModel::assemble(grid, p, a, Some(alpha), raw_integral))
}
