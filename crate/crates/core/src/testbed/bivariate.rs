use crate::error::{KdeError, Result};
use crate::gauss::{std_cdf, std_pdf};
use crate::kde2d::{integrate_2d, DensityEstimate2D, Grid2D};
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

/// Normal component with independent coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Component2D {
    pub weight: f64,
    pub mean: [f64; 2],
    pub sd: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mixture2D {
    pub components: Vec<Component2D>,
}

impl Mixture2D {
    /// Equal-weight unit-variance normals at the corners of a square of
    /// side 50.
    pub fn four_corners() -> Self {
        let c = |m: [f64; 2]| Component2D { weight: 0.25, mean: m, sd: [1.0, 1.0] };
        Self { components: vec![c([0.0, 0.0]), c([0.0, 50.0]), c([50.0, 0.0]), c([50.0, 50.0])] }
    }

    pub fn pdf(&self, p: [f64; 2]) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let u = (p[0] - c.mean[0]) / c.sd[0];
                let v = (p[1] - c.mean[1]) / c.sd[1];
                c.weight * std_pdf(u) * std_pdf(v) / (c.sd[0] * c.sd[1])
            })
            .sum()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.components[self.components.len() - 1];
        for c in &self.components {
            acc += c.weight;
            if u < acc {
                pick = *c;
                break;
            }
        }
        let z0: f64 = StandardNormal.sample(rng);
        let z1: f64 = StandardNormal.sample(rng);
        [pick.mean[0] + pick.sd[0] * z0, pick.mean[1] + pick.sd[1] * z1]
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<[f64; 2]> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    pub fn mass_outside(&self, grid: &Grid2D) -> f64 {
        let inside: f64 = self
            .components
            .iter()
            .map(|c| {
                let px = std_cdf((grid.x.hi - c.mean[0]) / c.sd[0]) - std_cdf((grid.x.lo - c.mean[0]) / c.sd[0]);
                let py = std_cdf((grid.y.hi - c.mean[1]) / c.sd[1]) - std_cdf((grid.y.lo - c.mean[1]) / c.sd[1]);
                c.weight * px * py
            })
            .sum();
        (1.0 - inside).max(0.0)
    }
}

/// `∫∫ (estimate - f)²` over the estimate's grid.
pub fn ise_2d(estimate: &DensityEstimate2D, target: &Mixture2D) -> Result<f64> {
    let g = &estimate.grid;
    let outside = target.mass_outside(g);
    if outside > super::ISE_COVERAGE {
        return Err(KdeError::GridCoverage(outside));
    }
    let sq = Array2::from_shape_fn(g.shape(), |(i, j)| {
        let d = estimate.values[[i, j]] - target.pdf([g.x.node(i), g.y.node(j)]);
        d * d
    });
    Ok(integrate_2d(&sq, g))
}
