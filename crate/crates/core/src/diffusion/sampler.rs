use super::pilot::PilotModel;
use crate::error::{KdeError, Result};
use crate::grid::interpolate;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Euler–Maruyama draws of `dX = μ dt + σ dW` started at `y`, run for time
/// `t` in `n_steps` equal steps and reflected at the grid ends. The law of
/// each draw approximates the diffusion kernel `κ(·, y; t)`.
pub fn euler_sample<R: Rng + ?Sized>(
    pilot: &PilotModel,
    y: f64,
    t: f64,
    n_steps: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    crate::kde1d::check_t(t)?;
    if n_steps == 0 {
        return Err(KdeError::param("n_steps", "must be at least 1"));
    }
    let g = &pilot.grid;
    if !g.contains(y) {
        return Err(KdeError::OutOfDomain { value: y, lo: g.lo, hi: g.hi });
    }
    let dt = t / n_steps as f64;
    let sdt = dt.sqrt();
    let sigma: Vec<f64> = pilot.sigma2.iter().map(|s| s.sqrt()).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = y;
        for _ in 0..n_steps {
            let z: f64 = StandardNormal.sample(rng);
            x += interpolate(&pilot.mu, g, x) * dt + interpolate(&sigma, g, x) * sdt * z;
            x = reflect(x, g.lo, g.hi);
        }
        out.push(x);
    }
    Ok(out)
}

fn reflect(x: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    lo + w * crate::kde1d::fold_unit((x - lo) / w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_stays_inside() {
        assert!((reflect(1.2, 0.0, 1.0) - 0.8).abs() < 1e-15);
        assert!((reflect(-0.5, -1.0, 1.0) + 0.5).abs() < 1e-15);
        assert!((reflect(-1.5, -1.0, 1.0) + 0.5).abs() < 1e-15);
    }
}
