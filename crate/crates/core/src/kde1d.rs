//! Gaussian and theta-kernel density estimators in one dimension.
//!
//! The theta kernel is the heat kernel on `[0, 1]` with reflecting ends. It
//! has two exact series forms: a sum of Gaussian images, which converges
//! fast for small `t`, and a cosine series, which converges fast for large
//! `t`. [`theta_kernel`] switches between them at [`THETA_SWITCH_T`].

use crate::error::{KdeError, Result};
use crate::gauss::phi;
use crate::grid::{integrate, make_grid, BinnedHistogram, Grid1D, Sample1D};
use crate::spectral::{cosine_analysis, cosine_synthesis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::f64::consts::PI;

/// Below this `t` the image form of the theta kernel is used.
pub const THETA_SWITCH_T: f64 = 0.01;
/// Minimum number of terms kept on each side of either series.
pub const THETA_MIN_TERMS: usize = 5;

/// A density evaluated on the nodes of a grid.
#[derive(Debug, Clone, Serialize)]
pub struct DensityEstimate1D {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub method: String,
    /// Squared bandwidth or diffusion time that produced the estimate.
    pub t: f64,
}

impl DensityEstimate1D {
    pub fn integral(&self) -> f64 {
        integrate(&self.values, &self.grid)
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    pub fn at(&self, x: f64) -> f64 {
        crate::grid::interpolate(&self.values, &self.grid, x)
    }
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(KdeError::param("t", format!("must be positive and finite, got {t}")))
    }
}

/// Direct `O(N·M)` Gaussian estimate `(1/N) Σ φ(x, X_i; t)` at each `x`.
pub fn gauss_kde_exact(sample: &Sample1D, xs: &[f64], t: f64) -> Result<Vec<f64>> {
    check_t(t)?;
    let inv_n = 1.0 / sample.len() as f64;
    Ok(xs
        .iter()
        .map(|&x| sample.values().iter().map(|&xi| phi(x, xi, t)).sum::<f64>() * inv_n)
        .collect())
}

/// Heat-equation smoothing of binned data with zero-flux ends.
///
/// Mode `k` of the cosine series of the binned weights is damped by
/// `exp(-(kπ/L)² t/2)`, where `L` is the grid length. The result is the
/// theta-kernel estimate on the grid interval for the binned data.
pub fn gauss_kde_spectral(binned: &BinnedHistogram, t: f64) -> Result<DensityEstimate1D> {
    check_t(t)?;
    let values = spectral_smooth(binned, t);
    Ok(DensityEstimate1D { grid: binned.grid, values, method: "gauss".into(), t })
}

pub(crate) fn spectral_smooth(binned: &BinnedHistogram, t: f64) -> Vec<f64> {
    let grid = &binned.grid;
    let l = grid.len();
    let mut b = cosine_analysis(&binned.weights);
    for (k, v) in b.iter_mut().enumerate() {
        let w = PI * k as f64 / l;
        let c = if k == 0 { 1.0 } else { 2.0 };
        *v *= c * (-0.5 * w * w * t).exp() / l;
    }
    let mut g = cosine_synthesis(&b);
    for v in &mut g {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    g
}

/// Gaussian estimate on the real line, computed spectrally on a grid padded
/// by at least eight bandwidths so the reflecting ends are immaterial.
pub fn gauss_kde_unbounded(sample: &Sample1D, t: f64, n: usize) -> Result<DensityEstimate1D> {
    check_t(t)?;
    let range = (sample.max() - sample.min()).max(1.0);
    let pad = (8.0 * t.sqrt() / range).max(0.1);
    let grid = make_grid(sample, n, pad)?;
    let binned = crate::grid::bin_linear(sample, &grid)?;
    gauss_kde_spectral(&binned, t)
}

/// Number of image pairs kept for the image form at time `t`.
pub fn images_terms(t: f64) -> usize {
    // Images beyond |k| lie at distance >= 2|k| - 2 from any point of [0, 1].
    let k = 1.0 + (2.0 * 40.0 * t).sqrt() / 2.0;
    (k.ceil() as usize).max(THETA_MIN_TERMS)
}

/// Number of cosine modes kept for the cosine form at time `t`.
pub fn cosine_terms(t: f64) -> usize {
    let k = (2.0 * 40.0 / (PI * PI * t)).sqrt();
    (k.ceil() as usize).max(THETA_MIN_TERMS)
}

/// Image form: `Σ_{|k|<=K} φ(x, 2k + y; t) + φ(x, 2k - y; t)`.
pub fn theta_kernel_images(x: f64, y: f64, t: f64, terms: usize) -> f64 {
    let k = terms as i64;
    (-k..=k)
        .map(|j| {
            let c = 2.0 * j as f64;
            phi(x, c + y, t) + phi(x, c - y, t)
        })
        .sum()
}

/// Cosine form: `1 + 2 Σ_{k=1}^{K} exp(-k²π²t/2) cos(kπx) cos(kπy)`.
pub fn theta_kernel_cosine(x: f64, y: f64, t: f64, terms: usize) -> f64 {
    1.0 + 2.0
        * (1..=terms)
            .map(|k| {
                let w = PI * k as f64;
                (-0.5 * w * w * t).exp() * (w * x).cos() * (w * y).cos()
            })
            .sum::<f64>()
}

/// Theta kernel `κ(x, y; t)` on `[0, 1]`.
pub fn theta_kernel(x: f64, y: f64, t: f64) -> f64 {
    if t < THETA_SWITCH_T {
        theta_kernel_images(x, y, t, images_terms(t))
    } else {
        theta_kernel_cosine(x, y, t, cosine_terms(t))
    }
}

/// `(1/N) Σ κ(x, X_i; t)` for data in `[0, 1]`.
pub fn theta_estimator(sample: &Sample1D, xs: &[f64], t: f64) -> Result<Vec<f64>> {
    check_t(t)?;
    for &v in sample.values() {
        if !(0.0..=1.0).contains(&v) {
            return Err(KdeError::OutOfDomain { value: v, lo: 0.0, hi: 1.0 });
        }
    }
    let inv_n = 1.0 / sample.len() as f64;
    Ok(xs
        .iter()
        .map(|&x| sample.values().iter().map(|&xi| theta_kernel(x, xi, t)).sum::<f64>() * inv_n)
        .collect())
}

/// Maps a point of the real line into `[0, 1]` by repeated reflection.
pub fn fold_unit(y: f64) -> f64 {
    let w = (y % 2.0).abs();
    if w <= 1.0 {
        w
    } else {
        2.0 - w
    }
}

/// One draw from `κ(·, y; t)`: a Gaussian step folded back into `[0, 1]`.
pub fn theta_sample<R: Rng + ?Sized>(y: f64, t: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    fold_unit(y + t.sqrt() * z)
}

/// Count of strict interior local maxima; a plateau counts once.
pub fn mode_count(values: &[f64]) -> usize {
    let mut dedup: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if dedup.last() != Some(&v) {
            dedup.push(v);
        }
    }
    dedup.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::bin_linear;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_point_exact_kde() {
        let s = Sample1D::new(vec![0.0]).unwrap();
        let v = gauss_kde_exact(&s, &[0.0], 1.0).unwrap();
        assert_relative_eq!(v[0], 0.3989422804014327, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_bandwidth() {
        let s = Sample1D::new(vec![0.0]).unwrap();
        assert!(gauss_kde_exact(&s, &[0.0], 0.0).is_err());
        assert!(gauss_kde_exact(&s, &[0.0], f64::NAN).is_err());
    }

    #[test]
    fn theta_forms_agree() {
        for &t in &[1e-4, 1e-3, 0.01, 0.05, 0.3, 2.0] {
            for &(x, y) in &[(0.0, 0.0), (0.3, 0.7), (1.0, 0.2), (0.5, 0.5), (0.95, 1.0)] {
                let a = theta_kernel_images(x, y, t, images_terms(t).max(10));
                let b = theta_kernel_cosine(x, y, t, cosine_terms(t).max(10));
                assert_relative_eq!(a, b, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn theta_kernel_tends_to_uniform() {
        assert_relative_eq!(theta_kernel(0.2, 0.9, 50.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn theta_kernel_mass_and_symmetry() {
        let g = Grid1D::new(0.0, 1.0, 1 << 12).unwrap();
        for &t in &[1e-3, 0.02, 0.4] {
            let v: Vec<f64> = g.nodes().iter().map(|&x| theta_kernel(x, 0.3, t)).collect();
            assert_relative_eq!(integrate(&v, &g), 1.0, epsilon = 1e-7);
            assert_relative_eq!(theta_kernel(0.3, 0.8, t), theta_kernel(0.8, 0.3, t), max_relative = 1e-13);
        }
    }

    #[test]
    fn spectral_matches_theta_for_data_on_nodes() {
        let g = Grid1D::new(0.0, 1.0, 1 << 10).unwrap();
        let idx = [3usize, 100, 101, 512, 700, 1020, 1023, 0];
        let s = Sample1D::new(idx.iter().map(|&i| g.node(i)).collect()).unwrap();
        let b = bin_linear(&s, &g).unwrap();
        for &t in &[2e-4, 5e-3, 0.05] {
            let spec = gauss_kde_spectral(&b, t).unwrap();
            let theta = theta_estimator(&s, &g.nodes(), t).unwrap();
            let err = spec.values.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "t={t} err={err}");
        }
    }

    #[test]
    fn spectral_close_to_exact_away_from_ends() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = Sample1D::new(xs).unwrap();
        let t = 0.04;
        let est = gauss_kde_unbounded(&s, t, 1 << 14).unwrap();
        let nodes = est.nodes();
        let exact = gauss_kde_exact(&s, &nodes, t).unwrap();
        let peak = exact.iter().cloned().fold(0.0, f64::max);
        let err = est.values.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4 * peak, "err={err}");
    }

    #[test]
    fn fold_matches_reflection() {
        assert_relative_eq!(fold_unit(0.3), 0.3);
        assert_relative_eq!(fold_unit(1.2), 0.8, epsilon = 1e-15);
        assert_relative_eq!(fold_unit(-0.3), 0.3);
        assert_relative_eq!(fold_unit(2.25), 0.25, epsilon = 1e-15);
        assert_relative_eq!(fold_unit(-1.75), 0.25, epsilon = 1e-15);
        assert_relative_eq!(fold_unit(1.0), 1.0);
    }

    #[test]
    fn modes() {
        assert_eq!(mode_count(&[0.0, 1.0, 0.0, 2.0, 2.0, 1.0]), 2);
        assert_eq!(mode_count(&[0.0, 1.0, 2.0]), 0);
        assert_eq!(mode_count(&[1.0, 1.0, 1.0]), 0);
    }

    fn arb_unit_sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..=1.0, 1..40)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn spectral_mass_positivity(xs in prop::collection::vec(-5.0f64..5.0, 1..60), t in 1e-4f64..1.0) {
            let s = Sample1D::new(xs).unwrap();
            let g = make_grid(&s, 1 << 10, 0.1).unwrap();
            let b = bin_linear(&s, &g).unwrap();
            let e = gauss_kde_spectral(&b, t).unwrap();
            prop_assert!((e.integral() - 1.0).abs() < 1e-9);
            prop_assert!(e.values.iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn theta_estimator_integrates_to_one(xs in arb_unit_sample(), t in 1e-3f64..0.5) {
            let s = Sample1D::new(xs).unwrap();
            let g = Grid1D::new(0.0, 1.0, 1 << 11).unwrap();
            let v = theta_estimator(&s, &g.nodes(), t).unwrap();
            prop_assert!((integrate(&v, &g) - 1.0).abs() < 1e-5);
            prop_assert!(v.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn theta_kernel_boundary_derivative_vanishes(y in 0.0f64..=1.0, t in 1e-3f64..0.5) {
            let h = 1e-6;
            let scale = theta_kernel(0.0, y, t).max(1.0);
            let d0 = (theta_kernel(h, y, t) - theta_kernel(0.0, y, t)) / h;
            let d1 = (theta_kernel(1.0, y, t) - theta_kernel(1.0 - h, y, t)) / h;
            prop_assert!(d0.abs() < 1e-3 * scale / t);
            prop_assert!(d1.abs() < 1e-3 * scale / t);
        }

        #[test]
        fn theta_sample_in_unit(y in 0.0f64..=1.0, t in 1e-4f64..10.0, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let x = theta_sample(y, t, &mut rng);
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }
    }
}
