//! The improved Sheather–Jones (ISJ) bandwidth selector.
//!
//! The AMISE-optimal squared bandwidth `t* = (2N√π ‖f''‖²)^{-2/5}` depends on
//! the unknown roughness `‖f''‖²`. Each roughness `‖f^{(j)}‖²` can itself be
//! estimated by plug-in at its own optimal stage bandwidth, which depends on
//! `‖f^{(j+1)}‖²`. ISJ closes this chain after `l` stages by feeding the
//! bandwidth under construction back in at the top, so `t*` solves
//! `t = ξ γ^{[l]}(t)` with no reference density anywhere. The classic
//! Sheather–Jones selector instead starts the chain from a normal reference.
//!
//! All roughness estimates are computed from the cosine series of the binned
//! data on the grid rescaled to `[0, 1]`, in `O(n)` per evaluation.

use crate::error::{KdeError, Result};
use crate::gauss::{normal_functional, odd_double_factorial};
use crate::grid::{bin_linear, make_grid_bounded, BinnedHistogram, Grid1D, Sample1D, DEFAULT_GRID_SIZE, DEFAULT_PAD};
use crate::spectral::cosine_analysis;
use serde::Serialize;
use std::f64::consts::PI;

/// Number of plug-in stages used by default.
pub const DEFAULT_STAGES: usize = 5;
/// Samples smaller than this fall back to the normal reference rule.
pub const LOW_SAMPLE_LIMIT: usize = 30;

/// `ξ = ((6√2 - 3)/7)^{2/5}`, the ratio `t*/*t_1`.
pub fn xi() -> f64 {
    ((6.0 * 2f64.sqrt() - 3.0) / 7.0).powf(0.4)
}

/// Selector settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsjConfig {
    pub stages: usize,
    pub grid_size: usize,
    pub pad: f64,
    pub max_iter: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Starting point of the fixed-point iteration on the unit scale.
    pub z0: f64,
}

impl Default for IsjConfig {
    fn default() -> Self {
        Self {
            stages: DEFAULT_STAGES,
            grid_size: DEFAULT_GRID_SIZE,
            pad: DEFAULT_PAD,
            max_iter: 200,
            lower: None,
            upper: None,
            z0: f64::EPSILON,
        }
    }
}

/// Outcome of a bandwidth selection. Bandwidths are squared and in data units.
#[derive(Debug, Clone, Serialize)]
pub struct BandwidthReport {
    pub method: String,
    pub t_star: f64,
    pub bandwidth: f64,
    /// Stage-two bandwidth `*t_2` at the solution, used by the diffusion
    /// estimator.
    pub t2_star: f64,
    pub iterations: usize,
    pub converged: bool,
    pub used_fallback: bool,
    pub low_sample: bool,
    pub n_samples: usize,
    pub grid: Grid1D,
    /// `(j, ‖f^{(j)}‖²)` pairs from the final chain evaluation.
    pub functional_norms: Vec<(usize, f64)>,
}

/// Squared cosine coefficients of binned data on the unit-rescaled grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// `a_k²` for `k = 1..n`; `a2[0]` belongs to `k = 1`.
    a2: Vec<f64>,
    n_samples: usize,
    len: f64,
}

impl Spectrum {
    pub fn new(binned: &BinnedHistogram) -> Self {
        let a = cosine_analysis(&binned.weights);
        Self {
            a2: a[1..].iter().map(|v| v * v).collect(),
            n_samples: binned.n_samples,
            len: binned.grid.len(),
        }
    }

    /// `‖f^{(j)}(·; t)‖²` on the unit scale.
    pub fn functional_unit(&self, j: usize, t: f64) -> f64 {
        let mut s = 0.0;
        for (i, a2) in self.a2.iter().enumerate() {
            let w2 = (PI * (i + 1) as f64).powi(2);
            let term = a2 * w2.powi(j as i32) * (-w2 * t).exp();
            s += term;
        }
        2.0 * s
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn grid_len(&self) -> f64 {
        self.len
    }
}

/// Plug-in estimate of `‖f^{(j)}‖²` where the pilot is the Gaussian estimate
/// at squared bandwidth `t` (data units). Equals
/// `(-1)^j N^{-2} ΣΣ φ^{(2j)}(X_k - X_m; 2t)` up to boundary reflections and
/// binning.
pub fn functional_norm(binned: &BinnedHistogram, j: usize, t: f64) -> Result<f64> {
    crate::kde1d::check_t(t)?;
    let s = Spectrum::new(binned);
    let l = binned.grid.len();
    Ok(s.functional_unit(j, t / (l * l)) / l.powi(2 * j as i32 + 1))
}

/// Optimal squared bandwidth for estimating `‖f^{(j)}‖²`, given `‖f^{(j+1)}‖²`.
pub fn stage_t(j: usize, n_samples: usize, norm_next: f64) -> Result<f64> {
    let c = (1.0 + 0.5f64.powf(j as f64 + 0.5)) / 3.0;
    let k = odd_double_factorial(j) / (n_samples as f64 * (PI / 2.0).sqrt() * norm_next);
    let t = (c * k).powf(2.0 / (3.0 + 2.0 * j as f64));
    if norm_next > 0.0 && t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(KdeError::StageFailed { stage: format!("j={j}"), value: t })
    }
}

/// AMISE-optimal squared bandwidth given `‖f''‖²`.
pub fn amise_t(n_samples: usize, norm2: f64) -> f64 {
    (1.0 / (2.0 * n_samples as f64 * PI.sqrt() * norm2)).powf(0.4)
}

/// One evaluation of the stage chain.
#[derive(Debug, Clone)]
pub struct ChainEval {
    /// `γ^{[l]}(t) = *t_1`.
    pub t1: f64,
    /// The intermediate `*t_2`.
    pub t2: f64,
    /// `(j, ‖f^{(j)}‖²)` on the unit scale, from `j = l + 1` down to 2.
    pub norms: Vec<(usize, f64)>,
}

/// Runs the chain `γ_1 ∘ … ∘ γ_l` on the unit scale starting from `t`, which
/// is used to estimate `‖f^{(l+1)}‖²`.
pub fn gamma_chain(spec: &Spectrum, t: f64, l: usize) -> Result<ChainEval> {
    if l < 1 {
        return Err(KdeError::param("stages", "need at least one stage"));
    }
    let mut tc = t;
    let mut t2 = f64::NAN;
    let mut norms = Vec::with_capacity(l);
    for j in (1..=l).rev() {
        let norm = spec.functional_unit(j + 1, tc);
        norms.push((j + 1, norm));
        tc = stage_t(j, spec.n_samples, norm)?;
        if j == 2 {
            t2 = tc;
        }
    }
    if l == 1 {
        t2 = t;
    }
    Ok(ChainEval { t1: tc, t2, norms })
}

fn normal_reference_t(sample: &Sample1D) -> f64 {
    let s = sample.std_dev().max(f64::MIN_POSITIVE);
    (4.0 / (3.0 * sample.len() as f64)).powf(0.4) * s * s
}

fn low_sample_report(sample: &Sample1D, grid: Grid1D, method: &str) -> BandwidthReport {
    let t = normal_reference_t(sample);
    let sigma = sample.std_dev().max(f64::MIN_POSITIVE);
    let t2 = stage_t(2, sample.len(), normal_functional(3, sigma)).unwrap_or(t);
    BandwidthReport {
        method: method.into(),
        t_star: t,
        bandwidth: t.sqrt(),
        t2_star: t2,
        iterations: 0,
        converged: true,
        used_fallback: false,
        low_sample: true,
        n_samples: sample.len(),
        grid,
        functional_norms: vec![(2, normal_functional(2, sigma))],
    }
}

fn to_data_norms(norms: &[(usize, f64)], len: f64) -> Vec<(usize, f64)> {
    norms.iter().map(|&(j, v)| (j, v / len.powi(2 * j as i32 + 1))).collect()
}

/// The ISJ selector with default settings.
pub fn isj_select(sample: &Sample1D) -> Result<BandwidthReport> {
    isj_select_with(sample, &IsjConfig::default())
}

pub fn isj_select_with(sample: &Sample1D, cfg: &IsjConfig) -> Result<BandwidthReport> {
    let grid = make_grid_bounded(sample, cfg.grid_size, cfg.pad, cfg.lower, cfg.upper)?;
    if sample.len() < LOW_SAMPLE_LIMIT {
        return Ok(low_sample_report(sample, grid, "isj"));
    }
    let binned = bin_linear(sample, &grid)?;
    isj_from_binned(&binned, cfg)
}

/// ISJ on already binned data.
pub fn isj_from_binned(binned: &BinnedHistogram, cfg: &IsjConfig) -> Result<BandwidthReport> {
    let spec = Spectrum::new(binned);
    let l = cfg.stages;
    let xi = xi();
    let map = |z: f64| -> Result<f64> { Ok(xi * gamma_chain(&spec, z, l)?.t1) };

    let mut z = cfg.z0;
    let mut iterations = 0;
    let mut converged = false;
    let mut damped = false;
    let mut last_step = 0.0f64;
    let mut sign_flips = 0usize;
    while iterations < cfg.max_iter {
        iterations += 1;
        let g = match map(z) {
            Ok(g) => g,
            Err(_) => break,
        };
        let target = if damped { 0.5 * (z + g) } else { g };
        let step = target - z;
        if iterations > 1 && step * last_step < 0.0 {
            sign_flips += 1;
        }
        if !damped && iterations >= 20 && sign_flips >= 10 {
            damped = true;
        }
        last_step = step;
        z = target;
        if step.abs() < f64::EPSILON {
            converged = true;
            break;
        }
    }

    let mut used_fallback = false;
    if !converged {
        z = bracket_root(&map, 1e-12, 1.0)
            .ok_or_else(|| KdeError::SelectorFailed("no root of t = ξγ(t) in [1e-12, 1]".into()))?;
        used_fallback = true;
        converged = true;
    }

    let chain = gamma_chain(&spec, z, l)?;
    let len2 = spec.len * spec.len;
    let t_star = z * len2;
    Ok(BandwidthReport {
        method: "isj".into(),
        t_star,
        bandwidth: t_star.sqrt(),
        t2_star: chain.t2 * len2,
        iterations,
        converged,
        used_fallback,
        low_sample: false,
        n_samples: spec.n_samples,
        grid: binned.grid,
        functional_norms: to_data_norms(&chain.norms, spec.len),
    })
}

/// Finds a root of `t - map(t)` by a log-spaced scan followed by bisection.
fn bracket_root(map: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Option<f64> {
    let f = |t: f64| map(t).ok().map(|g| t - g);
    let steps = 240;
    let ratio = (hi / lo).powf(1.0 / steps as f64);
    let mut a = lo;
    let mut fa = f(a)?;
    for _ in 0..steps {
        let b = a * ratio;
        let fb = match f(b) {
            Some(v) => v,
            None => {
                a = b;
                continue;
            }
        };
        if fa == 0.0 {
            return Some(a);
        }
        if fa * fb <= 0.0 {
            let (mut a, mut b, mut fa_) = (a, b, fa);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m)?;
                if fm == 0.0 || (b - a) < f64::EPSILON * m {
                    return Some(m);
                }
                if fa_ * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa_ = fm;
                }
            }
            return Some(0.5 * (a + b));
        }
        a = b;
        fa = fb;
    }
    None
}

/// Sheather–Jones style selector: the same `l`-stage chain, started from the
/// normal-reference value of `‖f^{(l+2)}‖²` instead of a fixed point.
pub fn sj_normal_ref_select(sample: &Sample1D, l: usize) -> Result<BandwidthReport> {
    let cfg = IsjConfig { stages: l, ..IsjConfig::default() };
    sj_normal_ref_select_with(sample, &cfg)
}

pub fn sj_normal_ref_select_with(sample: &Sample1D, cfg: &IsjConfig) -> Result<BandwidthReport> {
    let grid = make_grid_bounded(sample, cfg.grid_size, cfg.pad, cfg.lower, cfg.upper)?;
    if sample.len() < LOW_SAMPLE_LIMIT {
        return Ok(low_sample_report(sample, grid, "sj"));
    }
    let l = cfg.stages;
    let binned = bin_linear(sample, &grid)?;
    let spec = Spectrum::new(&binned);
    let sigma = sample.std_dev();
    if !(sigma > 0.0) {
        return Err(KdeError::SelectorFailed("zero sample variance".into()));
    }
    let top = stage_t(l + 1, spec.n_samples, normal_functional(l + 2, sigma))?;
    let len2 = spec.len * spec.len;
    let chain = gamma_chain(&spec, top / len2, l)?;
    let t_star = xi() * chain.t1 * len2;
    Ok(BandwidthReport {
        method: "sj".into(),
        t_star,
        bandwidth: t_star.sqrt(),
        t2_star: chain.t2 * len2,
        iterations: 1,
        converged: true,
        used_fallback: false,
        low_sample: false,
        n_samples: spec.n_samples,
        grid,
        functional_norms: to_data_norms(&chain.norms, spec.len),
    })
}
