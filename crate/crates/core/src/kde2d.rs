//! Two-dimensional Gaussian estimation: the plug-in bandwidth selector, the
//! spectral estimate on a rectangle and a heat solver on masked domains.
//!
//! Selection works on coordinates mapped to the unit square separately on
//! each axis, so the reported per-axis bandwidths scale with each axis.

use crate::error::{KdeError, Result};
use crate::gauss::{normal_functional, odd_double_factorial};
use crate::grid::{make_grid, Grid1D, Sample1D, DEFAULT_PAD};
use crate::spectral::{cosine_analysis_2d, cosine_synthesis_2d};
use ndarray::{Array2, Zip};
use serde::Serialize;
use std::collections::VecDeque;
use std::f64::consts::PI;

/// Nodes per axis of the default 2D grid.
pub const DEFAULT_GRID_2D: usize = 1 << 8;
/// Order `k` at which the 2D stage chain starts.
pub const DEFAULT_ORDER_2D: usize = 4;
/// Smallest sample accepted by the 2D selector.
pub const MIN_SAMPLE_2D: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample2D {
    points: Vec<[f64; 2]>,
}

impl Sample2D {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(KdeError::EmptySample);
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(KdeError::NonFinite);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One coordinate of every point.
    pub fn axis(&self, k: usize) -> Vec<f64> {
        self.points.iter().map(|p| p[k]).collect()
    }

    pub fn swapped(&self) -> Self {
        Self { points: self.points.iter().map(|p| [p[1], p[0]]).collect() }
    }
}

/// Tensor product of two node lattices; index `[i, j]` is `(x.node(i), y.node(j))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(x: Grid1D, y: Grid1D) -> Self {
        Self { x, y }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x.n, self.y.n)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.x.contains(p[0]) && self.y.contains(p[1])
    }

    /// Trapezoid weight of node `(i, j)`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.x.weight(i) * self.y.weight(j)
    }
}

/// Grid covering the sample with `pad` of each axis range added per side.
pub fn make_grid_2d(sample: &Sample2D, n: usize, pad: f64) -> Result<Grid2D> {
    let gx = make_grid(&Sample1D::new(sample.axis(0))?, n, pad)?;
    let gy = make_grid(&Sample1D::new(sample.axis(1))?, n, pad)?;
    Ok(Grid2D::new(gx, gy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedHistogram2D {
    pub grid: Grid2D,
    pub weights: Array2<f64>,
    pub n_samples: usize,
}

/// Corner weights of bilinear binning, `((i, j), w)` for the four nodes
/// around `p`.
fn bilinear_corners(grid: &Grid2D, p: [f64; 2]) -> [((usize, usize), f64); 4] {
    let locate = |g: &Grid1D, v: f64| {
        let u = (v - g.lo) / g.step();
        let i = (u.floor().max(0.0) as usize).min(g.n - 2);
        (i, (u - i as f64).clamp(0.0, 1.0))
    };
    let (i, fx) = locate(&grid.x, p[0]);
    let (j, fy) = locate(&grid.y, p[1]);
    [
        ((i, j), (1.0 - fx) * (1.0 - fy)),
        ((i + 1, j), fx * (1.0 - fy)),
        ((i, j + 1), (1.0 - fx) * fy),
        ((i + 1, j + 1), fx * fy),
    ]
}

/// Bilinear binning: each point's mass `1/N` is split between the four
/// surrounding nodes.
pub fn bin_bilinear(sample: &Sample2D, grid: &Grid2D) -> Result<BinnedHistogram2D> {
    let mut weights = Array2::zeros(grid.shape());
    let w = 1.0 / sample.len() as f64;
    for &p in sample.points() {
        if !grid.contains(p) {
            let (g, v) = if grid.x.contains(p[0]) { (&grid.y, p[1]) } else { (&grid.x, p[0]) };
            return Err(KdeError::OutOfDomain { value: v, lo: g.lo, hi: g.hi });
        }
        for ((i, j), f) in bilinear_corners(grid, p) {
            weights[[i, j]] += w * f;
        }
    }
    Ok(BinnedHistogram2D { grid: *grid, weights, n_samples: sample.len() })
}

/// 2D trapezoid integral of node values.
pub fn integrate_2d(values: &Array2<f64>, grid: &Grid2D) -> f64 {
    let mut s = 0.0;
    for ((i, j), v) in values.indexed_iter() {
        s += v * grid.weight(i, j);
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityEstimate2D {
    pub grid: Grid2D,
    pub values: Array2<f64>,
    pub method: String,
    /// Squared bandwidths along each axis.
    pub t: [f64; 2],
}

impl DensityEstimate2D {
    pub fn integral(&self) -> f64 {
        integrate_2d(&self.values, &self.grid)
    }

    /// Bilinear interpolation; zero outside the grid.
    pub fn at(&self, p: [f64; 2]) -> f64 {
        if !self.grid.contains(p) {
            return 0.0;
        }
        bilinear_corners(&self.grid, p).iter().map(|&((i, j), w)| w * self.values[[i, j]]).sum()
    }
}

/// `q(0) = 1/√(2π)`, `q(j) = (-1)^j (2j-1)!!/√(2π)`.
pub fn q_const(j: usize) -> f64 {
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * odd_double_factorial(j) / (2.0 * PI).sqrt()
}

/// Squared cosine coefficients of binned 2D data, each already multiplied
/// by the mode weights `γ_k γ_l` (`γ_0 = 1`, `γ_k = 2` otherwise).
#[derive(Debug, Clone)]
pub struct Spectrum2D {
    a2: Array2<f64>,
    n_samples: usize,
    len: [f64; 2],
}

impl Spectrum2D {
    pub fn new(binned: &BinnedHistogram2D) -> Self {
        let mut a2 = cosine_analysis_2d(&binned.weights);
        for ((k, l), v) in a2.indexed_iter_mut() {
            let g = if k == 0 { 1.0 } else { 2.0 } * if l == 0 { 1.0 } else { 2.0 };
            *v = g * *v * *v;
        }
        Self { a2, n_samples: binned.n_samples, len: [binned.grid.x.len(), binned.grid.y.len()] }
    }

    /// `ψ_{i,j}` of the Gaussian estimate with squared bandwidth `2t` on each
    /// axis, on the unit square.
    pub fn psi_unit(&self, i: usize, j: usize, t: f64) -> f64 {
        self.psi_scaled(i, j, t, [1.0, 1.0])
    }

    fn psi_scaled(&self, i: usize, j: usize, t: f64, len: [f64; 2]) -> f64 {
        let (nx, ny) = self.a2.dim();
        let weights = |n: usize, order: usize, l: f64| -> Vec<f64> {
            (0..n)
                .map(|k| {
                    let w2 = (PI * k as f64 / l).powi(2);
                    let p = if order == 0 { 1.0 } else { w2.powi(order as i32) };
                    p * (-w2 * t).exp()
                })
                .collect()
        };
        let ex = weights(nx, i, len[0]);
        let ey = weights(ny, j, len[1]);
        let mut s = 0.0;
        for (k, row) in self.a2.outer_iter().enumerate() {
            if ex[k] == 0.0 {
                continue;
            }
            let r: f64 = row.iter().zip(&ey).map(|(a, e)| a * e).sum();
            s += ex[k] * r;
        }
        s / (len[0] * len[1])
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }
}

/// Plug-in estimate of `ψ_{i,j} = ∫ (∂^{i+j} f / ∂x₁^i ∂x₂^j)²` with the
/// common squared bandwidth `t` in data units.
pub fn psi_hat(i: usize, j: usize, t: f64, binned: &BinnedHistogram2D) -> Result<f64> {
    crate::kde1d::check_t(t)?;
    let s = Spectrum2D::new(binned);
    let len = s.len;
    Ok(s.psi_scaled(i, j, t, len))
}

/// Bandwidth `t_{i,j}` balancing the bias of `ψ̂_{i,j}` against the next
/// order,
/// `[(1 + 2^{-i-j-1})/3 · 2|q(i)q(j)| / (N(ψ_{i+1,j} + ψ_{i,j+1}))]^{1/(2+i+j)}`.
///
/// The functionals here are the nonnegative squared-derivative integrals.
/// With the signed functionals the numerator `-2q(i)q(j)` and the
/// denominator share a sign, so the bracket is the same.
pub fn t_stage_2d(i: usize, j: usize, psi_ip1_j: f64, psi_i_jp1: f64, n_samples: usize) -> Result<f64> {
    let s = (i + j) as i32;
    let num = (1.0 + 2f64.powi(-s - 1)) / 3.0 * 2.0 * (q_const(i) * q_const(j)).abs();
    let bracket = num / (n_samples as f64 * (psi_ip1_j + psi_i_jp1));
    let t = bracket.powf(1.0 / (2 + i + j) as f64);
    if bracket > 0.0 && t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(KdeError::StageFailed { stage: format!("({i},{j})"), value: t })
    }
}

/// One evaluation of the 2D stage chain.
#[derive(Debug, Clone, Serialize)]
pub struct Gamma2D {
    pub gamma: f64,
    /// `[ψ_{2,0}, ψ_{1,1}, ψ_{0,2}]` from the last stage.
    pub psi2: [f64; 3],
    /// Stage bandwidths per order, from order `k - 1` down to 2.
    pub stage_t: Vec<Vec<f64>>,
}

fn psi_level(spec: &Spectrum2D, level: usize, ts: &[f64]) -> Vec<f64> {
    (0..=level).map(|i| spec.psi_unit(i, level - i, ts[i])).collect()
}

/// Runs the chain down from the functionals at order `k` to order 2.
fn chain_from(spec: &Spectrum2D, k: usize, mut psi: Vec<f64>) -> Result<Gamma2D> {
    let n = spec.n_samples();
    let mut stage_t = Vec::new();
    for level in (2..k).rev() {
        let ts = (0..=level)
            .map(|i| t_stage_2d(i, level - i, psi[i + 1], psi[i], n))
            .collect::<Result<Vec<f64>>>()?;
        psi = psi_level(spec, level, &ts);
        stage_t.push(ts);
    }
    let (p20, p11, p02) = (psi[2], psi[1], psi[0]);
    let gamma = (2.0 * PI * n as f64 * (p02 + p20 + 2.0 * p11)).powf(-1.0 / 3.0);
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(KdeError::StageFailed { stage: "γ".into(), value: gamma });
    }
    Ok(Gamma2D { gamma, psi2: [p20, p11, p02], stage_t })
}

/// `γ(t)` on the unit square: all `t_{i,j}` of order `k` are set to `t`.
/// In the vector of order-`s` functionals, entry `i` is `ψ_{i, s-i}`.
pub fn gamma_2d(spec: &Spectrum2D, t: f64, k: usize) -> Result<Gamma2D> {
    if k < 3 {
        return Err(KdeError::param("k", "the 2D chain needs k >= 3"));
    }
    crate::kde1d::check_t(t)?;
    let psi = psi_level(spec, k, &vec![t; k + 1]);
    chain_from(spec, k, psi)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Isj2dConfig {
    pub k: usize,
    pub grid_size: usize,
    pub pad: f64,
}

impl Default for Isj2dConfig {
    fn default() -> Self {
        Self { k: DEFAULT_ORDER_2D, grid_size: DEFAULT_GRID_2D, pad: DEFAULT_PAD }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Bandwidth2DReport {
    pub method: String,
    /// Common squared bandwidth on the unit square.
    pub t_star_unit: f64,
    /// Diagonal squared bandwidths in data units.
    pub t_x1: f64,
    pub t_x2: f64,
    pub bandwidths: [f64; 2],
    pub psi2: [f64; 3],
    pub evaluations: usize,
    pub n_samples: usize,
    pub grid: Grid2D,
}

/// Diagonal squared bandwidths on the unit square from `[ψ_{2,0}, ψ_{1,1}, ψ_{0,2}]`.
pub fn diagonal_bandwidths(psi2: [f64; 3], n_samples: usize) -> [f64; 2] {
    let [p20, p11, p02] = psi2;
    let n = n_samples as f64;
    let root = (p20 * p02).sqrt();
    let tx = (p02.powf(0.75) / (4.0 * PI * n * p20.powf(0.75) * (p11 + root))).powf(1.0 / 3.0);
    let ty = (p20.powf(0.75) / (4.0 * PI * n * p02.powf(0.75) * (p11 + root))).powf(1.0 / 3.0);
    [tx, ty]
}

fn report_2d(method: &str, t_unit: f64, g: &Gamma2D, evaluations: usize, binned: &BinnedHistogram2D) -> Bandwidth2DReport {
    let [ux, uy] = diagonal_bandwidths(g.psi2, binned.n_samples);
    let (lx, ly) = (binned.grid.x.len(), binned.grid.y.len());
    let (t_x1, t_x2) = (ux * lx * lx, uy * ly * ly);
    Bandwidth2DReport {
        method: method.into(),
        t_star_unit: t_unit,
        t_x1,
        t_x2,
        bandwidths: [t_x1.sqrt(), t_x2.sqrt()],
        psi2: g.psi2,
        evaluations,
        n_samples: binned.n_samples,
        grid: binned.grid,
    }
}

fn check_sample_2d(sample: &Sample2D) -> Result<()> {
    if sample.len() < MIN_SAMPLE_2D {
        return Err(KdeError::param("sample", format!("2D selection needs at least {MIN_SAMPLE_2D} points")));
    }
    Ok(())
}

pub fn isj2d_select(sample: &Sample2D) -> Result<Bandwidth2DReport> {
    isj2d_select_with(sample, &Isj2dConfig::default())
}

/// Solves `t = γ(t)` on the unit square, then derives diagonal bandwidths
/// from the order-2 functionals at the solution.
pub fn isj2d_select_with(sample: &Sample2D, cfg: &Isj2dConfig) -> Result<Bandwidth2DReport> {
    check_sample_2d(sample)?;
    let grid = make_grid_2d(sample, cfg.grid_size, cfg.pad)?;
    let binned = bin_bilinear(sample, &grid)?;
    let spec = Spectrum2D::new(&binned);
    let mut evals = 0usize;
    let mut f = |t: f64| -> Option<f64> {
        evals += 1;
        gamma_2d(&spec, t, cfg.k).ok().map(|g| t - g.gamma)
    };

    // Scan upwards for the first sign change of t - γ(t), then bisect in log t.
    let (lo, hi, m) = (1e-10f64.ln(), 1f64.ln(), 120);
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for s in 0..=m {
        let lt = lo + (hi - lo) * s as f64 / m as f64;
        let v = f(lt.exp());
        if let (Some((pl, pv)), Some(v)) = (prev, v) {
            if pv < 0.0 && v >= 0.0 {
                bracket = Some((pl, lt));
                break;
            }
        }
        prev = v.map(|v| (lt, v));
    }
    let (mut a, mut b) = bracket.ok_or_else(|| KdeError::SelectorFailed("t - γ(t) has no sign change".into()))?;
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        match f(mid.exp()) {
            Some(v) if v < 0.0 => a = mid,
            Some(_) => b = mid,
            None => return Err(KdeError::SelectorFailed("γ failed inside the bracket".into())),
        }
        if b - a < 1e-12 {
            break;
        }
    }
    let t = (0.5 * (a + b)).exp();
    let g = gamma_2d(&spec, t, cfg.k)?;
    Ok(report_2d("isj2d", t, &g, evals + 1, &binned))
}

/// Plug-in selector that starts the chain from normal-reference values of
/// the order-`k + 1` functionals, computed from the per-axis sample
/// standard deviations on the unit square.
pub fn normal_ref_2d_select_with(sample: &Sample2D, cfg: &Isj2dConfig) -> Result<Bandwidth2DReport> {
    check_sample_2d(sample)?;
    let grid = make_grid_2d(sample, cfg.grid_size, cfg.pad)?;
    let binned = bin_bilinear(sample, &grid)?;
    let spec = Spectrum2D::new(&binned);
    let sx = Sample1D::new(sample.axis(0))?.std_dev() / grid.x.len();
    let sy = Sample1D::new(sample.axis(1))?.std_dev() / grid.y.len();
    let top = cfg.k + 1;
    let psi_ref: Vec<f64> = (0..=top).map(|i| normal_functional(i, sx) * normal_functional(top - i, sy)).collect();
    let n = binned.n_samples;
    let ts = (0..=cfg.k)
        .map(|i| t_stage_2d(i, cfg.k - i, psi_ref[i + 1], psi_ref[i], n))
        .collect::<Result<Vec<f64>>>()?;
    let psi = psi_level(&spec, cfg.k, &ts);
    let g = chain_from(&spec, cfg.k, psi)?;
    Ok(report_2d("normal-ref-2d", g.gamma, &g, 1, &binned))
}

pub fn normal_ref_2d_select(sample: &Sample2D) -> Result<Bandwidth2DReport> {
    normal_ref_2d_select_with(sample, &Isj2dConfig::default())
}

/// Spectral Gaussian estimate with squared bandwidths `t = [t_x1, t_x2]`
/// under zero-flux conditions on the grid edges.
pub fn gauss_kde_2d(binned: &BinnedHistogram2D, t: [f64; 2]) -> Result<DensityEstimate2D> {
    crate::kde1d::check_t(t[0])?;
    crate::kde1d::check_t(t[1])?;
    let (lx, ly) = (binned.grid.x.len(), binned.grid.y.len());
    let damp = |n: usize, l: f64, t: f64| -> Vec<f64> {
        (0..n)
            .map(|k| {
                let w = PI * k as f64 / l;
                let c = if k == 0 { 1.0 } else { 2.0 };
                c * (-0.5 * w * w * t).exp() / l
            })
            .collect()
    };
    let (nx, ny) = binned.grid.shape();
    let dx = damp(nx, lx, t[0]);
    let dy = damp(ny, ly, t[1]);
    let mut b = cosine_analysis_2d(&binned.weights);
    for ((k, l), v) in b.indexed_iter_mut() {
        *v *= dx[k] * dy[l];
    }
    let mut values = cosine_synthesis_2d(&b);
    values.mapv_inplace(|v| v.max(0.0));
    Ok(DensityEstimate2D { grid: binned.grid, values, method: "gauss2d".into(), t })
}

/// Nodes of a grid flagged as inside the estimation domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    pub grid: Grid2D,
    pub inside: Array2<bool>,
}

impl DomainMask {
    pub fn new(grid: Grid2D, inside: Array2<bool>) -> Result<Self> {
        if inside.dim() != grid.shape() {
            return Err(KdeError::LengthMismatch { expected: grid.x.n * grid.y.n, got: inside.len() });
        }
        if !inside.iter().any(|&b| b) {
            return Err(KdeError::param("mask", "no node lies inside the domain"));
        }
        Ok(Self { grid, inside })
    }

    pub fn full(grid: Grid2D) -> Self {
        Self { grid, inside: Array2::from_elem(grid.shape(), true) }
    }

    /// Marks node `(x_i, y_j)` inside when `f(x_i, y_j)` holds.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> bool) -> Result<Self> {
        let inside = Array2::from_shape_fn(grid.shape(), |(i, j)| f(grid.x.node(i), grid.y.node(j)));
        Self::new(grid, inside)
    }

    /// Parses a dense 0/1 matrix: line `i` holds the flags of nodes
    /// `(x_i, y_0), (x_i, y_1), ...` separated by commas or whitespace.
    pub fn from_csv(text: &str, grid: Grid2D) -> Result<Self> {
        let (nx, ny) = grid.shape();
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).collect();
        if rows.len() != nx {
            return Err(KdeError::Parse(format!("mask has {} rows, grid needs {nx}", rows.len())));
        }
        let mut inside = Array2::from_elem((nx, ny), false);
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<&str> = row.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty()).collect();
            if cells.len() != ny {
                return Err(KdeError::Parse(format!("mask row {} has {} entries, grid needs {ny}", i + 1, cells.len())));
            }
            for (j, c) in cells.iter().enumerate() {
                inside[[i, j]] = match *c {
                    "1" => true,
                    "0" => false,
                    other => return Err(KdeError::Parse(format!("mask row {}: `{other}` is not 0 or 1", i + 1))),
                };
            }
        }
        Self::new(grid, inside)
    }

    pub fn count_inside(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Whether the inside nodes form one 4-connected component.
    pub fn is_connected(&self) -> bool {
        let (nx, ny) = self.inside.dim();
        let Some(start) = self.inside.indexed_iter().find(|(_, &b)| b).map(|(ij, _)| ij) else {
            return false;
        };
        let mut seen = Array2::from_elem((nx, ny), false);
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 0;
        while let Some((i, j)) = queue.pop_front() {
            count += 1;
            let nbrs = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
            for (a, b) in nbrs {
                if a < nx && b < ny && self.inside[[a, b]] && !seen[[a, b]] {
                    seen[[a, b]] = true;
                    queue.push_back((a, b));
                }
            }
        }
        count == self.count_inside()
    }
}

/// Bilinear binning that keeps all mass on inside nodes: a corner share
/// that lands outside the mask moves to the nearest inside corner of the
/// same cell.
pub fn bin_bilinear_masked(sample: &Sample2D, mask: &DomainMask) -> Result<BinnedHistogram2D> {
    let grid = &mask.grid;
    let mut weights = Array2::zeros(grid.shape());
    let w = 1.0 / sample.len() as f64;
    for &p in sample.points() {
        if !grid.contains(p) {
            return Err(KdeError::MaskMass(format!("point ({}, {}) lies outside the grid", p[0], p[1])));
        }
        let corners = bilinear_corners(grid, p);
        let dist = |(i, j): (usize, usize)| (grid.x.node(i) - p[0]).powi(2) + (grid.y.node(j) - p[1]).powi(2);
        let nearest = corners
            .iter()
            .map(|c| c.0)
            .filter(|&ij| mask.inside[ij])
            .min_by(|&a, &b| dist(a).total_cmp(&dist(b)))
            .ok_or_else(|| KdeError::MaskMass(format!("point ({}, {}) has no inside corner", p[0], p[1])))?;
        for (ij, f) in corners {
            let to = if mask.inside[ij] { ij } else { nearest };
            weights[to] += w * f;
        }
    }
    Ok(BinnedHistogram2D { grid: *grid, weights, n_samples: sample.len() })
}

#[derive(Debug, Clone, Serialize)]
pub struct MaskedSolution {
    pub estimate: DensityEstimate2D,
    pub steps: usize,
    pub dt: f64,
    /// `|∫ result - ∫ initial|`.
    pub mass_defect: f64,
    pub connected: bool,
}

/// Solves `∂u/∂t = ½Δu` on the inside nodes of `mask` with zero flux across
/// every edge that touches an outside node, starting from the binned data
/// as node densities. Explicit Euler with a step inside the positivity
/// limit `dt · max_i Σ_j c_ij / V_i <= 0.9`.
pub fn solve_heat_masked(binned: &BinnedHistogram2D, mask: &DomainMask, t: f64) -> Result<MaskedSolution> {
    crate::kde1d::check_t(t)?;
    let grid = &mask.grid;
    if binned.grid != *grid {
        return Err(KdeError::param("mask", "mask and histogram grids differ"));
    }
    let outside: f64 = Zip::from(&binned.weights).and(&mask.inside).fold(0.0, |s, &w, &b| if b { s } else { s + w });
    if outside > 1e-12 {
        return Err(KdeError::MaskMass(format!("{outside:.3e} of the binned mass lies outside the mask")));
    }
    let (nx, ny) = grid.shape();
    let (hx, hy) = (grid.x.step(), grid.y.step());
    let idx = |i: usize, j: usize| i * ny + j;
    let inside: Vec<bool> = mask.inside.iter().cloned().collect();
    let vol: Vec<f64> = (0..nx * ny).map(|k| grid.weight(k / ny, k % ny)).collect();
    // Edge conductances: cx[idx(i, j)] joins (i, j)-(i+1, j), cy joins (i, j)-(i, j+1).
    let mut cx = vec![0.0; nx * ny];
    let mut cy = vec![0.0; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            let k = idx(i, j);
            if !inside[k] {
                continue;
            }
            if i + 1 < nx && inside[idx(i + 1, j)] {
                cx[k] = 0.5 * grid.y.weight(j) / hx;
            }
            if j + 1 < ny && inside[idx(i, j + 1)] {
                cy[k] = 0.5 * grid.x.weight(i) / hy;
            }
        }
    }
    let mut diag = vec![0.0; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            let k = idx(i, j);
            let mut s = cx[k] + cy[k];
            if i > 0 {
                s += cx[idx(i - 1, j)];
            }
            if j > 0 {
                s += cy[idx(i, j - 1)];
            }
            diag[k] = s / vol[k];
        }
    }
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let steps = if dmax > 0.0 { ((t * dmax / 0.9).ceil() as usize).max(1) } else { 1 };
    let dt = t / steps as f64;

    let mut u: Vec<f64> = (0..nx * ny).map(|k| binned.weights[[k / ny, k % ny]] / vol[k]).collect();
    let mass0: f64 = u.iter().zip(&vol).map(|(a, b)| a * b).sum();
    let mut flux = vec![0.0; nx * ny];
    for _ in 0..steps {
        flux.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..nx {
            for j in 0..ny {
                let k = idx(i, j);
                if cx[k] > 0.0 {
                    let f = cx[k] * (u[idx(i + 1, j)] - u[k]);
                    flux[k] += f;
                    flux[idx(i + 1, j)] -= f;
                }
                if cy[k] > 0.0 {
                    let f = cy[k] * (u[idx(i, j + 1)] - u[k]);
                    flux[k] += f;
                    flux[idx(i, j + 1)] -= f;
                }
            }
        }
        for k in 0..nx * ny {
            if inside[k] {
                u[k] += dt * flux[k] / vol[k];
            }
        }
    }
    let mass1: f64 = u.iter().zip(&vol).map(|(a, b)| a * b).sum();
    let values = Array2::from_shape_vec((nx, ny), u.into_iter().map(|v| v.max(0.0)).collect())
        .expect("shape matches the grid");
    Ok(MaskedSolution {
        estimate: DensityEstimate2D { grid: *grid, values, method: "heat-masked".into(), t: [t, t] },
        steps,
        dt,
        mass_defect: (mass1 - mass0).abs(),
        connected: mask.is_connected(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn q_constants() {
        assert_relative_eq!(q_const(0), 0.3989422804014327, max_relative = 1e-15);
        assert_relative_eq!(q_const(1), -0.3989422804014327, max_relative = 1e-15);
        assert_relative_eq!(q_const(2), 1.196_826_841_204_298, max_relative = 1e-15);
    }

    #[test]
    fn stage_scaling_in_n() {
        let a = t_stage_2d(1, 1, 0.3, 0.4, 100).unwrap();
        let b = t_stage_2d(1, 1, 0.3, 0.4, 800).unwrap();
        assert_relative_eq!(b / a, 8f64.powf(-0.25), max_relative = 1e-13);
        assert!(t_stage_2d(1, 0, 0.0, 0.0, 100).is_err());
    }

    #[test]
    fn diagonal_bandwidths_of_standard_normal() {
        // ψ_{2,0} = ψ_{0,2} = 3/(16π), ψ_{1,1} = 1/(16π) give t = N^{-1/3}.
        let p = 1.0 / (16.0 * PI);
        let [tx, ty] = diagonal_bandwidths([3.0 * p, p, 3.0 * p], 1000);
        assert_relative_eq!(tx, 0.1, max_relative = 1e-12);
        assert_relative_eq!(ty, 0.1, max_relative = 1e-12);
    }

    #[test]
    fn mask_csv_round_trip() {
        let g = Grid2D::new(Grid1D::new(0.0, 1.0, 16).unwrap(), Grid1D::new(0.0, 1.0, 16).unwrap());
        let mut text = String::new();
        for i in 0..16 {
            let row: Vec<&str> = (0..16).map(|j| if i < 8 && j < 8 { "1" } else { "0" }).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let m = DomainMask::from_csv(&text, g).unwrap();
        assert_eq!(m.count_inside(), 64);
        assert!(m.is_connected());
        assert!(DomainMask::from_csv("1,0\n", g).is_err());
    }

    #[test]
    fn disconnected_mask_is_detected() {
        let g = Grid2D::new(Grid1D::new(0.0, 1.0, 16).unwrap(), Grid1D::new(0.0, 1.0, 16).unwrap());
        let m = DomainMask::from_fn(g, |x, _| !(0.4..0.6).contains(&x)).unwrap();
        assert!(!m.is_connected());
    }
}
