//! Benchmark densities, integrated squared error and the trial runner.

mod bivariate;
mod registry;
mod targets;

pub use bivariate::{ise_2d, Component2D, Mixture2D};
pub use registry::{all_cases, case, Case, Suite};
pub use targets::{Component, Target};

use crate::comparators::{abramson_estimate, hall_park_estimate, lscv_select, sinc_kde};
use crate::diffusion::{diffusion_pipeline, DiffusionConfig};
use crate::error::{KdeError, Result};
use crate::grid::{integrate, Grid1D, Sample1D};
use crate::isj::{isj_select, sj_normal_ref_select, DEFAULT_STAGES};
use crate::kde1d::{gauss_kde_unbounded, DensityEstimate1D};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

/// Largest target mass allowed outside an ISE grid.
pub const ISE_COVERAGE: f64 = 1e-4;
/// Nodes of the per-case ISE grid.
pub const ISE_GRID_SIZE: usize = 1 << 15;
/// Grid size used for spectral estimates inside the benchmark.
pub const BENCH_GRID_SIZE: usize = 1 << 15;

/// `∫ (values - f)²` over `grid` by the trapezoid rule.
pub fn ise_values(values: &[f64], grid: &Grid1D, target: &Target) -> Result<f64> {
    if values.len() != grid.n {
        return Err(KdeError::LengthMismatch { expected: grid.n, got: values.len() });
    }
    let outside = target.mass_outside(grid.lo, grid.hi);
    if outside > ISE_COVERAGE {
        return Err(KdeError::GridCoverage(outside));
    }
    let sq: Vec<f64> = values
        .iter()
        .zip(grid.nodes())
        .map(|(v, x)| {
            let d = v - target.pdf(x);
            d * d
        })
        .collect();
    Ok(integrate(&sq, grid))
}

/// ISE of an estimate on its own grid.
pub fn ise(estimate: &DensityEstimate1D, target: &Target) -> Result<f64> {
    ise_values(&estimate.values, &estimate.grid, target)
}

/// The fixed grid on which a case is scored: the target's effective range,
/// widened by 5% on every side without a known support bound.
pub fn ise_grid(target: &Target, n: usize) -> Result<Grid1D> {
    let (lo, hi) = target.effective_range();
    let (slo, shi) = target.support();
    let m = 0.05 * (hi - lo);
    Grid1D::new(slo.map_or(lo - m, |_| lo), shi.map_or(hi + m, |_| hi), n)
}

/// Estimators available to the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Gaussian estimate at the ISJ bandwidth.
    Isj,
    /// Gaussian estimate at the normal-reference plug-in bandwidth.
    Sj,
    /// Gaussian estimate at the LSCV bandwidth.
    Lscv,
    /// Diffusion estimator with `α = 1` on the real line.
    Diffusion,
    /// Diffusion estimator with `α = 1`, reflecting at the target's known
    /// support bounds.
    DiffusionBounded,
    /// Abramson's estimator with both bandwidths from LSCV.
    Abramson,
    /// Sinc kernel at the Gaussian LSCV bandwidth.
    Sinc,
    /// Hall–Park at the LSCV bandwidth, at the target's one known bound.
    #[serde(rename = "hallpark")]
    HallPark,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Isj,
        Method::Sj,
        Method::Lscv,
        Method::Diffusion,
        Method::DiffusionBounded,
        Method::Abramson,
        Method::Sinc,
        Method::HallPark,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Isj => "isj",
            Method::Sj => "sj",
            Method::Lscv => "lscv",
            Method::Diffusion => "diffusion",
            Method::DiffusionBounded => "diffusion-bounded",
            Method::Abramson => "abramson",
            Method::Sinc => "sinc",
            Method::HallPark => "hallpark",
        }
    }

    /// Runs the method on `sample` and returns its values on `grid`.
    pub fn evaluate(self, sample: &Sample1D, target: &Target, grid: &Grid1D) -> Result<Vec<f64>> {
        let xs = grid.nodes();
        let on_grid = |est: DensityEstimate1D| xs.iter().map(|&x| est.at(x)).collect();
        match self {
            Method::Isj => {
                let t = isj_select(sample)?.t_star;
                Ok(on_grid(gauss_kde_unbounded(sample, t, BENCH_GRID_SIZE)?))
            }
            Method::Sj => {
                let t = sj_normal_ref_select(sample, DEFAULT_STAGES)?.t_star;
                Ok(on_grid(gauss_kde_unbounded(sample, t, BENCH_GRID_SIZE)?))
            }
            Method::Lscv => {
                let t = lscv_select(sample)?.t;
                Ok(on_grid(gauss_kde_unbounded(sample, t, BENCH_GRID_SIZE)?))
            }
            Method::Diffusion => {
                let cfg = DiffusionConfig { grid_size: BENCH_GRID_SIZE, ..DiffusionConfig::default() };
                Ok(on_grid(diffusion_pipeline(sample, &cfg)?.estimate))
            }
            Method::DiffusionBounded => {
                let (lower, upper) = target.support();
                let cfg = DiffusionConfig { lower, upper, grid_size: BENCH_GRID_SIZE, ..DiffusionConfig::default() };
                Ok(on_grid(diffusion_pipeline(sample, &cfg)?.estimate))
            }
            Method::Abramson => {
                let t = lscv_select(sample)?.t;
                abramson_estimate(sample, &xs, t, t)
            }
            Method::Sinc => {
                let t = lscv_select(sample)?.t;
                sinc_kde(sample, &xs, t)
            }
            Method::HallPark => {
                let t = lscv_select(sample)?.t;
                match target.support() {
                    (_, Some(beta)) => hall_park_estimate(sample, &xs, t, beta),
                    (Some(lo), None) => {
                        // Reflect a lower bound into an upper one.
                        let flipped = Sample1D::new(sample.values().iter().map(|x| -x).collect())?;
                        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
                        hall_park_estimate(&flipped, &neg, t, -lo)
                    }
                    (None, None) => Err(KdeError::param("method", "hallpark needs a target with a support bound")),
                }
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = KdeError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| KdeError::param("method", format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub ise_a: Option<f64>,
    pub ise_b: Option<f64>,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn ratio(&self) -> Option<f64> {
        match (self.ise_a, self.ise_b) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkResult {
    pub case: String,
    pub name: String,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub method_a: Method,
    pub method_b: Method,
    pub records: Vec<TrialRecord>,
    /// `ISE(a) / ISE(b)` over the trials where both succeeded.
    pub ratios: Vec<f64>,
    pub median_ratio: f64,
    pub mean_ratio: f64,
    pub failures: usize,
}

impl BenchmarkResult {
    /// One row per trial: `case,N,trial,ise_a,ise_b,ratio`, empty fields for
    /// failures.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "case,N,trial,ise_a,ise_b,ratio")?;
        let fmt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
        for r in &self.records {
            writeln!(w, "{},{},{},{},{},{}", self.case, self.n, r.trial, fmt(r.ise_a), fmt(r.ise_b), fmt(r.ratio()))?;
        }
        Ok(())
    }

    /// JSON summary without the per-trial records.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "case": self.case,
            "name": self.name,
            "N": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "method_a": self.method_a,
            "method_b": self.method_b,
            "median_ratio": self.median_ratio,
            "mean_ratio": self.mean_ratio,
            "failures": self.failures,
            "ratios": self.ratios,
        })
    }
}

/// The random stream for one trial: the master seed picks the key and the
/// trial index picks the stream, so trials are independent of scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Draws `trials` samples of size `n` from the case's target and scores both
/// methods on each. Trials run in parallel when `parallel` is set; the result
/// does not depend on it.
pub fn run_benchmark(
    case: &Case,
    n: usize,
    trials: usize,
    method_a: Method,
    method_b: Method,
    seed: u64,
    parallel: bool,
) -> Result<BenchmarkResult> {
    if trials == 0 {
        return Err(KdeError::param("trials", "must be at least 1"));
    }
    if n < 2 {
        return Err(KdeError::param("n", "must be at least 2"));
    }
    let grid = ise_grid(&case.target, ISE_GRID_SIZE)?;
    let run = |trial: u64| -> TrialRecord {
        let mut rng = trial_rng(seed, trial);
        let outcome = Sample1D::new(case.target.sample(n, &mut rng)).and_then(|s| {
            let a = ise_values(&method_a.evaluate(&s, &case.target, &grid)?, &grid, &case.target)?;
            let b = if method_b == method_a {
                a
            } else {
                ise_values(&method_b.evaluate(&s, &case.target, &grid)?, &grid, &case.target)?
            };
            Ok((a, b))
        });
        match outcome {
            Ok((a, b)) => TrialRecord { trial, ise_a: Some(a), ise_b: Some(b), error: None },
            Err(e) => TrialRecord { trial, ise_a: None, ise_b: None, error: Some(e.to_string()) },
        }
    };
    let ids: Vec<u64> = (0..trials as u64).collect();
    let records: Vec<TrialRecord> =
        if parallel { ids.par_iter().map(|&t| run(t)).collect() } else { ids.iter().map(|&t| run(t)).collect() };
    let ratios: Vec<f64> = records.iter().filter_map(TrialRecord::ratio).collect();
    let failures = records.len() - ratios.len();
    let mean_ratio = if ratios.is_empty() { f64::NAN } else { ratios.iter().sum::<f64>() / ratios.len() as f64 };
    Ok(BenchmarkResult {
        case: case.id.clone(),
        name: case.name.clone(),
        n,
        trials,
        seed,
        method_a,
        method_b,
        median_ratio: median(&ratios),
        mean_ratio,
        failures,
        ratios,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ise_of_target_is_zero() {
        let t = case("t1-09").unwrap().target;
        let g = ise_grid(&t, 1 << 12).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|&x| t.pdf(x)).collect();
        assert_eq!(ise_values(&v, &g, &t).unwrap(), 0.0);
    }

    #[test]
    fn constant_against_uniform() {
        // Beta(1, 1) is uniform on [0, 1]; a constant c scores (c - 1)².
        let t = Target::Beta { a: 1.0, b: 1.0 };
        let g = Grid1D::new(0.0, 1.0, 256).unwrap();
        assert_relative_eq!(ise_values(&vec![0.5; 256], &g, &t).unwrap(), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let t = Target::Mixture(vec![Component { weight: 1.0, mean: 0.0, sd: 1.0 }]);
        let g = Grid1D::new(-2.0, 2.0, 64).unwrap();
        assert!(matches!(ise_values(&vec![0.0; 64], &g, &t), Err(KdeError::GridCoverage(_))));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Method>().is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
