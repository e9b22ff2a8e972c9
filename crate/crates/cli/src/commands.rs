use crate::io::{num, read_1d, read_2d, read_mask, write_out};
use crate::{BandwidthArgs, BenchmarkArgs, CliError, Common, DensityArgs, EstimatorKind, Format, SampleArgs, SamplerKind};
use diffkde::comparators::{abramson_estimate, hall_park_estimate, lscv_select, sinc_kde};
use diffkde::diffusion::{build_pilot, diffusion_pipeline, euler_sample, DiffusionConfig};
use diffkde::grid::{bin_linear, integrate, make_grid_bounded, Grid1D, Sample1D, DEFAULT_GRID_SIZE};
use diffkde::isj::{isj_select_with, sj_normal_ref_select_with, IsjConfig, DEFAULT_STAGES};
use diffkde::kde1d::{gauss_kde_spectral, theta_estimator, theta_sample};
use diffkde::kde2d::{
    bin_bilinear, bin_bilinear_masked, gauss_kde_2d, isj2d_select_with, make_grid_2d, normal_ref_2d_select_with,
    solve_heat_masked, Bandwidth2DReport, DensityEstimate2D, DomainMask, Grid2D, Isj2dConfig, Sample2D,
    DEFAULT_GRID_2D, DEFAULT_ORDER_2D,
};
use diffkde::testbed::{all_cases, case, run_benchmark, trial_rng, Case, Method, Suite};
use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;
use std::fmt::Write as _;
use std::fs;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Selector {
    Isj,
    Sj,
    Lscv,
    Fixed(f64),
}

fn parse_selector(s: &str) -> Result<Selector, CliError> {
    match s {
        "isj" => Ok(Selector::Isj),
        "sj" => Ok(Selector::Sj),
        "lscv" => Ok(Selector::Lscv),
        _ => {
            let t = s
                .strip_prefix("fixed:")
                .ok_or_else(|| CliError::Input(format!("unknown selector `{s}`; use isj, sj, lscv or fixed:<t>")))?;
            match t.parse::<f64>() {
                Ok(t) if t > 0.0 && t.is_finite() => Ok(Selector::Fixed(t)),
                _ => Err(CliError::Input(format!("fixed:<t> needs a positive finite t, got `{t}`"))),
            }
        }
    }
}

fn check_common(c: &Common) -> Result<(), CliError> {
    if c.dims == 2 && (c.lower.is_some() || c.upper.is_some()) {
        return Err(CliError::Input("--lower and --upper apply to 1D data only".into()));
    }
    if let (Some(lo), Some(hi)) = (c.lower, c.upper) {
        if lo >= hi {
            return Err(CliError::Input(format!("--lower {lo} must be below --upper {hi}")));
        }
    }
    Ok(())
}

fn isj_config(c: &Common, stages: usize) -> IsjConfig {
    IsjConfig {
        stages,
        grid_size: c.grid.unwrap_or(DEFAULT_GRID_SIZE),
        pad: c.pad,
        lower: c.lower,
        upper: c.upper,
        ..IsjConfig::default()
    }
}

fn isj2d_config(c: &Common, k: usize) -> Isj2dConfig {
    Isj2dConfig { k, grid_size: c.grid.unwrap_or(DEFAULT_GRID_2D), pad: c.pad }
}

fn load_1d(c: &Common) -> Result<Sample1D, CliError> {
    Ok(Sample1D::new(read_1d(&c.input)?)?)
}

fn load_2d(c: &Common) -> Result<Sample2D, CliError> {
    Ok(Sample2D::new(read_2d(&c.input)?)?)
}

/// Squared bandwidth in data units for a 1D Gaussian-type estimate.
fn select_t(sample: &Sample1D, sel: Selector, c: &Common) -> Result<f64, CliError> {
    Ok(match sel {
        Selector::Isj => isj_select_with(sample, &isj_config(c, DEFAULT_STAGES))?.t_star,
        Selector::Sj => sj_normal_ref_select_with(sample, &isj_config(c, DEFAULT_STAGES))?.t_star,
        Selector::Lscv => lscv_select(sample)?.t,
        Selector::Fixed(t) => t,
    })
}

fn select_2d(sample: &Sample2D, sel: Selector, c: &Common) -> Result<[f64; 2], CliError> {
    let rep = |r: Bandwidth2DReport| [r.t_x1, r.t_x2];
    Ok(match sel {
        Selector::Isj => rep(isj2d_select_with(sample, &isj2d_config(c, DEFAULT_ORDER_2D))?),
        Selector::Sj => rep(normal_ref_2d_select_with(sample, &isj2d_config(c, DEFAULT_ORDER_2D))?),
        Selector::Lscv => return Err(CliError::Input("lscv is available for 1D data only".into())),
        Selector::Fixed(t) => [t, t],
    })
}

fn json_text(v: &impl serde::Serialize) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn bandwidth(a: &BandwidthArgs) -> Result<(), CliError> {
    let c = &a.common;
    check_common(c)?;
    let sel = parse_selector(&a.selector)?;
    let text = if c.dims == 1 {
        let s = load_1d(c)?;
        let cfg = isj_config(c, a.stages.unwrap_or(DEFAULT_STAGES));
        match sel {
            Selector::Isj => json_text(&isj_select_with(&s, &cfg)?)?,
            Selector::Sj => json_text(&sj_normal_ref_select_with(&s, &cfg)?)?,
            Selector::Lscv => json_text(&lscv_select(&s)?)?,
            Selector::Fixed(_) => return Err(CliError::Input("fixed:<t> is not a selector for `bandwidth`".into())),
        }
    } else {
        let s = load_2d(c)?;
        let cfg = isj2d_config(c, a.stages.unwrap_or(DEFAULT_ORDER_2D));
        match sel {
            Selector::Isj => json_text(&isj2d_select_with(&s, &cfg)?)?,
            Selector::Sj => json_text(&normal_ref_2d_select_with(&s, &cfg)?)?,
            Selector::Lscv => return Err(CliError::Input("lscv is available for 1D data only".into())),
            Selector::Fixed(_) => return Err(CliError::Input("fixed:<t> is not a selector for `bandwidth`".into())),
        }
    };
    write_out(c.output.as_deref(), &text)
}

/// Grid values ready to print.
struct Output1D {
    method: &'static str,
    t: f64,
    grid: Grid1D,
    values: Vec<f64>,
}

/// `[lo, hi]` for estimators tied to a bounded interval; theta defaults to `[0, 1]`.
fn unit_interval(c: &Common) -> (f64, f64) {
    (c.lower.unwrap_or(0.0), c.upper.unwrap_or(1.0))
}

fn check_inside(s: &Sample1D, lo: f64, hi: f64) -> Result<(), CliError> {
    match s.values().iter().find(|x| !(lo..=hi).contains(*x)) {
        Some(x) => Err(CliError::Input(format!("value {x} lies outside [{lo}, {hi}]"))),
        None => Ok(()),
    }
}

fn density_1d(a: &DensityArgs) -> Result<Output1D, CliError> {
    let c = &a.common;
    let s = load_1d(c)?;
    let n = c.grid.unwrap_or(DEFAULT_GRID_SIZE);
    let default_sel = match a.method {
        EstimatorKind::Abramson | EstimatorKind::Sinc | EstimatorKind::Hallpark => "lscv",
        _ => "isj",
    };
    let sel = parse_selector(a.selector.as_deref().unwrap_or(default_sel))?;
    let clip = |v: Vec<f64>| v.into_iter().map(|x| x.max(0.0)).collect::<Vec<f64>>();
    Ok(match a.method {
        EstimatorKind::Gauss => {
            let t = select_t(&s, sel, c)?;
            let grid = make_grid_bounded(&s, n, c.pad, c.lower, c.upper)?;
            let est = gauss_kde_spectral(&bin_linear(&s, &grid)?, t)?;
            Output1D { method: "gauss", t, grid, values: clip(est.values) }
        }
        EstimatorKind::Theta => {
            let (lo, hi) = unit_interval(c);
            check_inside(&s, lo, hi)?;
            let len = hi - lo;
            let unit = Sample1D::new(s.values().iter().map(|x| (x - lo) / len).collect())?;
            let bounded = Common { lower: Some(lo), upper: Some(hi), ..c.clone() };
            let t = select_t(&s, sel, &bounded)?;
            let grid = Grid1D::new(lo, hi, n)?;
            let xs = Grid1D::new(0.0, 1.0, n)?.nodes();
            let v = theta_estimator(&unit, &xs, t / (len * len))?;
            Output1D { method: "theta", t, grid, values: clip(v.into_iter().map(|x| x / len).collect()) }
        }
        EstimatorKind::Diffusion => {
            let cfg = DiffusionConfig {
                alpha: a.alpha,
                grid_size: n,
                pad: c.pad,
                lower: c.lower,
                upper: c.upper,
                stages: DEFAULT_STAGES,
            };
            let rep = diffusion_pipeline(&s, &cfg)?;
            if let Selector::Fixed(_) = sel {
                return Err(CliError::Input("the diffusion estimator picks its own time; drop --selector".into()));
            }
            Output1D { method: "diffusion", t: rep.t_star, grid: rep.estimate.grid, values: clip(rep.estimate.values) }
        }
        EstimatorKind::Abramson => {
            let t = select_t(&s, sel, c)?;
            let grid = make_grid_bounded(&s, n, c.pad, c.lower, c.upper)?;
            let v = abramson_estimate(&s, &grid.nodes(), t, t)?;
            Output1D { method: "abramson", t, grid, values: v }
        }
        EstimatorKind::Sinc => {
            let t = select_t(&s, sel, c)?;
            let grid = make_grid_bounded(&s, n, c.pad, c.lower, c.upper)?;
            let v = sinc_kde(&s, &grid.nodes(), t)?;
            Output1D { method: "sinc", t, grid, values: v }
        }
        EstimatorKind::Hallpark => {
            let t = select_t(&s, sel, c)?;
            let grid = make_grid_bounded(&s, n, c.pad, c.lower, c.upper)?;
            let xs = grid.nodes();
            let v = match (c.lower, c.upper) {
                (_, Some(beta)) => hall_park_estimate(&s, &xs, t, beta)?,
                (Some(lo), None) => {
                    let flipped = Sample1D::new(s.values().iter().map(|x| -x).collect())?;
                    let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
                    hall_park_estimate(&flipped, &neg, t, -lo)?
                }
                (None, None) => return Err(CliError::Input("hallpark needs --lower or --upper".into())),
            };
            Output1D { method: "hallpark", t, grid, values: v }
        }
    })
}

fn parse_bounds(s: &str) -> Result<[f64; 4], CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|f| f.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("--bounds `{s}` is not four numbers")))?;
    match v[..] {
        [a, b, c, d] if a < b && c < d => Ok([a, b, c, d]),
        _ => Err(CliError::Input(format!("--bounds needs x_lo,x_hi,y_lo,y_hi with lo < hi, got `{s}`"))),
    }
}

fn density_2d(a: &DensityArgs) -> Result<DensityEstimate2D, CliError> {
    let c = &a.common;
    if a.method != EstimatorKind::Gauss {
        return Err(CliError::Input("2D density supports --method gauss only".into()));
    }
    let s = load_2d(c)?;
    let n = c.grid.unwrap_or(DEFAULT_GRID_2D);
    let grid = match &a.bounds {
        Some(b) => {
            let [x0, x1, y0, y1] = parse_bounds(b)?;
            Grid2D::new(Grid1D::new(x0, x1, n)?, Grid1D::new(y0, y1, n)?)
        }
        None => make_grid_2d(&s, n, c.pad)?,
    };
    let sel = parse_selector(a.selector.as_deref().unwrap_or("isj"))?;
    let t = select_2d(&s, sel, c)?;
    match &a.mask {
        Some(path) => {
            let mask = DomainMask::from_csv(&read_mask(path)?, grid)?;
            let binned = bin_bilinear_masked(&s, &mask)?;
            // The masked flow is isotropic in data units.
            let sol = solve_heat_masked(&binned, &mask, (t[0] * t[1]).sqrt())?;
            Ok(sol.estimate)
        }
        None => {
            if s.points().iter().any(|&p| !grid.contains(p)) {
                return Err(CliError::Input("a sample point lies outside --bounds".into()));
            }
            let mut est = gauss_kde_2d(&bin_bilinear(&s, &grid)?, t)?;
            est.values.mapv_inplace(|v| v.max(0.0));
            Ok(est)
        }
    }
}

pub fn density(a: &DensityArgs) -> Result<(), CliError> {
    let c = &a.common;
    check_common(c)?;
    if a.mask.is_some() && c.dims != 2 {
        return Err(CliError::Input("--mask needs --dims 2".into()));
    }
    if a.bounds.is_some() && c.dims != 2 {
        return Err(CliError::Input("--bounds needs --dims 2; use --lower/--upper in 1D".into()));
    }
    let text = if c.dims == 1 {
        let out = density_1d(a)?;
        let integral = integrate(&out.values, &out.grid);
        match a.format {
            Format::Json => json_text(&json!({
                "method": out.method,
                "t": out.t,
                "integral": integral,
                "x": out.grid.nodes(),
                "density": out.values,
            }))?,
            Format::Csv => {
                let mut s = format!("# method={}\n# t={}\n# integral={integral}\nx,density\n", out.method, out.t);
                for (x, v) in out.grid.nodes().iter().zip(&out.values) {
                    let _ = writeln!(s, "{},{}", num(*x), num(*v));
                }
                s
            }
        }
    } else {
        let est = density_2d(a)?;
        let integral = est.integral();
        match a.format {
            Format::Json => json_text(&json!({
                "method": est.method,
                "t": est.t,
                "integral": integral,
                "x1": est.grid.x.nodes(),
                "x2": est.grid.y.nodes(),
                "density": est.values.outer_iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
            }))?,
            Format::Csv => {
                let mut s = format!(
                    "# method={}\n# t={},{}\n# integral={integral}\nx1,x2,density\n",
                    est.method, est.t[0], est.t[1]
                );
                let (xs, ys) = (est.grid.x.nodes(), est.grid.y.nodes());
                for ((i, j), v) in est.values.indexed_iter() {
                    let _ = writeln!(s, "{},{},{}", num(xs[i]), num(ys[j]), num(*v));
                }
                s
            }
        }
    };
    write_out(c.output.as_deref(), &text)
}

pub fn sample(a: &SampleArgs) -> Result<(), CliError> {
    let c = &a.common;
    check_common(c)?;
    if c.dims != 1 {
        return Err(CliError::Input("sampling supports 1D data only".into()));
    }
    if a.count <= 0 {
        return Err(CliError::Input(format!("--count must be positive, got {}", a.count)));
    }
    let count = a.count as usize;
    let s = load_1d(c)?;
    let sel = parse_selector(&a.selector)?;
    let mut rng = trial_rng(a.seed, 0);
    let data = s.values();
    let draws: Vec<f64> = match a.method {
        SamplerKind::Gauss => {
            let h = select_t(&s, sel, c)?.sqrt();
            (0..count)
                .map(|_| {
                    let y = data[rng.random_range(0..data.len())];
                    y + h * rng.sample::<f64, _>(StandardNormal)
                })
                .collect()
        }
        SamplerKind::Theta => {
            let (lo, hi) = unit_interval(c);
            check_inside(&s, lo, hi)?;
            let len = hi - lo;
            let bounded = Common { lower: Some(lo), upper: Some(hi), ..c.clone() };
            let t_unit = select_t(&s, sel, &bounded)? / (len * len);
            (0..count)
                .map(|_| {
                    let y = (data[rng.random_range(0..data.len())] - lo) / len;
                    (lo + len * theta_sample(y, t_unit, &mut rng)).clamp(lo, hi)
                })
                .collect()
        }
        SamplerKind::Diffusion => {
            let cfg = DiffusionConfig {
                alpha: a.alpha,
                grid_size: c.grid.unwrap_or(DEFAULT_GRID_SIZE),
                pad: c.pad,
                lower: c.lower,
                upper: c.upper,
                stages: DEFAULT_STAGES,
            };
            let rep = diffusion_pipeline(&s, &cfg)?;
            let t = match sel {
                Selector::Fixed(t) => t,
                _ => rep.t_star,
            };
            let pilot = build_pilot(&bin_linear(&s, &rep.estimate.grid)?, rep.pilot_t, a.alpha)?;
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let y = data[rng.random_range(0..data.len())];
                out.extend(euler_sample(&pilot, y, t, a.steps, 1, &mut rng)?);
            }
            out
        }
    };
    let mut text = String::with_capacity(count * 20);
    for d in draws {
        let _ = writeln!(text, "{}", num(d));
    }
    write_out(c.output.as_deref(), &text)
}

fn default_methods(suite: Suite) -> (Method, Method) {
    match suite {
        Suite::Selection => (Method::Isj, Method::Sj),
        Suite::Adaptive => (Method::Diffusion, Method::Abramson),
        Suite::Boundary => (Method::DiffusionBounded, Method::HallPark),
        Suite::Extra => (Method::DiffusionBounded, Method::Isj),
    }
}

pub fn benchmark(a: &BenchmarkArgs) -> Result<(), CliError> {
    let cases: Vec<Case> = if a.case_key == "all" { all_cases() } else { vec![case(&a.case_key)?] };
    let parse_method = |m: &Option<String>| m.as_deref().map(str::parse::<Method>).transpose();
    let (ma, mb) = (parse_method(&a.method_a)?, parse_method(&a.method_b)?);
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::Input(format!("{}: {e}", a.out_dir.display())))?;
    for cs in &cases {
        let (da, db) = default_methods(cs.suite);
        let r = run_benchmark(cs, a.n, a.trials, ma.unwrap_or(da), mb.unwrap_or(db), a.seed, true)?;
        let mut csv = Vec::new();
        r.write_csv(&mut csv)?;
        let stem = a.out_dir.join(&cs.id);
        fs::write(stem.with_extension("csv"), csv)?;
        fs::write(stem.with_extension("json"), json_text(&r.summary_json())?)?;
        println!(
            "{} ({}): {} vs {}, median ratio {:.4}, {} failed",
            cs.id, cs.name, r.method_a.name(), r.method_b.name(), r.median_ratio, r.failures
        );
    }
    Ok(())
}
