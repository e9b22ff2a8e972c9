mod common;

use common::rng;
use diffkde::grid::Sample1D;
use diffkde::testbed::{all_cases, case, ise_grid, ise_values, run_benchmark, Method, Suite, Target};

#[test]
fn runs_are_deterministic_and_schedule_free() {
    let c = case("t1-09").unwrap();
    let a = run_benchmark(&c, 200, 4, Method::Isj, Method::Lscv, 7, true).unwrap();
    let b = run_benchmark(&c, 200, 4, Method::Isj, Method::Lscv, 7, false).unwrap();
    assert_eq!(a.ratios, b.ratios);
    let c2 = run_benchmark(&c, 200, 4, Method::Isj, Method::Lscv, 8, true).unwrap();
    assert_ne!(a.ratios, c2.ratios);
}

#[test]
fn identical_methods_give_unit_ratio() {
    let r = run_benchmark(&case("t1-03").unwrap(), 300, 3, Method::Sj, Method::Sj, 1, false).unwrap();
    assert!(r.ratios.iter().all(|&v| v == 1.0));
    assert_eq!(r.median_ratio, 1.0);
}

#[test]
fn outputs_carry_every_trial() {
    let r = run_benchmark(&case("t1-08").unwrap(), 100, 3, Method::Isj, Method::Sj, 1, false).unwrap();
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "case,N,trial,ise_a,ise_b,ratio");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("t1-08,100,0,"));
    let json = r.summary_json();
    assert_eq!(json["trials"], 3);
    assert_eq!(json["method_a"], "isj");
    assert_eq!(json["ratios"].as_array().unwrap().len(), 3);
}

#[test]
fn registry_transcription() {
    let cases = all_cases();
    let count = |prefix: &str| cases.iter().filter(|c| c.id.starts_with(prefix)).count();
    assert_eq!((count("t1-"), count("t2-"), count("t3-")), (16, 10, 9));
    assert!(cases.iter().filter(|c| c.id.starts_with("t2-")).all(|c| c.suite == Suite::Adaptive));
    let Target::Mixture(cs) = case("t1-08").unwrap().target else { panic!("mixture expected") };
    assert_eq!(cs.len(), 2);
    assert!(cs.iter().all(|c| c.weight == 0.5 && c.sd == 0.5 && c.mean.abs() == 12.0));
    // Claw: ½φ(0) + Σ 0.1 φ((0 - μ_k)/0.1)/0.1 with μ_k = k/2 - 1.
    let phi = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let claw0 = 0.5 * phi(0.0) + (0..5).map(|k| phi(-(k as f64 / 2.0 - 1.0) / 0.1)).sum::<f64>();
    assert!((case("claw").unwrap().target.pdf(0.0) - claw0).abs() < 1e-14);
    assert!((claw0 - 0.5984).abs() < 1e-4);
    assert_eq!(case("t2-09").unwrap().target, Target::LogNormal { mu: 0.0, sigma: 1.0 });
}

#[test]
fn mixture_draws_have_the_right_mean() {
    let target = case("t1-02").unwrap().target;
    let Target::Mixture(cs) = &target else { panic!() };
    let mean: f64 = cs.iter().map(|c| c.weight * c.mean).sum();
    let var: f64 = cs.iter().map(|c| c.weight * (c.sd * c.sd + c.mean * c.mean)).sum::<f64>() - mean * mean;
    let n = 1_000_000;
    let x = target.sample(n, &mut rng(51));
    let m = x.iter().sum::<f64>() / n as f64;
    assert!((m - mean).abs() < 4.0 * (var / n as f64).sqrt(), "{m} vs {mean}");
}

#[test]
fn ise_is_stable_under_grid_refinement() {
    for id in ["t1-01", "t1-14", "t2-09", "t3-exp"] {
        let c = case(id).unwrap();
        let s = Sample1D::new(c.target.sample(1000, &mut rng(52))).unwrap();
        let ise_at = |n: usize| {
            let g = ise_grid(&c.target, n).unwrap();
            ise_values(&Method::Isj.evaluate(&s, &c.target, &g).unwrap(), &g, &c.target).unwrap()
        };
        let (a, b) = (ise_at(1 << 15), ise_at(1 << 16));
        assert!((a / b - 1.0).abs() < 0.01, "{id}: {a} vs {b}");
    }
}
