use super::targets::{c, Component, Target};
use crate::error::{KdeError, Result};
use serde::Serialize;

/// Which comparison a case belongs to by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Suite {
    /// Bandwidth selection: ISJ against the normal-reference plug-in.
    Selection,
    /// Adaptive estimation: diffusion against Abramson.
    Adaptive,
    /// Boundary correction: diffusion against Hall–Park.
    Boundary,
    Extra,
}

#[derive(Debug, Clone, Serialize)]
pub struct Case {
    pub id: String,
    pub name: String,
    pub suite: Suite,
    pub target: Target,
}

fn claw() -> Vec<Component> {
    let mut v = vec![c(0.5, 0.0, 1.0)];
    v.extend((0..5).map(|k| c(0.1, k as f64 / 2.0 - 1.0, 0.1)));
    v
}

fn strongly_skewed() -> Vec<Component> {
    (0..8).map(|k| c(1.0 / 8.0, 3.0 * ((2f64 / 3.0).powi(k) - 1.0), (2f64 / 3.0).powi(k))).collect()
}

fn double_claw() -> Vec<Component> {
    let mut v = vec![c(0.49, -1.0, 2.0 / 3.0), c(0.49, 1.0, 2.0 / 3.0)];
    v.extend((0..7).map(|k| c(1.0 / 350.0, (k as f64 - 3.0) / 2.0, 0.01)));
    v
}

fn discrete_comb() -> Vec<Component> {
    let mut v: Vec<Component> = (0..3).map(|k| c(2.0 / 7.0, (12.0 * k as f64 - 15.0) / 7.0, 2.0 / 7.0)).collect();
    v.extend((8..11).map(|k| c(1.0 / 21.0, 2.0 * k as f64 / 7.0, 1.0 / 21.0)));
    v
}

fn asymmetric_double_claw() -> Vec<Component> {
    let mut v: Vec<Component> = (0..2).map(|k| c(0.46, 2.0 * k as f64 - 1.0, 2.0 / 3.0)).collect();
    v.extend((1..4).map(|k| c(1.0 / 300.0, -(k as f64) / 2.0, 0.01)));
    v.extend((1..4).map(|k| c(7.0 / 300.0, k as f64 / 2.0, 0.07)));
    v
}

fn asymmetric_claw() -> Vec<Component> {
    let mut v = vec![c(0.5, 0.0, 1.0)];
    v.extend((-2..=2).map(|k: i32| c(2f64.powi(1 - k) / 31.0, k as f64 + 0.5, 2f64.powi(-k) / 10.0)));
    v
}

fn table1(index: usize) -> (&'static str, Target) {
    let m = Target::Mixture;
    match index {
        1 => ("claw", m(claw())),
        2 => ("strongly skewed", m(strongly_skewed())),
        3 => ("kurtotic unimodal", m(vec![c(2.0 / 3.0, 0.0, 1.0), c(1.0 / 3.0, 0.0, 0.1)])),
        4 => ("double claw", m(double_claw())),
        5 => ("discrete comb", m(discrete_comb())),
        6 => ("asymmetric double claw", m(asymmetric_double_claw())),
        7 => ("outlier", m(vec![c(0.1, 0.0, 1.0), c(0.9, 0.0, 0.1)])),
        8 => ("separated bimodal", m(vec![c(0.5, -12.0, 0.5), c(0.5, 12.0, 0.5)])),
        9 => ("skewed bimodal", m(vec![c(0.75, 0.0, 1.0), c(0.25, 1.5, 1.0 / 3.0)])),
        10 => ("bimodal", m(vec![c(0.5, 0.0, 0.1), c(0.5, 5.0, 1.0)])),
        11 => ("log-normal", Target::LogNormal { mu: 0.0, sigma: 1.0 }),
        12 => ("asymmetric claw", m(asymmetric_claw())),
        13 => ("trimodal", m((0..3).map(|k| c(1.0 / 3.0, 80.0 * k as f64, ((k + 1) * (k + 1)) as f64)).collect())),
        14 => ("5-modes", m((0..5).map(|k| c(0.2, 80.0 * k as f64, (k + 1) as f64)).collect())),
        15 => ("10-modes", m((0..10).map(|k| c(0.1, 100.0 * k as f64, (k + 1) as f64)).collect())),
        16 => (
            "smooth comb",
            m((0..6)
                .map(|k| {
                    let p = 2f64.powi(k);
                    c(2f64.powi(5 - k) / 63.0, (65.0 - 96.0 / p) / 21.0, 32.0 / 63.0 / p)
                })
                .collect()),
        ),
        _ => unreachable!(),
    }
}

fn table2(index: usize) -> (&'static str, Target) {
    match index {
        1 => table1(10),
        2 => table1(1),
        3 => table1(2),
        4 => table1(4),
        5 => table1(5),
        6 => table1(6),
        7 => ("bimodal ±2", Target::Mixture(vec![c(0.5, -2.0, 0.5), c(0.5, 2.0, 0.5)])),
        8 => table1(9),
        9 => table1(11),
        10 => table1(12),
        _ => unreachable!(),
    }
}

/// Every registered case.
pub fn all_cases() -> Vec<Case> {
    let mut out = Vec::new();
    for i in 1..=16 {
        let (name, target) = table1(i);
        out.push(Case { id: format!("t1-{i:02}"), name: name.into(), suite: Suite::Selection, target });
    }
    for i in 1..=10 {
        let (name, target) = table2(i);
        out.push(Case { id: format!("t2-{i:02}"), name: name.into(), suite: Suite::Adaptive, target });
    }
    out.push(Case {
        id: "t3-exp".into(),
        name: "exponential".into(),
        suite: Suite::Boundary,
        target: Target::Exponential { rate: 1.0 },
    });
    for i in 1..=8 {
        let (name, base) = table1(i);
        out.push(Case {
            id: format!("t3-{i:02}"),
            name: format!("{name}, truncated above at 0"),
            suite: Suite::Boundary,
            target: Target::TruncatedAbove { base: Box::new(base), upper: 0.0 },
        });
    }
    out.push(Case {
        id: "bimodal-30".into(),
        name: "separated bimodal ±30".into(),
        suite: Suite::Selection,
        target: Target::Mixture(vec![c(0.5, -30.0, 1.0), c(0.5, 30.0, 1.0)]),
    });
    out.push(Case {
        id: "beta-1-4".into(),
        name: "beta(1, 4)".into(),
        suite: Suite::Extra,
        target: Target::Beta { a: 1.0, b: 4.0 },
    });
    out
}

/// Looks a case up by id, or by name for the first case carrying it.
pub fn case(key: &str) -> Result<Case> {
    let cases = all_cases();
    let pos = cases.iter().position(|c| c.id == key).or_else(|| cases.iter().position(|c| c.name == key));
    pos.map(|i| cases[i].clone()).ok_or_else(|| KdeError::UnknownCase(key.into()))
}
