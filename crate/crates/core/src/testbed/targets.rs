use crate::error::{KdeError, Result};
use crate::gauss::{std_cdf, std_pdf};
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp, LogNormal, StandardNormal};
use serde::Serialize;

/// One weighted normal component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

pub(crate) fn c(weight: f64, mean: f64, sd: f64) -> Component {
    Component { weight, mean, sd }
}

/// A known density used to generate data and score estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Target {
    Mixture(Vec<Component>),
    LogNormal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
    Beta { a: f64, b: f64 },
    /// The base density conditioned on `x <= upper`.
    TruncatedAbove { base: Box<Target>, upper: f64 },
}

impl Target {
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Target::Mixture(cs) => cs.iter().map(|c| c.weight * std_pdf((x - c.mean) / c.sd) / c.sd).sum(),
            Target::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_pdf((x.ln() - mu) / sigma) / (sigma * x)
                }
            }
            Target::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Target::Beta { a, b } => {
                if !(0.0..=1.0).contains(&x) {
                    0.0
                } else {
                    let ln_b = statrs::function::beta::ln_beta(*a, *b);
                    x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0) * (-ln_b).exp()
                }
            }
            Target::TruncatedAbove { base, upper } => {
                if x > *upper {
                    0.0
                } else {
                    base.pdf(x) / base.cdf(*upper)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Target::Mixture(cs) => cs.iter().map(|c| c.weight * std_cdf((x - c.mean) / c.sd)).sum(),
            Target::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_cdf((x.ln() - mu) / sigma)
                }
            }
            Target::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-rate * x).exp()
                }
            }
            Target::Beta { a, b } => statrs::function::beta::beta_reg(*a, *b, x.clamp(0.0, 1.0)),
            Target::TruncatedAbove { base, upper } => (base.cdf(x.min(*upper)) / base.cdf(*upper)).min(1.0),
        }
    }

    /// Support bounds known a priori, if any.
    pub fn support(&self) -> (Option<f64>, Option<f64>) {
        match self {
            Target::Mixture(_) => (None, None),
            Target::LogNormal { .. } | Target::Exponential { .. } => (Some(0.0), None),
            Target::Beta { .. } => (Some(0.0), Some(1.0)),
            Target::TruncatedAbove { base, upper } => (base.support().0, Some(*upper)),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Target::Mixture(cs) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = cs[cs.len() - 1];
                for c in cs {
                    acc += c.weight;
                    if u < acc {
                        pick = *c;
                        break;
                    }
                }
                let z: f64 = StandardNormal.sample(rng);
                pick.mean + pick.sd * z
            }
            Target::LogNormal { mu, sigma } => LogNormal::new(*mu, *sigma).expect("valid lognormal").sample(rng),
            Target::Exponential { rate } => Exp::new(*rate).expect("valid rate").sample(rng),
            Target::Beta { a, b } => Beta::new(*a, *b).expect("valid beta").sample(rng),
            Target::TruncatedAbove { base, upper } => loop {
                let x = base.draw(rng);
                if x <= *upper {
                    break x;
                }
            },
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    /// An interval holding all but about `1e-7` of the mass.
    pub fn effective_range(&self) -> (f64, f64) {
        match self {
            Target::Mixture(cs) => {
                let lo = cs.iter().map(|c| c.mean - 6.5 * c.sd).fold(f64::INFINITY, f64::min);
                let hi = cs.iter().map(|c| c.mean + 6.5 * c.sd).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            Target::LogNormal { mu, sigma } => (0.0, (mu + 5.5 * sigma).exp()),
            Target::Exponential { rate } => (0.0, 17.0 / rate),
            Target::Beta { .. } => (0.0, 1.0),
            Target::TruncatedAbove { base, upper } => {
                let (lo, _) = base.effective_range();
                (lo.min(*upper - 1.0), *upper)
            }
        }
    }

    /// Mass outside `[lo, hi]`.
    pub fn mass_outside(&self, lo: f64, hi: f64) -> f64 {
        (self.cdf(lo) + 1.0 - self.cdf(hi)).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if let Target::Mixture(cs) = self {
            let w: f64 = cs.iter().map(|c| c.weight).sum();
            if (w - 1.0).abs() > 1e-12 || cs.iter().any(|c| !(c.sd > 0.0) || c.weight < 0.0) {
                return Err(KdeError::param("mixture", "weights must sum to one and sds be positive"));
            }
        }
        Ok(())
    }
}
