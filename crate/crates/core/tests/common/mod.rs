#![allow(dead_code)]

use diffkde::gauss::phi_deriv;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(-1)^j N^{-2} ΣΣ φ^{(2j)}(X_k - X_m; 2t)` summed literally.
pub fn functional_direct(x: &[f64], j: usize, t: f64) -> f64 {
    let n = x.len() as f64;
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut s = 0.0;
    for &a in x {
        for &b in x {
            s += phi_deriv(2 * j, a - b, 2.0 * t);
        }
    }
    sign * s / (n * n)
}

/// The 2D analogue with mixed derivatives of orders `2i` and `2j`.
pub fn psi_direct_2d(p: &[[f64; 2]], i: usize, j: usize, t: f64) -> f64 {
    let n = p.len() as f64;
    let sign = if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut s = 0.0;
    for a in p {
        for b in p {
            s += phi_deriv(2 * i, a[0] - b[0], 2.0 * t) * phi_deriv(2 * j, a[1] - b[1], 2.0 * t);
        }
    }
    sign * s / (n * n)
}

/// Largest gap between the empirical CDF of `draws` and `cdf`.
pub fn ks_distance(draws: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = draws.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Relative sup-difference over the entries where `reference` is above
/// `cut` times its maximum.
pub fn max_rel_diff(a: &[f64], reference: &[f64], cut: f64) -> f64 {
    let m = reference.iter().cloned().fold(0.0, f64::max);
    a.iter()
        .zip(reference)
        .filter(|(_, r)| **r > cut * m)
        .map(|(a, r)| ((a - r) / r).abs())
        .fold(0.0, f64::max)
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
