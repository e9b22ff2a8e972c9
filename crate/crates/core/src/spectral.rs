//! Cosine transforms.
//!
//! [`dct2`]/[`idct2`] are the orthonormal type-II pair. The smoothing code
//! works with cosine series on the node lattice instead, where mode `k` is
//! `cos(kπ j/(n-1))` at node `j`: these are the exact eigenvectors of the
//! zero-flux second difference with half cells at both ends, so trapezoid
//! mass and the finite-volume heat solver agree with them exactly.

use ndarray::{Array2, Axis};
use rustdct::DctPlanner;

/// Orthonormal type-II cosine transform.
pub fn dct2(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf = x.to_vec();
    DctPlanner::new().plan_dct2(n).process_dct2(&mut buf);
    let c0 = (1.0 / n as f64).sqrt();
    let c = (2.0 / n as f64).sqrt();
    buf[0] *= c0;
    for v in &mut buf[1..] {
        *v *= c;
    }
    buf
}

/// Inverse of [`dct2`].
pub fn idct2(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    let c0 = (1.0 / n as f64).sqrt();
    let c = (2.0 / n as f64).sqrt();
    let mut buf: Vec<f64> = coeffs.iter().enumerate().map(|(k, v)| if k == 0 { 2.0 * c0 * v } else { c * v }).collect();
    DctPlanner::new().plan_dct3(n).process_dct3(&mut buf);
    buf
}

/// `a_k = Σ_m w_m cos(kπ m/(n-1))` for `k = 0..n`.
pub fn cosine_analysis(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    assert!(n >= 2, "cosine analysis needs at least two nodes");
    let mut buf = w.to_vec();
    buf[0] *= 2.0;
    buf[n - 1] *= 2.0;
    DctPlanner::new().plan_dct1(n).process_dct1(&mut buf);
    buf
}

/// `g_j = Σ_k b_k cos(kπ j/(n-1))` for `j = 0..n`.
///
/// This is the same sum as [`cosine_analysis`] with the roles of `j` and
/// `k` swapped, and the transform is symmetric.
pub fn cosine_synthesis(b: &[f64]) -> Vec<f64> {
    cosine_analysis(b)
}

/// Applies [`cosine_analysis`] along both axes.
pub fn cosine_analysis_2d(w: &Array2<f64>) -> Array2<f64> {
    let mut out = w.clone();
    for axis in [Axis(0), Axis(1)] {
        for mut lane in out.lanes_mut(axis) {
            let v = cosine_analysis(&lane.to_vec());
            lane.iter_mut().zip(v).for_each(|(o, x)| *o = x);
        }
    }
    out
}

/// Applies [`cosine_synthesis`] along both axes.
pub fn cosine_synthesis_2d(b: &Array2<f64>) -> Array2<f64> {
    cosine_analysis_2d(b)
}
