//! Special functions used throughout the crate.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

const RESCALE: f64 = 1e100;

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Normalized Hermite functions `φ_0(ξ), ..., φ_{n_max}(ξ)`, where
/// `φ_n(ξ) = (2^n n! √π)^(-1/2) H_n(ξ) e^(-ξ²/2)`.
///
/// Uses the orthonormal three-term recurrence with rescaling, so it neither
/// overflows for large orders nor underflows early for large `|ξ|`.
pub fn hermite_functions(n_max: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.5 * xi * xi;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    out.push(cur * log_scale.exp());
    for k in 0..n_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}

pub fn hermite_function(n: usize, xi: f64) -> f64 {
    hermite_functions(n, xi)[n]
}

/// Visits `e^(-x/2) L_k(x)` for `k = 0..=n_max` (Laguerre polynomials via the
/// three-term recurrence). The weighted values are bounded by 1 for `x ≥ 0`.
pub fn for_each_weighted_laguerre(n_max: usize, x: f64, mut f: impl FnMut(usize, f64)) {
    let mut log_scale = -0.5 * x;
    let mut prev = 0.0;
    let mut cur = 1.0;
    f(0, log_scale.exp());
    for k in 0..n_max {
        let kf = k as f64;
        let next = if k == 0 { 1.0 - x } else { ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0) };
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
        f(k + 1, cur * log_scale.exp());
    }
}

/// `e^(-x/2) L_n(x)`.
pub fn weighted_laguerre(n: usize, x: f64) -> f64 {
    let mut v = 0.0;
    for_each_weighted_laguerre(n, x, |k, l| {
        if k == n {
            v = l;
        }
    });
    v
}
