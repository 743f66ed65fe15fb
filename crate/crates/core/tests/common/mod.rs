//! Oracles and fixtures shared by the integration tests. The transforms
//! here are written out from their definitions, independently of the
//! library's own routines.
#![allow(dead_code)]

use std::f64::consts::PI;

use dynspec::numerics::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `sum_l x(l) e^{-2 pi i k l / d}`, evaluated with plain trigonometry.
pub fn naive_dft(x: &[C64]) -> Vec<C64> {
    let d = x.len();
    (0..d)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(l, v)| v * C64::from_polar(1.0, -2.0 * PI * ((k * l) % d) as f64 / d as f64))
                .sum()
        })
        .collect()
}

pub fn naive_idft(x_hat: &[C64]) -> Vec<C64> {
    let d = x_hat.len();
    (0..d)
        .map(|l| {
            x_hat
                .iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, 2.0 * PI * ((k * l) % d) as f64 / d as f64))
                .sum::<C64>()
                / d as f64
        })
        .collect()
}

/// Two-sided nearest-neighbour distance between finite point sets.
pub fn set_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let one = |p: &[C64], q: &[C64]| {
        p.iter()
            .map(|z| q.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Distinct values of `v` up to `tol`.
pub fn distinct(v: &[C64], tol: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    for z in v {
        if out.iter().all(|w| (w - z).norm() > tol) {
            out.push(*z);
        }
    }
    out
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn complex_gaussian(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(rand_distr::StandardNormal);
            let im: f64 = rng.sample(rand_distr::StandardNormal);
            C64::new(re, im)
        })
        .collect()
}

/// Random index set of the given size.
pub fn random_omega(rng: &mut impl Rng, d: usize, size: usize) -> Vec<usize> {
    let mut omega = rand::seq::index::sample(rng, d, size).into_vec();
    omega.sort_unstable();
    omega
}

/// Signal whose DFT is `values` on `support` and zero elsewhere.
pub fn sparse_signal(d: usize, support: &[usize], values: &[C64]) -> Vec<C64> {
    let mut x_hat = vec![C64::new(0.0, 0.0); d];
    for (&n, &v) in support.iter().zip(values) {
        x_hat[n] = v;
    }
    naive_idft(&x_hat)
}

/// `x(j), ..., x(j + len - 1)` with cyclic indices.
pub fn window(x: &[C64], j: usize, len: usize) -> Vec<C64> {
    (0..len).map(|l| x[(j + l) % x.len()]).collect()
}

/// Diffusion decay for which `a_hat` ends near `1e-3` at the highest frequency.
pub fn diffusion_decay(d: usize) -> f64 {
    let half = ((d - 1) / 2) as f64;
    1000f64.ln() / (half * half)
}
