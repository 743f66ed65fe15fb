//! Prony's method: the shift operator sampled at one coordinate.
//!
//! If `x_hat` is supported on `s` frequencies, the consecutive entries
//! `x(j), ..., x(j + 2s - 1)` satisfy a degree-`s` recurrence whose roots
//! are `e^{2 pi i n / d}` for `n` in the support.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::annihilator::scalar_system;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::model::{complex_normal, Signal};
use crate::numerics::{dft_slice, least_squares, max_abs, ComplexMatrix, C64};
use crate::spectral::recover_spectrum_at_index;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    d: usize,
    values: BTreeMap<usize, C64>,
}

impl SparseSpectrum {
    pub fn new(d: usize, values: BTreeMap<usize, C64>) -> Result<Self> {
        if let Some(&n) = values.keys().find(|&&n| n >= d) {
            return Err(Error::InvalidInput(format!("frequency {n} outside 0..{d}")));
        }
        if 2 * values.len() >= d && !values.is_empty() {
            return Err(Error::InvalidInput(format!("sparsity {} not below d/2 = {}", values.len(), d as f64 / 2.0)));
        }
        if values.values().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { d, values })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn support(&self) -> Vec<usize> {
        self.values.keys().copied().collect()
    }

    pub fn values(&self) -> &BTreeMap<usize, C64> {
        &self.values
    }

    pub fn sparsity(&self) -> usize {
        self.values.len()
    }
}

fn unit_root(n: usize, d: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * ((n % d) as f64) / d as f64)
}

/// Maps each root to the nearest `d`-th root of unity.
pub fn snap_to_frequencies(roots: &[C64], d: usize, root_tol: f64) -> Result<Vec<usize>> {
    let mut support = Vec::with_capacity(roots.len());
    for z in roots {
        let turns = z.arg() / (2.0 * PI) * d as f64;
        let n = (turns.round() as i64).rem_euclid(d as i64) as usize;
        let distance = (z - unit_root(n, d)).norm();
        if distance > root_tol {
            return Err(Error::NotShiftSpectrum { distance });
        }
        support.push(n);
    }
    support.sort_unstable();
    support.dedup();
    Ok(support)
}

fn check_sparsity(d: usize, s: usize) -> Result<()> {
    if s == 0 || 2 * s >= d {
        return Err(Error::InvalidInput(format!("sparsity {s} must satisfy 0 < s < d/2 = {}", d as f64 / 2.0)));
    }
    Ok(())
}

/// Support of `x_hat` from `2s` consecutive entries. A smaller support is
/// returned when the data are sparser than declared.
pub fn prony_support(c: &[C64], d: usize, s: usize, tol: &Tolerances) -> Result<Vec<usize>> {
    check_sparsity(d, s)?;
    if c.len() < 2 * s {
        return Err(Error::InsufficientData { needed: 2 * s, available: c.len() });
    }
    let rec = recover_spectrum_at_index(&c[..2 * s], s, tol)?;
    snap_to_frequencies(&rec.roots, d, tol.root)
}

/// Coefficients on a known support, fitted to all supplied entries.
pub fn prony_values(c: &[C64], j: usize, support: &[usize], d: usize, tol: &Tolerances) -> Result<SparseSpectrum> {
    if support.len() > c.len() {
        return Err(Error::InsufficientData { needed: support.len(), available: c.len() });
    }
    if support.is_empty() {
        let residual = max_abs(c);
        if residual > tol.zero * d as f64 {
            return Err(Error::SupportMismatch { residual });
        }
        return SparseSpectrum::new(d, BTreeMap::new());
    }
    let inv_d = 1.0 / d as f64;
    let v = ComplexMatrix::from_fn(c.len(), support.len(), |l, k| unit_root(support[k] * ((j + l) % d), d) * inv_d);
    let fit = least_squares(&v, c)?;
    if !fit.is_consistent(tol.solve) {
        return Err(Error::SupportMismatch { residual: fit.relative_residual });
    }
    SparseSpectrum::new(d, support.iter().copied().zip(fit.solution.iter().copied()).collect())
}

pub fn prony_reconstruct(spec: &SparseSpectrum) -> Signal {
    let mut x_hat = vec![C64::new(0.0, 0.0); spec.d];
    for (&n, &v) in &spec.values {
        x_hat[n] = v;
    }
    Signal::new(dft_slice(&x_hat, true).expect("d > 0")).expect("finite spectrum")
}

/// Support, values and the full signal from `2s` entries starting at `j`.
pub fn prony_recover(c: &[C64], j: usize, d: usize, s: usize, tol: &Tolerances) -> Result<(SparseSpectrum, Signal)> {
    let support = prony_support(c, d, s, tol)?;
    let spec = prony_values(&c[..2 * s], j, &support, d, tol)?;
    let x = prony_reconstruct(&spec);
    Ok((spec, x))
}

/// Random support of size `s` with complex Gaussian values of modulus
/// at least 0.1.
pub fn random_sparse_spectrum(d: usize, s: usize, seed: u64) -> Result<SparseSpectrum> {
    check_sparsity(d, s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = BTreeMap::new();
    for n in sample(&mut rng, d, s) {
        let v = loop {
            let v = complex_normal(&mut rng);
            if v.norm() >= 0.1 {
                break v;
            }
        };
        values.insert(n, v);
    }
    SparseSpectrum::new(d, values)
}

/// The Hankel system solved for a degree-`s` recurrence.
pub fn prony_system_matrix(c: &[C64], s: usize) -> Result<ComplexMatrix> {
    if c.len() < s + 1 {
        return Err(Error::InsufficientData { needed: s + 1, available: c.len() });
    }
    Ok(scalar_system(c, s, c.len() - s)?.0)
}
