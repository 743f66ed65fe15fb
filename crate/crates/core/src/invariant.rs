//! Convolution operators observed through a uniform subsampler.
//!
//! Subsampling every `m`-th coordinate folds the spectrum onto `J = d / m`
//! residue classes. In the Fourier domain each class sees one scalar
//! sequence `yhat_l(j) = (1/m) sum_i a_hat(j + iJ)^l x_hat(j + iJ)`, whose
//! annihilator has the class's filter values as roots. Classes are labeled
//! by residue `j = 0..J`; class 0 holds frequency 0.

use std::collections::BTreeMap;

use crate::annihilator::{scalar_annihilator_with, scalar_system, SearchOptions};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::model::{EvolutionOperator, SampleSet, Sampler, Signal};
use crate::numerics::{dft_slice, least_squares, max_abs, poly_roots, ComplexMatrix, C64};
use crate::spectral::{refine_roots, SourceRecovery, SpectrumEstimate};

/// Fourier-domain series of one residue class.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueClassData {
    pub class: usize,
    /// `yhat_l(class)` for every available time level.
    pub series: Vec<C64>,
    /// Frequencies `class + i J`, `i = 0..m`.
    pub frequencies: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// Positions inferred from a real, symmetric, decreasing spectrum.
    SymmetricDecreasing,
    /// Positions read off directly (full sampling).
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterEstimate {
    pub a_hat: Vec<C64>,
    pub a: Vec<C64>,
    pub ordering: Ordering,
}

impl FilterEstimate {
    pub fn operator(&self) -> Result<EvolutionOperator> {
        EvolutionOperator::circulant(self.a.clone())
    }
}

fn uniform_factor(samples: &SampleSet) -> Result<usize> {
    match samples.sampler() {
        Sampler::Uniform { m } => Ok(*m),
        Sampler::IndexSet { .. } => Err(Error::Unsupported("invariant recovery needs a uniform sampler".into())),
    }
}

/// Embeds each sample vector at `{0, m, 2m, ...}`, transforms it and keeps
/// one value per residue class.
pub fn fourier_classes(samples: &SampleSet) -> Result<Vec<ResidueClassData>> {
    let m = uniform_factor(samples)?;
    if samples.horizon() < 2 * m {
        return Err(Error::InsufficientData { needed: 2 * m, available: samples.horizon() });
    }
    Ok(fold_levels(samples, m))
}

fn fold_levels(samples: &SampleSet, m: usize) -> Vec<ResidueClassData> {
    let d = samples.dim();
    let classes = d / m;
    let spectra: Vec<Vec<C64>> = samples
        .levels()
        .iter()
        .map(|level| {
            let mut full = vec![C64::new(0.0, 0.0); d];
            for (v, &i) in level.iter().zip(samples.omega()) {
                full[i] = *v;
            }
            dft_slice(&full, false).expect("nonempty")
        })
        .collect();
    (0..classes)
        .map(|j| ResidueClassData {
            class: j,
            series: spectra.iter().map(|s| s[j]).collect(),
            frequencies: (0..m).map(|i| j + i * classes).collect(),
        })
        .collect()
}

/// Materialized Poisson projections and the errors of their identities.
#[derive(Debug, Clone)]
pub struct ProjectionDiagnostics {
    /// `E_j z` for each class `j`.
    pub applied: Vec<Vec<C64>>,
    /// `max |E_j E_k - delta_jk E_k|`.
    pub product_error: f64,
    /// `max |sum_j E_j - F S_m F^{-1}|`.
    pub sum_error: f64,
}

pub fn poisson_projection(d: usize, m: usize, j: usize) -> ComplexMatrix {
    let classes = d / m;
    let w = C64::new(1.0 / m as f64, 0.0);
    ComplexMatrix::from_fn(d, d, |k, l| {
        if k % classes == j && l % classes == j {
            w
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn projection_check(m: usize, d: usize, z: &[C64]) -> Result<ProjectionDiagnostics> {
    Sampler::Uniform { m }.validate(d)?;
    if z.len() != d {
        return Err(Error::Dimension(format!("vector of length {} for d = {d}", z.len())));
    }
    let classes = d / m;
    let e: Vec<ComplexMatrix> = (0..classes).map(|j| poisson_projection(d, m, j)).collect();
    let mut product_error: f64 = 0.0;
    for (j, ej) in e.iter().enumerate() {
        for (k, ek) in e.iter().enumerate() {
            let prod = ej.matmul(ek)?;
            let want = if j == k { ek.clone() } else { ComplexMatrix::zeros(d, d) };
            product_error = product_error.max(prod.sub(&want)?.max_abs());
        }
    }
    let f = ComplexMatrix::from_fn(d, d, |k, l| {
        C64::from_polar(1.0, -2.0 * std::f64::consts::PI * ((k * l) % d) as f64 / d as f64)
    });
    let f_inv = ComplexMatrix::from_fn(d, d, |k, l| f[(k, l)].conj() / d as f64);
    let s = ComplexMatrix::diagonal(
        &(0..d).map(|n| C64::new(if n % m == 0 { 1.0 } else { 0.0 }, 0.0)).collect::<Vec<_>>(),
    );
    let fsf = f.matmul(&s)?.matmul(&f_inv)?;
    let sum = e.iter().fold(ComplexMatrix::zeros(d, d), |acc, ej| {
        ComplexMatrix::from_fn(d, d, |r, c| acc[(r, c)] + ej[(r, c)])
    });
    let sum_error = sum.sub(&fsf)?.max_abs();
    let applied = e.iter().map(|ej| ej.mul_vec(z)).collect::<Result<_>>()?;
    Ok(ProjectionDiagnostics { applied, product_error, sum_error })
}

/// Hankel system of one class for degree `r` over `rows` row blocks.
pub fn class_system(class: &ResidueClassData, r: usize, rows: usize) -> Result<(ComplexMatrix, Vec<C64>)> {
    scalar_system(&class.series, r, rows)
}

/// Per-class annihilators and roots; failures are recorded per class
/// instead of aborting, so partial results can still be reported.
pub fn recover_spectrum_invariant_partial(samples: &SampleSet, tol: &Tolerances) -> Result<SpectrumEstimate> {
    let m = uniform_factor(samples)?;
    let classes = fourier_classes(samples)?;
    let scale = classes.iter().map(|c| max_abs(&c.series[..2 * m])).fold(0.0, f64::max);
    let opts = SearchOptions::new(m).rows(m).zero_scale(scale);
    let mut per_source = BTreeMap::new();
    let mut failures = BTreeMap::new();
    for class in &classes {
        match scalar_annihilator_with(&class.series[..2 * m], &opts, tol) {
            Ok(p) => {
                let rec = SourceRecovery {
                    degree: p.degree(),
                    roots: refine_roots(&class.series[..2 * m], &poly_roots(&p.poly)),
                    relative_residual: p.relative_residual,
                };
                per_source.insert(class.class, rec);
            }
            Err(e) => {
                failures.insert(class.class, e);
            }
        }
    }
    Ok(SpectrumEstimate::assemble(per_source, failures, tol.dedup))
}

/// The set of filter values from `2m` time levels.
pub fn recover_spectrum_invariant(samples: &SampleSet, tol: &Tolerances) -> Result<SpectrumEstimate> {
    let est = recover_spectrum_invariant_partial(samples, tol)?;
    match est.failures.values().next() {
        Some(e) => Err(e.clone()),
        None => Ok(est),
    }
}

/// Assigns the distinct recovered values to frequencies `0..=(d-1)/2` in
/// decreasing order and mirrors them.
pub fn order_symmetric_decreasing(est: &SpectrumEstimate, d: usize, tol: &Tolerances) -> Result<FilterEstimate> {
    if d.is_multiple_of(2) {
        return Err(Error::Unsupported(format!("symmetric ordering needs odd d, got {d}")));
    }
    let scale = max_abs(&est.merged).max(f64::MIN_POSITIVE);
    let max_imag = est.merged.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > tol.real * scale {
        return Err(Error::NotSymmetricReal { max_imag });
    }
    let half = d.div_ceil(2);
    if est.merged.len() != half {
        return Err(Error::AmbiguousOrdering { found: est.merged.len(), expected: half });
    }
    let mut values: Vec<f64> = est.merged.iter().map(|z| z.re).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let mut a_hat = vec![C64::new(0.0, 0.0); d];
    for (k, &v) in values.iter().enumerate() {
        a_hat[k] = C64::new(v, 0.0);
        a_hat[(d - k) % d] = C64::new(v, 0.0);
    }
    let a = dft_slice(&a_hat, true)?;
    Ok(FilterEstimate { a_hat, a, ordering: Ordering::SymmetricDecreasing })
}

/// Inverts the per-class Vandermonde systems for `x_hat` given the filter.
pub fn recover_signal(samples: &SampleSet, filt: &FilterEstimate, tol: &Tolerances) -> Result<Signal> {
    let m = uniform_factor(samples)?;
    let d = samples.dim();
    if filt.a_hat.len() != d {
        return Err(Error::Dimension(format!("filter of length {} for d = {d}", filt.a_hat.len())));
    }
    if samples.horizon() < m {
        return Err(Error::InsufficientData { needed: m, available: samples.horizon() });
    }
    let min_sep = tol.node * max_abs(&filt.a_hat);
    let mut x_hat = vec![C64::new(0.0, 0.0); d];
    for class in fold_levels(samples, m) {
        let nodes: Vec<C64> = class.frequencies.iter().map(|&k| filt.a_hat[k]).collect();
        let mut separation = f64::INFINITY;
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                separation = separation.min((a - b).norm());
            }
        }
        if separation <= min_sep {
            return Err(Error::UnderDetermined { class: class.class, separation });
        }
        let inv_m = 1.0 / m as f64;
        let v = ComplexMatrix::from_fn(m, m, |l, i| nodes[i].powi(l as i32) * inv_m);
        let fit = least_squares(&v, &class.series[..m])?;
        for (&k, &value) in class.frequencies.iter().zip(fit.solution.iter()) {
            x_hat[k] = value;
        }
    }
    Signal::new(dft_slice(&x_hat, true)?)
}

/// Recovered spectrum, and the operator when filter positions are known.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorRecovery {
    pub spectrum: SpectrumEstimate,
    pub filter: Option<FilterEstimate>,
}

impl OperatorRecovery {
    pub fn operator(&self) -> Option<EvolutionOperator> {
        self.filter.as_ref().and_then(|f| f.operator().ok())
    }
}

pub fn recover_operator(samples: &SampleSet, assume_symmetric_decreasing: bool, tol: &Tolerances) -> Result<OperatorRecovery> {
    let m = uniform_factor(samples)?;
    let d = samples.dim();
    if assume_symmetric_decreasing && d.is_multiple_of(2) {
        return Err(Error::Unsupported(format!("symmetric ordering needs odd d, got {d}")));
    }
    let spectrum = recover_spectrum_invariant(samples, tol)?;
    let filter = if m == 1 {
        // class j is frequency j
        let mut a_hat = Vec::with_capacity(d);
        for j in 0..d {
            match spectrum.per_source.get(&j).map(|s| s.roots.as_slice()) {
                Some([root]) => a_hat.push(*root),
                _ => return Err(Error::AmbiguousOrdering { found: spectrum.merged.len(), expected: d }),
            }
        }
        let a = dft_slice(&a_hat, true)?;
        Some(FilterEstimate { a_hat, a, ordering: Ordering::None })
    } else if assume_symmetric_decreasing {
        Some(order_symmetric_decreasing(&spectrum, d, tol)?)
    } else {
        None
    };
    Ok(OperatorRecovery { spectrum, filter })
}
