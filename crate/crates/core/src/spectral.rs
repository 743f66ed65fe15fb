//! Spectrum recovery for diagonalizable operators from samples at a set of
//! indices, and the linear recurrence that extends short sample records.

use std::collections::BTreeMap;

use crate::annihilator::{scalar_annihilator_with, SearchOptions};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::model::SampleSet;
use crate::numerics::{least_squares, least_squares_with_rank_tol, max_abs, norm2, poly_roots, ComplexMatrix, C64, NORM_FLOOR};

/// Annihilator degree, roots and residual found for one source (a sampled
/// index or a residue class).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRecovery {
    pub degree: usize,
    pub roots: Vec<C64>,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub per_source: BTreeMap<usize, SourceRecovery>,
    /// Sources whose recovery failed, with the reason.
    pub failures: BTreeMap<usize, Error>,
    /// Union of all per-source roots with near-duplicates merged.
    pub merged: Vec<C64>,
    pub dedup_tol: f64,
}

impl SpectrumEstimate {
    /// Merges roots greedily: a root joins the merged list unless one
    /// already there lies within `rel_dedup * max|root|`.
    pub fn assemble(per_source: BTreeMap<usize, SourceRecovery>, failures: BTreeMap<usize, Error>, rel_dedup: f64) -> Self {
        let scale = per_source
            .values()
            .map(|s| max_abs(&s.roots))
            .fold(0.0, f64::max);
        let dedup_tol = rel_dedup * if scale > 0.0 { scale } else { 1.0 };
        let mut merged: Vec<C64> = Vec::new();
        for z in per_source.values().flat_map(|s| s.roots.iter()) {
            if merged.iter().all(|m| (m - z).norm() > dedup_tol) {
                merged.push(*z);
            }
        }
        Self { per_source, failures, merged, dedup_tol }
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.per_source.values().map(|s| s.degree).collect()
    }
}

/// Safe per-index degree bound: the minimal polynomial degree never exceeds `d`.
pub fn default_r_max(d: usize) -> usize {
    d
}

/// Roots of the annihilator of `(B^l x)(i)`, `l = 0..2 r_max`.
pub fn recover_spectrum_at_index(c: &[C64], r_max: usize, tol: &Tolerances) -> Result<SourceRecovery> {
    recover_with(c, &SearchOptions::new(r_max), tol)
}

fn recover_with(c: &[C64], opts: &SearchOptions, tol: &Tolerances) -> Result<SourceRecovery> {
    if c.len() < 2 * opts.r_max {
        return Err(Error::InsufficientData { needed: 2 * opts.r_max, available: c.len() });
    }
    let window = &c[..2 * opts.r_max];
    let p = scalar_annihilator_with(window, opts, tol)?;
    let roots = refine_roots(window, &poly_roots(&p.poly));
    Ok(SourceRecovery { degree: p.degree(), roots, relative_residual: p.relative_residual })
}

/// Per-term weights `1 / |c_l|`: the sequence decays or grows
/// geometrically, and its rounding errors are relative to each term.
fn term_weights(c: &[C64]) -> Vec<f64> {
    let floor = max_abs(c) * f64::EPSILON;
    c.iter().map(|z| 1.0 / z.norm().max(floor).max(NORM_FLOOR)).collect()
}

/// Weighted best fit `c_l ~ sum_i w_i z_i^l` for fixed nodes.
fn exponential_fit(c: &[C64], weights: &[f64], z: &[C64]) -> Option<(Vec<C64>, f64)> {
    let v = ComplexMatrix::from_fn(c.len(), z.len(), |l, i| z[i].powi(l as i32) * weights[l]);
    let rhs: Vec<C64> = c.iter().zip(weights).map(|(a, w)| a * w).collect();
    let fit = least_squares(&v, &rhs).ok()?;
    Some((fit.solution.into_vec(), fit.residual_norm))
}

/// Gauss-Newton refinement of simple roots against the sequence itself,
/// `c_l = sum_i w_i z_i^l`, with every term weighted by its own magnitude.
/// Going through polynomial coefficients loses accuracy when roots
/// cluster; fitting the samples term by term recovers it. A step is kept
/// only if it lowers the weighted misfit.
pub fn refine_roots(c: &[C64], roots: &[C64]) -> Vec<C64> {
    let r = roots.len();
    let n = c.len();
    let scale = max_abs(roots);
    if r == 0 || n < 2 * r || scale == 0.0 {
        return roots.to_vec();
    }
    for (i, a) in roots.iter().enumerate() {
        if roots[i + 1..].iter().any(|b| (a - b).norm() <= 1e-8 * scale) {
            return roots.to_vec();
        }
    }
    let weights = term_weights(c);
    let Some((mut w, mut resid)) = exponential_fit(c, &weights, roots) else {
        return roots.to_vec();
    };
    let mut z = roots.to_vec();
    for _ in 0..8 {
        let jac = ComplexMatrix::from_fn(n, 2 * r, |l, k| {
            let entry = if k < r {
                z[k].powi(l as i32)
            } else if l == 0 {
                C64::new(0.0, 0.0)
            } else {
                w[k - r] * l as f64 * z[k - r].powi(l as i32 - 1)
            };
            entry * weights[l]
        });
        let misfit: Vec<C64> = (0..n)
            .map(|l| {
                let model: C64 = (0..r).map(|i| w[i] * z[i].powi(l as i32)).sum();
                (c[l] - model) * weights[l]
            })
            .collect();
        let Ok(step) = least_squares(&jac, &misfit) else { break };
        let cand: Vec<C64> = z.iter().zip(&step.solution[r..]).map(|(a, d)| a + d).collect();
        match exponential_fit(c, &weights, &cand) {
            Some((w_new, res_new)) if res_new < resid => {
                z = cand;
                w = w_new;
                resid = res_new;
            }
            _ => break,
        }
    }
    z
}

/// Observable spectrum from every sampled index; per-index failures are
/// recorded and the call fails only if no index succeeds.
pub fn recover_observable_spectrum(samples: &SampleSet, r_max: impl Fn(usize) -> usize, tol: &Tolerances) -> Result<SpectrumEstimate> {
    let scale = samples.max_abs();
    let mut per_source = BTreeMap::new();
    let mut failures = BTreeMap::new();
    for (pos, &i) in samples.omega().iter().enumerate() {
        let opts = SearchOptions::new(r_max(i)).zero_scale(scale);
        match recover_with(&samples.series(pos), &opts, tol) {
            Ok(rec) => {
                per_source.insert(i, rec);
            }
            Err(e) => {
                failures.insert(i, e);
            }
        }
    }
    if per_source.is_empty() {
        return Err(failures.into_values().next().expect("sampler is nonempty"));
    }
    Ok(SpectrumEstimate::assemble(per_source, failures, tol.dedup))
}

/// Recurrence `(B^{L+k} x)(i) = sum_{j, l} conj(alpha[i][j][l]) (B^{l+k} x)(j)`
/// over the sampled indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationModel {
    pub omega: Vec<usize>,
    pub window: usize,
    /// `alpha[i][j][l]`, positions `i, j` into `omega`.
    pub alpha: Vec<Vec<Vec<C64>>>,
    /// The first `window` sample vectors.
    pub seed_window: Vec<Vec<C64>>,
    /// Relative residual of each per-index fit.
    pub residuals: Vec<f64>,
}

impl ExtrapolationModel {
    /// Sample vector at time `k`.
    pub fn extrapolate(&self, k: usize) -> Vec<C64> {
        if k < self.window {
            return self.seed_window[k].clone();
        }
        self.extrapolate_levels(k + 1).pop().expect("k + 1 levels")
    }

    /// Sample vectors for times `0..n`.
    pub fn extrapolate_levels(&self, n: usize) -> Vec<Vec<C64>> {
        let l_win = self.window;
        let mut levels: Vec<Vec<C64>> = self.seed_window.iter().take(n).cloned().collect();
        while levels.len() < n {
            let k = levels.len() - l_win;
            let next = self
                .alpha
                .iter()
                .map(|per_j| {
                    per_j
                        .iter()
                        .enumerate()
                        .flat_map(|(j, per_l)| per_l.iter().enumerate().map(move |(l, a)| (j, l, a)))
                        .map(|(j, l, a)| a.conj() * levels[l + k][j])
                        .sum()
                })
                .collect();
            levels.push(next);
        }
        levels
    }
}

/// Fits the recurrence coefficients from the square system on the first
/// `(|Omega| + 1) L` time levels. Any further supplied levels must also be
/// reproduced, which is how a too-short window is detected.
pub fn fit_extrapolation(samples: &SampleSet, window: usize, tol: &Tolerances) -> Result<ExtrapolationModel> {
    if window == 0 {
        return Err(Error::InvalidInput("extrapolation window must be positive".into()));
    }
    let n = samples.omega().len();
    let needed = (n + 1) * window;
    if samples.horizon() < needed {
        return Err(Error::InsufficientData { needed, available: samples.horizon() });
    }
    let eqs = n * window;
    // every level past the square block is a check row for the recurrence
    let check_rows = samples.horizon() - window;
    // column (j, l) holds (B^{l+k} x)(omega[j]) in row k
    let full = ComplexMatrix::from_fn(check_rows, eqs, |k, col| samples.level(col % window + k)[col / window]);
    let square = ComplexMatrix::from_fn(eqs, eqs, |k, col| full[(k, col)]);
    let mut alpha = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for (pos, &i) in samples.omega().iter().enumerate() {
        let rhs: Vec<C64> = (0..check_rows).map(|k| samples.level(window + k)[pos]).collect();
        let fit = least_squares_with_rank_tol(&square, &rhs[..eqs], tol.rank)?;
        let fitted = full.mul_vec(&fit.solution)?;
        let resid: Vec<C64> = fitted.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let relative = norm2(&resid) / norm2(&rhs).max(NORM_FLOOR);
        if relative >= tol.solve {
            return Err(Error::SpanConditionViolated { index: i, residual: relative });
        }
        let per_j = (0..n)
            .map(|j| (0..window).map(|l| fit.solution[j * window + l].conj()).collect())
            .collect();
        alpha.push(per_j);
        residuals.push(relative);
    }
    Ok(ExtrapolationModel {
        omega: samples.omega().to_vec(),
        window,
        alpha,
        seed_window: samples.levels()[..window].to_vec(),
        residuals,
    })
}

/// Extends the samples by the fitted recurrence to `2 r_max(i)` levels and
/// recovers the observable spectrum from the extended record.
pub fn recover_spectrum_via_extrapolation(
    samples: &SampleSet,
    window: usize,
    r_max: impl Fn(usize) -> usize,
    tol: &Tolerances,
) -> Result<SpectrumEstimate> {
    let model = fit_extrapolation(samples, window, tol)?;
    let horizon = samples.omega().iter().map(|&i| 2 * r_max(i)).max().unwrap_or(0).max(1);
    let extended = SampleSet::new(samples.dim(), samples.sampler().clone(), model.extrapolate_levels(horizon))?;
    recover_observable_spectrum(&extended, r_max, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{random_signal, simulate, DiagonalizableOperator, EvolutionOperator, Sampler};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn diag123() -> EvolutionOperator {
        EvolutionOperator::Diagonalizable(
            DiagonalizableOperator::new(ComplexMatrix::identity(3), vec![c(1.0), c(2.0), c(3.0)]).unwrap(),
        )
    }

    #[test]
    fn identity_has_spectrum_one() {
        let tol = Tolerances::default();
        let id = EvolutionOperator::dense(ComplexMatrix::identity(4)).unwrap();
        let x = random_signal(4, 2).unwrap();
        let s = simulate(&id, &x, &Sampler::index_set([0, 3]), 8).unwrap();
        let rec = recover_spectrum_at_index(&s.series(0), 4, &tol).unwrap();
        assert_eq!(rec.roots.len(), 1);
        assert!((rec.roots[0] - c(1.0)).norm() < 1e-10);
        let est = recover_observable_spectrum(&s, |_| 4, &tol).unwrap();
        assert_eq!(est.merged.len(), 1);
    }

    #[test]
    fn coordinate_observability() {
        let tol = Tolerances::default();
        let x = random_signal(3, 8).unwrap();
        let s = simulate(&diag123(), &x, &Sampler::index_set([0, 2]), 6).unwrap();
        let est = recover_observable_spectrum(&s, |_| 3, &tol).unwrap();
        let mut got: Vec<f64> = est.merged.iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got.len(), 2);
        assert!((got[0] - 1.0).abs() < 1e-9 && (got[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn short_record_fails_every_source() {
        let tol = Tolerances::default();
        let x = random_signal(3, 8).unwrap();
        let s = simulate(&diag123(), &x, &Sampler::index_set([0, 2]), 4).unwrap();
        assert!(matches!(recover_observable_spectrum(&s, |_| 3, &tol), Err(Error::InsufficientData { .. })));
        // one index with a smaller bound still succeeds
        let est = recover_observable_spectrum(&s, |i| if i == 0 { 2 } else { 3 }, &tol).unwrap();
        assert_eq!(est.per_source.len(), 1);
        assert_eq!(est.failures.len(), 1);
    }

    #[test]
    fn merged_values_are_separated() {
        let mut per = BTreeMap::new();
        per.insert(0, SourceRecovery { degree: 2, roots: vec![c(1.0), c(2.0)], relative_residual: 0.0 });
        per.insert(1, SourceRecovery { degree: 2, roots: vec![c(1.0 + 1e-9), c(3.0)], relative_residual: 0.0 });
        let est = SpectrumEstimate::assemble(per, BTreeMap::new(), 1e-6);
        assert_eq!(est.merged.len(), 3);
        assert!((est.dedup_tol - 3e-6).abs() < 1e-18);
    }

    #[test]
    fn identity_recurrence_is_constant() {
        let tol = Tolerances::default();
        let id = EvolutionOperator::dense(ComplexMatrix::identity(4)).unwrap();
        let x = random_signal(4, 3).unwrap();
        let s = simulate(&id, &x, &Sampler::index_set([1, 2]), 3).unwrap();
        let model = fit_extrapolation(&s, 1, &tol).unwrap();
        assert_eq!(model.extrapolate(0), s.level(0));
        for k in [1, 5, 30] {
            let v = model.extrapolate(k);
            for (a, b) in v.iter().zip(s.level(0)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn short_window_violates_span_condition() {
        let tol = Tolerances::default();
        let x = random_signal(3, 8).unwrap();
        let s = simulate(&diag123(), &x, &Sampler::index_set([0]), 2).unwrap();
        // index 0 sees only eigenvalue 1, so even L = 1 works there
        assert!(fit_extrapolation(&s, 1, &tol).is_ok());
        let b = crate::model::random_filter(5, 1e-3, 2).unwrap();
        let x = random_signal(5, 4).unwrap();
        let s = simulate(&b, &x, &Sampler::index_set([0]), 4).unwrap();
        assert!(fit_extrapolation(&s, 2, &tol).is_ok());
        let s = simulate(&b, &x, &Sampler::index_set([0]), 8).unwrap();
        assert!(matches!(fit_extrapolation(&s, 2, &tol), Err(Error::SpanConditionViolated { index: 0, .. })));
    }

    #[test]
    fn refinement_pulls_roots_back_onto_the_sequence() {
        let exact = [c(0.9), c(0.91), C64::new(0.2, 0.5)];
        let seq: Vec<C64> = (0..6).map(|l| exact.iter().map(|z| z.powi(l)).sum()).collect();
        let rough: Vec<C64> = exact.iter().map(|z| z + C64::new(1e-6, -1e-6)).collect();
        let refined = refine_roots(&seq, &rough);
        for (a, b) in refined.iter().zip(&exact) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
        // coincident guesses are left alone
        let same = [c(0.5), c(0.5)];
        assert_eq!(refine_roots(&seq[..4], &same), same.to_vec());
    }
}
