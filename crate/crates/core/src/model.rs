//! Signals, evolution operators, samplers and forward simulation, plus the
//! eigendecomposition-based oracles used for verification.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{dft_slice, max_abs, ComplexMatrix, ComplexVector, C64};

/// Condition estimate above which an eigenvector basis is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Initial state `x` of the evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal(ComplexVector);

impl Signal {
    pub fn new(x: Vec<C64>) -> Result<Self> {
        Ok(Self(ComplexVector::new(x)?))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0.into_vec()
    }
}

/// `B = U diag(eigs) U^{-1}` with the inverse cached.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalizableOperator {
    u: ComplexMatrix,
    u_inv: ComplexMatrix,
    eigs: Vec<C64>,
}

impl DiagonalizableOperator {
    pub fn new(u: ComplexMatrix, eigs: Vec<C64>) -> Result<Self> {
        if !u.is_square() || u.rows() != eigs.len() || eigs.is_empty() {
            return Err(Error::Dimension(format!(
                "eigenvector matrix {}x{} with {} eigenvalues",
                u.rows(),
                u.cols(),
                eigs.len()
            )));
        }
        let u_inv = u.inverse()?;
        let cond = u.frobenius_norm() * u_inv.frobenius_norm();
        if !cond.is_finite() || cond > MAX_CONDITION {
            return Err(Error::Conditioning(format!("eigenvector basis has condition estimate {cond:.3e}")));
        }
        Ok(Self { u, u_inv, eigs })
    }

    pub fn dim(&self) -> usize {
        self.eigs.len()
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn u_inv(&self) -> &ComplexMatrix {
        &self.u_inv
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigs
    }

    /// Frobenius-norm condition estimate of `U`.
    pub fn condition(&self) -> f64 {
        self.u.frobenius_norm() * self.u_inv.frobenius_norm()
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut w = self.u_inv.mul_vec(x)?;
        w.iter_mut().zip(&self.eigs).for_each(|(w, l)| *w *= l);
        self.u.mul_vec(&w)
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let ud = ComplexMatrix::from_fn(self.dim(), self.dim(), |i, j| self.u[(i, j)] * self.eigs[j]);
        ud.matmul(&self.u_inv).expect("square factors")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionOperator {
    /// Cyclic convolution `(a * x)(n) = sum_k a(k) x(n - k)`.
    Circulant { filter: ComplexVector },
    Diagonalizable(DiagonalizableOperator),
    Dense(ComplexMatrix),
}

impl EvolutionOperator {
    pub fn circulant(filter: Vec<C64>) -> Result<Self> {
        Ok(Self::Circulant { filter: ComplexVector::new(filter)? })
    }

    /// The cyclic shift `(Bx)(n) = x(n + 1)`.
    pub fn shift(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("shift of dimension 0".into()));
        }
        let mut a = vec![C64::new(0.0, 0.0); d];
        a[(d - 1) % d] = C64::new(1.0, 0.0);
        Self::circulant(a)
    }

    /// Circulant operator whose filter has the given DFT.
    pub fn circulant_from_spectrum(a_hat: &[C64]) -> Result<Self> {
        Self::circulant(dft_slice(a_hat, true)?)
    }

    pub fn dense(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::Dimension("dense operator must be square and nonempty".into()));
        }
        Ok(Self::Dense(m))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Circulant { filter } => filter.len(),
            Self::Diagonalizable(op) => op.dim(),
            Self::Dense(m) => m.rows(),
        }
    }

    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        Signal::new(self.apply_slice(x.as_slice())?)
    }

    pub(crate) fn apply_slice(&self, x: &[C64]) -> Result<Vec<C64>> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::Dimension(format!("operator of dimension {d} applied to vector of length {}", x.len())));
        }
        match self {
            Self::Circulant { filter } => Ok((0..d)
                .map(|n| (0..d).map(|k| filter[k] * x[(n + d - k) % d]).sum())
                .collect()),
            Self::Diagonalizable(op) => op.apply(x),
            Self::Dense(m) => m.mul_vec(x),
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        match self {
            Self::Circulant { filter } => {
                let d = filter.len();
                ComplexMatrix::from_fn(d, d, |n, k| filter[(n + d - k) % d])
            }
            Self::Diagonalizable(op) => op.to_dense(),
            Self::Dense(m) => m.clone(),
        }
    }

    /// DFT of the filter for circulant operators.
    pub fn filter_spectrum(&self) -> Option<Vec<C64>> {
        match self {
            Self::Circulant { filter } => Some(dft_slice(filter, false).expect("nonempty filter")),
            _ => None,
        }
    }

    /// Diagonalizable form; a circulant operator is `F^{-1} diag(a_hat) F`.
    pub fn to_diagonalizable(&self) -> Result<DiagonalizableOperator> {
        match self {
            Self::Circulant { filter } => {
                let d = filter.len();
                let a_hat = dft_slice(filter, false)?;
                let f_inv = ComplexMatrix::from_fn(d, d, |n, k| {
                    C64::from_polar(1.0 / d as f64, 2.0 * PI * ((n * k) % d) as f64 / d as f64)
                });
                DiagonalizableOperator::new(f_inv, a_hat)
            }
            Self::Diagonalizable(op) => Ok(op.clone()),
            Self::Dense(_) => Err(Error::Unsupported("dense operators carry no eigendecomposition".into())),
        }
    }
}

/// Ideal sampler `S_Omega`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sampler {
    IndexSet { omega: Vec<usize> },
    /// Every `m`-th coordinate, `{0, m, 2m, ...}`.
    Uniform { m: usize },
}

impl Sampler {
    pub fn index_set(omega: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = omega.into_iter().collect();
        Self::IndexSet { omega: set.into_iter().collect() }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            Self::IndexSet { omega } => {
                if omega.is_empty() {
                    return Err(Error::InvalidInput("empty sampling set".into()));
                }
                if omega.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidInput("sampling indices must be sorted and distinct".into()));
                }
                if let Some(&bad) = omega.iter().find(|&&i| i >= d) {
                    return Err(Error::InvalidInput(format!("sampling index {bad} out of range for d = {d}")));
                }
                Ok(())
            }
            Self::Uniform { m } => {
                if *m == 0 || !d.is_multiple_of(*m) {
                    return Err(Error::InvalidInput(format!("subsampling factor {m} does not divide d = {d}")));
                }
                Ok(())
            }
        }
    }

    pub fn indices(&self, d: usize) -> Vec<usize> {
        match self {
            Self::IndexSet { omega } => omega.clone(),
            Self::Uniform { m } => (0..d).step_by(*m).collect(),
        }
    }

    pub fn restrict(&self, d: usize, v: &[C64]) -> Vec<C64> {
        self.indices(d).into_iter().map(|i| v[i]).collect()
    }
}

/// Dynamical samples `y_l = S_Omega B^l x` for `l = 0..levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    d: usize,
    sampler: Sampler,
    omega: Vec<usize>,
    levels: Vec<Vec<C64>>,
}

impl SampleSet {
    pub fn new(d: usize, sampler: Sampler, levels: Vec<Vec<C64>>) -> Result<Self> {
        sampler.validate(d)?;
        let omega = sampler.indices(d);
        if levels.is_empty() {
            return Err(Error::InsufficientData { needed: 1, available: 0 });
        }
        if let Some((l, v)) = levels.iter().enumerate().find(|(_, v)| v.len() != omega.len()) {
            return Err(Error::Dimension(format!(
                "time level {l} has {} values, sampler keeps {}",
                v.len(),
                omega.len()
            )));
        }
        if levels.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("samples contain non-finite values".into()));
        }
        Ok(Self { d, sampler, omega, levels })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    pub fn horizon(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<C64>] {
        &self.levels
    }

    pub fn level(&self, l: usize) -> &[C64] {
        &self.levels[l]
    }

    /// Time series `(B^l x)(omega[pos])`.
    pub fn series(&self, pos: usize) -> Vec<C64> {
        self.levels.iter().map(|v| v[pos]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.levels.iter().map(|v| max_abs(v)).fold(0.0, f64::max)
    }

    /// The first `n` time levels.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.horizon() {
            return Err(Error::InsufficientData { needed: n, available: self.horizon() });
        }
        Ok(Self { levels: self.levels[..n].to_vec(), ..self.clone() })
    }
}

/// Forward simulation by repeated application of `B`.
pub fn simulate(b: &EvolutionOperator, x: &Signal, sampler: &Sampler, levels: usize) -> Result<SampleSet> {
    let d = b.dim();
    if x.dim() != d {
        return Err(Error::Dimension(format!("signal of length {} for operator of dimension {d}", x.dim())));
    }
    if levels == 0 {
        return Err(Error::InvalidInput("at least one time level is required".into()));
    }
    sampler.validate(d)?;
    let mut state = x.as_slice().to_vec();
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        if l > 0 {
            state = b.apply_slice(&state)?;
        }
        out.push(sampler.restrict(d, &state));
    }
    SampleSet::new(d, sampler.clone(), out)
}

/// Groups values within `rel_tol * max|value|` of each other; returns one
/// representative per group with the member indices.
pub fn group_eigenvalues(values: &[C64], rel_tol: f64) -> Vec<(C64, Vec<usize>)> {
    let tol = rel_tol * max_abs(values).max(f64::MIN_POSITIVE);
    let mut groups: Vec<(C64, Vec<usize>)> = Vec::new();
    for (k, &z) in values.iter().enumerate() {
        match groups.iter_mut().find(|(rep, _)| (rep - z).norm() <= tol) {
            Some((_, members)) => members.push(k),
            None => groups.push((z, vec![k])),
        }
    }
    groups
}

/// Spectral decomposition `D = sum_j lambda_j P_j` of the diagonal factor.
#[derive(Debug, Clone)]
pub struct SpectralProjectorSet {
    eigenvalues: Vec<C64>,
    projectors: Vec<ComplexMatrix>,
}

impl SpectralProjectorSet {
    pub fn new(op: &DiagonalizableOperator, rel_tol: f64) -> Self {
        let d = op.dim();
        let groups = group_eigenvalues(op.eigenvalues(), rel_tol);
        let (eigenvalues, projectors) = groups
            .into_iter()
            .map(|(lambda, members)| {
                let mut p = ComplexMatrix::zeros(d, d);
                for k in members {
                    p[(k, k)] = C64::new(1.0, 0.0);
                }
                (lambda, p)
            })
            .unzip();
        Self { eigenvalues, projectors }
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    /// `U P_j U^{-1}`, the projector in the original coordinates.
    pub fn operator_projector(&self, op: &DiagonalizableOperator, j: usize) -> ComplexMatrix {
        op.u()
            .matmul(&self.projectors[j])
            .and_then(|m| m.matmul(op.u_inv()))
            .expect("square factors")
    }
}

/// Eigenvalues `lambda_j` with `S_Omega U P_j != 0`.
pub fn observable_spectrum_oracle(op: &DiagonalizableOperator, omega: &[usize], obs_tol: f64, eig_tol: f64) -> Result<Vec<C64>> {
    let d = op.dim();
    if op.condition() > MAX_CONDITION {
        return Err(Error::Conditioning("eigenvector basis is numerically singular".into()));
    }
    if let Some(&bad) = omega.iter().find(|&&i| i >= d) {
        return Err(Error::InvalidInput(format!("index {bad} out of range")));
    }
    let threshold = obs_tol * op.u().frobenius_norm();
    let proj = SpectralProjectorSet::new(op, eig_tol);
    Ok(proj
        .eigenvalues()
        .iter()
        .zip(proj.projectors())
        .filter(|(_, p)| {
            // rows of U P_j restricted to omega
            let norm_sq: f64 = omega
                .iter()
                .flat_map(|&i| (0..d).filter(|&k| p[(k, k)].re != 0.0).map(move |k| (i, k)))
                .map(|(i, k)| op.u()[(i, k)].norm_sqr())
                .sum();
            norm_sq.sqrt() > threshold
        })
        .map(|(&l, _)| l)
        .collect())
}

pub(crate) fn complex_normal(rng: &mut impl Rng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// I.i.d. complex standard normal entries from a seeded generator; draws
/// with a (numerically) zero entry are rejected.
pub fn random_signal(d: usize, seed: u64) -> Result<Signal> {
    if d == 0 {
        return Err(Error::Dimension("signal of dimension 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let x: Vec<C64> = (0..d).map(|_| complex_normal(&mut rng)).collect();
        if x.iter().all(|z| z.norm() > 1e-8) {
            return Signal::new(x);
        }
    }
}

/// Circulant filter with `a_hat(k) = exp(-decay * min(k, d - k)^2)`:
/// real, symmetric and strictly decreasing on `0..=(d - 1)/2`.
pub fn make_diffusion_filter(d: usize, decay: f64) -> Result<EvolutionOperator> {
    if d.is_multiple_of(2) {
        return Err(Error::Unsupported(format!("diffusion filters need odd d, got {d}")));
    }
    if !(decay > 0.0 && decay.is_finite()) {
        return Err(Error::InvalidInput(format!("decay must be positive, got {decay}")));
    }
    let a_hat: Vec<C64> = (0..d)
        .map(|k| {
            let f = k.min(d - k) as f64;
            C64::new((-decay * f * f).exp(), 0.0)
        })
        .collect();
    let half = (d - 1) / 2;
    if a_hat[..=half].windows(2).any(|w| w[1].re >= w[0].re) {
        return Err(Error::InvalidInput(format!("decay {decay} underflows to a non-decreasing spectrum")));
    }
    let mut filter = dft_slice(&a_hat, true)?;
    // the spectrum is real and symmetric, so the filter is real
    filter.iter_mut().for_each(|z| z.im = 0.0);
    EvolutionOperator::circulant(filter)
}

fn min_pairwise_gap(values: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            gap = gap.min((a - b).norm());
        }
    }
    gap
}

/// Random complex Gaussian filter whose DFT, normalized to `max |a_hat| = 1`,
/// has pairwise gaps above `min_gap`.
pub fn random_filter(d: usize, min_gap: f64, seed: u64) -> Result<EvolutionOperator> {
    if d == 0 {
        return Err(Error::Dimension("filter of dimension 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let a: Vec<C64> = (0..d).map(|_| complex_normal(&mut rng)).collect();
        let a_hat = dft_slice(&a, false)?;
        let scale = max_abs(&a_hat);
        if scale > 0.0 && min_pairwise_gap(&a_hat) / scale > min_gap {
            return EvolutionOperator::circulant(a);
        }
    }
    Err(Error::InvalidInput(format!("could not draw a filter with spectral gap {min_gap}")))
}

/// Parameters for [`random_diagonalizable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalizableSpec {
    pub d: usize,
    /// Minimal pairwise distance between eigenvalues.
    pub min_gap: f64,
    /// Eigenvalue moduli are drawn uniformly from this range.
    pub modulus: (f64, f64),
    /// Probability that an off-diagonal entry of `U` is nonzero.
    pub density: f64,
    /// Upper bound on the Frobenius condition estimate of `U`.
    pub max_condition: f64,
}

impl DiagonalizableSpec {
    /// The Frobenius condition of `I` is already `d`, so for large `d` the
    /// fill thins out and the bound grows; both are fixed up to `d = 10`.
    pub fn new(d: usize) -> Self {
        let n = d.max(1) as f64;
        Self { d, min_gap: 0.1, modulus: (0.5, 1.0), density: 0.3f64.min(3.0 / n), max_condition: 100f64.max(10.0 * n) }
    }
}

/// Random `U diag(lambda) U^{-1}` with `U = I + sparse Gaussian`; the zero
/// pattern of `U` makes some eigenvalues unobservable from small index sets.
pub fn random_diagonalizable(spec: &DiagonalizableSpec, seed: u64) -> Result<DiagonalizableOperator> {
    let d = spec.d;
    if d == 0 {
        return Err(Error::Dimension("operator of dimension 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = spec.modulus;
    let mut eigs: Vec<C64> = Vec::with_capacity(d);
    let mut attempts = 0;
    while eigs.len() < d {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::InvalidInput(format!("cannot place {d} eigenvalues with gap {}", spec.min_gap)));
        }
        let r = rng.random_range(lo..=hi);
        let theta = rng.random_range(0.0..2.0 * PI);
        let z = C64::from_polar(r, theta);
        if eigs.iter().all(|e| (e - z).norm() > spec.min_gap) {
            eigs.push(z);
        }
    }
    for _ in 0..1000 {
        let u = ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else if rng.random_bool(spec.density) {
                complex_normal(&mut rng) * 0.7
            } else {
                C64::new(0.0, 0.0)
            }
        });
        if let Ok(op) = DiagonalizableOperator::new(u, eigs.clone()) {
            if op.condition() <= spec.max_condition {
                return Ok(op);
            }
        }
    }
    Err(Error::Conditioning("no eigenvector basis met the condition bound".into()))
}
