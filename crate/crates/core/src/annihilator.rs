//! Minimal annihilating polynomials of sampled Krylov sequences.
//!
//! For samples `y_l = A B^l x` the annihilator is the monic `p` of least
//! degree `r` with `y_{k+r} + sum_l a_l y_{k+l} = 0` for every row block
//! `k`. It is found by trying `r = 0, 1, ...` and keeping the first degree
//! whose stacked system is consistent.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::model::{group_eigenvalues, observable_spectrum_oracle, EvolutionOperator};
use crate::numerics::{
    eigenvalues, least_squares_with_rank_tol, max_abs, ComplexMatrix, MonicPolynomial, C64,
};

#[derive(Debug, Clone, PartialEq)]
pub struct AnnihilatorPolynomial {
    pub poly: MonicPolynomial,
    /// Relative residual of the system that produced `poly`.
    pub relative_residual: f64,
    /// Number of scalar equations in that system.
    pub rows_used: usize,
}

impl AnnihilatorPolynomial {
    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    fn exact(poly: MonicPolynomial) -> Self {
        Self { poly, relative_residual: 0.0, rows_used: 0 }
    }
}

/// Terms `y_0, y_1, ...` of a sampled Krylov sequence, all of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSequence {
    terms: Vec<Vec<C64>>,
}

impl SampleSequence {
    pub fn new(terms: Vec<Vec<C64>>) -> Result<Self> {
        if terms.len() < 2 || !terms.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "sample sequence needs an even number (>= 2) of terms, got {}",
                terms.len()
            )));
        }
        let width = terms[0].len();
        if width == 0 || terms.iter().any(|t| t.len() != width) {
            return Err(Error::Dimension("sample sequence terms differ in length".into()));
        }
        Ok(Self { terms })
    }

    pub fn scalar(c: &[C64]) -> Result<Self> {
        Self::new(c.iter().map(|&z| vec![z]).collect())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Vec<C64>] {
        &self.terms
    }
}

/// Knobs of the degree search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub r_max: usize,
    /// Row blocks `k = 0..rows`; defaults to `len - r_max`.
    pub rows: Option<usize>,
    /// Magnitude the zero test is relative to.
    pub zero_scale: f64,
}

impl SearchOptions {
    pub fn new(r_max: usize) -> Self {
        Self { r_max, rows: None, zero_scale: 1.0 }
    }

    pub fn rows(mut self, rows: usize) -> Self {
        self.rows = Some(rows);
        self
    }

    pub fn zero_scale(mut self, scale: f64) -> Self {
        self.zero_scale = scale;
        self
    }
}

/// Stacked system for degree `r`: block `k` reads
/// `sum_l a_l y_{k+l} = -y_{k+r}`, one equation per sampled position.
pub fn annihilator_system(terms: &[Vec<C64>], r: usize, rows: usize) -> Result<(ComplexMatrix, Vec<C64>)> {
    if rows + r > terms.len() {
        return Err(Error::InsufficientData { needed: rows + r, available: terms.len() });
    }
    let width = terms.first().map_or(0, Vec::len);
    let mut data = Vec::with_capacity(rows * width * r);
    let mut rhs = Vec::with_capacity(rows * width);
    for k in 0..rows {
        for (p, target) in terms[k + r].iter().enumerate() {
            data.extend((0..r).map(|l| terms[k + l][p]));
            rhs.push(-target);
        }
    }
    Ok((ComplexMatrix::from_row_major(rows * width, r, data)?, rhs))
}

/// The Hankel matrix and right-hand side of the scalar system.
pub fn scalar_system(c: &[C64], r: usize, rows: usize) -> Result<(ComplexMatrix, Vec<C64>)> {
    let terms: Vec<Vec<C64>> = c.iter().map(|&z| vec![z]).collect();
    annihilator_system(&terms, r, rows)
}

/// Ascending degree search over an arbitrary sequence of equal-length terms.
pub fn annihilate(terms: &[Vec<C64>], opts: &SearchOptions, tol: &Tolerances) -> Result<AnnihilatorPolynomial> {
    let r_max = opts.r_max;
    let rows = match opts.rows {
        Some(rows) => rows,
        None => terms.len().checked_sub(r_max).ok_or(Error::InsufficientData {
            needed: 2 * r_max,
            available: terms.len(),
        })?,
    };
    if rows + r_max > terms.len() {
        return Err(Error::InsufficientData { needed: rows + r_max, available: terms.len() });
    }
    let width = terms.first().map_or(0, Vec::len);
    if width == 0 || terms.iter().any(|t| t.len() != width) {
        return Err(Error::Dimension("sequence terms differ in length".into()));
    }

    let peak = terms.iter().map(|t| max_abs(t)).fold(0.0, f64::max);
    if peak <= tol.zero * opts.zero_scale {
        return Ok(AnnihilatorPolynomial::exact(MonicPolynomial::one()));
    }
    if rows == 0 {
        return Err(Error::InsufficientData { needed: r_max + 1, available: terms.len() });
    }

    let mut best = f64::INFINITY;
    for r in 1..=r_max {
        let (m, rhs) = annihilator_system(terms, r, rows)?;
        let fit = least_squares_with_rank_tol(&m, &rhs, tol.rank)?;
        if fit.is_consistent(tol.solve) {
            return Ok(AnnihilatorPolynomial {
                poly: MonicPolynomial::from_low_coeffs(fit.solution.into_vec()),
                relative_residual: fit.relative_residual,
                rows_used: m.rows(),
            });
        }
        best = best.min(fit.relative_residual);
    }
    Err(Error::NoAnnihilator { r_max, best_residual: best })
}

/// `(A, B, x)`-annihilator from vector samples, with `r_max` row blocks.
pub fn annihilator_from_samples(seq: &SampleSequence, r_max: usize, tol: &Tolerances) -> Result<AnnihilatorPolynomial> {
    if seq.len() < 2 * r_max {
        return Err(Error::InsufficientData { needed: 2 * r_max, available: seq.len() });
    }
    annihilate(seq.terms(), &SearchOptions::new(r_max).rows(r_max), tol)
}

/// Annihilator of a scalar sequence; uses `len - r_max` row blocks.
pub fn scalar_annihilator(c: &[C64], r_max: usize, tol: &Tolerances) -> Result<AnnihilatorPolynomial> {
    scalar_annihilator_with(c, &SearchOptions::new(r_max), tol)
}

pub fn scalar_annihilator_with(c: &[C64], opts: &SearchOptions, tol: &Tolerances) -> Result<AnnihilatorPolynomial> {
    let terms: Vec<Vec<C64>> = c.iter().map(|&z| vec![z]).collect();
    annihilate(&terms, opts, tol)
}

/// Minimal polynomial `prod (z - lambda_j)` over distinct eigenvalues.
pub fn minimal_polynomial_oracle(b: &EvolutionOperator, tol: &Tolerances) -> Result<AnnihilatorPolynomial> {
    let eigs = match b {
        EvolutionOperator::Dense(m) => eigenvalues(m)?,
        _ => b.to_diagonalizable()?.eigenvalues().to_vec(),
    };
    let distinct: Vec<C64> = group_eigenvalues(&eigs, tol.eig).into_iter().map(|(z, _)| z).collect();
    let poly = MonicPolynomial::from_roots(&distinct);
    if let EvolutionOperator::Dense(m) = b {
        // a defective matrix is not annihilated by the product over distinct eigenvalues
        let d = m.rows();
        let mut acc = ComplexMatrix::identity(d);
        let mut scale = 1.0;
        for &z in &distinct {
            let shifted = ComplexMatrix::from_fn(d, d, |i, j| if i == j { m[(i, j)] - z } else { m[(i, j)] });
            scale *= shifted.frobenius_norm().max(1.0);
            acc = acc.matmul(&shifted)?;
        }
        let rel = acc.frobenius_norm() / scale;
        if rel > 1e-8 {
            return Err(Error::Conditioning(format!("operator looks defective (|p(B)| = {rel:.3e})")));
        }
    }
    Ok(AnnihilatorPolynomial::exact(poly))
}

/// `S_Omega`-altered minimal polynomial: product over the observable spectrum.
pub fn altered_minimal_polynomial_oracle(b: &EvolutionOperator, omega: &[usize], tol: &Tolerances) -> Result<AnnihilatorPolynomial> {
    let op = b.to_diagonalizable()?;
    let observable = observable_spectrum_oracle(&op, omega, tol.obs, tol.eig)?;
    Ok(AnnihilatorPolynomial::exact(MonicPolynomial::from_roots(&observable)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{random_signal, simulate, DiagonalizableOperator, Sampler};
    use crate::numerics::poly_roots;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_operator_gives_linear_factor() {
        let tol = Tolerances::default();
        let b = EvolutionOperator::dense(ComplexMatrix::identity(4)).unwrap();
        let x = random_signal(4, 5).unwrap();
        let s = simulate(&b, &x, &Sampler::index_set([0]), 4).unwrap();
        let seq = SampleSequence::new(s.levels().to_vec()).unwrap();
        let p = annihilator_from_samples(&seq, 2, &tol).unwrap();
        assert_eq!(p.degree(), 1);
        assert!((p.poly.low_coeffs()[0] + c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_operator_gives_lambda() {
        let tol = Tolerances::default();
        let b = EvolutionOperator::dense(ComplexMatrix::zeros(3, 3)).unwrap();
        let x = random_signal(3, 1).unwrap();
        let s = simulate(&b, &x, &Sampler::Uniform { m: 1 }, 6).unwrap();
        let seq = SampleSequence::new(s.levels().to_vec()).unwrap();
        let p = annihilator_from_samples(&seq, 3, &tol).unwrap();
        assert_eq!(p.degree(), 1);
        assert!(p.poly.low_coeffs()[0].norm() < 1e-15);
    }

    #[test]
    fn scalar_examples() {
        let tol = Tolerances::default();
        let p = scalar_annihilator(&[c(1.0); 6], 3, &tol).unwrap();
        assert_eq!(p.degree(), 1);
        assert!((p.poly.low_coeffs()[0] + c(1.0)).norm() < 1e-12);

        let two_exp: Vec<C64> = (0..8).map(|l| c(2f64.powi(l) + 3f64.powi(l))).collect();
        let p = scalar_annihilator(&two_exp, 4, &tol).unwrap();
        assert_eq!(p.degree(), 2);
        let mut r = poly_roots(&p.poly);
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0] - c(2.0)).norm() < 1e-9 && (r[1] - c(3.0)).norm() < 1e-9);

        assert_eq!(scalar_annihilator(&[c(0.0); 4], 2, &tol).unwrap().degree(), 0);
    }

    #[test]
    fn too_few_terms() {
        let tol = Tolerances::default();
        let seq = SampleSequence::scalar(&[c(1.0), c(2.0)]).unwrap();
        assert!(matches!(annihilator_from_samples(&seq, 2, &tol), Err(Error::InsufficientData { .. })));
        assert!(SampleSequence::scalar(&[c(1.0), c(2.0), c(3.0)]).is_err());
    }

    #[test]
    fn no_annihilator_reports_best_residual() {
        // four distinct exponentials cannot be annihilated at degree <= 2
        let c4: Vec<C64> = (0..4)
            .map(|l| [0.3, -0.7, 0.9, 0.5].iter().map(|z: &f64| z.powi(l)).sum::<f64>())
            .map(c)
            .chain([c(0.1), c(0.2)])
            .collect();
        match scalar_annihilator(&c4, 2, &Tolerances::default()) {
            Err(Error::NoAnnihilator { r_max: 2, best_residual }) => assert!(best_residual > 1e-8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn minimal_polynomial_examples() {
        let tol = Tolerances::default();
        let id = EvolutionOperator::dense(ComplexMatrix::identity(5)).unwrap();
        let p = minimal_polynomial_oracle(&id, &tol).unwrap();
        assert_eq!(p.degree(), 1);
        assert!((p.poly.low_coeffs()[0] + c(1.0)).norm() < 1e-12);

        let diag = DiagonalizableOperator::new(ComplexMatrix::identity(3), vec![c(1.0), c(1.0), c(2.0)]).unwrap();
        let p = minimal_polynomial_oracle(&EvolutionOperator::Diagonalizable(diag), &tol).unwrap();
        assert_eq!(p.poly, MonicPolynomial::from_roots(&[c(1.0), c(2.0)]));

        let b = crate::model::random_filter(3, 1e-3, 9).unwrap();
        assert_eq!(minimal_polynomial_oracle(&b, &tol).unwrap().degree(), 3);

        let jordan = ComplexMatrix::from_row_major(2, 2, vec![c(1.0), c(1.0), c(0.0), c(1.0)]).unwrap();
        let b = EvolutionOperator::dense(jordan).unwrap();
        assert!(matches!(minimal_polynomial_oracle(&b, &tol), Err(Error::Conditioning(_))));
    }
}
