use super::eig::{balance, hessenberg_eigenvalues};
use super::{norm2, ComplexMatrix, C64};

/// Monic polynomial `z^r + a_{r-1} z^{r-1} + ... + a_0`, stored by its
/// low-order coefficients `a_0..a_{r-1}`. Degree 0 is the constant 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPolynomial {
    low: Vec<C64>,
}

impl MonicPolynomial {
    pub fn one() -> Self {
        Self { low: Vec::new() }
    }

    pub fn from_low_coeffs(low: Vec<C64>) -> Self {
        Self { low }
    }

    pub fn from_roots(roots: &[C64]) -> Self {
        let mut full = vec![C64::new(1.0, 0.0)];
        for &z in roots {
            full = mul_full(&full, &[-z, C64::new(1.0, 0.0)]);
        }
        full.pop();
        Self { low: full }
    }

    pub fn degree(&self) -> usize {
        self.low.len()
    }

    pub fn low_coeffs(&self) -> &[C64] {
        &self.low
    }

    /// All coefficients from the constant term up, ending with the leading 1.
    pub fn coeffs(&self) -> Vec<C64> {
        let mut full = self.low.clone();
        full.push(C64::new(1.0, 0.0));
        full
    }

    pub fn coeff_norm(&self) -> f64 {
        norm2(&self.coeffs())
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.low.iter().rev().fold(C64::new(1.0, 0.0), |acc, &a| acc * z + a)
    }

    fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(1.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &a in self.low.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut full = mul_full(&self.coeffs(), &other.coeffs());
        full.pop();
        Self { low: full }
    }

    /// `|p(z)| / (1 + |z|^deg)`.
    pub fn backward_error(&self, z: C64) -> f64 {
        self.eval(z).norm() / (1.0 + z.norm().powi(self.degree() as i32))
    }
}

fn mul_full(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots with multiplicity: eigenvalues of the balanced companion matrix,
/// followed by guarded Newton polishing.
pub fn poly_roots(p: &MonicPolynomial) -> Vec<C64> {
    let n = p.degree();
    match n {
        0 => return Vec::new(),
        1 => return vec![-p.low[0]],
        _ => {}
    }
    // subdiagonal of ones, last column -a: upper Hessenberg already
    let mut c = ComplexMatrix::zeros(n, n);
    for i in 1..n {
        c[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for (i, &a) in p.low.iter().enumerate() {
        c[(i, n - 1)] = -a;
    }
    balance(&mut c);
    let mut roots = match hessenberg_eigenvalues(&mut c) {
        Ok(r) => r,
        Err(_) => aberth(p),
    };
    for z in roots.iter_mut() {
        *z = polish(p, *z);
    }
    roots
}

fn polish(p: &MonicPolynomial, mut z: C64) -> C64 {
    let mut pz = p.eval(z).norm();
    for _ in 0..4 {
        let (v, dv) = p.eval_with_derivative(z);
        if dv.norm() == 0.0 || v.norm() == 0.0 {
            break;
        }
        let cand = z - v / dv;
        let pc = p.eval(cand).norm();
        if pc < pz {
            z = cand;
            pz = pc;
        } else {
            break;
        }
    }
    z
}

/// Fallback simultaneous iteration when QR fails to converge.
fn aberth(p: &MonicPolynomial) -> Vec<C64> {
    let n = p.degree();
    let radius = 1.0 + p.low.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius * 0.5, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let (v, dv) = p.eval_with_derivative(z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let repulsion: C64 = (0..n).filter(|&j| j != k).map(|j| C64::new(1.0, 0.0) / (z[k] - z[j])).sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            z[k] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Quotient and remainder of polynomial long division, coefficients from
/// the constant term up.
#[derive(Debug, Clone, PartialEq)]
pub struct Division {
    pub quotient: Vec<C64>,
    pub remainder: Vec<C64>,
    pub remainder_norm: f64,
}

impl Division {
    /// The quotient as a monic polynomial, when the dividend degree is at
    /// least the divisor degree.
    pub fn monic_quotient(&self) -> Option<MonicPolynomial> {
        let (last, low) = self.quotient.split_last()?;
        ((last - C64::new(1.0, 0.0)).norm() < 1e-12).then(|| MonicPolynomial::from_low_coeffs(low.to_vec()))
    }
}

pub fn poly_divide(p: &MonicPolynomial, q: &MonicPolynomial) -> Division {
    let zero = C64::new(0.0, 0.0);
    if q.degree() == 0 {
        return Division { quotient: p.coeffs(), remainder: vec![zero], remainder_norm: 0.0 };
    }
    if p.degree() < q.degree() {
        let rem = p.coeffs();
        let remainder_norm = norm2(&rem);
        return Division { quotient: vec![zero], remainder: rem, remainder_norm };
    }
    let dq = q.degree();
    let qc = q.coeffs();
    let mut rem = p.coeffs();
    let mut quot = vec![zero; p.degree() - dq + 1];
    for k in (0..quot.len()).rev() {
        let lead = rem[k + dq];
        quot[k] = lead;
        for (j, &c) in qc.iter().enumerate() {
            rem[k + j] -= lead * c;
        }
    }
    rem.truncate(dq);
    let remainder_norm = norm2(&rem);
    Division { quotient: quot, remainder: rem, remainder_norm }
}
