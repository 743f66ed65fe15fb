use super::{norm2, ComplexMatrix, ComplexVector, C64, NORM_FLOOR};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LstSqResult {
    pub solution: ComplexVector,
    pub residual_norm: f64,
    /// `residual_norm / max(|rhs|, NORM_FLOOR)`.
    pub relative_residual: f64,
    pub rank: usize,
}

impl LstSqResult {
    pub fn is_consistent(&self, tol: f64) -> bool {
        self.relative_residual < tol
    }
}

/// Householder reflector `I - tau v v^H` acting on rows `start..`.
#[derive(Debug, Clone)]
struct Reflector {
    start: usize,
    v: Vec<C64>,
    tau: f64,
}

impl Reflector {
    /// Builds the reflector mapping `x` onto a multiple of `e_0`; returns it
    /// with the resulting diagonal value.
    fn annihilating(start: usize, x: &[C64]) -> (Self, C64) {
        let norm = norm2(x);
        if norm == 0.0 {
            return (Self { start, v: vec![C64::new(0.0, 0.0); x.len()], tau: 0.0 }, C64::new(0.0, 0.0));
        }
        let phase = if x[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
        let alpha = -phase * norm;
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = if vv == 0.0 { 0.0 } else { 2.0 / vv };
        (Self { start, v, tau }, alpha)
    }

    fn apply(&self, y: &mut [C64]) {
        if self.tau == 0.0 {
            return;
        }
        let seg = &mut y[self.start..self.start + self.v.len()];
        let dot: C64 = self.v.iter().zip(seg.iter()).map(|(v, y)| v.conj() * y).sum();
        let f = dot * self.tau;
        for (y, v) in seg.iter_mut().zip(&self.v) {
            *y -= f * v;
        }
    }
}

/// QR factorization with column pivoting, `M P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    rows: usize,
    cols: usize,
    reflectors: Vec<Reflector>,
    /// Upper-trapezoidal factor, row-major `min(rows, cols) x cols`.
    r: ComplexMatrix,
    /// `perm[j]` is the original column at pivoted position `j`.
    perm: Vec<usize>,
}

impl PivotedQr {
    pub fn factor(m: &ComplexMatrix) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        let steps = rows.min(cols);
        // column-major working copy
        let mut a: Vec<Vec<C64>> = (0..cols).map(|j| m.column(j)).collect();
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut reflectors = Vec::with_capacity(steps);
        let mut r = ComplexMatrix::zeros(steps, cols);

        for k in 0..steps {
            let pivot = (k..cols)
                .max_by(|&p, &q| norm2(&a[p][k..]).total_cmp(&norm2(&a[q][k..])))
                .expect("nonempty column range");
            a.swap(k, pivot);
            perm.swap(k, pivot);

            let (h, alpha) = Reflector::annihilating(k, &a[k][k..]);
            a[k][k] = alpha;
            for x in a[k][k + 1..].iter_mut() {
                *x = C64::new(0.0, 0.0);
            }
            for col in a.iter_mut().skip(k + 1) {
                h.apply(col);
            }
            reflectors.push(h);
        }
        for i in 0..steps {
            for (j, col) in a.iter().enumerate().skip(i) {
                r[(i, j)] = col[i];
            }
        }
        Self { rows, cols, reflectors, r, perm }
    }

    /// Number of pivots with `|R_kk| > rel_tol * |R_00|`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let steps = self.rows.min(self.cols);
        if steps == 0 {
            return 0;
        }
        let lead = self.r[(0, 0)].norm();
        if lead == 0.0 {
            return 0;
        }
        (0..steps).take_while(|&k| self.r[(k, k)].norm() > rel_tol * lead).count()
    }

    pub fn pivot_magnitudes(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|k| self.r[(k, k)].norm()).collect()
    }

    /// Minimum-norm solution of the truncated system at the given rank,
    /// via a complete orthogonal decomposition.
    pub fn solve_min_norm(&self, rhs: &[C64], rank: usize) -> Vec<C64> {
        let n = self.cols;
        let mut c = rhs.to_vec();
        for h in &self.reflectors {
            h.apply(&mut c);
        }
        let mut y = vec![C64::new(0.0, 0.0); n];
        if rank > 0 {
            if rank == n {
                back_substitute(&self.r, &c[..rank], &mut y);
            } else {
                // [R11 R12]^H = Z T, so [R11 R12] = T^H Z^H with T upper triangular
                let t_src = ComplexMatrix::from_fn(n, rank, |i, j| self.r[(j, i)].conj());
                let mut cols: Vec<Vec<C64>> = (0..rank).map(|j| t_src.column(j)).collect();
                let mut zs = Vec::with_capacity(rank);
                let mut t = ComplexMatrix::zeros(rank, rank);
                for k in 0..rank {
                    let (h, alpha) = Reflector::annihilating(k, &cols[k][k..]);
                    cols[k][k] = alpha;
                    for col in cols.iter_mut().skip(k + 1) {
                        h.apply(col);
                    }
                    zs.push(h);
                }
                for i in 0..rank {
                    for (j, col) in cols.iter().enumerate().skip(i) {
                        t[(i, j)] = col[i];
                    }
                }
                // solve T^H w = c (lower triangular)
                let mut w = vec![C64::new(0.0, 0.0); n];
                for i in 0..rank {
                    let mut s = c[i];
                    for j in 0..i {
                        s -= t[(j, i)].conj() * w[j];
                    }
                    w[i] = s / t[(i, i)].conj();
                }
                for h in zs.iter().rev() {
                    h.apply(&mut w);
                }
                y = w;
            }
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (j, &p) in self.perm.iter().enumerate() {
            x[p] = y[j];
        }
        x
    }
}

fn back_substitute(r: &ComplexMatrix, c: &[C64], y: &mut [C64]) {
    let n = c.len();
    for i in (0..n).rev() {
        let mut s = c[i];
        for j in i + 1..n {
            s -= r[(i, j)] * y[j];
        }
        y[i] = s / r[(i, i)];
    }
}

/// Default relative pivot threshold, `eps * max(rows, cols)`.
fn default_rank_tol(m: &ComplexMatrix) -> f64 {
    f64::EPSILON * m.rows().max(m.cols()) as f64
}

/// Minimum-norm least-squares solution of `M w = rhs`.
pub fn least_squares(m: &ComplexMatrix, rhs: &[C64]) -> Result<LstSqResult> {
    least_squares_with_rank_tol(m, rhs, default_rank_tol(m))
}

pub fn least_squares_with_rank_tol(m: &ComplexMatrix, rhs: &[C64], rank_tol: f64) -> Result<LstSqResult> {
    if m.rows() != rhs.len() {
        return Err(Error::Dimension(format!(
            "{}x{} system with right-hand side of length {}",
            m.rows(),
            m.cols(),
            rhs.len()
        )));
    }
    if m.cols() == 0 {
        return Err(Error::Dimension("system has no unknowns".into()));
    }
    let qr = PivotedQr::factor(m);
    let rank = qr.rank(rank_tol);
    let x = qr.solve_min_norm(rhs, rank);
    let fitted = m.mul_vec(&x)?;
    let resid: Vec<C64> = fitted.iter().zip(rhs).map(|(a, b)| a - b).collect();
    let residual_norm = norm2(&resid);
    let relative_residual = residual_norm / norm2(rhs).max(NORM_FLOOR);
    Ok(LstSqResult {
        solution: ComplexVector::new(x).map_err(|_| Error::Conditioning("solution overflowed".into()))?,
        residual_norm,
        relative_residual,
        rank,
    })
}
