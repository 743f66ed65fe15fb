use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues of a general square complex matrix: Householder reduction
/// to Hessenberg form followed by shifted QR.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    let mut h = m.clone();
    balance(&mut h);
    reduce_to_hessenberg(&mut h);
    hessenberg_eigenvalues(&mut h)
}

/// Parlett-Reinsch diagonal balancing with radix 2; preserves Hessenberg
/// structure and the spectrum.
pub(crate) fn balance(a: &mut ComplexMatrix) {
    let n = a.rows();
    const RADIX: f64 = 2.0;
    let sq = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].l1_norm();
                    r += a[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sq;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sq;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

fn reduce_to_hessenberg(a: &mut ComplexMatrix) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let norm = super::norm2(&x);
        if norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { C64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
        let mut v = x;
        v[0] += phase * norm;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vv == 0.0 {
            continue;
        }
        let tau = 2.0 / vv;
        // left: rows k+1.., all columns
        for j in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * a[(k + 1 + t, j)]).sum();
            let f = dot * tau;
            for (t, vt) in v.iter().enumerate() {
                a[(k + 1 + t, j)] -= f * vt;
            }
        }
        // right: columns k+1.., all rows
        for i in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(t, vt)| a[(i, k + 1 + t)] * vt).sum();
            let f = dot * tau;
            for (t, vt) in v.iter().enumerate() {
                a[(i, k + 1 + t)] -= f * vt.conj();
            }
        }
        for i in k + 2..n {
            a[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Rotation `[c s; -conj(s) c]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let norm = na.hypot(nb);
    (na / norm, (a / na) * b.conj() / norm)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR
/// with Wilkinson shifts. The matrix is overwritten.
pub fn hessenberg_eigenvalues(h: &mut ComplexMatrix) -> Result<Vec<C64>> {
    let n = h.rows();
    let mut eig = vec![C64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let eps = f64::EPSILON;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo, lo)].l1_norm() + h[(lo - 1, lo - 1)].l1_norm();
            let sub = h[(lo, lo - 1)].l1_norm();
            if sub <= eps * s || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > MAX_SWEEPS_PER_EIGENVALUE * n {
            return Err(Error::Conditioning("QR iteration did not converge".into()));
        }

        let shift = if iter.is_multiple_of(11) {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = C64::new(0.0, 0.0);
            rots.push((c, s));
        }
        for (off, &(c, s)) in rots.iter().enumerate() {
            let k = lo + off;
            for i in lo..=(k + 1).min(hi) {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(eig)
}

/// Eigenvalue of `[a b; c d]` closer to `d`.
fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(mut v: Vec<C64>) -> Vec<f64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        v.into_iter().map(|z| z.re).collect()
    }

    #[test]
    fn diagonal_and_triangular() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                C64::new((i + 1) as f64, 0.0)
            } else if j > i {
                C64::new(0.5, -0.25)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let e = sorted_re(eigenvalues(&m).unwrap());
        for (got, want) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_has_unit_circle_spectrum() {
        let m = ComplexMatrix::from_row_major(
            2,
            2,
            vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        let mut e = eigenvalues(&m).unwrap();
        e.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((e[0] - C64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((e[1] - C64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn similarity_preserves_spectrum() {
        // S diag(1, -2, 3i) S^{-1} with a fixed well-conditioned S
        let s = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                C64::new(2.0, 0.0)
            } else {
                C64::new(0.3 * (i as f64 + 1.0), 0.2 * j as f64)
            }
        });
        let d = ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), C64::new(-2.0, 0.0), C64::new(0.0, 3.0)]);
        let b = s.matmul(&d).unwrap().matmul(&s.inverse().unwrap()).unwrap();
        let e = eigenvalues(&b).unwrap();
        for want in [C64::new(1.0, 0.0), C64::new(-2.0, 0.0), C64::new(0.0, 3.0)] {
            let best = e.iter().map(|z| (z - want).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-11, "missing {want}");
        }
    }
}
