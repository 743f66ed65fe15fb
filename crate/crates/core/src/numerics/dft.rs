use std::f64::consts::PI;

use super::{ComplexVector, C64};
use crate::error::{Error, Result};

/// Discrete Fourier transform of any length.
///
/// Forward uses the kernel `exp(-2 pi i k l / d)` without normalization; the
/// inverse uses `exp(+2 pi i k l / d)` and divides by `d`.
pub fn dft(v: &ComplexVector, inverse: bool) -> ComplexVector {
    ComplexVector::new(dft_slice(v, inverse).expect("vector is nonempty"))
        .expect("transform of finite data is finite")
}

pub fn dft_slice(v: &[C64], inverse: bool) -> Result<Vec<C64>> {
    let d = v.len();
    if d == 0 {
        return Err(Error::Dimension("DFT of an empty vector".into()));
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    // exact index reduction keeps every twiddle one table lookup away
    let twiddles: Vec<C64> = (0..d)
        .map(|t| C64::from_polar(1.0, sign * 2.0 * PI * t as f64 / d as f64))
        .collect();
    let mut out: Vec<C64> = (0..d)
        .map(|k| {
            v.iter()
                .enumerate()
                .map(|(l, &x)| x * twiddles[(k * l) % d])
                .sum()
        })
        .collect();
    if inverse {
        let s = 1.0 / d as f64;
        out.iter_mut().for_each(|z| *z *= s);
    }
    Ok(out)
}
