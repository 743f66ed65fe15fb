use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every recovery routine.
///
/// None of these values come from the underlying theory, which is stated
/// in exact arithmetic. They are recorded in every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// A linear system is consistent iff its relative residual is below this.
    pub solve: f64,
    /// Pivots of the rank-revealing QR below `rank * |R_00|` count as zero.
    pub rank: f64,
    /// Sequences with max modulus below `zero * scale` are identically zero.
    pub zero: f64,
    /// Relative distance under which two eigenvalues are the same.
    pub eig: f64,
    /// Relative distance under which roots from different sources are merged.
    pub dedup: f64,
    /// Absolute snapping distance to the d-th roots of unity.
    pub root: f64,
    /// Relative separation required between Vandermonde nodes.
    pub node: f64,
    /// Relative threshold for an eigenvalue to count as observable.
    pub obs: f64,
    /// Relative imaginary part dropped when a real spectrum is expected.
    pub real: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solve: 1e-8,
            rank: 1e-15,
            zero: 1e-12,
            eig: 1e-9,
            dedup: 1e-6,
            root: 1e-6,
            node: 1e-8,
            obs: 1e-10,
            real: 1e-8,
        }
    }
}
