//! On-disk problem and report formats.
//!
//! Complex numbers are `[re, im]` pairs. Floats are written in shortest
//! round-trip form, so reading a file back reproduces every value exactly.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::config::Tolerances;
use crate::model::{DiagonalizableOperator, EvolutionOperator, SampleSet, Sampler, Signal};
use crate::numerics::{ComplexMatrix, C64};

pub const SCHEMA_VERSION: &str = "dynspec-1";

pub type Pair = [f64; 2];

pub fn to_pairs(v: &[C64]) -> Vec<Pair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn from_pairs(v: &[Pair]) -> Vec<C64> {
    v.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SamplerSpec {
    Uniform { m: usize },
    Indices { omega: Vec<usize> },
}

impl From<&Sampler> for SamplerSpec {
    fn from(s: &Sampler) -> Self {
        match s {
            Sampler::Uniform { m } => Self::Uniform { m: *m },
            Sampler::IndexSet { omega } => Self::Indices { omega: omega.clone() },
        }
    }
}

impl SamplerSpec {
    pub fn to_sampler(&self) -> Sampler {
        match self {
            Self::Uniform { m } => Sampler::Uniform { m: *m },
            Self::Indices { omega } => Sampler::index_set(omega.iter().copied()),
        }
    }
}

/// A diagonalizable operator `U diag(eigenvalues) U^{-1}`; `u` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorTruth {
    pub u: Vec<Vec<Pair>>,
    pub eigenvalues: Vec<Pair>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorTruth>,
}

impl GroundTruth {
    pub fn from_operator(b: &EvolutionOperator, x: &Signal) -> Self {
        let signal = Some(to_pairs(x.as_slice()));
        match b {
            EvolutionOperator::Circulant { filter } => Self { filter: Some(to_pairs(filter)), signal, operator: None },
            EvolutionOperator::Diagonalizable(op) => {
                let d = op.dim();
                let u = (0..d).map(|i| to_pairs(op.u().row(i))).collect();
                Self {
                    filter: None,
                    signal,
                    operator: Some(OperatorTruth { u, eigenvalues: to_pairs(op.eigenvalues()) }),
                }
            }
            EvolutionOperator::Dense(_) => Self { filter: None, signal, operator: None },
        }
    }

    pub fn evolution_operator(&self, d: usize) -> Result<Option<EvolutionOperator>, CliError> {
        match (&self.filter, &self.operator) {
            (Some(_), Some(_)) => Err(CliError::Usage("ground truth holds both a filter and an operator".into())),
            (Some(f), None) => {
                check_len("ground_truth.filter", f.len(), d)?;
                Ok(Some(EvolutionOperator::circulant(from_pairs(f))?))
            }
            (None, Some(op)) => {
                check_len("ground_truth.operator.u", op.u.len(), d)?;
                let mut flat = Vec::with_capacity(d * d);
                for row in &op.u {
                    check_len("ground_truth.operator.u row", row.len(), d)?;
                    flat.extend(from_pairs(row));
                }
                let u = ComplexMatrix::from_row_major(d, d, flat)?;
                let op = DiagonalizableOperator::new(u, from_pairs(&op.eigenvalues))?;
                Ok(Some(EvolutionOperator::Diagonalizable(op)))
            }
            (None, None) => Ok(None),
        }
    }

    pub fn signal(&self, d: usize) -> Result<Option<Vec<C64>>, CliError> {
        match &self.signal {
            Some(s) => {
                check_len("ground_truth.signal", s.len(), d)?;
                Ok(Some(from_pairs(s)))
            }
            None => Ok(None),
        }
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<(), CliError> {
    if got != want {
        return Err(CliError::Usage(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub schema_version: String,
    pub d: usize,
    pub sampler: SamplerSpec,
    #[serde(rename = "L_total")]
    pub l_total: usize,
    pub samples: Vec<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

impl ProblemFile {
    pub fn new(samples: &SampleSet, ground_truth: Option<GroundTruth>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            d: samples.dim(),
            sampler: samples.sampler().into(),
            l_total: samples.horizon(),
            samples: samples.levels().iter().map(|l| to_pairs(l)).collect(),
            ground_truth,
        }
    }

    pub fn sample_set(&self) -> Result<SampleSet, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!("unknown schema_version {:?}", self.schema_version)));
        }
        if self.l_total != self.samples.len() {
            return Err(CliError::Usage(format!("L_total = {} but {} levels present", self.l_total, self.samples.len())));
        }
        let levels = self.samples.iter().map(|l| from_pairs(l)).collect();
        Ok(SampleSet::new(self.d, self.sampler.to_sampler(), levels)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceReport {
    pub degree: usize,
    pub roots: Vec<Pair>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub tolerances: Tolerances,
    pub failures: BTreeMap<usize, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: String,
    pub mode: String,
    pub recovered_spectrum: Vec<Pair>,
    pub per_source: BTreeMap<usize, SourceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered_filter: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered_filter_spectrum: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered_signal: Option<Vec<Pair>>,
    /// Frequencies found by Prony's method, ascending.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    /// `x_hat` on `support`, same order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_values: Option<Vec<Pair>>,
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<Verification>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed {}: {e}", path.display())))
}

/// Writes to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
