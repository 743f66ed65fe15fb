use std::collections::BTreeMap;

use super::files::{read_json, to_pairs, write_atomic, write_json, Diagnostics, ProblemFile, ReportFile, SourceReport, SCHEMA_VERSION};
use super::{plot, verify, CliError, RecoverArgs, RecoverMode};
use crate::config::Tolerances;
use crate::error::Error;
use crate::invariant::{recover_operator, recover_signal, recover_spectrum_invariant_partial};
use crate::model::{SampleSet, Sampler};
use crate::prony::{prony_reconstruct, prony_support, prony_values};
use crate::spectral::{
    default_r_max, recover_observable_spectrum, recover_spectrum_at_index, recover_spectrum_via_extrapolation,
    SourceRecovery, SpectrumEstimate,
};

/// A report plus the reason recovery fell short, if it did.
struct Outcome {
    report: ReportFile,
    failure: Option<String>,
}

fn tolerance(name: &str, v: Option<f64>, default: f64) -> Result<f64, CliError> {
    match v {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(CliError::Usage(format!("--{name} must be positive, got {t}"))),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

fn source_report(s: &SourceRecovery) -> SourceReport {
    SourceReport { degree: s.degree, roots: to_pairs(&s.roots), residual: s.relative_residual }
}

fn empty_report(mode: RecoverMode, tol: &Tolerances) -> ReportFile {
    ReportFile {
        schema_version: SCHEMA_VERSION.into(),
        mode: mode.name().into(),
        recovered_spectrum: Vec::new(),
        per_source: BTreeMap::new(),
        recovered_filter: None,
        recovered_filter_spectrum: None,
        recovered_signal: None,
        support: None,
        support_values: None,
        diagnostics: Diagnostics { tolerances: *tol, failures: BTreeMap::new(), notes: Vec::new() },
        verified: None,
    }
}

fn estimate_report(mode: RecoverMode, est: &SpectrumEstimate, tol: &Tolerances) -> Outcome {
    let mut report = empty_report(mode, tol);
    report.recovered_spectrum = to_pairs(&est.merged);
    report.per_source = est.per_source.iter().map(|(&k, s)| (k, source_report(s))).collect();
    report.diagnostics.failures = est.failures.iter().map(|(&k, e)| (k, e.to_string())).collect();
    let failure = est.failures.iter().next().map(|(k, e)| format!("source {k}: {e}"));
    Outcome { report, failure }
}

/// Usage errors abort; recovery errors still produce a (partial) report.
fn failed(mode: RecoverMode, tol: &Tolerances, e: Error) -> Result<Outcome, CliError> {
    match CliError::from(e) {
        CliError::Recovery(msg) => {
            let mut report = empty_report(mode, tol);
            report.diagnostics.notes.push(msg.clone());
            Ok(Outcome { report, failure: Some(msg) })
        }
        other => Err(other),
    }
}

fn invariant(samples: &SampleSet, args: &RecoverArgs, tol: &Tolerances) -> Result<Outcome, CliError> {
    let m = match samples.sampler() {
        Sampler::Uniform { m } => *m,
        Sampler::IndexSet { .. } => return Err(CliError::Usage("invariant mode requires a uniform sampler".into())),
    };
    let est = match recover_spectrum_invariant_partial(samples, tol) {
        Ok(est) => est,
        Err(e) => return failed(RecoverMode::Invariant, tol, e),
    };
    let mut out = estimate_report(RecoverMode::Invariant, &est, tol);
    if out.failure.is_some() || !(m == 1 || args.assume_symmetric) {
        return Ok(out);
    }
    let rec = match recover_operator(samples, args.assume_symmetric, tol) {
        Ok(rec) => rec,
        Err(e) => match CliError::from(e) {
            CliError::Recovery(msg) => {
                out.report.diagnostics.notes.push(msg.clone());
                out.failure = Some(msg);
                return Ok(out);
            }
            other => return Err(other),
        },
    };
    if let Some(filt) = &rec.filter {
        out.report.recovered_filter = Some(to_pairs(&filt.a));
        out.report.recovered_filter_spectrum = Some(to_pairs(&filt.a_hat));
        match recover_signal(samples, filt, tol) {
            Ok(x) => out.report.recovered_signal = Some(to_pairs(x.as_slice())),
            Err(e) => out.report.diagnostics.notes.push(format!("signal not recovered: {e}")),
        }
    }
    Ok(out)
}

fn general(samples: &SampleSet, args: &RecoverArgs, tol: &Tolerances) -> Result<Outcome, CliError> {
    let r_max = args.r_max.unwrap_or_else(|| samples.dim().min(samples.horizon() / 2));
    if r_max == 0 {
        return Err(CliError::Usage("need at least two time levels".into()));
    }
    match recover_observable_spectrum(samples, |_| r_max, tol) {
        Ok(est) => Ok(estimate_report(RecoverMode::General, &est, tol)),
        Err(e) => failed(RecoverMode::General, tol, e),
    }
}

fn extrapolate(samples: &SampleSet, args: &RecoverArgs, tol: &Tolerances) -> Result<Outcome, CliError> {
    let window = args.window.unwrap_or(samples.horizon() / (samples.omega().len() + 1));
    let r_max = args.r_max.unwrap_or(default_r_max(samples.dim()));
    match recover_spectrum_via_extrapolation(samples, window, |_| r_max, tol) {
        Ok(est) => {
            let mut out = estimate_report(RecoverMode::Extrapolate, &est, tol);
            out.report.diagnostics.notes.push(format!("window L = {window}"));
            Ok(out)
        }
        Err(e) => failed(RecoverMode::Extrapolate, tol, e),
    }
}

fn prony(samples: &SampleSet, args: &RecoverArgs, tol: &Tolerances) -> Result<Outcome, CliError> {
    let j = match samples.omega() {
        [j] => *j,
        _ => return Err(CliError::Usage("prony mode requires a single sampled index".into())),
    };
    let d = samples.dim();
    let s = args.sparsity.unwrap_or(samples.horizon() / 2);
    let c = samples.series(0);
    let run = || -> Result<ReportFile, Error> {
        let support = prony_support(&c, d, s, tol)?;
        let spec = prony_values(&c[..2 * s], j, &support, d, tol)?;
        let rec = recover_spectrum_at_index(&c[..2 * s], s, tol)?;
        let mut report = empty_report(RecoverMode::Prony, tol);
        report.recovered_spectrum = to_pairs(&rec.roots);
        report.per_source.insert(j, source_report(&rec));
        if support.len() < s {
            report.diagnostics.notes.push(format!("sparser than declared: {} of {s} frequencies", support.len()));
        }
        report.support_values = Some(to_pairs(&spec.values().values().copied().collect::<Vec<_>>()));
        report.support = Some(support);
        report.recovered_signal = Some(to_pairs(prony_reconstruct(&spec).as_slice()));
        Ok(report)
    };
    match run() {
        Ok(report) => Ok(Outcome { report, failure: None }),
        Err(e) => failed(RecoverMode::Prony, tol, e),
    }
}

pub fn run(args: &RecoverArgs) -> Result<(), CliError> {
    let problem: ProblemFile = read_json(&args.input)?;
    let samples = problem.sample_set()?;
    let defaults = Tolerances::default();
    let tol = Tolerances {
        solve: tolerance("tol", args.tol, defaults.solve)?,
        dedup: tolerance("dedup-tol", args.dedup_tol, defaults.dedup)?,
        root: tolerance("root-tol", args.root_tol, defaults.root)?,
        ..defaults
    };
    let Outcome { mut report, failure } = match args.mode {
        RecoverMode::Invariant => invariant(&samples, args, &tol)?,
        RecoverMode::General => general(&samples, args, &tol)?,
        RecoverMode::Extrapolate => extrapolate(&samples, args, &tol)?,
        RecoverMode::Prony => prony(&samples, args, &tol)?,
    };
    if problem.ground_truth.is_some() {
        report.verified = Some(verify::verify_report(&problem, &report, args.verify_tol)?);
    }
    write_json(&args.out, &report)?;
    if let Some(path) = &args.plot {
        let roots = super::files::from_pairs(&report.recovered_spectrum);
        write_atomic(path, plot::spectrum_svg(&roots).as_bytes())?;
    }
    match failure {
        Some(msg) => Err(CliError::Recovery(msg)),
        None => Ok(()),
    }
}
