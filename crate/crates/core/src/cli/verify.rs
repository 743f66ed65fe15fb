use super::files::{from_pairs, read_json, Check, ProblemFile, ReportFile, Verification};
use super::{CliError, RecoverMode, VerifyArgs};
use crate::config::Tolerances;
use crate::model::observable_spectrum_oracle;
use crate::numerics::{dft_slice, max_abs, C64};

pub const DEFAULT_TOL: f64 = 1e-7;

/// Relative support threshold for the Fourier coefficients of a sparse truth.
const SUPPORT_THRESHOLD: f64 = 1e-8;

/// Two-sided nearest-neighbour distance between point sets.
fn set_distance(a: &[C64], b: &[C64]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => one_sided(a, b).max(one_sided(b, a)),
    }
}

fn one_sided(from: &[C64], to: &[C64]) -> f64 {
    from.iter()
        .map(|z| to.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn positive(scale: f64) -> f64 {
    if scale > 0.0 {
        scale
    } else {
        1.0
    }
}

fn check(name: &str, error: f64, tol: f64) -> Check {
    Check { name: name.into(), error, tol, passed: error <= tol }
}

/// Compares a report with the oracle values implied by the ground truth.
pub fn verify_report(problem: &ProblemFile, report: &ReportFile, tol: f64) -> Result<Verification, CliError> {
    let truth = problem
        .ground_truth
        .as_ref()
        .ok_or_else(|| CliError::Usage("problem file carries no ground truth".into()))?;
    let mode = RecoverMode::parse(&report.mode)
        .ok_or_else(|| CliError::Usage(format!("unknown report mode {:?}", report.mode)))?;
    let d = problem.d;
    let signal = truth.signal(d)?;
    let defaults = Tolerances::default();

    let mut checks = vec![check("no_failures", report.diagnostics.failures.len() as f64, 0.0)];
    let oracle: Vec<C64> = if mode == RecoverMode::Prony {
        let x = signal.as_ref().ok_or_else(|| CliError::Usage("prony verification needs the true signal".into()))?;
        let x_hat = dft_slice(x, false)?;
        let scale = positive(max_abs(&x_hat));
        let support: Vec<usize> = (0..d).filter(|&n| x_hat[n].norm() > SUPPORT_THRESHOLD * scale).collect();
        let found = report.support.clone().unwrap_or_default();
        checks.push(check("support", if found == support { 0.0 } else { 1.0 }, 0.0));
        let values = from_pairs(report.support_values.as_deref().unwrap_or_default());
        let value_err = if found == support {
            let want: Vec<C64> = support.iter().map(|&n| x_hat[n]).collect();
            max_diff(&values, &want) / scale
        } else {
            f64::INFINITY
        };
        checks.push(check("support_values", value_err, tol));
        support
            .iter()
            .map(|&n| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 / d as f64))
            .collect()
    } else {
        let op = truth
            .evolution_operator(d)?
            .ok_or_else(|| CliError::Usage("verification needs a true filter or operator".into()))?;
        let diag = op.to_diagonalizable()?;
        let omega = problem.sampler.to_sampler().indices(d);
        observable_spectrum_oracle(&diag, &omega, defaults.obs, defaults.eig)?
    };

    let scale = positive(max_abs(&oracle));
    let recovered = from_pairs(&report.recovered_spectrum);
    checks.push(check("spectrum", set_distance(&recovered, &oracle) / scale, tol));
    checks.push(check("spectrum_size", (recovered.len() as f64 - oracle.len() as f64).abs(), 0.0));
    let roots: Vec<C64> = report.per_source.values().flat_map(|s| from_pairs(&s.roots)).collect();
    let containment = if roots.is_empty() { 0.0 } else { one_sided(&roots, &oracle) };
    checks.push(check("source_roots", containment / scale, tol));

    if let Some(filter) = &truth.filter {
        let a = from_pairs(filter);
        let a_hat = dft_slice(&a, false)?;
        if let Some(got) = &report.recovered_filter_spectrum {
            let err = max_diff(&from_pairs(got), &a_hat) / positive(max_abs(&a_hat));
            checks.push(check("filter_spectrum", err, tol));
        }
        if let Some(got) = &report.recovered_filter {
            checks.push(check("filter", max_diff(&from_pairs(got), &a) / positive(max_abs(&a)), tol));
        }
    }
    if let (Some(x), Some(got)) = (&signal, &report.recovered_signal) {
        checks.push(check("signal", max_diff(&from_pairs(got), x) / positive(max_abs(x)), tol));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Verification { checks, passed })
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", args.tol)));
    }
    let problem: ProblemFile = read_json(&args.input)?;
    problem.sample_set()?;
    let report: ReportFile = read_json(&args.report)?;
    let v = verify_report(&problem, &report, args.tol)?;
    println!("{:<18} {:>12} {:>10}  result", "check", "error", "tol");
    for c in &v.checks {
        println!("{:<18} {:>12.3e} {:>10.1e}  {}", c.name, c.error, c.tol, if c.passed { "PASS" } else { "FAIL" });
    }
    if v.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = v.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_distance_cases() {
        let a = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let b = [C64::new(0.0, 1.0), C64::new(1.0, 1e-3)];
        assert!((set_distance(&a, &b) - 1e-3).abs() < 1e-15);
        assert_eq!(set_distance(&[], &[]), 0.0);
        assert_eq!(set_distance(&a, &[]), f64::INFINITY);
        assert!(set_distance(&a[..1], &a) > 1.0);
    }
}
