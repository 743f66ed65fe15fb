use super::files::{from_pairs, read_json, write_json, GroundTruth, Pair, ProblemFile};
use super::{CliError, FilterKind, SimulateArgs, SimulateMode};
use crate::model::{
    make_diffusion_filter, random_diagonalizable, random_filter, random_signal, simulate, DiagonalizableSpec,
    EvolutionOperator, Sampler,
};
use crate::prony::{prony_reconstruct, random_sparse_spectrum};

/// Operators and states are drawn from independent streams of one seed.
const OPERATOR_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;
const FILTER_GAP: f64 = 1e-3;

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let d = args.d;
    if d == 0 {
        return Err(CliError::Usage("--d must be positive".into()));
    }
    let sampler = match (&args.m, &args.omega) {
        (Some(m), _) => Sampler::Uniform { m: *m },
        (None, Some(omega)) => Sampler::index_set(omega.iter().copied()),
        (None, None) => return Err(CliError::Usage("one of --m or --omega is required".into())),
    };
    sampler.validate(d)?;
    if args.sparsity.is_some() && args.mode != SimulateMode::Shift {
        return Err(CliError::Usage("--sparsity applies to shift mode only".into()));
    }
    if args.filter_file.is_some() != (args.filter == FilterKind::File) {
        return Err(CliError::Usage("--filter-file goes together with --filter file".into()));
    }

    let op_seed = args.seed ^ OPERATOR_STREAM;
    let b = match args.mode {
        SimulateMode::Circulant => match args.filter {
            FilterKind::Diffusion => make_diffusion_filter(d, args.decay)?,
            FilterKind::Random => random_filter(d, FILTER_GAP, op_seed)?,
            FilterKind::File => {
                let path = args.filter_file.as_ref().expect("checked above");
                let pairs: Vec<Pair> = read_json(path)?;
                if pairs.len() != d {
                    return Err(CliError::Usage(format!("filter file has {} entries, expected {d}", pairs.len())));
                }
                EvolutionOperator::circulant(from_pairs(&pairs))?
            }
        },
        SimulateMode::Diagonalizable => {
            EvolutionOperator::Diagonalizable(random_diagonalizable(&DiagonalizableSpec::new(d), op_seed)?)
        }
        SimulateMode::Shift => EvolutionOperator::shift(d)?,
    };
    let x = match args.sparsity {
        Some(s) => prony_reconstruct(&random_sparse_spectrum(d, s, args.seed)?),
        None => random_signal(d, args.seed)?,
    };
    let levels = args.levels.unwrap_or(match (&sampler, args.sparsity) {
        (_, Some(s)) => 2 * s,
        (Sampler::Uniform { m }, None) if args.mode == SimulateMode::Circulant => 2 * m,
        _ => 2 * d,
    });
    if levels == 0 {
        return Err(CliError::Usage("--levels must be positive".into()));
    }
    let samples = simulate(&b, &x, &sampler, levels)?;
    let truth = args.include_truth.then(|| GroundTruth::from_operator(&b, &x));
    write_json(&args.out, &ProblemFile::new(&samples, truth))
}
