mod common;

use common::*;
use dynspec::model::{
    random_diagonalizable, random_filter, random_signal, simulate, DiagonalizableSpec, EvolutionOperator, Sampler,
    Signal, SpectralProjectorSet,
};
use dynspec::numerics::{ComplexMatrix, C64};
use proptest::prelude::*;

fn dense_power_samples(b: &ComplexMatrix, x: &[C64], omega: &[usize], levels: usize) -> Vec<Vec<C64>> {
    let mut v = x.to_vec();
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        out.push(omega.iter().map(|&i| v[i]).collect());
        v = b.mul_vec(&v).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn representations_agree_under_apply(seed in any::<u64>(), d in 2usize..16) {
        let circ = random_filter(d, 1e-3, seed).unwrap();
        let diag = EvolutionOperator::Diagonalizable(circ.to_diagonalizable().unwrap());
        let dense = EvolutionOperator::dense(circ.to_dense()).unwrap();
        let x = random_signal(d, seed ^ 5).unwrap();
        let a = circ.apply(&x).unwrap();
        let scale = 1.0 + max_abs(a.as_slice());
        prop_assert!(max_diff(a.as_slice(), diag.apply(&x).unwrap().as_slice()) < 1e-10 * scale);
        prop_assert!(max_diff(a.as_slice(), dense.apply(&x).unwrap().as_slice()) < 1e-10 * scale);

        let op = random_diagonalizable(&DiagonalizableSpec::new(d), seed).unwrap();
        let as_diag = EvolutionOperator::Diagonalizable(op.clone());
        let as_dense = EvolutionOperator::dense(op.to_dense()).unwrap();
        let a = as_diag.apply(&x).unwrap();
        let scale = 1.0 + max_abs(a.as_slice());
        prop_assert!(max_diff(a.as_slice(), as_dense.apply(&x).unwrap().as_slice()) < 1e-10 * scale);
    }

    #[test]
    fn projector_identities(seed in any::<u64>(), d in 2usize..10) {
        let op = random_diagonalizable(&DiagonalizableSpec::new(d), seed).unwrap();
        let set = SpectralProjectorSet::new(&op, 1e-9);
        let n = set.eigenvalues().len();
        let mut sum = ComplexMatrix::zeros(d, d);
        let mut recon = ComplexMatrix::zeros(d, d);
        for j in 0..n {
            let pj = set.operator_projector(&op, j);
            prop_assert!(pj.matmul(&pj).unwrap().sub(&pj).unwrap().max_abs() < 1e-10 * (1.0 + pj.max_abs()));
            for k in 0..n {
                if k != j {
                    let pk = set.operator_projector(&op, k);
                    prop_assert!(pj.matmul(&pk).unwrap().max_abs() < 1e-10 * (1.0 + pj.max_abs() * pk.max_abs()));
                }
            }
            sum = ComplexMatrix::from_fn(d, d, |r, c| sum[(r, c)] + pj[(r, c)]);
            let lam = set.eigenvalues()[j];
            recon = ComplexMatrix::from_fn(d, d, |r, c| recon[(r, c)] + pj[(r, c)] * lam);
        }
        prop_assert!(sum.sub(&ComplexMatrix::identity(d)).unwrap().max_abs() < 1e-10 * op.condition());
        prop_assert!(recon.sub(&op.to_dense()).unwrap().max_abs() < 1e-10 * op.condition());
    }

    #[test]
    fn simulate_matches_dense_powers(seed in any::<u64>(), d in 2usize..=32, size in 1usize..4) {
        let size = size.min(d);
        let omega = random_omega(&mut rng(seed), d, size);
        let x = random_signal(d, seed ^ 7).unwrap();
        let ops = [
            random_filter(d, 1e-3, seed).unwrap(),
            EvolutionOperator::Diagonalizable(random_diagonalizable(&DiagonalizableSpec::new(d), seed).unwrap()),
            EvolutionOperator::shift(d).unwrap(),
        ];
        for b in ops {
            // keep powers bounded so the tolerance is meaningful
            let dense = b.to_dense();
            let norm = dense.frobenius_norm().max(1.0);
            let b = EvolutionOperator::dense(ComplexMatrix::from_fn(d, d, |i, j| dense[(i, j)] / norm)).unwrap();
            let got = simulate(&b, &x, &Sampler::index_set(omega.clone()), 21).unwrap();
            let want = dense_power_samples(&b.to_dense(), x.as_slice(), &omega, 21);
            for (g, w) in got.levels().iter().zip(&want) {
                prop_assert!(max_diff(g, w) < 1e-9);
            }
        }
    }
}

#[test]
fn shift_moves_entries_forward() {
    let x = Signal::new((0..5).map(|k| C64::new(k as f64, 0.0)).collect()).unwrap();
    let y = EvolutionOperator::shift(5).unwrap().apply(&x).unwrap();
    let want: Vec<C64> = (0..5).map(|k| C64::new(((k + 1) % 5) as f64, 0.0)).collect();
    assert_eq!(y.as_slice(), want.as_slice());
}

#[test]
fn generator_scales_with_dimension() {
    for d in 1..=64 {
        for seed in 0..3 {
            let op = random_diagonalizable(&DiagonalizableSpec::new(d), seed).unwrap();
            assert!(op.condition() <= DiagonalizableSpec::new(d).max_condition);
        }
    }
}
