mod common;

use common::*;
use dynspec::model::{
    observable_spectrum_oracle, random_diagonalizable, random_signal, simulate, DiagonalizableSpec, EvolutionOperator,
    Sampler, SampleSet,
};
use dynspec::spectral::{fit_extrapolation, recover_observable_spectrum, recover_spectrum_at_index};
use dynspec::Tolerances;
use proptest::prelude::*;

fn samples(seed: u64, d: usize, omega: &[usize], levels: usize) -> (dynspec::model::DiagonalizableOperator, SampleSet) {
    let op = random_diagonalizable(&DiagonalizableSpec::new(d), seed).unwrap();
    let b = EvolutionOperator::Diagonalizable(op.clone());
    let x = random_signal(d, seed ^ 0xabc).unwrap();
    let s = simulate(&b, &x, &Sampler::index_set(omega.to_vec()), levels).unwrap();
    (op, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn per_index_roots_lie_in_the_spectrum(seed in any::<u64>(), d in 2usize..=8) {
        let tol = Tolerances::default();
        let i = (seed % d as u64) as usize;
        let (op, s) = samples(seed, d, &[i], 2 * d);
        let rec = recover_spectrum_at_index(&s.series(0), d, &tol).unwrap();
        for z in &rec.roots {
            let dist = op.eigenvalues().iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(dist < 1e-8, "root {} at distance {}", z, dist);
        }
        let oracle = observable_spectrum_oracle(&op, &[i], tol.obs, tol.eig).unwrap();
        prop_assert_eq!(rec.degree, oracle.len());
    }

    #[test]
    fn merged_size_matches_observable_spectrum(seed in any::<u64>(), d in 2usize..=8, size in 1usize..=3) {
        let tol = Tolerances::default();
        let omega = random_omega(&mut rng(seed ^ 9), d, size.min(d));
        let (op, s) = samples(seed, d, &omega, 2 * d);
        let est = recover_observable_spectrum(&s, |_| d, &tol).unwrap();
        let oracle = observable_spectrum_oracle(&op, &omega, tol.obs, tol.eig).unwrap();
        prop_assert_eq!(est.merged.len(), oracle.len());
        prop_assert!(set_distance(&est.merged, &oracle) < 1e-8);
        for (pos, &i) in omega.iter().enumerate() {
            let single = observable_spectrum_oracle(&op, &[i], tol.obs, tol.eig).unwrap();
            prop_assert_eq!(est.per_source[&i].degree, single.len(), "index {} (position {})", i, pos);
        }
    }

    #[test]
    fn larger_index_sets_see_more(seed in any::<u64>(), d in 3usize..=8) {
        let tol = Tolerances::default();
        let big = random_omega(&mut rng(seed ^ 7), d, 3);
        let small = vec![big[0], big[2]];
        let (_, s_big) = samples(seed, d, &big, 2 * d);
        let s_small = SampleSet::new(
            d,
            Sampler::index_set(small),
            s_big.levels().iter().map(|v| vec![v[0], v[2]]).collect(),
        ).unwrap();
        let e_big = recover_observable_spectrum(&s_big, |_| d, &tol).unwrap();
        let e_small = recover_observable_spectrum(&s_small, |_| d, &tol).unwrap();
        for z in &e_small.merged {
            let dist = e_big.merged.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(dist <= e_big.dedup_tol.max(1e-8), "{} missing from the larger set", z);
        }
    }

    #[test]
    fn extrapolation_tracks_direct_simulation(seed in any::<u64>(), d in 2usize..=7, size in 1usize..=2) {
        let tol = Tolerances::default();
        let omega = random_omega(&mut rng(seed ^ 11), d, size.min(d));
        let (_, direct) = samples(seed, d, &omega, 4 * d + 1);
        let window = d;
        let train = direct.truncated((omega.len() + 2) * window).unwrap();
        let model = fit_extrapolation(&train, window, &tol).unwrap();
        let scale = direct.max_abs();
        for (k, (got, want)) in model.extrapolate_levels(4 * d + 1).iter().zip(direct.levels()).enumerate() {
            let err = max_diff(got, want);
            prop_assert!(err < 1e-7 * scale, "level {}: {}", k, err);
        }
    }
}
