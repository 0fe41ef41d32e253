use martingale_core::crossings::{
    band_translation_identity, check_upcrossing_estimate, lower_crossing_path, upcrossings,
    upcrossings_before, upper_crossing_path, Band, PathCrossings,
};
use martingale_core::instances::{random_filtration, random_path, random_space, random_submartingale};
use martingale_core::{CheckedProcess, ExtendedNonNeg, MartingaleClass, Process, Rational, Scalar};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Single pass over `j < N`: wait for a value `≤ a`, then for a value `≥ b`,
/// count, repeat. Only meaningful for `a < b`.
fn scan_upcrossings(path: &[Rational], a: &Rational, b: &Rational, n: usize) -> usize {
    let mut seeking_high = false;
    let mut count = 0;
    for v in &path[..n] {
        if !seeking_high && v <= a {
            seeking_high = true;
        } else if seeking_high && v >= b {
            count += 1;
            seeking_high = false;
        }
    }
    count
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn path_strategy() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(-8i64..=8, 1..=30).prop_map(|v| v.into_iter().map(|x| q(x, 2)).collect())
}

fn band_strategy() -> impl Strategy<Value = (Rational, Rational)> {
    (-8i64..=8, -8i64..=8, 1i64..=4).prop_map(|(a, b, d)| (q(a, d), q(b, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn recursion_agrees_with_scan((path, (a, b)) in (path_strategy(), band_strategy())) {
        prop_assume!(a < b);
        let band = Band::new(a.clone(), b.clone());
        for n in 0..path.len() {
            prop_assert_eq!(
                PathCrossings::new(&band, &path, n).upcrossings(),
                scan_upcrossings(&path, &a, &b, n)
            );
        }
    }

    #[test]
    fn crossing_times_interleave((path, (a, b)) in (path_strategy(), band_strategy())) {
        let band = Band::new(a, b);
        let n_max = path.len() - 1;
        for k in 0..6 {
            let sigma = upper_crossing_path(&band, &path, n_max, k);
            let tau = lower_crossing_path(&band, &path, n_max, k);
            let next = upper_crossing_path(&band, &path, n_max, k + 1);
            prop_assert!(sigma <= tau && tau <= next && next <= n_max);
        }
    }

    #[test]
    fn count_bounded_and_monotone((path, (a, b)) in (path_strategy(), band_strategy())) {
        prop_assume!(a < b);
        let band = Band::new(a, b);
        let counts: Vec<usize> = (0..path.len())
            .map(|n| PathCrossings::new(&band, &path, n).upcrossings())
            .collect();
        for (n, &u) in counts.iter().enumerate() {
            prop_assert!(u <= n.div_ceil(2));
        }
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        let f = Process::from_path(path.clone()).unwrap();
        prop_assert_eq!(
            upcrossings(&band, &f)[0].clone(),
            ExtendedNonNeg::Finite(Rational::from_i64(*counts.last().unwrap() as i64))
        );
    }

    #[test]
    fn translation_identity((path, (a, b)) in (path_strategy(), band_strategy())) {
        prop_assume!(a < b);
        let f = Process::from_path(path).unwrap();
        let report = band_translation_identity(&Band::new(a, b), &f).unwrap();
        prop_assert!(report.holds, "mismatch at {:?}", report.first_mismatch);
    }

    #[test]
    fn estimate_on_random_submartingales(seed in any::<u64>(), (a, b) in band_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space::<Rational, _>(&mut rng, 6);
        let filt = random_filtration(&mut rng, 6, 4, false);
        let f = random_submartingale(&mut rng, &space, &filt);
        let sub = CheckedProcess::new(&space, &filt, &f, MartingaleClass::Submartingale).unwrap();
        for n in 0..=4 {
            let r = check_upcrossing_estimate(&Band::new(a.clone(), b.clone()), &sub, n).unwrap();
            prop_assert!(r.holds, "N = {}: {} > {}", n, r.lhs, r.rhs);
            if a >= b {
                prop_assert!(r.lhs <= Rational::zero() && r.rhs >= Rational::zero());
            }
        }
    }
}

#[test]
fn random_paths_through_process_api() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let band = Band::new(q(-1, 2), q(1, 2));
    let paths: Vec<Vec<Rational>> = (0..40).map(|_| random_path(&mut rng, 12, 3)).collect();
    let f = Process::new(
        (0..12)
            .map(|n| paths.iter().map(|p| p[n].clone()).collect())
            .collect(),
    )
    .unwrap();
    for n in 0..12 {
        let counts = upcrossings_before(&band, &f, n).unwrap();
        for (atom, p) in paths.iter().enumerate() {
            assert_eq!(counts[atom], scan_upcrossings(p, &band.a, &band.b, n));
        }
    }
}
