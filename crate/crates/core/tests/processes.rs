use martingale_core::borel_cantelli::{borel_cantelli_martingale, predictable_sum, EventSequence};
use martingale_core::instances::{
    random_filtration, random_increasing_predictable, random_martingale, random_predictable,
    random_space, random_submartingale,
};
use martingale_core::process::{classify, doob_decomposition, stochastic_integral};
use martingale_core::stopping::{
    check_hitting_is_stopping_time, check_optional_stopping, hitting, stopped_process,
    ExtendedTime, StoppingTime, ValuePredicate,
};
use martingale_core::{
    AtomSet, CheckedProcess, Filtration, FiniteMeasureSpace, MartingaleClass, Partition, Process,
    Rational, Scalar,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Setup {
    space: FiniteMeasureSpace<Rational>,
    filt: Filtration,
    rng: ChaCha8Rng,
}

fn setup(seed: u64) -> Setup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = rng.random_range(1..=16);
    let horizon = rng.random_range(0..=8);
    let space = random_space(&mut rng, atoms);
    let reach = rng.random_bool(0.5);
    let filt = random_filtration(&mut rng, atoms, horizon, reach);
    Setup { space, filt, rng }
}

fn random_measurable_set(rng: &mut ChaCha8Rng, p: &Partition) -> AtomSet {
    let keep: Vec<bool> = (0..p.block_count()).map(|_| rng.random_bool(0.5)).collect();
    AtomSet::from_predicate(p.atom_count(), |atom| keep[p.block_of(atom)])
}

/// Stops every still-running atom of a randomly chosen set of `ℱ_k` blocks
/// at time `k`, so each `{τ ≤ k}` is a union of `ℱ_k` blocks.
fn random_stopping_time(rng: &mut ChaCha8Rng, filt: &Filtration) -> StoppingTime {
    let mut times = vec![ExtendedTime::Infinity; filt.atom_count()];
    for k in 0..=filt.horizon() {
        for atom in random_measurable_set(rng, filt.step(k)).iter() {
            if times[atom] == ExtendedTime::Infinity {
                times[atom] = ExtendedTime::Finite(k);
            }
        }
    }
    StoppingTime::new(times)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stochastic_integral_of_submartingale(seed in any::<u64>()) {
        let Setup { space, filt, mut rng } = setup(seed);
        let f = random_submartingale(&mut rng, &space, &filt);
        let c = random_predictable(&mut rng, &filt, 4);
        let integral = stochastic_integral(&c, &f).unwrap();
        prop_assert!(classify(&space, &filt, &integral).unwrap().class.is_submartingale());
        let ones = Process::constant(filt.horizon(), space.atom_count(), Rational::one());
        let unit = stochastic_integral(&ones, &f).unwrap();
        let h = filt.horizon();
        prop_assert_eq!(
            space.integral(unit.at(h)).unwrap(),
            space.integral(f.at(h)).unwrap() - space.integral(f.at(0)).unwrap()
        );
    }

    #[test]
    fn doob_parts(seed in any::<u64>()) {
        let Setup { space, filt, mut rng } = setup(seed);
        let m = random_martingale(&mut rng, &space, &filt);
        let a = random_increasing_predictable(&mut rng, &filt);
        let f = m.add(&a).unwrap();
        let d = doob_decomposition(&space, &filt, &f).unwrap();
        prop_assert_eq!(classify(&space, &filt, &d.martingale_part).unwrap().class, MartingaleClass::Martingale);
        prop_assert!(filt.is_predictable(&d.predictable_part).unwrap());
        prop_assert_eq!(d.martingale_part.add(&d.predictable_part).unwrap(), f.clone());
        for n in 1..=filt.horizon() {
            prop_assert!(space.ae_le(d.predictable_part.at(n - 1), d.predictable_part.at(n)).unwrap());
            prop_assert!(space.ae_eq(d.predictable_part.at(n), a.at(n)).unwrap());
        }
    }

    #[test]
    fn borel_cantelli_martingale_is_doob_part(seed in any::<u64>()) {
        let Setup { space, filt, mut rng } = setup(seed);
        let sets = (0..=filt.horizon()).map(|n| random_measurable_set(&mut rng, filt.step(n))).collect();
        let seq = EventSequence::new(sets, filt.clone()).unwrap();
        let m = borel_cantelli_martingale(&seq, &space).unwrap();
        prop_assert_eq!(classify(&space, &filt, &m).unwrap().class, MartingaleClass::Martingale);
        let d = doob_decomposition(&space, &filt, &seq.counting_process::<Rational>()).unwrap();
        prop_assert_eq!(&d.martingale_part, &m);
        let p = predictable_sum(&seq, &space).unwrap();
        prop_assert!(filt.is_predictable(&p).unwrap());
        for n in 1..=filt.horizon() {
            prop_assert!(p.at(n - 1).values().iter().zip(p.at(n).values()).all(|(x, y)| x <= y));
        }
    }

    #[test]
    fn hitting_times(seed in any::<u64>(), lo in -3i64..=3, n in 0usize..4) {
        let Setup { space, filt, mut rng } = setup(seed);
        let f = random_submartingale(&mut rng, &space, &filt);
        let h = filt.horizon();
        let n = n.min(h);
        let pred = ValuePredicate::AtLeast(Rational::from_i64(lo));
        let times = hitting(&f, &pred, n, h).unwrap();
        for (atom, &t) in times.iter().enumerate() {
            prop_assert!(n <= t && t <= h);
            prop_assert!((n..t).all(|j| !pred.contains(f.value(j, atom))));
            if t < h {
                prop_assert!(pred.contains(f.value(t, atom)));
            }
        }
        prop_assert!(check_hitting_is_stopping_time(&f, &pred, n, h, &filt).unwrap());
    }

    #[test]
    fn stopping_time_lattice_and_optional_stopping(seed in any::<u64>()) {
        let Setup { space, filt, mut rng } = setup(seed);
        let s = random_stopping_time(&mut rng, &filt);
        let t = random_stopping_time(&mut rng, &filt);
        prop_assert!(s.is_stopping_time(&filt).unwrap());
        prop_assert!(s.min(&t).unwrap().is_stopping_time(&filt).unwrap());
        prop_assert!(s.max(&t).unwrap().is_stopping_time(&filt).unwrap());

        let f = random_submartingale(&mut rng, &space, &filt);
        let stopped = stopped_process(&f, &s).unwrap();
        prop_assert!(classify(&space, &filt, &stopped).unwrap().class.is_submartingale());

        let h = filt.horizon();
        let cap = StoppingTime::constant(space.atom_count(), ExtendedTime::Finite(h));
        let tau = s.min(&t).unwrap().min(&cap).unwrap();
        let sigma = s.max(&t).unwrap().min(&cap).unwrap();
        let sub = CheckedProcess::new(&space, &filt, &f, MartingaleClass::Submartingale).unwrap();
        prop_assert!(check_optional_stopping(&sub, &tau, &sigma).unwrap().holds());
        let m = random_martingale(&mut rng, &space, &filt);
        let mart = CheckedProcess::new(&space, &filt, &m, MartingaleClass::Martingale).unwrap();
        let r = check_optional_stopping(&mart, &tau, &sigma).unwrap();
        prop_assert_eq!(r.equality, Some(true));
    }
}
