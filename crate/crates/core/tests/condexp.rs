use martingale_core::condexp::condexp_properties;
use martingale_core::instances::{random_partition, random_refinement, random_space, random_variable};
use martingale_core::{CondexpInput, FiniteMeasureSpace, Partition, RandomVariable, Rational, Scalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Weighted block mean computed from scratch; zero-mass blocks map to 0.
fn block_mean_oracle(
    space: &FiniteMeasureSpace<Rational>,
    sub: &Partition,
    f: &RandomVariable<Rational>,
) -> Vec<Rational> {
    (0..space.atom_count())
        .map(|atom| {
            let block = sub.block_of(atom);
            let mut mass = Rational::zero();
            let mut total = Rational::zero();
            for other in 0..space.atom_count() {
                if sub.block_of(other) == block {
                    mass = mass + space.weight(other).clone();
                    total = total + space.weight(other).clone() * f.get(other).clone();
                }
            }
            if mass.is_zero() {
                Rational::zero()
            } else {
                total / mass
            }
        })
        .collect()
}

struct Instance {
    space: FiniteMeasureSpace<Rational>,
    ambient: Partition,
    sub: Partition,
    f: RandomVariable<Rational>,
}

fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = rng.random_range(1..=16);
    let space = random_space(&mut rng, atoms);
    let ambient = random_partition(&mut rng, atoms);
    let sub = if rng.random_bool(0.9) {
        let mut coarse = Partition::trivial(atoms);
        for _ in 0..rng.random_range(0..3) {
            coarse = random_refinement(&mut rng, &coarse, 2).meet(&ambient).unwrap();
        }
        coarse
    } else {
        random_partition(&mut rng, atoms)
    };
    let f = random_variable(&mut rng, atoms, 10, true);
    Instance { space, ambient, sub, f }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn routes_agree_with_oracle(seed in any::<u64>()) {
        let Instance { space, ambient, sub, f } = instance(seed);
        let input = CondexpInput::new(&space, &ambient, &sub, &f).unwrap();
        let ce = input.condexp();
        if sub.le(&ambient).unwrap() {
            let l2 = input.condexp_l2().unwrap();
            prop_assert!(space.ae_eq(&ce, &l2).unwrap());
            let oracle = RandomVariable::new(block_mean_oracle(&space, &sub, &f)).unwrap();
            prop_assert!(space.ae_eq(&ce, &oracle).unwrap());
            prop_assert!(input.check_set_integral_characterization().unwrap().holds);
        } else {
            prop_assert_eq!(ce, RandomVariable::zeros(space.atom_count()));
            prop_assert!(input.condexp_l2().is_err());
        }
    }

    #[test]
    fn linearity_tower_monotonicity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space::<Rational, _>(&mut rng, 8);
        let ambient = Partition::discrete(8);
        let fine = random_partition(&mut rng, 8);
        let coarse = fine.meet(&random_partition(&mut rng, 8)).unwrap();
        let f = random_variable(&mut rng, 8, 5, true);
        let g = if rng.random_bool(0.5) {
            f.add(&random_variable(&mut rng, 8, 3, false).abs())
        } else {
            random_variable(&mut rng, 8, 5, true)
        };
        let alpha = Rational::new(rng.random_range(-5..=5), 3);
        let beta = Rational::new(rng.random_range(-5..=5), 2);
        let r = condexp_properties(&space, &ambient, &f, &g, &alpha, &beta, &fine, &coarse).unwrap();
        prop_assert!(r.holds(), "{:?}", r);
    }
}

#[test]
fn float_mode_tracks_exact_mode() {
    for seed in 0..200 {
        let Instance { space, ambient, sub, f } = instance(seed);
        let fspace = FiniteMeasureSpace::new(space.weights().iter().map(Scalar::to_f64).collect()).unwrap();
        let ff = RandomVariable::new(f.values().iter().map(Scalar::to_f64).collect()).unwrap();
        let exact = CondexpInput::new(&space, &ambient, &sub, &f).unwrap().condexp();
        let float = CondexpInput::new(&fspace, &ambient, &sub, &ff).unwrap().condexp();
        for atom in 0..space.atom_count() {
            assert!((exact.get(atom).to_f64() - float.get(atom)).abs() < 1e-9);
        }
    }
}
