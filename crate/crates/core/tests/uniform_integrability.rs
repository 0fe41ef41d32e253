use martingale_core::instances::{random_probability_space, random_space, random_variable};
use martingale_core::ui::{check_bridging_inequality, check_p_monotonicity, FunctionFamily, KnapsackStrategy};
use martingale_core::{AtomSet, Exponent, FiniteMeasureSpace, RandomVariable, Rational, Scalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `max Σ_{i∈A} |f_i|ᵖ μ_i` over all `A` with `μ(A) ≤ δ`, by enumerating
/// bitmasks.
fn brute_force(space: &FiniteMeasureSpace<Rational>, f: &RandomVariable<Rational>, p: u32, delta: &Rational) -> Rational {
    let n = space.atom_count();
    let mut best = Rational::zero();
    for mask in 0u32..(1 << n) {
        let mut mass = Rational::zero();
        let mut value = Rational::zero();
        for i in (0..n).filter(|i| mask >> i & 1 == 1) {
            mass = mass + space.weight(i).clone();
            value = value + f.get(i).abs().powi(p) * space.weight(i).clone();
        }
        if mass <= *delta && value > best {
            best = value;
        }
    }
    best
}

fn family(rng: &mut ChaCha8Rng, atoms: usize, p: Exponent) -> FunctionFamily<Rational> {
    let k = rng.random_range(1..=3);
    FunctionFamily::new((0..k).map(|_| random_variable(rng, atoms, 6, true)).collect(), p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn knapsack_strategies_agree(seed in any::<u64>(), p in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = rng.random_range(1..=12);
        let space = random_space::<Rational, _>(&mut rng, atoms);
        let fam = family(&mut rng, atoms, Exponent::Finite(p));
        let delta = space.total_mass() * Rational::new(rng.random_range(0..=8), 8);
        let oracle = fam
            .members()
            .iter()
            .map(|f| brute_force(&space, f, p, &delta))
            .fold(Rational::zero(), |a, b| a.max_of(b));
        let exhaustive = fam.analyst_modulus(&space, &delta, KnapsackStrategy::Exhaustive).unwrap();
        let bnb = fam.analyst_modulus(&space, &delta, KnapsackStrategy::BranchAndBound).unwrap();
        let approx = fam.analyst_modulus(&space, &delta, KnapsackStrategy::Approximate).unwrap();
        prop_assert_eq!(exhaustive.raw(), &oracle);
        prop_assert_eq!(bnb.raw(), &oracle);
        prop_assert!(approx.raw() >= &oracle);
    }

    #[test]
    fn moduli_monotone_in_their_parameter(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = rng.random_range(1..=10);
        let space = random_space::<Rational, _>(&mut rng, atoms);
        let p = Exponent::Finite(rng.random_range(1..=2));
        let fam = family(&mut rng, atoms, p);
        let levels: Vec<Rational> = (0..=14).map(|k| Rational::new(k, 2)).collect();
        let curve: Vec<_> = levels.iter().map(|c| fam.probabilist_modulus(&space, c).unwrap()).collect();
        prop_assert!(curve.windows(2).all(|w| w[1].le(&w[0])));
        prop_assert_eq!(&curve[0], &fam.sup_norm(&space).unwrap());
        let total = space.total_mass();
        let deltas: Vec<Rational> = (0..=6).map(|k| total.clone() * Rational::new(k, 6)).collect();
        let small: Vec<_> = deltas
            .iter()
            .map(|d| fam.analyst_modulus(&space, d, KnapsackStrategy::Auto).unwrap())
            .collect();
        prop_assert!(small.windows(2).all(|w| w[0].le(&w[1])));
        prop_assert_eq!(small.last().unwrap(), &fam.sup_norm(&space).unwrap());
    }

    #[test]
    fn bridging_inequality(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = rng.random_range(1..=16);
        let space = random_space::<Rational, _>(&mut rng, atoms);
        let fam = family(&mut rng, atoms, Exponent::ONE);
        let c = Rational::new(rng.random_range(0..=16), 2);
        let a = AtomSet::from_mask((0..atoms).map(|_| rng.random_bool(0.4)).collect());
        prop_assert!(check_bridging_inequality(&space, &fam, &c, &a).unwrap().holds);
    }

    #[test]
    fn holder_ordering_on_probability_spaces(seed in any::<u64>(), p in 1u32..=3, dq in 0u32..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = rng.random_range(1..=10);
        let space = random_probability_space::<Rational, _>(&mut rng, atoms);
        let fam = family(&mut rng, atoms, Exponent::ONE);
        let grid: Vec<Rational> = (0..=8).map(Rational::from_i64).collect();
        for q in [Exponent::Finite(p + dq), Exponent::Infinity] {
            let r = check_p_monotonicity(&space, &fam, Exponent::Finite(p), q, &grid).unwrap();
            prop_assert!(r.holds);
            for row in &r.rows {
                prop_assert!(row.modulus_p.le(&row.modulus_q));
            }
        }
    }
}
