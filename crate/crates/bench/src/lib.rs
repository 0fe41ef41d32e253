//! Fixtures shared by the benchmarks.

use martingale_core::instances::{random_filtration, random_measurable, random_partition, random_refinement, random_space, random_submartingale};
use martingale_core::montecarlo::{exhaustive_space, ExhaustiveSpace, DEFAULT_PATH_CAP};
use martingale_core::{Filtration, FiniteMeasureSpace, Partition, Process, RandomVariable, Rational, Scalar, TrajectoryModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct CondexpCase<S> {
    pub space: FiniteMeasureSpace<S>,
    pub ambient: Partition,
    pub sub: Partition,
    pub f: RandomVariable<S>,
}

pub fn condexp_case<S: Scalar>(seed: u64, atoms: usize) -> CondexpCase<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = random_space(&mut rng, atoms);
    let sub = random_partition(&mut rng, atoms);
    let ambient = random_refinement(&mut rng, &sub, 3);
    let f = random_measurable(&mut rng, &ambient, -8, 8);
    CondexpCase { space, ambient, sub, f }
}

pub fn submartingale_case(seed: u64, atoms: usize, horizon: usize) -> (FiniteMeasureSpace<Rational>, Filtration, Process<Rational>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = random_space(&mut rng, atoms);
    let filt = random_filtration(&mut rng, atoms, horizon, true);
    let f = random_submartingale(&mut rng, &space, &filt);
    (space, filt, f)
}

pub fn fair_walk(horizon: usize) -> ExhaustiveSpace<Rational> {
    let walk = TrajectoryModel::FairWalk { step: Rational::one() };
    exhaustive_space(&walk, horizon, DEFAULT_PATH_CAP).expect("horizon within the path cap")
}
