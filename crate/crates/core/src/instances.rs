//! Seeded generators for small random instances: spaces with zero-weight
//! atoms, nested partitions, filtrations and processes of a prescribed class.
//! Shared by the test suites and the `selftest` runner.

use rand::Rng;

use crate::measure::{FiniteMeasureSpace, Partition, RandomVariable};
use crate::process::{Filtration, Process};
use crate::scalar::Scalar;

/// Weights `k/d` with `k ∈ 0..=d`, about a fifth of them zero, at least
/// one positive.
pub fn random_space<S: Scalar, R: Rng>(rng: &mut R, atoms: usize) -> FiniteMeasureSpace<S> {
    let denom = rng.random_range(1..=12i64);
    let mut weights: Vec<S> = (0..atoms)
        .map(|_| {
            if rng.random_bool(0.2) {
                S::zero()
            } else {
                S::from_ratio(rng.random_range(1..=denom), denom)
            }
        })
        .collect();
    if weights.iter().all(|w| w.is_zero()) {
        let i = rng.random_range(0..atoms);
        weights[i] = S::one();
    }
    FiniteMeasureSpace::new(weights).expect("weights are nonnegative")
}

/// Like [`random_space`] but normalized to total mass 1.
pub fn random_probability_space<S: Scalar, R: Rng>(rng: &mut R, atoms: usize) -> FiniteMeasureSpace<S> {
    let raw = random_space::<S, R>(rng, atoms);
    let total = raw.total_mass();
    FiniteMeasureSpace::new(raw.weights().iter().map(|w| w.clone() / total.clone()).collect())
        .expect("weights are nonnegative")
}

/// Splits each block of `p` into up to `max_parts` pieces.
pub fn random_refinement<R: Rng>(rng: &mut R, p: &Partition, max_parts: usize) -> Partition {
    let mut labels = vec![0usize; p.atom_count()];
    let mut next = 0;
    for block in p.blocks() {
        let parts = rng.random_range(1..=max_parts.max(1));
        let base = next;
        for atom in block {
            labels[atom] = base + rng.random_range(0..parts);
        }
        next += parts;
    }
    Partition::from_labels(labels)
}

pub fn random_partition<R: Rng>(rng: &mut R, atoms: usize) -> Partition {
    let parts = rng.random_range(1..=atoms.max(1));
    random_refinement(rng, &Partition::trivial(atoms), parts)
}

/// A nested chain `ℱ_0 ≤ … ≤ ℱ_H` starting from the trivial partition,
/// ending at the discrete one when `reach_singletons` holds.
pub fn random_filtration<R: Rng>(
    rng: &mut R,
    atoms: usize,
    horizon: usize,
    reach_singletons: bool,
) -> Filtration {
    let mut steps = vec![Partition::trivial(atoms)];
    for _ in 0..horizon {
        let last = steps.last().expect("nonempty");
        steps.push(random_refinement(rng, last, 3));
    }
    if reach_singletons {
        *steps.last_mut().expect("nonempty") = Partition::discrete(atoms);
    }
    Filtration::new(steps, Partition::discrete(atoms)).expect("chain is nested")
}

/// Integers in `-range..=range`, or multiples of `1/2` when `halves`.
pub fn random_variable<S: Scalar, R: Rng>(rng: &mut R, atoms: usize, range: i64, halves: bool) -> RandomVariable<S> {
    let d = if halves { 2 } else { 1 };
    RandomVariable::new(
        (0..atoms)
            .map(|_| S::from_ratio(rng.random_range(-range * d..=range * d), d))
            .collect(),
    )
    .expect("finite values")
}

/// Constant on the blocks of `p`.
pub fn random_measurable<S: Scalar, R: Rng>(
    rng: &mut R,
    p: &Partition,
    lo: i64,
    hi: i64,
) -> RandomVariable<S> {
    let block_values: Vec<S> = (0..p.block_count())
        .map(|_| S::from_i64(rng.random_range(lo..=hi)))
        .collect();
    RandomVariable::new(
        (0..p.atom_count())
            .map(|atom| block_values[p.block_of(atom)].clone())
            .collect(),
    )
    .expect("finite values")
}

/// `f_n = μ[f_H | ℱ_n]` for a random `ℱ_H`-measurable `f_H`.
pub fn random_martingale<S: Scalar, R: Rng>(
    rng: &mut R,
    space: &FiniteMeasureSpace<S>,
    filt: &Filtration,
) -> Process<S> {
    let h = filt.horizon();
    let last = random_measurable(rng, filt.step(h), -6, 6);
    let slices = (0..=h)
        .map(|n| filt.condexp(space, &last, n).expect("dimensions agree"))
        .collect();
    Process::from_slices(slices).expect("dimensions agree")
}

/// `A_0 = 0`, `A_{n+1} = A_n + d_n` with `d_n ≥ 0` measurable for `ℱ_n`.
pub fn random_increasing_predictable<S: Scalar, R: Rng>(rng: &mut R, filt: &Filtration) -> Process<S> {
    let mut acc = RandomVariable::zeros(filt.atom_count());
    let mut slices = vec![acc.clone()];
    for n in 0..filt.horizon() {
        acc = acc.add(&random_measurable(rng, filt.step(n), 0, 3));
        slices.push(acc.clone());
    }
    Process::from_slices(slices).expect("dimensions agree")
}

/// Predictable weights with values in `0..=bound`.
pub fn random_predictable<S: Scalar, R: Rng>(rng: &mut R, filt: &Filtration, bound: i64) -> Process<S> {
    let slices = (0..=filt.horizon())
        .map(|n| random_measurable(rng, filt.step(n.saturating_sub(1)), 0, bound))
        .collect();
    Process::from_slices(slices).expect("dimensions agree")
}

/// Martingale plus nondecreasing predictable drift.
pub fn random_submartingale<S: Scalar, R: Rng>(
    rng: &mut R,
    space: &FiniteMeasureSpace<S>,
    filt: &Filtration,
) -> Process<S> {
    random_martingale(rng, space, filt)
        .add(&random_increasing_predictable(rng, filt))
        .expect("dimensions agree")
}

/// A path of `len` values in `-range..=range`, in steps of `1/2`.
pub fn random_path<S: Scalar, R: Rng>(rng: &mut R, len: usize, range: i64) -> Vec<S> {
    random_variable::<S, R>(rng, len, range, true).into_values()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::process::{classify, MartingaleClass};
    use crate::scalar::Rational;

    #[test]
    fn generated_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let atoms = rng.random_range(1..=10);
            let horizon = rng.random_range(0..=4);
            let space = random_space::<Rational, _>(&mut rng, atoms);
            let filt = random_filtration(&mut rng, atoms, horizon, false);
            let m = random_martingale(&mut rng, &space, &filt);
            assert_eq!(classify(&space, &filt, &m).unwrap().class, MartingaleClass::Martingale);
            let s = random_submartingale(&mut rng, &space, &filt);
            assert!(classify(&space, &filt, &s).unwrap().class.is_submartingale());
            let c = random_predictable::<Rational, _>(&mut rng, &filt, 3);
            assert!(filt.is_predictable(&c).unwrap());
        }
    }

    #[test]
    fn probability_space_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for atoms in 1..12 {
            assert!(random_probability_space::<Rational, _>(&mut rng, atoms).is_probability());
        }
    }
}
