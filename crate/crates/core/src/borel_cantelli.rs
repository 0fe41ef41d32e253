//! The generalized Borel–Cantelli lemma: exact martingale construction and a
//! Monte Carlo check of its finite-horizon surrogate.
//!
//! For adapted events `S_n`, `ω` lies in infinitely many `S_n` exactly when
//! `Σ_n μ[1_{S_{n+1}} | ℱ_n](ω) = ∞`, almost everywhere. The proof runs
//! through the martingale part of the Doob decomposition of
//! `Σ_{k<n} 1_{S_{k+1}}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{AtomSet, FiniteMeasureSpace, RandomVariable};
use crate::montecarlo::{simulate_map, EventSchedule, RunConfig, TrajectoryModel};
use crate::process::{Filtration, Process};
use crate::scalar::Scalar;

/// Events `S_0, …, S_H` with `S_n ∈ ℱ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSequence {
    sets: Vec<AtomSet>,
    adapted_to: Filtration,
}

impl EventSequence {
    pub fn new(sets: Vec<AtomSet>, adapted_to: Filtration) -> Result<Self> {
        if sets.len() != adapted_to.horizon() + 1 {
            return Err(Error::HorizonMismatch {
                left: sets.len().saturating_sub(1),
                right: adapted_to.horizon(),
            });
        }
        for (n, s) in sets.iter().enumerate() {
            if !adapted_to.step(n).is_set_measurable(s)? {
                return Err(Error::NotAdapted { time: n });
            }
        }
        Ok(EventSequence { sets, adapted_to })
    }

    pub fn sets(&self) -> &[AtomSet] {
        &self.sets
    }

    pub fn filtration(&self) -> &Filtration {
        &self.adapted_to
    }

    pub fn horizon(&self) -> usize {
        self.adapted_to.horizon()
    }

    /// `X_n = Σ_{k<n} 1_{S_{k+1}}`.
    pub fn counting_process<S: Scalar>(&self) -> Process<S> {
        let atoms = self.adapted_to.atom_count();
        let mut acc = RandomVariable::zeros(atoms);
        let mut slices = vec![acc.clone()];
        for s in &self.sets[1..] {
            acc = acc.add(&RandomVariable::indicator(s));
            slices.push(acc.clone());
        }
        Process::from_slices(slices).expect("slices share the atom count")
    }
}

/// `p_n = Σ_{k<n} μ[1_{S_{k+1}} | ℱ_k]`.
pub fn predictable_sum<S: Scalar>(
    seq: &EventSequence,
    space: &FiniteMeasureSpace<S>,
) -> Result<Process<S>> {
    space.check_len(seq.adapted_to.atom_count())?;
    let mut acc = RandomVariable::zeros(space.atom_count());
    let mut slices = vec![acc.clone()];
    for k in 0..seq.horizon() {
        let ind = RandomVariable::indicator(&seq.sets[k + 1]);
        acc = acc.add(&seq.adapted_to.condexp(space, &ind, k)?);
        slices.push(acc.clone());
    }
    Process::from_slices(slices)
}

/// `f_n = Σ_{k<n} (1_{S_{k+1}} − μ[1_{S_{k+1}} | ℱ_k])`, formed as the
/// counting process minus its compensator.
pub fn borel_cantelli_martingale<S: Scalar>(
    seq: &EventSequence,
    space: &FiniteMeasureSpace<S>,
) -> Result<Process<S>> {
    seq.counting_process().sub(&predictable_sum(seq, space)?)
}

/// Per-trial surrogates of the two sides of the lemma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// Some event occurred at a time `≥ tail_start`.
    pub tail_hit: bool,
    /// `Σ_{n ≤ H} P(S_n | ℱ_{n−1})` along the trajectory.
    pub p_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRow {
    pub trial_block: usize,
    pub match_fraction: f64,
    pub p_horizon_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BorelCantelliReport {
    /// Fraction of trials where "event in the tail" agrees with
    /// "`p_H ≥ divergence_cut`".
    pub match_fraction: f64,
    pub p_horizon_mean: f64,
    pub tail_fraction: f64,
    pub divergent_fraction: f64,
    /// Lower bound on the expected match fraction when the schedule does not
    /// depend on the past: `1 − Π_{n ≥ t}(1 − p_n)` bounds the membership
    /// side when the sum diverges past the cut, and the union bound
    /// `1 − Σ_{n ≥ t} p_n` bounds the other side.
    pub analytic_floor: Option<f64>,
    pub blocks: Vec<BlockRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BorelCantelliConfig {
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
    pub divergence_cut: f64,
    pub tail_start: usize,
    pub block_size: usize,
}

fn analytic_floor(schedule: &EventSchedule, cfg: &BorelCantelliConfig) -> Option<f64> {
    let probs = (1..=cfg.horizon)
        .map(|n| schedule.exact_prob(n).map(|p| p.to_f64()))
        .collect::<Option<Vec<f64>>>()?;
    let total: f64 = probs.iter().sum();
    let tail = &probs[cfg.tail_start.max(1).min(cfg.horizon + 1) - 1..];
    if total >= cfg.divergence_cut {
        Some(1.0 - tail.iter().map(|p| 1.0 - p).product::<f64>())
    } else {
        Some((1.0 - tail.iter().sum::<f64>()).max(0.0))
    }
}

pub fn check_borel_cantelli(
    schedule: &EventSchedule,
    cfg: &BorelCantelliConfig,
) -> Result<BorelCantelliReport> {
    if cfg.trials == 0 || cfg.block_size == 0 {
        return Err(Error::InvalidArgument("trials and block size must be positive".into()));
    }
    let model = TrajectoryModel::IndependentEvents {
        schedule: schedule.clone(),
    };
    let run = RunConfig {
        seed: cfg.seed,
        trials: cfg.trials,
        horizon: cfg.horizon,
        checkpoints: Vec::new(),
    };
    let outcomes = simulate_map(&model, &run, |_, path| {
        let mut past = Vec::with_capacity(path.len());
        let mut p_sum = 0.0;
        let mut tail_hit = false;
        for (n, &x) in path.iter().enumerate().skip(1) {
            p_sum += schedule.prob(n, &past);
            let hit = x == 1.0;
            tail_hit |= hit && n >= cfg.tail_start;
            past.push(hit);
        }
        TrialOutcome { tail_hit, p_sum }
    })?;
    let agrees = |o: &TrialOutcome| o.tail_hit == (o.p_sum >= cfg.divergence_cut);
    let fraction = |xs: &[TrialOutcome], pred: &dyn Fn(&TrialOutcome) -> bool| {
        xs.iter().filter(|o| pred(o)).count() as f64 / xs.len() as f64
    };
    let mean_p = |xs: &[TrialOutcome]| xs.iter().map(|o| o.p_sum).sum::<f64>() / xs.len() as f64;
    let blocks = outcomes
        .chunks(cfg.block_size)
        .enumerate()
        .map(|(i, chunk)| BlockRow {
            trial_block: i,
            match_fraction: fraction(chunk, &agrees),
            p_horizon_mean: mean_p(chunk),
        })
        .collect();
    Ok(BorelCantelliReport {
        match_fraction: fraction(&outcomes, &agrees),
        p_horizon_mean: mean_p(&outcomes),
        tail_fraction: fraction(&outcomes, &|o| o.tail_hit),
        divergent_fraction: fraction(&outcomes, &|o| o.p_sum >= cfg.divergence_cut),
        analytic_floor: analytic_floor(schedule, cfg),
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Partition;
    use crate::montecarlo::{exhaustive_space, DEFAULT_PATH_CAP};
    use crate::process::{classify, doob_decomposition, MartingaleClass};
    use crate::scalar::Rational;

    fn coin_events(horizon: usize) -> (FiniteMeasureSpace<Rational>, EventSequence) {
        let model = TrajectoryModel::IndependentEvents {
            schedule: EventSchedule::Constant { p: Rational::new(1, 2) },
        };
        let e = exhaustive_space::<Rational>(&model, horizon, DEFAULT_PATH_CAP).unwrap();
        let sets = (0..=horizon)
            .map(|n| e.process.at(n).level_set(|v| *v == Rational::from_i64(1)))
            .collect();
        let seq = EventSequence::new(sets, e.filtration.clone()).unwrap();
        (e.space, seq)
    }

    #[test]
    fn predictable_sum_examples() {
        let (space, seq) = coin_events(4);
        let p = predictable_sum(&seq, &space).unwrap();
        for n in 0..=4 {
            assert!(p.at(n).values().iter().all(|v| *v == Rational::new(n as i64, 2)));
        }
        let filt = Filtration::constant(Partition::trivial(3), 2);
        let empty = EventSequence::new(vec![AtomSet::empty(3); 3], filt.clone()).unwrap();
        let full = EventSequence::new(vec![AtomSet::full(3); 3], filt).unwrap();
        let space = FiniteMeasureSpace::<Rational>::uniform(3).unwrap();
        assert_eq!(predictable_sum(&empty, &space).unwrap(), Process::constant(2, 3, Rational::zero()));
        let p = predictable_sum(&full, &space).unwrap();
        assert_eq!(p.value(2, 0), &Rational::from_i64(2));
        assert_eq!(
            borel_cantelli_martingale(&full, &space).unwrap(),
            Process::constant(2, 3, Rational::zero())
        );
    }

    #[test]
    fn martingale_matches_doob() {
        let (space, seq) = coin_events(4);
        let m = borel_cantelli_martingale(&seq, &space).unwrap();
        assert_eq!(classify(&space, seq.filtration(), &m).unwrap().class, MartingaleClass::Martingale);
        let doob = doob_decomposition(&space, seq.filtration(), &seq.counting_process()).unwrap();
        assert_eq!(doob.martingale_part, m);
    }

    #[test]
    fn rejects_unadapted_events() {
        let filt = Filtration::constant(Partition::trivial(2), 1);
        let set = AtomSet::from_indices(2, &[0]).unwrap();
        assert_eq!(
            EventSequence::new(vec![AtomSet::empty(2), set], filt),
            Err(Error::NotAdapted { time: 1 })
        );
    }

    #[test]
    fn surrogate_on_trivial_schedules() {
        let cfg = BorelCantelliConfig {
            horizon: 50,
            trials: 200,
            seed: 1,
            divergence_cut: 10.0,
            tail_start: 25,
            block_size: 100,
        };
        let never = EventSchedule::Explicit { probs: vec![] };
        let r = check_borel_cantelli(&never, &cfg).unwrap();
        assert_eq!(r.match_fraction, 1.0);
        assert_eq!(r.blocks.len(), 2);
        let always = EventSchedule::Constant { p: Rational::one() };
        assert_eq!(check_borel_cantelli(&always, &cfg).unwrap().match_fraction, 1.0);
        assert_eq!(check_borel_cantelli(&never, &cfg).unwrap(), r);
    }
}
