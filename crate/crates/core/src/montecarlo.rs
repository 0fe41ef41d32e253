//! Seeded trajectory generators and exact path-space enumeration.
//!
//! Every trial draws from its own ChaCha8 stream selected by the trial index,
//! so a trial's trajectory depends only on `(seed, trial)` and never on how
//! trials are scheduled across threads. Aggregates are reduced in trial
//! order.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{FiniteMeasureSpace, Partition};
use crate::process::{Filtration, Process};
use crate::scalar::{Rational, Scalar};

/// Largest number of paths [`exhaustive_space`] enumerates by default.
pub const DEFAULT_PATH_CAP: usize = 1 << 16;

/// Transition kernel `(rng, n, history) ↦ x_{n+1}`.
pub type KernelFn = dyn Fn(&mut dyn RngCore, usize, &[f64]) -> f64 + Send + Sync;

/// Event probability `(n, past occurrences) ↦ P(S_n | ℱ_{n−1})` for `n ≥ 1`.
pub type ProbabilityFn = dyn Fn(usize, &[bool]) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct Kernel(pub Arc<KernelFn>);

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Kernel(..)")
    }
}

#[derive(Clone)]
pub struct Adaptive(pub Arc<ProbabilityFn>);

impl fmt::Debug for Adaptive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Adaptive(..)")
    }
}

/// Probability that the `n`-th event occurs, `n ≥ 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventSchedule {
    Constant { p: Rational },
    /// `1/n²`
    InverseSquare,
    /// `probs[n − 1]` for the `n`-th event; 0 past the end.
    Explicit { probs: Vec<Rational> },
    #[serde(skip)]
    Adaptive(Adaptive),
}

impl EventSchedule {
    pub fn adaptive(p: impl Fn(usize, &[bool]) -> f64 + Send + Sync + 'static) -> Self {
        EventSchedule::Adaptive(Adaptive(Arc::new(p)))
    }

    /// Exact probability of the `n`-th event when it does not depend on
    /// the past.
    pub fn exact_prob(&self, n: usize) -> Option<Rational> {
        match self {
            EventSchedule::Constant { p } => Some(p.clone()),
            EventSchedule::InverseSquare => {
                let n = n.max(1) as i64;
                Some(Rational::new(1, n * n))
            }
            EventSchedule::Explicit { probs } => {
                Some(probs.get(n - 1).cloned().unwrap_or_else(Rational::zero))
            }
            EventSchedule::Adaptive(_) => None,
        }
    }

    pub fn prob(&self, n: usize, history: &[bool]) -> f64 {
        match self {
            EventSchedule::Adaptive(Adaptive(p)) => p(n, history),
            other => other.exact_prob(n).expect("non-adaptive").to_f64(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |p: &Rational| *p < Rational::zero() || *p > Rational::one();
        match self {
            EventSchedule::Constant { p } if bad(p) => Err(prob_error(p)),
            EventSchedule::Explicit { probs } => match probs.iter().find(|p| bad(p)) {
                Some(p) => Err(prob_error(p)),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

fn prob_error(p: &Rational) -> Error {
    Error::InvalidArgument(format!("probability {p} is outside [0, 1]"))
}

/// How much a bettor stakes on the next fair coin flip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StakeRule {
    Constant { stake: Rational },
    /// Start at `base`, double after each loss, reset after a win.
    Doubling { base: Rational },
    /// Stake a fixed fraction of current wealth.
    Proportional { fraction: Rational },
}

impl StakeRule {
    /// Stake for the next flip given the past flips (`true` = win) and the
    /// current wealth.
    fn stake<S: Scalar>(&self, past: &[bool], wealth: &S) -> S {
        match self {
            StakeRule::Constant { stake } => to_scalar(stake),
            StakeRule::Doubling { base } => {
                let losses = past.iter().rev().take_while(|won| !**won).count();
                to_scalar::<S>(base) * S::from_i64(1i64 << losses.min(62))
            }
            StakeRule::Proportional { fraction } => to_scalar::<S>(fraction) * wealth.clone(),
        }
    }
}

fn to_scalar<S: Scalar>(r: &Rational) -> S {
    S::parse_str(&r.to_string()).expect("rationals parse in every mode")
}

/// A discrete-time stochastic model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TrajectoryModel {
    /// `x_0 = 0`, steps `±step` with probability ½ each.
    FairWalk {
        #[serde(default = "Rational::one")]
        step: Rational,
    },
    /// `x_0 = 0`, `+step` with probability `p_up`, else `−step`.
    BiasedWalk {
        p_up: Rational,
        #[serde(default = "Rational::one")]
        step: Rational,
    },
    /// Proportion of red balls; each draw returns the ball with one more of
    /// its colour.
    PolyaUrn { red: u64, black: u64 },
    /// Wealth of a bettor on fair coin flips.
    Betting {
        stake: StakeRule,
        #[serde(default = "Rational::zero")]
        initial: Rational,
    },
    /// `x_0 = 0` and `x_n = 1_{S_n}` for independent or adaptively chosen
    /// events.
    IndependentEvents { schedule: EventSchedule },
    #[serde(skip)]
    Custom { initial: f64, kernel: Kernel },
}

impl TrajectoryModel {
    pub fn custom(
        initial: f64,
        kernel: impl Fn(&mut dyn RngCore, usize, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TrajectoryModel::Custom {
            initial,
            kernel: Kernel(Arc::new(kernel)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TrajectoryModel::BiasedWalk { p_up, .. }
                if *p_up < Rational::zero() || *p_up > Rational::one() =>
            {
                Err(prob_error(p_up))
            }
            TrajectoryModel::PolyaUrn { red, black } if *red == 0 || *black == 0 => Err(
                Error::InvalidArgument("Pólya urn needs at least one ball of each colour".into()),
            ),
            TrajectoryModel::IndependentEvents { schedule } => schedule.validate(),
            _ => Ok(()),
        }
    }

    /// Fills `out` (length `horizon + 1`) with one trajectory.
    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match self {
            TrajectoryModel::FairWalk { step } => {
                let step = step.to_f64();
                out[0] = 0.0;
                for n in 1..out.len() {
                    let up = rng.random_bool(0.5);
                    out[n] = out[n - 1] + if up { step } else { -step };
                }
            }
            TrajectoryModel::BiasedWalk { p_up, step } => {
                let (p, step) = (p_up.to_f64(), step.to_f64());
                out[0] = 0.0;
                for n in 1..out.len() {
                    let up = rng.random::<f64>() < p;
                    out[n] = out[n - 1] + if up { step } else { -step };
                }
            }
            TrajectoryModel::PolyaUrn { red, black } => {
                let (mut r, mut b) = (*red, *black);
                out[0] = r as f64 / (r + b) as f64;
                for slot in out.iter_mut().skip(1) {
                    if rng.random_range(0..r + b) < r {
                        r += 1;
                    } else {
                        b += 1;
                    }
                    *slot = r as f64 / (r + b) as f64;
                }
            }
            TrajectoryModel::Betting { stake, initial } => {
                let mut past = Vec::with_capacity(out.len());
                out[0] = initial.to_f64();
                for n in 1..out.len() {
                    let s: f64 = stake.stake(&past, &out[n - 1]);
                    let won = rng.random_bool(0.5);
                    past.push(won);
                    out[n] = out[n - 1] + if won { s } else { -s };
                }
            }
            TrajectoryModel::IndependentEvents { schedule } => {
                let mut past = Vec::with_capacity(out.len());
                out[0] = 0.0;
                for (n, slot) in out.iter_mut().enumerate().skip(1) {
                    let hit = rng.random::<f64>() < schedule.prob(n, &past);
                    past.push(hit);
                    *slot = if hit { 1.0 } else { 0.0 };
                }
            }
            TrajectoryModel::Custom { initial, kernel } => {
                out[0] = *initial;
                for n in 1..out.len() {
                    out[n] = (kernel.0)(rng, n - 1, &out[..n]);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub horizon: usize,
    #[serde(default)]
    pub checkpoints: Vec<usize>,
}

/// The random stream of one trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// `trials × (horizon + 1)` values, trial-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch {
    horizon: usize,
    values: Vec<f64>,
}

impl TrajectoryBatch {
    pub fn trials(&self) -> usize {
        self.values.len() / (self.horizon + 1)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn trajectory(&self, trial: usize) -> &[f64] {
        let w = self.horizon + 1;
        &self.values[trial * w..(trial + 1) * w]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.horizon + 1)
    }

    /// Mean of `x_n` across trials, summed in trial order.
    pub fn mean_at(&self, n: usize) -> f64 {
        self.iter().map(|t| t[n]).sum::<f64>() / self.trials() as f64
    }
}

/// Runs every trial and maps its trajectory through `reduce` without keeping
/// the trajectory; results come back in trial order.
pub fn simulate_map<T: Send>(
    model: &TrajectoryModel,
    config: &RunConfig,
    reduce: impl Fn(usize, &[f64]) -> T + Sync + Send,
) -> Result<Vec<T>> {
    model.validate()?;
    Ok((0..config.trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; config.horizon + 1],
            |buf, trial| {
                let mut rng = trial_rng(config.seed, trial);
                model.sample_into(&mut rng, buf);
                reduce(trial, buf)
            },
        )
        .collect())
}

pub fn simulate(model: &TrajectoryModel, config: &RunConfig) -> Result<TrajectoryBatch> {
    let rows = simulate_map(model, config, |_, path| path.to_vec())?;
    Ok(TrajectoryBatch {
        horizon: config.horizon,
        values: rows.concat(),
    })
}

/// Sequential reference run, used to check scheduling independence.
pub fn simulate_sequential(model: &TrajectoryModel, config: &RunConfig) -> Result<TrajectoryBatch> {
    model.validate()?;
    let mut values = vec![0.0; config.trials * (config.horizon + 1)];
    for (trial, out) in values.chunks_mut(config.horizon + 1).enumerate() {
        model.sample_into(&mut trial_rng(config.seed, trial), out);
    }
    Ok(TrajectoryBatch {
        horizon: config.horizon,
        values,
    })
}

/// Every path of a finitely branching model as one atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveSpace<S> {
    pub space: FiniteMeasureSpace<S>,
    pub process: Process<S>,
    pub filtration: Filtration,
}

/// Enumerates all `2^horizon` paths. Atom `i` takes the "first" branch (up,
/// red, win, event) at step `k` when bit `horizon − 1 − k` of `i` is clear,
/// so atoms are in lexicographic path order.
pub fn exhaustive_space<S: Scalar>(
    model: &TrajectoryModel,
    horizon: usize,
    cap: usize,
) -> Result<ExhaustiveSpace<S>> {
    model.validate()?;
    let size = 1usize
        .checked_shl(horizon as u32)
        .filter(|&s| s <= cap && horizon < usize::BITS as usize)
        .ok_or(Error::CapExceeded {
            size: if horizon < usize::BITS as usize { 1 << horizon } else { usize::MAX },
            cap,
        })?;
    let mut weights = Vec::with_capacity(size);
    let mut rows: Vec<Vec<S>> = vec![Vec::with_capacity(size); horizon + 1];
    for atom in 0..size {
        let first_branch: Vec<bool> = (0..horizon)
            .map(|k| (atom >> (horizon - 1 - k)) & 1 == 0)
            .collect();
        let (path, weight) = exact_path::<S>(model, &first_branch)?;
        weights.push(weight);
        for (n, v) in path.into_iter().enumerate() {
            rows[n].push(v);
        }
    }
    let space = FiniteMeasureSpace::new(weights)?;
    let process = Process::new(rows)?;
    let filtration = Filtration::natural(&process, Partition::discrete(size))?;
    Ok(ExhaustiveSpace {
        space,
        process,
        filtration,
    })
}

/// Values and probability of one path given its branch choices.
fn exact_path<S: Scalar>(model: &TrajectoryModel, first: &[bool]) -> Result<(Vec<S>, S)> {
    let half = S::from_ratio(1, 2);
    let mut weight = S::one();
    let mut path = Vec::with_capacity(first.len() + 1);
    match model {
        TrajectoryModel::FairWalk { step } => {
            let step: S = to_scalar(step);
            path.push(S::zero());
            for &up in first {
                weight = weight * half.clone();
                let last = path.last().cloned().expect("nonempty");
                path.push(if up { last + step.clone() } else { last - step.clone() });
            }
        }
        TrajectoryModel::BiasedWalk { p_up, step } => {
            let (p, step): (S, S) = (to_scalar(p_up), to_scalar(step));
            path.push(S::zero());
            for &up in first {
                weight = weight * if up { p.clone() } else { S::one() - p.clone() };
                let last = path.last().cloned().expect("nonempty");
                path.push(if up { last + step.clone() } else { last - step.clone() });
            }
        }
        TrajectoryModel::PolyaUrn { red, black } => {
            let (mut r, mut b) = (*red as i64, *black as i64);
            path.push(S::from_ratio(r, r + b));
            for &draw_red in first {
                weight = weight * S::from_ratio(if draw_red { r } else { b }, r + b);
                if draw_red {
                    r += 1;
                } else {
                    b += 1;
                }
                path.push(S::from_ratio(r, r + b));
            }
        }
        TrajectoryModel::Betting { stake, initial } => {
            path.push(to_scalar(initial));
            for (k, &won) in first.iter().enumerate() {
                weight = weight * half.clone();
                let last = path.last().cloned().expect("nonempty");
                let s: S = stake.stake(&first[..k], &last);
                path.push(if won { last + s } else { last - s });
            }
        }
        TrajectoryModel::IndependentEvents { schedule } => {
            path.push(S::zero());
            for (k, &hit) in first.iter().enumerate() {
                let p: S = match schedule.exact_prob(k + 1) {
                    Some(p) => to_scalar(&p),
                    None => {
                        return Err(Error::InvalidArgument(
                            "adaptive schedules cannot be enumerated exactly".into(),
                        ))
                    }
                };
                weight = weight * if hit { p } else { S::one() - p };
                path.push(if hit { S::one() } else { S::zero() });
            }
        }
        TrajectoryModel::Custom { .. } => {
            return Err(Error::InvalidArgument(
                "custom kernels have no finite branching to enumerate".into(),
            ))
        }
    }
    Ok((path, weight))
}
