//! Discrete-time processes, filtrations and martingale structure.
//!
//! Time runs over `0..=horizon`. A [`Process`] is stored time-major so each
//! time slice is a contiguous [`RandomVariable`], which is what conditional
//! expectations consume.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::condexp::CondexpInput;
use crate::error::{Error, Result};
use crate::measure::{FiniteMeasureSpace, Partition, RandomVariable};
use crate::scalar::Scalar;

/// A real process `(f_n)_{n ≤ horizon}` on a finite set of atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProcessDoc<S>", into = "ProcessDoc<S>")]
#[serde(bound = "S: Scalar")]
pub struct Process<S> {
    slices: Vec<RandomVariable<S>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct ProcessDoc<S> {
    values: Vec<Vec<S>>,
}

impl<S: Scalar> TryFrom<ProcessDoc<S>> for Process<S> {
    type Error = Error;

    fn try_from(doc: ProcessDoc<S>) -> Result<Self> {
        Process::new(doc.values)
    }
}

impl<S: Scalar> From<Process<S>> for ProcessDoc<S> {
    fn from(p: Process<S>) -> Self {
        ProcessDoc {
            values: p.slices.into_iter().map(RandomVariable::into_values).collect(),
        }
    }
}

impl<S: Scalar> Process<S> {
    /// `rows[n][atom]` is `f_n(atom)`.
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidArgument("a process needs at least one time step".into()));
        };
        let width = first.len();
        if width == 0 {
            return Err(Error::EmptySpace);
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::RaggedProcess);
        }
        let slices = rows
            .into_iter()
            .map(RandomVariable::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(Process { slices })
    }

    pub fn from_slices(slices: Vec<RandomVariable<S>>) -> Result<Self> {
        let Some(first) = slices.first() else {
            return Err(Error::InvalidArgument("a process needs at least one time step".into()));
        };
        if slices.iter().any(|s| s.atom_count() != first.atom_count()) {
            return Err(Error::RaggedProcess);
        }
        Ok(Process { slices })
    }

    pub fn from_fn(horizon: usize, atom_count: usize, value: impl Fn(usize, usize) -> S) -> Self {
        Process {
            slices: (0..=horizon)
                .map(|n| {
                    RandomVariable::from_vec_unchecked(
                        (0..atom_count).map(|atom| value(n, atom)).collect(),
                    )
                })
                .collect(),
        }
    }

    /// Single-atom process following `path`.
    pub fn from_path(path: Vec<S>) -> Result<Self> {
        Process::new(path.into_iter().map(|v| vec![v]).collect())
    }

    pub fn constant(horizon: usize, atom_count: usize, c: S) -> Self {
        Process::from_fn(horizon, atom_count, |_, _| c.clone())
    }

    pub fn horizon(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn atom_count(&self) -> usize {
        self.slices[0].atom_count()
    }

    pub fn at(&self, n: usize) -> &RandomVariable<S> {
        &self.slices[n]
    }

    pub fn value(&self, n: usize, atom: usize) -> &S {
        self.slices[n].get(atom)
    }

    pub fn slices(&self) -> &[RandomVariable<S>] {
        &self.slices
    }

    pub fn path(&self, atom: usize) -> Vec<S> {
        self.slices.iter().map(|s| s.get(atom).clone()).collect()
    }

    pub fn map(&self, op: impl Fn(&S) -> S) -> Self {
        Process {
            slices: self.slices.iter().map(|s| s.map(&op)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, op: impl Fn(&S, &S) -> S) -> Result<Self> {
        check_horizons(self, other)?;
        if self.atom_count() != other.atom_count() {
            return Err(Error::AtomCountMismatch {
                expected: self.atom_count(),
                found: other.atom_count(),
            });
        }
        Ok(Process {
            slices: self
                .slices
                .iter()
                .zip(&other.slices)
                .map(|(a, b)| a.zip_with(b, &op))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    /// The first `horizon + 1` time steps.
    pub fn truncate(&self, horizon: usize) -> Result<Self> {
        if horizon > self.horizon() {
            return Err(Error::TimeOutOfRange {
                time: horizon,
                horizon: self.horizon(),
            });
        }
        Ok(Process {
            slices: self.slices[..=horizon].to_vec(),
        })
    }
}

fn check_horizons<S, T>(a: &Process<S>, b: &Process<T>) -> Result<()> {
    let (l, r) = (a.slices.len(), b.slices.len());
    if l != r {
        return Err(Error::HorizonMismatch {
            left: l - 1,
            right: r - 1,
        });
    }
    Ok(())
}

/// A nondecreasing sequence of sub-σ-algebras of an ambient σ-algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FiltrationDoc", into = "FiltrationDoc")]
pub struct Filtration {
    steps: Vec<Partition>,
    ambient: Partition,
}

#[derive(Serialize, Deserialize)]
struct FiltrationDoc {
    steps: Vec<Partition>,
    #[serde(default)]
    ambient: Option<Partition>,
}

impl TryFrom<FiltrationDoc> for Filtration {
    type Error = Error;

    fn try_from(doc: FiltrationDoc) -> Result<Self> {
        let n = doc
            .steps
            .first()
            .map(Partition::atom_count)
            .ok_or_else(|| Error::InvalidArgument("a filtration needs at least one step".into()))?;
        let ambient = doc.ambient.unwrap_or_else(|| Partition::discrete(n));
        Filtration::new(doc.steps, ambient)
    }
}

impl From<Filtration> for FiltrationDoc {
    fn from(f: Filtration) -> Self {
        FiltrationDoc {
            steps: f.steps,
            ambient: Some(f.ambient),
        }
    }
}

impl Filtration {
    pub fn new(steps: Vec<Partition>, ambient: Partition) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidArgument("a filtration needs at least one step".into()));
        }
        for (step, p) in steps.iter().enumerate() {
            if !p.le(&ambient)? {
                return Err(Error::FiltrationExceedsAmbient { step });
            }
        }
        for (step, w) in steps.windows(2).enumerate() {
            if !w[0].le(&w[1])? {
                return Err(Error::NonMonotoneFiltration { step });
            }
        }
        Ok(Filtration { steps, ambient })
    }

    /// The same partition at every time, inside the full power set.
    pub fn constant(p: Partition, horizon: usize) -> Self {
        let ambient = Partition::discrete(p.atom_count());
        Filtration {
            steps: vec![p; horizon + 1],
            ambient,
        }
    }

    /// `ℱ_n = σ(f_0, …, f_n)`, capped by `ambient`.
    pub fn natural<S: Scalar>(f: &Process<S>, ambient: Partition) -> Result<Self> {
        if ambient.atom_count() != f.atom_count() {
            return Err(Error::AtomCountMismatch {
                expected: f.atom_count(),
                found: ambient.atom_count(),
            });
        }
        let mut steps = Vec::with_capacity(f.horizon() + 1);
        let mut acc = Partition::trivial(f.atom_count());
        for slice in f.slices() {
            acc = acc.join(&Partition::generated_by(slice))?;
            let capped = if acc.le(&ambient)? {
                acc.clone()
            } else {
                acc.meet(&ambient)?
            };
            steps.push(capped);
        }
        Filtration::new(steps, ambient)
    }

    pub fn horizon(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn atom_count(&self) -> usize {
        self.ambient.atom_count()
    }

    pub fn step(&self, n: usize) -> &Partition {
        &self.steps[n]
    }

    pub fn steps(&self) -> &[Partition] {
        &self.steps
    }

    pub fn ambient(&self) -> &Partition {
        &self.ambient
    }

    /// `ℱ_∞ = ⋁ ℱ_n`, computed as an explicit join.
    pub fn sup(&self) -> Partition {
        self.steps
            .iter()
            .skip(1)
            .fold(self.steps[0].clone(), |acc, p| {
                acc.join(p).expect("steps share an atom count")
            })
    }

    /// `μ[h | ℱ_n]`.
    pub fn condexp<S: Scalar>(
        &self,
        space: &FiniteMeasureSpace<S>,
        h: &RandomVariable<S>,
        n: usize,
    ) -> Result<RandomVariable<S>> {
        Ok(CondexpInput::new(space, &self.ambient, &self.steps[n], h)?.condexp())
    }

    fn check_process<S: Scalar>(&self, f: &Process<S>) -> Result<()> {
        if f.slices.len() != self.steps.len() {
            return Err(Error::HorizonMismatch {
                left: f.slices.len() - 1,
                right: self.horizon(),
            });
        }
        if f.slices[0].atom_count() != self.atom_count() {
            return Err(Error::AtomCountMismatch {
                expected: self.atom_count(),
                found: f.slices[0].atom_count(),
            });
        }
        Ok(())
    }

    /// First time `n` at which `f_n` is not ℱ_n-measurable.
    pub fn first_non_adapted<S: Scalar>(&self, f: &Process<S>) -> Result<Option<usize>> {
        self.check_process(f)?;
        for (n, slice) in f.slices().iter().enumerate() {
            if !self.steps[n].is_measurable(slice)? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    pub fn is_adapted<S: Scalar>(&self, f: &Process<S>) -> Result<bool> {
        Ok(self.first_non_adapted(f)?.is_none())
    }

    /// `c_0` is ℱ_0-measurable and `c_{n+1}` is ℱ_n-measurable.
    pub fn first_non_predictable<S: Scalar>(&self, c: &Process<S>) -> Result<Option<usize>> {
        self.check_process(c)?;
        for (n, slice) in c.slices().iter().enumerate() {
            let info = &self.steps[n.saturating_sub(1)];
            if !info.is_measurable(slice)? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    pub fn is_predictable<S: Scalar>(&self, c: &Process<S>) -> Result<bool> {
        Ok(self.first_non_predictable(c)?.is_none())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MartingaleClass {
    Martingale,
    Submartingale,
    Supermartingale,
    None,
}

impl MartingaleClass {
    /// Whether a process of this class satisfies the submartingale property.
    pub fn is_submartingale(self) -> bool {
        matches!(self, MartingaleClass::Martingale | MartingaleClass::Submartingale)
    }

    pub fn is_supermartingale(self) -> bool {
        matches!(self, MartingaleClass::Martingale | MartingaleClass::Supermartingale)
    }

    pub fn satisfies(self, claimed: MartingaleClass) -> bool {
        match claimed {
            MartingaleClass::Martingale => self == MartingaleClass::Martingale,
            MartingaleClass::Submartingale => self.is_submartingale(),
            MartingaleClass::Supermartingale => self.is_supermartingale(),
            MartingaleClass::None => true,
        }
    }
}

impl fmt::Display for MartingaleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MartingaleClass::Martingale => "martingale",
            MartingaleClass::Submartingale => "submartingale",
            MartingaleClass::Supermartingale => "supermartingale",
            MartingaleClass::None => "none",
        })
    }
}

/// A charged atom where `μ[f_j | ℱ_i] ≠ f_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairViolation {
    pub i: usize,
    pub j: usize,
    pub atom: usize,
}

impl fmt::Display for PairViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(i={}, j={}, atom={})", self.i, self.j, self.atom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: MartingaleClass,
    pub not_adapted_at: Option<usize>,
    /// First place where the conditional expectation exceeds `f_i`.
    pub first_excess: Option<PairViolation>,
    /// First place where the conditional expectation falls short of `f_i`.
    pub first_deficit: Option<PairViolation>,
}

impl Classification {
    /// Earliest violation of the martingale equality, if any.
    pub fn witness(&self) -> Option<PairViolation> {
        match (self.first_excess, self.first_deficit) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Compares `μ[f_j | ℱ_i]` with `f_i` on charged atoms.
fn pair_deviation<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    filt: &Filtration,
    f: &Process<S>,
    i: usize,
    j: usize,
) -> Result<(Option<PairViolation>, Option<PairViolation>)> {
    let ce = filt.condexp(space, f.at(j), i)?;
    let mut excess = None;
    let mut deficit = None;
    for atom in 0..space.atom_count() {
        if !space.is_charged(atom) {
            continue;
        }
        let at = PairViolation { i, j, atom };
        match ce.get(atom).ae_cmp(f.value(i, atom)) {
            Ordering::Greater if excess.is_none() => excess = Some(at),
            Ordering::Less if deficit.is_none() => deficit = Some(at),
            _ => {}
        }
        if excess.is_some() && deficit.is_some() {
            break;
        }
    }
    Ok((excess, deficit))
}

fn classify_pairs<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    filt: &Filtration,
    f: &Process<S>,
    pairs: Vec<(usize, usize)>,
) -> Result<Classification> {
    filt.check_process(f)?;
    space.check_len(f.atom_count())?;
    if let Some(n) = filt.first_non_adapted(f)? {
        return Ok(Classification {
            class: MartingaleClass::None,
            not_adapted_at: Some(n),
            first_excess: None,
            first_deficit: None,
        });
    }
    let results = pairs
        .into_par_iter()
        .map(|(i, j)| pair_deviation(space, filt, f, i, j))
        .collect::<Result<Vec<_>>>()?;
    // Pairs were generated in lexicographic order, so the first hit is the
    // smallest witness regardless of scheduling.
    let first_excess = results.iter().find_map(|r| r.0);
    let first_deficit = results.iter().find_map(|r| r.1);
    let class = match (first_excess.is_some(), first_deficit.is_some()) {
        (false, false) => MartingaleClass::Martingale,
        (true, false) => MartingaleClass::Submartingale,
        (false, true) => MartingaleClass::Supermartingale,
        (true, true) => MartingaleClass::None,
    };
    Ok(Classification {
        class,
        not_adapted_at: None,
        first_excess,
        first_deficit,
    })
}

/// Classifies `f` by checking `μ[f_j | ℱ_i]` against `f_i` for every pair
/// `i ≤ j`.
pub fn classify<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    filt: &Filtration,
    f: &Process<S>,
) -> Result<Classification> {
    let h = f.horizon();
    let pairs = (0..=h).flat_map(|i| (i..=h).map(move |j| (i, j))).collect();
    classify_pairs(space, filt, f, pairs)
}

/// Like [`classify`] but only over consecutive pairs `(i, i + 1)`; equal to
/// it by the tower property.
pub fn classify_consecutive<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    filt: &Filtration,
    f: &Process<S>,
) -> Result<Classification> {
    let pairs = (0..f.horizon()).map(|i| (i, i + 1)).collect();
    classify_pairs(space, filt, f, pairs)
}

/// Requires `f` to classify at least as `expected`.
pub fn require_class<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    filt: &Filtration,
    f: &Process<S>,
    expected: MartingaleClass,
) -> Result<Classification> {
    let c = classify(space, filt, f)?;
    if !c.class.satisfies(expected) {
        return Err(Error::WrongClass {
            expected: expected.to_string(),
            found: c.class.to_string(),
        });
    }
    Ok(c)
}

/// A process bundled with its space and filtration, already classified.
///
/// Theorem checks that need a (sub)martingale take this so that the
/// classification runs once per instance rather than once per check.
#[derive(Debug, Clone)]
pub struct CheckedProcess<'a, S> {
    pub space: &'a FiniteMeasureSpace<S>,
    pub filtration: &'a Filtration,
    pub process: &'a Process<S>,
    pub class: MartingaleClass,
}

impl<'a, S: Scalar> CheckedProcess<'a, S> {
    /// Classifies `f` and fails with [`Error::WrongClass`] unless it is at
    /// least `required`.
    pub fn new(
        space: &'a FiniteMeasureSpace<S>,
        filtration: &'a Filtration,
        process: &'a Process<S>,
        required: MartingaleClass,
    ) -> Result<Self> {
        let class = require_class(space, filtration, process, required)?.class;
        Ok(CheckedProcess {
            space,
            filtration,
            process,
            class,
        })
    }

    pub fn submartingale(
        space: &'a FiniteMeasureSpace<S>,
        filtration: &'a Filtration,
        process: &'a Process<S>,
    ) -> Result<Self> {
        Self::new(space, filtration, process, MartingaleClass::Submartingale)
    }
}

/// `(c · f)_n = Σ_{k<n} c_{k+1} (f_{k+1} − f_k)`, with `(c · f)_0 = 0`.
pub fn stochastic_integral<S: Scalar>(c: &Process<S>, f: &Process<S>) -> Result<Process<S>> {
    check_horizons(c, f)?;
    if c.atom_count() != f.atom_count() {
        return Err(Error::AtomCountMismatch {
            expected: f.atom_count(),
            found: c.atom_count(),
        });
    }
    let mut slices = Vec::with_capacity(f.horizon() + 1);
    let mut acc = RandomVariable::zeros(f.atom_count());
    slices.push(acc.clone());
    for n in 1..=f.horizon() {
        let increment = f.at(n).sub(f.at(n - 1)).mul(c.at(n));
        acc = acc.add(&increment);
        slices.push(acc.clone());
    }
    Ok(Process { slices })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoobDecomposition<S> {
    pub martingale_part: Process<S>,
    pub predictable_part: Process<S>,
}

/// Splits an adapted `f` into `M + A` with `A_0 = 0`,
/// `A_{n+1} = A_n + μ[f_{n+1} − f_n | ℱ_n]` and `M = f − A`.
pub fn doob_decomposition<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    filt: &Filtration,
    f: &Process<S>,
) -> Result<DoobDecomposition<S>> {
    space.check_len(f.atom_count())?;
    if let Some(time) = filt.first_non_adapted(f)? {
        return Err(Error::NotAdapted { time });
    }
    let mut a = Vec::with_capacity(f.horizon() + 1);
    let mut acc = RandomVariable::zeros(f.atom_count());
    a.push(acc.clone());
    for k in 0..f.horizon() {
        let increment = f.at(k + 1).sub(f.at(k));
        acc = acc.add(&filt.condexp(space, &increment, k)?);
        a.push(acc.clone());
    }
    let predictable_part = Process { slices: a };
    let martingale_part = f.sub(&predictable_part)?;
    Ok(DoobDecomposition {
        martingale_part,
        predictable_part,
    })
}
