//! Stopping times with values in `ℕ ∪ {∞}`, hitting times and optional
//! stopping.

use std::fmt;
use std::sync::Arc;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::measure::{AtomSet, RandomVariable};
use crate::process::{CheckedProcess, Filtration, MartingaleClass, Process};
use crate::report::InequalityReport;
use crate::scalar::Scalar;

/// A time in `ℕ ∪ {∞}`; `Infinity` is the top element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedTime {
    Finite(usize),
    Infinity,
}

impl ExtendedTime {
    pub fn finite(self) -> Option<usize> {
        match self {
            ExtendedTime::Finite(n) => Some(n),
            ExtendedTime::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == ExtendedTime::Infinity
    }

    /// `self ∧ n`, always finite.
    pub fn min_finite(self, n: usize) -> usize {
        match self {
            ExtendedTime::Finite(k) => k.min(n),
            ExtendedTime::Infinity => n,
        }
    }

    pub fn le_time(self, n: usize) -> bool {
        matches!(self, ExtendedTime::Finite(k) if k <= n)
    }
}

impl From<usize> for ExtendedTime {
    fn from(n: usize) -> Self {
        ExtendedTime::Finite(n)
    }
}

impl fmt::Display for ExtendedTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedTime::Finite(n) => write!(f, "{n}"),
            ExtendedTime::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedTime {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        match self {
            ExtendedTime::Finite(n) => s.serialize_u64(*n as u64),
            ExtendedTime::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct TimeVisitor;

        impl Visitor<'_> for TimeVisitor {
            type Value = ExtendedTime;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtendedTime, E> {
                usize::try_from(v)
                    .map(ExtendedTime::Finite)
                    .map_err(|_| E::custom("time does not fit in usize"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtendedTime, E> {
                u64::try_from(v)
                    .map_err(|_| E::custom("time must be nonnegative"))
                    .and_then(|v| self.visit_u64(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtendedTime, E> {
                match v {
                    "inf" | "∞" => Ok(ExtendedTime::Infinity),
                    other => other
                        .parse::<usize>()
                        .map(ExtendedTime::Finite)
                        .map_err(|_| E::custom(format!("invalid time {other:?}"))),
                }
            }
        }

        d.deserialize_any(TimeVisitor)
    }
}

/// A random time, one [`ExtendedTime`] per atom. Validity against a
/// filtration is checked separately by [`StoppingTime::is_stopping_time`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StoppingTime {
    times: Vec<ExtendedTime>,
}

impl StoppingTime {
    pub fn new(times: Vec<ExtendedTime>) -> Self {
        StoppingTime { times }
    }

    pub fn constant(atom_count: usize, t: ExtendedTime) -> Self {
        StoppingTime {
            times: vec![t; atom_count],
        }
    }

    pub fn from_finite(times: Vec<usize>) -> Self {
        StoppingTime {
            times: times.into_iter().map(ExtendedTime::Finite).collect(),
        }
    }

    pub fn atom_count(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[ExtendedTime] {
        &self.times
    }

    pub fn get(&self, atom: usize) -> ExtendedTime {
        self.times[atom]
    }

    /// `{ω | τ(ω) ≤ i}`.
    pub fn level_set(&self, i: usize) -> AtomSet {
        AtomSet::from_mask(self.times.iter().map(|t| t.le_time(i)).collect())
    }

    /// First `i` at which `{τ ≤ i}` fails to be `ℱ_i`-measurable.
    pub fn first_violation(&self, filt: &Filtration) -> Result<Option<usize>> {
        if self.atom_count() != filt.atom_count() {
            return Err(Error::AtomCountMismatch {
                expected: filt.atom_count(),
                found: self.atom_count(),
            });
        }
        for i in 0..=filt.horizon() {
            if !filt.step(i).is_set_measurable(&self.level_set(i))? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    pub fn is_stopping_time(&self, filt: &Filtration) -> Result<bool> {
        Ok(self.first_violation(filt)?.is_none())
    }

    fn zip(&self, other: &Self, op: impl Fn(ExtendedTime, ExtendedTime) -> ExtendedTime) -> Result<Self> {
        if self.atom_count() != other.atom_count() {
            return Err(Error::AtomCountMismatch {
                expected: self.atom_count(),
                found: other.atom_count(),
            });
        }
        Ok(StoppingTime {
            times: self
                .times
                .iter()
                .zip(&other.times)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn min(&self, other: &Self) -> Result<Self> {
        self.zip(other, Ord::min)
    }

    pub fn max(&self, other: &Self) -> Result<Self> {
        self.zip(other, Ord::max)
    }

    /// The finite values, failing on the first `∞` or on a value past
    /// `horizon`.
    pub fn bounded_by(&self, horizon: usize) -> Result<Vec<usize>> {
        self.times
            .iter()
            .enumerate()
            .map(|(atom, t)| match t {
                ExtendedTime::Infinity => Err(Error::UnboundedStoppingTime { atom }),
                ExtendedTime::Finite(n) if *n > horizon => Err(Error::TimeOutOfRange {
                    time: *n,
                    horizon,
                }),
                ExtendedTime::Finite(n) => Ok(*n),
            })
            .collect()
    }
}

/// A set of values used as a hitting target.
///
/// The three closed forms serialize; `Custom` carries an arbitrary membership
/// test and does not.
#[derive(Clone)]
pub enum ValuePredicate<S> {
    /// `(−∞, a]`
    AtMost(S),
    /// `[b, ∞)`
    AtLeast(S),
    /// `[lo, hi]`
    Interval(S, S),
    Custom(Arc<dyn Fn(&S) -> bool + Send + Sync>),
}

impl<S: Scalar> ValuePredicate<S> {
    pub fn custom(test: impl Fn(&S) -> bool + Send + Sync + 'static) -> Self {
        ValuePredicate::Custom(Arc::new(test))
    }

    pub fn contains(&self, v: &S) -> bool {
        match self {
            ValuePredicate::AtMost(a) => v <= a,
            ValuePredicate::AtLeast(b) => v >= b,
            ValuePredicate::Interval(lo, hi) => lo <= v && v <= hi,
            ValuePredicate::Custom(test) => test(v),
        }
    }
}

impl<S: fmt::Debug> fmt::Debug for ValuePredicate<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuePredicate::AtMost(a) => f.debug_tuple("AtMost").field(a).finish(),
            ValuePredicate::AtLeast(b) => f.debug_tuple("AtLeast").field(b).finish(),
            ValuePredicate::Interval(lo, hi) => {
                f.debug_tuple("Interval").field(lo).field(hi).finish()
            }
            ValuePredicate::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[serde(bound = "S: Scalar")]
enum PredicateDoc<S> {
    AtMost { a: S },
    AtLeast { b: S },
    Interval { lo: S, hi: S },
}

impl<S: Scalar> Serialize for ValuePredicate<S> {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let doc = match self {
            ValuePredicate::AtMost(a) => PredicateDoc::AtMost { a: a.clone() },
            ValuePredicate::AtLeast(b) => PredicateDoc::AtLeast { b: b.clone() },
            ValuePredicate::Interval(lo, hi) => PredicateDoc::Interval {
                lo: lo.clone(),
                hi: hi.clone(),
            },
            ValuePredicate::Custom(_) => {
                return Err(serde::ser::Error::custom(
                    "custom predicates cannot be serialized",
                ))
            }
        };
        doc.serialize(s)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for ValuePredicate<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match PredicateDoc::<S>::deserialize(d)? {
            PredicateDoc::AtMost { a } => ValuePredicate::AtMost(a),
            PredicateDoc::AtLeast { b } => ValuePredicate::AtLeast(b),
            PredicateDoc::Interval { lo, hi } => ValuePredicate::Interval(lo, hi),
        })
    }
}

/// Least `j ∈ [n, m]` with `hit(path[j])`, else `m`.
pub(crate) fn hitting_path<S>(path: &[S], hit: impl Fn(&S) -> bool, n: usize, m: usize) -> usize {
    if n > m {
        return m;
    }
    (n..=m).find(|&j| hit(&path[j])).unwrap_or(m)
}

/// Bounded-window hitting time: per atom, the least `j ∈ [n, m]` with
/// `f_j ∈ s`, or `m` when there is none. An empty window (`n > m`) gives `m`.
pub fn hitting<S: Scalar>(
    f: &Process<S>,
    s: &ValuePredicate<S>,
    n: usize,
    m: usize,
) -> Result<Vec<usize>> {
    if m > f.horizon() {
        return Err(Error::TimeOutOfRange {
            time: m,
            horizon: f.horizon(),
        });
    }
    Ok((0..f.atom_count())
        .map(|atom| {
            if n > m {
                return m;
            }
            (n..=m).find(|&j| s.contains(f.value(j, atom))).unwrap_or(m)
        })
        .collect())
}

/// First time in `[n, horizon]` with `f_j ∈ s`, or `∞`.
pub fn hitting_unbounded<S: Scalar>(
    f: &Process<S>,
    s: &ValuePredicate<S>,
    n: usize,
) -> Result<StoppingTime> {
    if n > f.horizon() {
        return Err(Error::TimeOutOfRange {
            time: n,
            horizon: f.horizon(),
        });
    }
    Ok(StoppingTime::new(
        (0..f.atom_count())
            .map(|atom| {
                (n..=f.horizon())
                    .find(|&j| s.contains(f.value(j, atom)))
                    .map_or(ExtendedTime::Infinity, ExtendedTime::Finite)
            })
            .collect(),
    ))
}

/// Wraps [`hitting`] as a stopping time and checks it against `filt`.
pub fn check_hitting_is_stopping_time<S: Scalar>(
    f: &Process<S>,
    s: &ValuePredicate<S>,
    n: usize,
    m: usize,
    filt: &Filtration,
) -> Result<bool> {
    if let Some(time) = filt.first_non_adapted(f)? {
        return Err(Error::NotAdapted { time });
    }
    StoppingTime::from_finite(hitting(f, s, n, m)?).is_stopping_time(filt)
}

/// `g_n(ω) = f_{τ(ω) ∧ n}(ω)`.
pub fn stopped_process<S: Scalar>(f: &Process<S>, tau: &StoppingTime) -> Result<Process<S>> {
    if tau.atom_count() != f.atom_count() {
        return Err(Error::AtomCountMismatch {
            expected: f.atom_count(),
            found: tau.atom_count(),
        });
    }
    Ok(Process::from_fn(f.horizon(), f.atom_count(), |n, atom| {
        f.value(tau.get(atom).min_finite(n), atom).clone()
    }))
}

/// `f_τ` as a random variable; every value of `τ` must be finite and within
/// the horizon.
pub fn value_at<S: Scalar>(f: &Process<S>, tau: &StoppingTime) -> Result<RandomVariable<S>> {
    if tau.atom_count() != f.atom_count() {
        return Err(Error::AtomCountMismatch {
            expected: f.atom_count(),
            found: tau.atom_count(),
        });
    }
    let times = tau.bounded_by(f.horizon())?;
    RandomVariable::new(
        times
            .iter()
            .enumerate()
            .map(|(atom, &t)| f.value(t, atom).clone())
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionalStoppingReport<S> {
    /// `μ[f_τ] ≤ μ[f_σ]`.
    pub inequality: InequalityReport<S>,
    /// Present when the process is a martingale, where equality must hold.
    pub equality: Option<bool>,
}

impl<S: Scalar> OptionalStoppingReport<S> {
    pub fn holds(&self) -> bool {
        self.inequality.holds && self.equality.unwrap_or(true)
    }
}

/// Checks `μ[f_τ] ≤ μ[f_σ]` for bounded stopping times `τ ≤ σ`.
pub fn check_optional_stopping<S: Scalar>(
    sub: &CheckedProcess<'_, S>,
    tau: &StoppingTime,
    sigma: &StoppingTime,
) -> Result<OptionalStoppingReport<S>> {
    let f = sub.process;
    for st in [tau, sigma] {
        if let Some(time) = st.first_violation(sub.filtration)? {
            return Err(Error::NotStoppingTime { time });
        }
    }
    let t = tau.bounded_by(f.horizon())?;
    let s = sigma.bounded_by(f.horizon())?;
    if let Some(atom) = (0..t.len()).find(|&atom| t[atom] > s[atom]) {
        return Err(Error::UnorderedStoppingTimes { atom });
    }
    let lhs = sub.space.integral(&value_at(f, tau)?)?;
    let rhs = sub.space.integral(&value_at(f, sigma)?)?;
    let equality = (sub.class == MartingaleClass::Martingale).then(|| lhs.ae_eq(&rhs));
    Ok(OptionalStoppingReport {
        inequality: InequalityReport::le(lhs, rhs),
        equality,
    })
}
