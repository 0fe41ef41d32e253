//! Finite measure spaces, atom sets, partitions and integrals.
//!
//! On a finite set of atoms every σ-algebra is generated by a partition, so
//! sub-σ-algebras are represented as [`Partition`]s and measurability means
//! "constant on every block". Measures are not normalised: the total mass is
//! any finite nonnegative number.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Atom weights of a finite measure space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDoc<S>", into = "SpaceDoc<S>")]
#[serde(bound = "S: Scalar")]
pub struct FiniteMeasureSpace<S> {
    weights: Vec<S>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct SpaceDoc<S> {
    weights: Vec<S>,
}

impl<S: Scalar> TryFrom<SpaceDoc<S>> for FiniteMeasureSpace<S> {
    type Error = Error;

    fn try_from(doc: SpaceDoc<S>) -> Result<Self> {
        FiniteMeasureSpace::new(doc.weights)
    }
}

impl<S: Scalar> From<FiniteMeasureSpace<S>> for SpaceDoc<S> {
    fn from(space: FiniteMeasureSpace<S>) -> Self {
        SpaceDoc {
            weights: space.weights,
        }
    }
}

impl<S: Scalar> FiniteMeasureSpace<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (atom, w) in weights.iter().enumerate() {
            if !w.is_finite() || w.is_negative() {
                return Err(Error::InvalidWeight { atom });
            }
        }
        Ok(FiniteMeasureSpace { weights })
    }

    /// Probability space with `atom_count` equally likely atoms.
    pub fn uniform(atom_count: usize) -> Result<Self> {
        if atom_count == 0 {
            return Err(Error::EmptySpace);
        }
        let w = S::from_ratio(1, atom_count as i64);
        Ok(FiniteMeasureSpace {
            weights: vec![w; atom_count],
        })
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> &S {
        &self.weights[atom]
    }

    /// Whether the atom carries positive mass, i.e. matters almost everywhere.
    pub fn is_charged(&self, atom: usize) -> bool {
        self.weights[atom] > S::zero()
    }

    pub fn total_mass(&self) -> S {
        self.weights
            .iter()
            .fold(S::zero(), |acc, w| acc + w.clone())
    }

    pub fn is_probability(&self) -> bool {
        self.total_mass().ae_eq(&S::one())
    }

    pub fn check_set(&self, s: &AtomSet) -> Result<()> {
        self.check_len(s.atom_count())
    }

    pub fn check_len(&self, found: usize) -> Result<()> {
        if found != self.atom_count() {
            return Err(Error::AtomCountMismatch {
                expected: self.atom_count(),
                found,
            });
        }
        Ok(())
    }

    /// `μ(s)`.
    pub fn measure(&self, s: &AtomSet) -> Result<S> {
        self.check_set(s)?;
        Ok(s.iter()
            .fold(S::zero(), |acc, atom| acc + self.weights[atom].clone()))
    }

    /// `μ[f] = Σ f(ω) μ(ω)`.
    pub fn integral(&self, f: &RandomVariable<S>) -> Result<S> {
        self.check_len(f.atom_count())?;
        Ok(self
            .weights
            .iter()
            .zip(f.values())
            .fold(S::zero(), |acc, (w, v)| acc + w.clone() * v.clone()))
    }

    /// `∫_s f dμ`.
    pub fn set_integral(&self, f: &RandomVariable<S>, s: &AtomSet) -> Result<S> {
        self.check_len(f.atom_count())?;
        self.check_set(s)?;
        Ok(s.iter().fold(S::zero(), |acc, atom| {
            acc + self.weights[atom].clone() * f.values()[atom].clone()
        }))
    }

    /// The Lᵖ seminorm. The essential supremum ignores atoms of zero mass.
    pub fn snorm(&self, f: &RandomVariable<S>, p: Exponent) -> Result<Norm<S>> {
        self.check_len(f.atom_count())?;
        let raw = match p {
            Exponent::Finite(p) => self
                .weights
                .iter()
                .zip(f.values())
                .fold(S::zero(), |acc, (w, v)| acc + v.abs().powi(p) * w.clone()),
            Exponent::Infinity => self
                .weights
                .iter()
                .zip(f.values())
                .filter(|(w, _)| **w > S::zero())
                .fold(S::zero(), |acc, (_, v)| acc.max_of(v.abs())),
        };
        Ok(Norm { exponent: p, raw })
    }

    /// `f = g` outside atoms of zero mass.
    pub fn ae_eq(&self, f: &RandomVariable<S>, g: &RandomVariable<S>) -> Result<bool> {
        self.first_ae_violation(f, g, |a, b| a.ae_eq(b))
            .map(|v| v.is_none())
    }

    /// `f ≤ g` outside atoms of zero mass.
    pub fn ae_le(&self, f: &RandomVariable<S>, g: &RandomVariable<S>) -> Result<bool> {
        self.first_ae_violation(f, g, |a, b| a.ae_le(b))
            .map(|v| v.is_none())
    }

    /// First charged atom where `holds(f(ω), g(ω))` fails.
    pub fn first_ae_violation(
        &self,
        f: &RandomVariable<S>,
        g: &RandomVariable<S>,
        holds: impl Fn(&S, &S) -> bool,
    ) -> Result<Option<usize>> {
        self.check_len(f.atom_count())?;
        self.check_len(g.atom_count())?;
        Ok((0..self.atom_count())
            .find(|&atom| self.is_charged(atom) && !holds(&f.values()[atom], &g.values()[atom])))
    }
}

/// A subset of the atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AtomSet {
    members: Vec<bool>,
}

impl AtomSet {
    pub fn empty(atom_count: usize) -> Self {
        AtomSet {
            members: vec![false; atom_count],
        }
    }

    pub fn full(atom_count: usize) -> Self {
        AtomSet {
            members: vec![true; atom_count],
        }
    }

    pub fn from_indices(atom_count: usize, atoms: &[usize]) -> Result<Self> {
        let mut s = AtomSet::empty(atom_count);
        for &atom in atoms {
            if atom >= atom_count {
                return Err(Error::AtomOutOfRange { atom, atom_count });
            }
            s.members[atom] = true;
        }
        Ok(s)
    }

    pub fn from_mask(members: Vec<bool>) -> Self {
        AtomSet { members }
    }

    pub fn from_predicate(atom_count: usize, pred: impl Fn(usize) -> bool) -> Self {
        AtomSet {
            members: (0..atom_count).map(pred).collect(),
        }
    }

    pub fn atom_count(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members[atom]
    }

    pub fn insert(&mut self, atom: usize) {
        self.members[atom] = true;
    }

    pub fn remove(&mut self, atom: usize) {
        self.members[atom] = false;
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|m| *m)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.then_some(i))
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn complement(&self) -> AtomSet {
        AtomSet {
            members: self.members.iter().map(|m| !m).collect(),
        }
    }

    pub fn union(&self, other: &AtomSet) -> AtomSet {
        AtomSet {
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    pub fn intersection(&self, other: &AtomSet) -> AtomSet {
        AtomSet {
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| *a && *b)
                .collect(),
        }
    }
}

/// A partition of the atoms, standing for the σ-algebra it generates.
///
/// Block ids are canonical: blocks are numbered in order of their smallest
/// atom, so two partitions with the same blocks compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartitionDoc", into = "PartitionDoc")]
pub struct Partition {
    block_of: Vec<usize>,
    block_count: usize,
}

#[derive(Serialize, Deserialize)]
struct PartitionDoc {
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<PartitionDoc> for Partition {
    type Error = Error;

    fn try_from(doc: PartitionDoc) -> Result<Self> {
        let n = doc.blocks.iter().map(Vec::len).sum();
        Partition::from_blocks(n, &doc.blocks)
    }
}

impl From<Partition> for PartitionDoc {
    fn from(p: Partition) -> Self {
        PartitionDoc { blocks: p.blocks() }
    }
}

impl Partition {
    /// Partition whose blocks are the classes of equal labels.
    pub fn from_labels<K: Hash + Eq>(labels: impl IntoIterator<Item = K>) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let block_of: Vec<usize> = labels
            .into_iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k).or_insert(next)
            })
            .collect();
        Partition {
            block_count: ids.len(),
            block_of,
        }
    }

    pub fn from_blocks(atom_count: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut labels: Vec<Option<usize>> = vec![None; atom_count];
        for (id, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {} is empty", id)));
            }
            for &atom in block {
                if atom >= atom_count {
                    return Err(Error::AtomOutOfRange { atom, atom_count });
                }
                if labels[atom].replace(id).is_some() {
                    return Err(Error::InvalidPartition(format!(
                        "atom {} appears in more than one block",
                        atom
                    )));
                }
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(atom, l)| {
                l.ok_or_else(|| Error::InvalidPartition(format!("atom {} is in no block", atom)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Partition::from_labels(labels))
    }

    /// The trivial σ-algebra `{∅, Ω}`.
    pub fn trivial(atom_count: usize) -> Self {
        Partition {
            block_of: vec![0; atom_count],
            block_count: usize::from(atom_count > 0),
        }
    }

    /// The full power set.
    pub fn discrete(atom_count: usize) -> Self {
        Partition {
            block_of: (0..atom_count).collect(),
            block_count: atom_count,
        }
    }

    /// σ(f): atoms share a block iff `f` takes the same value on them.
    pub fn generated_by<S: Scalar>(f: &RandomVariable<S>) -> Self {
        Partition::from_labels(f.values().iter().map(Scalar::key))
    }

    pub fn atom_count(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    pub fn labels(&self) -> &[usize] {
        &self.block_of
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count];
        for (atom, &b) in self.block_of.iter().enumerate() {
            blocks[b].push(atom);
        }
        blocks
    }

    pub fn block_set(&self, block: usize) -> AtomSet {
        AtomSet::from_predicate(self.atom_count(), |atom| self.block_of[atom] == block)
    }

    fn check_same(&self, other: &Partition) -> Result<()> {
        if self.atom_count() != other.atom_count() {
            return Err(Error::AtomCountMismatch {
                expected: self.atom_count(),
                found: other.atom_count(),
            });
        }
        Ok(())
    }

    /// `self ≤ other` as σ-algebras: every block of `other` lies inside a
    /// block of `self`, i.e. `other` refines `self`.
    pub fn le(&self, other: &Partition) -> Result<bool> {
        self.check_same(other)?;
        let mut image: Vec<Option<usize>> = vec![None; other.block_count];
        for (atom, &ob) in other.block_of.iter().enumerate() {
            let sb = self.block_of[atom];
            match image[ob] {
                None => image[ob] = Some(sb),
                Some(prev) if prev != sb => return Ok(false),
                Some(_) => {}
            }
        }
        Ok(true)
    }

    /// Common refinement (σ-algebra generated by both).
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.check_same(other)?;
        Ok(Partition::from_labels(
            self.block_of.iter().copied().zip(other.block_of.iter().copied()),
        ))
    }

    /// Finest partition coarser than both (intersection of the σ-algebras).
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        self.check_same(other)?;
        let n = self.atom_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for p in [self, other] {
            let mut first: Vec<Option<usize>> = vec![None; p.block_count];
            for atom in 0..n {
                let b = p.block_of[atom];
                match first[b] {
                    None => first[b] = Some(atom),
                    Some(root) => {
                        let (ra, rb) = (find(&mut parent, root), find(&mut parent, atom));
                        if ra != rb {
                            parent[rb] = ra;
                        }
                    }
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|a| find(&mut parent, a)).collect();
        Ok(Partition::from_labels(labels))
    }

    /// `f` is constant on every block.
    pub fn is_measurable<S: Scalar>(&self, f: &RandomVariable<S>) -> Result<bool> {
        if f.atom_count() != self.atom_count() {
            return Err(Error::AtomCountMismatch {
                expected: self.atom_count(),
                found: f.atom_count(),
            });
        }
        let mut seen: Vec<Option<&S>> = vec![None; self.block_count];
        for (atom, v) in f.values().iter().enumerate() {
            let b = self.block_of[atom];
            match seen[b] {
                None => seen[b] = Some(v),
                Some(prev) if prev.key() != v.key() => return Ok(false),
                Some(_) => {}
            }
        }
        Ok(true)
    }

    /// `s` is a union of blocks.
    pub fn is_set_measurable(&self, s: &AtomSet) -> Result<bool> {
        if s.atom_count() != self.atom_count() {
            return Err(Error::AtomCountMismatch {
                expected: self.atom_count(),
                found: s.atom_count(),
            });
        }
        let mut seen: Vec<Option<bool>> = vec![None; self.block_count];
        for (atom, &m) in s.mask().iter().enumerate() {
            let b = self.block_of[atom];
            match seen[b] {
                None => seen[b] = Some(m),
                Some(prev) if prev != m => return Ok(false),
                Some(_) => {}
            }
        }
        Ok(true)
    }
}

/// A real function on the atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VariableDoc<S>", into = "VariableDoc<S>")]
#[serde(bound = "S: Scalar")]
pub struct RandomVariable<S> {
    values: Vec<S>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct VariableDoc<S> {
    values: Vec<S>,
}

impl<S: Scalar> TryFrom<VariableDoc<S>> for RandomVariable<S> {
    type Error = Error;

    fn try_from(doc: VariableDoc<S>) -> Result<Self> {
        RandomVariable::new(doc.values)
    }
}

impl<S: Scalar> From<RandomVariable<S>> for VariableDoc<S> {
    fn from(f: RandomVariable<S>) -> Self {
        VariableDoc { values: f.values }
    }
}

impl<S: Scalar> RandomVariable<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if let Some(atom) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { atom });
        }
        Ok(RandomVariable { values })
    }

    pub(crate) fn from_vec_unchecked(values: Vec<S>) -> Self {
        RandomVariable { values }
    }

    pub fn constant(atom_count: usize, c: S) -> Self {
        RandomVariable {
            values: vec![c; atom_count],
        }
    }

    pub fn zeros(atom_count: usize) -> Self {
        Self::constant(atom_count, S::zero())
    }

    pub fn indicator(s: &AtomSet) -> Self {
        RandomVariable {
            values: s
                .mask()
                .iter()
                .map(|&m| if m { S::one() } else { S::zero() })
                .collect(),
        }
    }

    pub fn atom_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn get(&self, atom: usize) -> &S {
        &self.values[atom]
    }

    pub fn map(&self, op: impl Fn(&S) -> S) -> Self {
        RandomVariable {
            values: self.values.iter().map(op).collect(),
        }
    }

    /// Pointwise combination. Panics on mismatched atom counts.
    pub fn zip_with(&self, other: &Self, op: impl Fn(&S, &S) -> S) -> Self {
        assert_eq!(self.atom_count(), other.atom_count(), "atom count mismatch");
        RandomVariable {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| op(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() * b.clone())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn abs(&self) -> Self {
        self.map(Scalar::abs)
    }

    pub fn pos_part(&self) -> Self {
        self.map(Scalar::pos_part)
    }

    /// `f · 1_s`.
    pub fn restrict(&self, s: &AtomSet) -> Self {
        RandomVariable {
            values: self
                .values
                .iter()
                .zip(s.mask())
                .map(|(v, &m)| if m { v.clone() } else { S::zero() })
                .collect(),
        }
    }

    /// The set `{ω | pred(f(ω))}`.
    pub fn level_set(&self, pred: impl Fn(&S) -> bool) -> AtomSet {
        AtomSet::from_mask(self.values.iter().map(pred).collect())
    }

    pub fn max_abs(&self) -> S {
        self.values
            .iter()
            .fold(S::zero(), |acc, v| acc.max_of(v.abs()))
    }
}

/// Lᵖ exponent: an integer `p ≥ 1` or `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(u32),
    Infinity,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1);

    pub fn finite(p: u32) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidExponent);
        }
        Ok(Exponent::Finite(p))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinity);
        }
        let p: u32 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("exponent {:?} is not an integer or inf", s)))?;
        Exponent::finite(p)
    }

    /// Exponent order, with `∞` largest.
    pub fn le(self, other: Exponent) -> bool {
        match (self, other) {
            (_, Exponent::Infinity) => true,
            (Exponent::Infinity, Exponent::Finite(_)) => false,
            (Exponent::Finite(p), Exponent::Finite(q)) => p <= q,
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{}", p),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<Se: serde::Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_u32(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(p) => Exponent::finite(p).map_err(serde::de::Error::custom),
            Raw::Text(t) => Exponent::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// An Lᵖ norm kept in exactly representable form.
///
/// For finite `p` the stored quantity is `Σ|f|ᵖμ` (the norm raised to the
/// `p`-th power), for `p = ∞` it is the essential supremum itself. Two norms
/// with different exponents are compared by raising both sides to a common
/// power, which stays exact for rationals.
#[derive(Debug, Clone)]
pub struct Norm<S> {
    exponent: Exponent,
    raw: S,
}

impl<S: Scalar> Norm<S> {
    /// A norm from its stored quantity: `Σ|f|ᵖμ` for finite `p`, the
    /// supremum for `p = ∞`.
    pub fn from_raw(exponent: Exponent, raw: S) -> Self {
        Norm { exponent, raw }
    }

    pub fn zero(exponent: Exponent) -> Self {
        Norm {
            exponent,
            raw: S::zero(),
        }
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    /// `‖f‖ₚᵖ` for finite `p`, `‖f‖∞` otherwise.
    pub fn raw(&self) -> &S {
        &self.raw
    }

    /// The norm itself, when its root is representable in this mode.
    pub fn value(&self) -> Option<S> {
        match self.exponent {
            Exponent::Finite(p) => self.raw.nth_root(p),
            Exponent::Infinity => Some(self.raw.clone()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self.exponent {
            Exponent::Finite(1) | Exponent::Infinity => self.raw.to_f64(),
            Exponent::Finite(p) => self.raw.to_f64().powf(1.0 / p as f64),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.raw.ae_eq(&S::zero())
    }

    /// Both sides raised to the common power that removes the roots.
    fn common_powers(&self, other: &Norm<S>) -> (S, S) {
        match (self.exponent, other.exponent) {
            (Exponent::Finite(p), Exponent::Finite(q)) if p == q => {
                (self.raw.clone(), other.raw.clone())
            }
            (Exponent::Finite(p), Exponent::Finite(q)) => (self.raw.powi(q), other.raw.powi(p)),
            (Exponent::Finite(p), Exponent::Infinity) => (self.raw.clone(), other.raw.powi(p)),
            (Exponent::Infinity, Exponent::Finite(q)) => (self.raw.powi(q), other.raw.clone()),
            (Exponent::Infinity, Exponent::Infinity) => (self.raw.clone(), other.raw.clone()),
        }
    }

    pub fn cmp_norm(&self, other: &Norm<S>) -> Ordering {
        let (a, b) = self.common_powers(other);
        a.ae_cmp(&b)
    }

    pub fn le(&self, other: &Norm<S>) -> bool {
        self.cmp_norm(other) != Ordering::Greater
    }

    /// `‖·‖ₚ` (self) against the finite-measure Hölder bound
    /// `‖·‖_q · μ(Ω)^{1/p − 1/q}` built from `other`, for `p ≤ q`.
    pub fn holder_le(&self, other: &Norm<S>, total_mass: &S) -> Result<bool> {
        let (a, b) = match (self.exponent, other.exponent) {
            (Exponent::Finite(p), Exponent::Finite(q)) if p <= q => (
                self.raw.powi(q),
                other.raw.powi(p) * total_mass.powi(q - p),
            ),
            (Exponent::Finite(p), Exponent::Infinity) => {
                (self.raw.clone(), other.raw.powi(p) * total_mass.clone())
            }
            (Exponent::Infinity, Exponent::Infinity) => (self.raw.clone(), other.raw.clone()),
            _ => {
                return Err(Error::InvalidArgument(
                    "Hölder comparison needs p ≤ q".into(),
                ))
            }
        };
        Ok(a.ae_le(&b))
    }

    pub fn max(self, other: Norm<S>) -> Norm<S> {
        if other.cmp_norm(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }
}

/// Structural equality: same exponent and same stored quantity.
impl<S: PartialEq> PartialEq for Norm<S> {
    fn eq(&self, other: &Self) -> bool {
        self.exponent == other.exponent && self.raw == other.raw
    }
}

impl<S: Scalar> std::fmt::Display for Norm<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.value(), self.exponent) {
            (Some(v), _) => write!(f, "{}", v),
            (None, Exponent::Finite(p)) => write!(f, "({})^(1/{})", self.raw, p),
            (None, Exponent::Infinity) => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn rv(vals: &[i64]) -> RandomVariable<Rational> {
        RandomVariable::new(vals.iter().map(|&v| Rational::from_i64(v)).collect()).unwrap()
    }

    #[test]
    fn measure_examples() {
        let uniform = FiniteMeasureSpace::<Rational>::uniform(4).unwrap();
        let s = AtomSet::from_indices(4, &[0, 1]).unwrap();
        assert_eq!(uniform.measure(&s).unwrap(), q(1, 2));
        assert_eq!(uniform.measure(&AtomSet::empty(4)).unwrap(), q(0, 1));

        let space =
            FiniteMeasureSpace::new(vec![q(1, 10), q(2, 10), q(3, 10), q(4, 10)]).unwrap();
        let s = AtomSet::from_indices(4, &[1, 3]).unwrap();
        assert_eq!(space.measure(&s).unwrap(), q(6, 10));
    }

    #[test]
    fn integral_examples() {
        let uniform = FiniteMeasureSpace::<Rational>::uniform(4).unwrap();
        assert_eq!(
            uniform
                .integral(&RandomVariable::constant(4, Rational::one()))
                .unwrap(),
            q(1, 1)
        );
        let f = rv(&[1, 3, 5, 7]);
        assert_eq!(uniform.integral(&f).unwrap(), q(4, 1));
        assert_eq!(uniform.integral(&RandomVariable::zeros(4)).unwrap(), q(0, 1));
        let s = AtomSet::from_indices(4, &[0, 1]).unwrap();
        assert_eq!(uniform.set_integral(&f, &s).unwrap(), q(1, 1));
        assert_eq!(
            uniform.set_integral(&f, &AtomSet::full(4)).unwrap(),
            uniform.integral(&f).unwrap()
        );
        assert_eq!(uniform.set_integral(&f, &AtomSet::empty(4)).unwrap(), q(0, 1));
    }

    #[test]
    fn snorm_examples() {
        let space = FiniteMeasureSpace::new(vec![q(1, 1), q(1, 1)]).unwrap();
        let n = space.snorm(&rv(&[3, 4]), Exponent::Finite(2)).unwrap();
        assert_eq!(n.value(), Some(q(5, 1)));

        let space = FiniteMeasureSpace::new(vec![q(1, 1), q(0, 1)]).unwrap();
        let n = space.snorm(&rv(&[-2, 7]), Exponent::Infinity).unwrap();
        assert_eq!(n.value(), Some(q(2, 1)));

        let prob = FiniteMeasureSpace::<Rational>::uniform(3).unwrap();
        for p in [Exponent::Finite(1), Exponent::Finite(3), Exponent::Infinity] {
            let n = prob
                .snorm(&RandomVariable::constant(3, q(-5, 2)), p)
                .unwrap();
            assert_eq!(n.value(), Some(q(5, 2)));
        }
    }

    #[test]
    fn exponent_below_one_rejected() {
        assert_eq!(Exponent::finite(0), Err(Error::InvalidExponent));
        assert_eq!(Exponent::parse("inf").unwrap(), Exponent::Infinity);
        assert!(Exponent::parse("-1").is_err());
    }

    #[test]
    fn norm_comparison_across_exponents() {
        let space = FiniteMeasureSpace::new(vec![q(1, 1), q(1, 1)]).unwrap();
        let f = rv(&[3, 4]);
        let l1 = space.snorm(&f, Exponent::Finite(1)).unwrap();
        let l2 = space.snorm(&f, Exponent::Finite(2)).unwrap();
        let linf = space.snorm(&f, Exponent::Infinity).unwrap();
        assert_eq!(l1.cmp_norm(&l2), Ordering::Greater);
        assert_eq!(l2.cmp_norm(&linf), Ordering::Greater);
        assert_eq!(linf.cmp_norm(&l1), Ordering::Less);
    }

    #[test]
    fn partition_lattice_examples() {
        let p = Partition::from_blocks(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let r = Partition::from_blocks(4, &[vec![0, 2], vec![1, 3]]).unwrap();
        assert_eq!(Partition::trivial(4).join(&p).unwrap(), p);
        assert_eq!(p.join(&r).unwrap(), Partition::discrete(4));
        assert_eq!(p.meet(&p).unwrap(), p);
        assert_eq!(p.meet(&r).unwrap(), Partition::trivial(4));
        assert!(Partition::trivial(4).le(&p).unwrap());
        assert!(p.le(&Partition::discrete(4)).unwrap());
        assert!(!p.le(&r).unwrap());
        assert!(p.join(&Partition::trivial(3)).is_err());
    }

    #[test]
    fn canonical_numbering() {
        let a = Partition::from_blocks(4, &[vec![2, 3], vec![1, 0]]).unwrap();
        let b = Partition::from_labels([7, 7, 1, 1]);
        assert_eq!(a, b);
        assert_eq!(a.labels(), &[0, 0, 1, 1]);
    }

    #[test]
    fn invalid_partitions_rejected() {
        assert!(Partition::from_blocks(3, &[vec![0, 1]]).is_err());
        assert!(Partition::from_blocks(3, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::from_blocks(3, &[vec![0, 1, 2], vec![]]).is_err());
        assert!(Partition::from_blocks(2, &[vec![0, 5]]).is_err());
    }

    #[test]
    fn generated_partition_examples() {
        assert_eq!(Partition::generated_by(&rv(&[4, 4, 4])), Partition::trivial(3));
        assert_eq!(Partition::generated_by(&rv(&[1, 2, 3])), Partition::discrete(3));
        assert_eq!(
            Partition::generated_by(&rv(&[1, 1, 2, 2])),
            Partition::from_blocks(4, &[vec![0, 1], vec![2, 3]]).unwrap()
        );
    }

    #[test]
    fn measurability_examples() {
        let f = rv(&[2, 2, 9, 9]);
        assert!(Partition::discrete(4).is_measurable(&f).unwrap());
        assert!(!Partition::trivial(4).is_measurable(&f).unwrap());
        let p = Partition::from_blocks(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert!(p.is_measurable(&f).unwrap());
        assert!(p
            .is_set_measurable(&AtomSet::from_indices(4, &[2, 3]).unwrap())
            .unwrap());
        assert!(!p
            .is_set_measurable(&AtomSet::from_indices(4, &[1, 2]).unwrap())
            .unwrap());
    }

    #[test]
    fn invalid_weights_rejected() {
        assert_eq!(
            FiniteMeasureSpace::new(vec![q(1, 2), q(-1, 2)]),
            Err(Error::InvalidWeight { atom: 1 })
        );
        assert_eq!(
            FiniteMeasureSpace::new(vec![1.0, f64::INFINITY]),
            Err(Error::InvalidWeight { atom: 1 })
        );
        assert_eq!(
            FiniteMeasureSpace::<f64>::new(vec![]),
            Err(Error::EmptySpace)
        );
        assert_eq!(
            RandomVariable::new(vec![0.0, f64::NAN]),
            Err(Error::NonFiniteValue { atom: 1 })
        );
    }

    #[test]
    fn json_documents() {
        let space: FiniteMeasureSpace<Rational> =
            serde_json::from_str(r#"{"weights": ["1/4", "3/4"]}"#).unwrap();
        assert_eq!(space.total_mass(), q(1, 1));
        assert_eq!(
            serde_json::to_string(&space).unwrap(),
            r#"{"weights":["1/4","3/4"]}"#
        );
        let p: Partition = serde_json::from_str(r#"{"blocks": [[0, 2], [1]]}"#).unwrap();
        assert_eq!(p.labels(), &[0, 1, 0]);
        let f: RandomVariable<f64> = serde_json::from_str(r#"{"values": [1.5, -2]}"#).unwrap();
        assert_eq!(f.values(), &[1.5, -2.0]);
        assert!(serde_json::from_str::<FiniteMeasureSpace<f64>>(r#"{"weights": [-1]}"#).is_err());
    }
}
