//! Uniform integrability through computable moduli.
//!
//! The small-set (analyst) modulus is
//! `δ ↦ sup_i sup_{μ(A) ≤ δ} ‖f_i 1_A‖ₚ` and the truncation (probabilist)
//! modulus is `C ↦ sup_i ‖f_i 1_{|f_i| ≥ C}‖ₚ`. Maximizing over sets `A` is a
//! 0/1 knapsack with item values `|f_i(ω)|ᵖ μ(ω)` and weights `μ(ω)`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{AtomSet, Exponent, FiniteMeasureSpace, Norm, RandomVariable};
use crate::report::InequalityReport;
use crate::scalar::Scalar;

/// Spaces up to this many atoms use exhaustive subset search.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Largest space on which the exact branch-and-bound is attempted.
pub const EXACT_CAP: usize = 64;

/// A finite family of functions on one space, measured in `Lᵖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily<S> {
    members: Vec<RandomVariable<S>>,
    p: Exponent,
}

impl<S: Scalar> FunctionFamily<S> {
    pub fn new(members: Vec<RandomVariable<S>>, p: Exponent) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidArgument("a family needs at least one member".into()));
        };
        let n = first.atom_count();
        if let Some(bad) = members.iter().find(|m| m.atom_count() != n) {
            return Err(Error::AtomCountMismatch {
                expected: n,
                found: bad.atom_count(),
            });
        }
        Ok(FunctionFamily { members, p })
    }

    pub fn members(&self) -> &[RandomVariable<S>] {
        &self.members
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn with_exponent(&self, p: Exponent) -> Self {
        FunctionFamily {
            members: self.members.clone(),
            p,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.members[0].atom_count()
    }

    fn sup_over_members(
        &self,
        space: &FiniteMeasureSpace<S>,
        norm_of: impl Fn(&RandomVariable<S>) -> Result<Norm<S>> + Send + Sync,
    ) -> Result<Norm<S>> {
        space.check_len(self.atom_count())?;
        let norms = self
            .members
            .par_iter()
            .map(norm_of)
            .collect::<Result<Vec<_>>>()?;
        Ok(norms.into_iter().fold(Norm::zero(self.p), Norm::max))
    }

    /// `sup_i ‖f_i‖ₚ`.
    pub fn sup_norm(&self, space: &FiniteMeasureSpace<S>) -> Result<Norm<S>> {
        self.sup_over_members(space, |f| space.snorm(f, self.p))
    }

    /// `sup_i ‖f_i 1_{|f_i| ≥ C}‖ₚ`.
    pub fn probabilist_modulus(&self, space: &FiniteMeasureSpace<S>, c: &S) -> Result<Norm<S>> {
        if c.is_negative() {
            return Err(Error::InvalidArgument("truncation level must be nonnegative".into()));
        }
        self.sup_over_members(space, |f| space.snorm(&truncate_at(f, c), self.p))
    }

    /// `sup_i sup_{μ(A) ≤ δ} ‖f_i 1_A‖ₚ`.
    pub fn analyst_modulus(
        &self,
        space: &FiniteMeasureSpace<S>,
        delta: &S,
        strategy: KnapsackStrategy,
    ) -> Result<Norm<S>> {
        if delta.is_negative() {
            return Err(Error::InvalidArgument("δ must be nonnegative".into()));
        }
        let n = self.atom_count();
        let strategy = match strategy {
            KnapsackStrategy::Auto if n <= EXHAUSTIVE_LIMIT => KnapsackStrategy::Exhaustive,
            KnapsackStrategy::Auto if n <= EXACT_CAP => KnapsackStrategy::BranchAndBound,
            KnapsackStrategy::Auto => return Err(Error::CapExceeded { size: n, cap: EXACT_CAP }),
            other => other,
        };
        self.sup_over_members(space, |f| {
            Ok(Norm::from_raw(
                self.p,
                worst_set_value(space, f, self.p, delta, strategy),
            ))
        })
    }
}

/// `f · 1_{|f| ≥ C}`.
pub fn truncate_at<S: Scalar>(f: &RandomVariable<S>, c: &S) -> RandomVariable<S> {
    f.restrict(&f.level_set(|v| v.abs() >= *c))
}

/// How the subset maximization behind the small-set modulus is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KnapsackStrategy {
    /// Exhaustive up to [`EXHAUSTIVE_LIMIT`] atoms, branch-and-bound up to
    /// [`EXACT_CAP`], an error beyond.
    #[default]
    Auto,
    Exhaustive,
    BranchAndBound,
    /// The fractional relaxation: an upper bound on the modulus, for spaces
    /// beyond the exact cap.
    Approximate,
}

#[derive(Debug, Clone)]
struct Item<S> {
    value: S,
    weight: S,
}

fn items<S: Scalar>(space: &FiniteMeasureSpace<S>, f: &RandomVariable<S>, p: u32) -> Vec<Item<S>> {
    (0..space.atom_count())
        .filter(|&i| space.is_charged(i) && !f.get(i).is_zero())
        .map(|i| Item {
            value: f.get(i).abs().powi(p) * space.weight(i).clone(),
            weight: space.weight(i).clone(),
        })
        .collect()
}

/// The stored quantity of the worst-set norm for one member.
fn worst_set_value<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    f: &RandomVariable<S>,
    p: Exponent,
    delta: &S,
    strategy: KnapsackStrategy,
) -> S {
    let p = match p {
        // one atom of mass ≤ δ carrying the largest value
        Exponent::Infinity => {
            return (0..space.atom_count())
                .filter(|&i| space.is_charged(i) && space.weight(i) <= delta)
                .fold(S::zero(), |acc, i| acc.max_of(f.get(i).abs()));
        }
        Exponent::Finite(p) => p,
    };
    let items = items(space, f, p);
    match strategy {
        KnapsackStrategy::Exhaustive => knapsack_exhaustive(&items, delta),
        KnapsackStrategy::BranchAndBound | KnapsackStrategy::Auto => knapsack_bnb(&items, delta),
        KnapsackStrategy::Approximate => {
            let mut sorted = items;
            sort_by_density(&mut sorted);
            fractional_bound(&sorted, 0, S::zero(), delta.clone())
        }
    }
}

/// Visits every subset once in Gray-code order, one item toggled per step.
fn knapsack_exhaustive<S: Scalar>(items: &[Item<S>], cap: &S) -> S {
    let n = items.len();
    assert!(n < usize::BITS as usize, "exhaustive search over {n} items");
    let mut chosen = vec![false; n];
    let mut value = S::zero();
    let mut weight = S::zero();
    let mut best = S::zero();
    for step in 1..(1usize << n) {
        let k = step.trailing_zeros() as usize;
        if chosen[k] {
            value = value - items[k].value.clone();
            weight = weight - items[k].weight.clone();
        } else {
            value = value + items[k].value.clone();
            weight = weight + items[k].weight.clone();
        }
        chosen[k] = !chosen[k];
        if weight <= *cap && value > best {
            best = value.clone();
        }
    }
    best
}

fn sort_by_density<S: Scalar>(items: &mut [Item<S>]) {
    // v_i / w_i > v_j / w_j  ⇔  v_i w_j > v_j w_i  (weights are positive)
    items.sort_by(|x, y| {
        (y.value.clone() * x.weight.clone())
            .partial_cmp(&(x.value.clone() * y.weight.clone()))
            .unwrap_or(Ordering::Equal)
    });
}

/// Greedy fill of `room` from `items[from..]` allowing one fractional item.
fn fractional_bound<S: Scalar>(items: &[Item<S>], from: usize, mut value: S, mut room: S) -> S {
    for it in &items[from..] {
        if it.weight <= room {
            room = room - it.weight.clone();
            value = value + it.value.clone();
        } else {
            return value + it.value.clone() * room / it.weight.clone();
        }
    }
    value
}

fn knapsack_bnb<S: Scalar>(items: &[Item<S>], cap: &S) -> S {
    let mut sorted = items.to_vec();
    sort_by_density(&mut sorted);
    let mut best = S::zero();
    bnb_visit(&sorted, 0, S::zero(), cap.clone(), &mut best);
    best
}

fn bnb_visit<S: Scalar>(items: &[Item<S>], idx: usize, value: S, room: S, best: &mut S) {
    if value > *best {
        *best = value.clone();
    }
    if idx == items.len() || fractional_bound(items, idx, value.clone(), room.clone()) <= *best {
        return;
    }
    let it = &items[idx];
    if it.weight <= room {
        bnb_visit(
            items,
            idx + 1,
            value.clone() + it.value.clone(),
            room.clone() - it.weight.clone(),
            best,
        );
    }
    bnb_visit(items, idx + 1, value, room, best);
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgingReport<S> {
    /// One row per member: `‖f 1_A‖₁` against `C μ(A) + ‖f 1_{|f| ≥ C}‖₁`.
    pub rows: Vec<InequalityReport<S>>,
    pub holds: bool,
}

/// `‖f 1_A‖₁ ≤ C μ(A) + ‖f 1_{|f| ≥ C}‖₁` for every member.
pub fn check_bridging_inequality<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    fam: &FunctionFamily<S>,
    c: &S,
    a: &AtomSet,
) -> Result<BridgingReport<S>> {
    if fam.exponent() != Exponent::ONE {
        return Err(Error::InvalidArgument("the bridging inequality is stated for p = 1".into()));
    }
    if c.is_negative() {
        return Err(Error::InvalidArgument("truncation level must be nonnegative".into()));
    }
    space.check_len(fam.atom_count())?;
    space.check_set(a)?;
    let mass = space.measure(a)?;
    let rows = fam
        .members()
        .iter()
        .map(|f| {
            let lhs = space.snorm(&f.restrict(a), Exponent::ONE)?.raw().clone();
            let tail = space.snorm(&truncate_at(f, c), Exponent::ONE)?.raw().clone();
            Ok(InequalityReport::le(lhs, c.clone() * mass.clone() + tail))
        })
        .collect::<Result<Vec<_>>>()?;
    let holds = rows.iter().all(|r| r.holds);
    Ok(BridgingReport { rows, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct MonotonicityRow<S> {
    pub c: S,
    #[serde(serialize_with = "serialize_norm")]
    pub modulus_p: Norm<S>,
    #[serde(serialize_with = "serialize_norm")]
    pub modulus_q: Norm<S>,
    /// `modulus_p ≤ modulus_q · μ(Ω)^{1/p − 1/q}`.
    pub holds: bool,
}

fn serialize_norm<S: Scalar, Ser: serde::Serializer>(
    n: &Norm<S>,
    s: Ser,
) -> std::result::Result<Ser::Ok, Ser::Error> {
    s.collect_str(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport<S> {
    pub rows: Vec<MonotonicityRow<S>>,
    pub holds: bool,
}

/// Compares the truncation moduli at exponents `p ≤ q` across a grid of
/// levels through the finite-measure Hölder bound.
pub fn check_p_monotonicity<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    fam: &FunctionFamily<S>,
    p: Exponent,
    q: Exponent,
    grid: &[S],
) -> Result<MonotonicityReport<S>> {
    if !p.le(q) {
        return Err(Error::InvalidArgument(format!("need p ≤ q, got p = {p}, q = {q}")));
    }
    let fp = fam.with_exponent(p);
    let fq = fam.with_exponent(q);
    let mass = space.total_mass();
    let rows = grid
        .iter()
        .map(|c| {
            let modulus_p = fp.probabilist_modulus(space, c)?;
            let modulus_q = fq.probabilist_modulus(space, c)?;
            let holds = modulus_p.holder_le(&modulus_q, &mass)?;
            Ok(MonotonicityRow {
                c: c.clone(),
                modulus_p,
                modulus_q,
                holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let holds = rows.iter().all(|r| r.holds);
    Ok(MonotonicityReport { rows, holds })
}

/// A curve is read as decaying when its last value is at most `ratio` times
/// its largest value, or when it is identically zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRule {
    pub ratio: f64,
}

impl Default for DecayRule {
    fn default() -> Self {
        DecayRule { ratio: 0.25 }
    }
}

impl DecayRule {
    pub fn decays(&self, curve: &[f64]) -> bool {
        let peak = curve.iter().copied().fold(0.0, f64::max);
        match curve.last() {
            None => true,
            Some(_) if peak == 0.0 => true,
            Some(&last) => last <= self.ratio * peak,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct VitaliRow<S> {
    pub n: usize,
    /// `μ{|f_n − g| > ε}` for each `ε` in the grid.
    pub in_measure: Vec<S>,
    #[serde(serialize_with = "serialize_norm")]
    pub lp: Norm<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct ModulusPoint<S> {
    pub level: S,
    #[serde(serialize_with = "serialize_norm")]
    pub modulus: Norm<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VitaliReport<S> {
    pub epsilons: Vec<S>,
    pub rows: Vec<VitaliRow<S>>,
    /// Truncation modulus of `{f_1, …, f_H}` over the level grid.
    pub ui_modulus_curve: Vec<ModulusPoint<S>>,
    pub in_measure_decay: bool,
    pub ui_vanishing: bool,
    pub lp_decay: bool,
    /// `lp_decay` exactly when both `in_measure_decay` and `ui_vanishing`.
    pub consistent: bool,
}

/// Tracks convergence in measure, the truncation modulus and `Lᵖ` distance
/// for `f_1, …, f_H` against `g`.
pub fn vitali_empirical<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    sequence: &[RandomVariable<S>],
    g: &RandomVariable<S>,
    p: Exponent,
    epsilons: &[S],
    levels: &[S],
    rule: DecayRule,
) -> Result<VitaliReport<S>> {
    if p == Exponent::Infinity {
        return Err(Error::InvalidArgument("Vitali diagnostics need a finite exponent".into()));
    }
    let fam = FunctionFamily::new(sequence.to_vec(), p)?;
    space.check_len(g.atom_count())?;
    let rows = sequence
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let diff = f.sub(g);
            let in_measure = epsilons
                .iter()
                .map(|eps| space.measure(&diff.level_set(|v| v.abs() > *eps)))
                .collect::<Result<Vec<_>>>()?;
            Ok(VitaliRow {
                n: i + 1,
                in_measure,
                lp: space.snorm(&diff, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ui_modulus_curve = levels
        .iter()
        .map(|c| {
            Ok(ModulusPoint {
                level: c.clone(),
                modulus: fam.probabilist_modulus(space, c)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let in_measure_decay = (0..epsilons.len()).all(|e| {
        rule.decays(&rows.iter().map(|r| r.in_measure[e].to_f64()).collect::<Vec<_>>())
    });
    let lp_decay = rule.decays(&rows.iter().map(|r| r.lp.to_f64()).collect::<Vec<_>>());
    let ui_vanishing = rule.decays(
        &ui_modulus_curve
            .iter()
            .map(|m| m.modulus.to_f64())
            .collect::<Vec<_>>(),
    );
    Ok(VitaliReport {
        epsilons: epsilons.to_vec(),
        rows,
        ui_modulus_curve,
        in_measure_decay,
        ui_vanishing,
        lp_decay,
        consistent: lp_decay == (in_measure_decay && ui_vanishing),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpikeKind {
    /// `f_n = n 1_{A_n}` with `μ(A_n) = 1/n²`; `‖f_n‖₁ = 1/n`.
    Shrinking,
    /// `f_n = n 1_{A_n}` with `μ(A_n) = 1/n`; `‖f_n‖₁ = 1`.
    FixedMass,
}

/// Spikes `f_1, …, f_H` on `[0, 1)` cut at the breakpoints `μ(A_n)`, with
/// `A_n = [0, μ(A_n))` nested. Atom `k < H − 1` is the interval between the
/// `(k+2)`-th and `(k+1)`-th breakpoint; the last atom is `[0, μ(A_H))`.
pub fn spike_family<S: Scalar>(
    kind: SpikeKind,
    horizon: usize,
) -> Result<(FiniteMeasureSpace<S>, Vec<RandomVariable<S>>)> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("spike family needs horizon ≥ 1".into()));
    }
    let mass = |n: usize| -> S {
        let n = n as i64;
        match kind {
            SpikeKind::Shrinking => S::from_ratio(1, n * n),
            SpikeKind::FixedMass => S::from_ratio(1, n),
        }
    };
    let mut weights: Vec<S> = (1..horizon).map(|k| mass(k) - mass(k + 1)).collect();
    weights.push(mass(horizon));
    let space = FiniteMeasureSpace::new(weights)?;
    let members = (1..=horizon)
        .map(|n| {
            RandomVariable::new(
                (0..horizon)
                    .map(|atom| {
                        if atom + 1 >= n {
                            S::from_i64(n as i64)
                        } else {
                            S::zero()
                        }
                    })
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((space, members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn rv(vals: &[i64]) -> RandomVariable<Rational> {
        RandomVariable::new(vals.iter().map(|&v| q(v, 1)).collect()).unwrap()
    }

    fn example() -> (FiniteMeasureSpace<Rational>, FunctionFamily<Rational>) {
        (
            FiniteMeasureSpace::uniform(4).unwrap(),
            FunctionFamily::new(vec![rv(&[10, 1, 1, 1])], Exponent::ONE).unwrap(),
        )
    }

    #[test]
    fn analyst_examples() {
        let (space, fam) = example();
        for s in [
            KnapsackStrategy::Exhaustive,
            KnapsackStrategy::BranchAndBound,
            KnapsackStrategy::Auto,
        ] {
            assert_eq!(fam.analyst_modulus(&space, &q(1, 4), s).unwrap().raw(), &q(5, 2));
            assert_eq!(fam.analyst_modulus(&space, &q(1, 1), s).unwrap().raw(), &q(13, 4));
            assert_eq!(fam.analyst_modulus(&space, &q(2, 1), s).unwrap().raw(), &q(13, 4));
            assert!(fam.analyst_modulus(&space, &q(0, 1), s).unwrap().is_zero());
        }
        let approx = fam
            .analyst_modulus(&space, &q(3, 8), KnapsackStrategy::Approximate)
            .unwrap();
        assert_eq!(approx.raw(), &(q(5, 2) + q(1, 8)));
    }

    #[test]
    fn analyst_sup_norm() {
        let space = FiniteMeasureSpace::new(vec![q(1, 2), q(1, 4), q(1, 4), q(0, 1)]).unwrap();
        let fam = FunctionFamily::new(vec![rv(&[1, 3, -2, 100])], Exponent::Infinity).unwrap();
        let m = |d| fam.analyst_modulus(&space, &d, KnapsackStrategy::Auto).unwrap();
        assert_eq!(m(q(1, 4)).raw(), &q(3, 1));
        assert_eq!(m(q(1, 8)).raw(), &q(0, 1));
        assert_eq!(m(q(1, 1)).raw(), &q(3, 1));
    }

    #[test]
    fn probabilist_examples() {
        let (space, fam) = example();
        assert_eq!(fam.probabilist_modulus(&space, &q(5, 1)).unwrap().raw(), &q(5, 2));
        assert!(fam.probabilist_modulus(&space, &q(11, 1)).unwrap().is_zero());
        assert_eq!(
            fam.probabilist_modulus(&space, &q(0, 1)).unwrap().raw(),
            fam.sup_norm(&space).unwrap().raw()
        );
    }

    #[test]
    fn bridging_examples() {
        let (space, fam) = example();
        let r = check_bridging_inequality(&space, &fam, &q(5, 1), &AtomSet::from_indices(4, &[0]).unwrap())
            .unwrap();
        assert_eq!(r.rows[0].lhs, q(5, 2));
        assert_eq!(r.rows[0].rhs, q(15, 4));
        assert!(r.holds);
        let r = check_bridging_inequality(&space, &fam, &q(5, 1), &AtomSet::empty(4)).unwrap();
        assert_eq!(r.rows[0].lhs, q(0, 1));
        assert!(r.holds);
    }

    #[test]
    fn p_monotonicity() {
        let (space, fam) = example();
        let grid = [q(0, 1), q(1, 1), q(2, 1), q(11, 1)];
        let r = check_p_monotonicity(&space, &fam, Exponent::ONE, Exponent::Finite(2), &grid).unwrap();
        assert!(r.holds);
        assert!(r.rows.iter().all(|row| row.modulus_p.le(&row.modulus_q)));
        let same = check_p_monotonicity(&space, &fam, Exponent::ONE, Exponent::ONE, &grid).unwrap();
        assert!(same.rows.iter().all(|row| row.modulus_p == row.modulus_q));
        assert!(check_p_monotonicity(&space, &fam, Exponent::Finite(2), Exponent::ONE, &grid).is_err());
    }

    #[test]
    fn spike_closed_forms() {
        let (space, fam) = spike_family::<Rational>(SpikeKind::Shrinking, 6).unwrap();
        assert!(space.is_probability());
        for (i, f) in fam.iter().enumerate() {
            let n = i as i64 + 1;
            assert_eq!(space.snorm(f, Exponent::ONE).unwrap().raw(), &q(1, n));
        }
        let (space, fam) = spike_family::<Rational>(SpikeKind::FixedMass, 6).unwrap();
        assert!(space.is_probability());
        for f in &fam {
            assert_eq!(space.snorm(f, Exponent::ONE).unwrap().raw(), &q(1, 1));
        }
    }

    #[test]
    fn vitali_spikes() {
        let eps = [q(1, 2)];
        let levels: Vec<Rational> = [1, 2, 4, 8, 16].iter().map(|&c| q(c, 1)).collect();
        let (space, fam) = spike_family::<Rational>(SpikeKind::Shrinking, 32).unwrap();
        let g = RandomVariable::zeros(32);
        let r = vitali_empirical(&space, &fam, &g, Exponent::ONE, &eps, &levels, DecayRule::default())
            .unwrap();
        assert!(r.in_measure_decay && r.ui_vanishing && r.lp_decay && r.consistent);
        assert_eq!(r.ui_modulus_curve[4].modulus.raw(), &q(1, 16));

        let (space, fam) = spike_family::<Rational>(SpikeKind::FixedMass, 32).unwrap();
        let r = vitali_empirical(&space, &fam, &g, Exponent::ONE, &eps, &levels, DecayRule::default())
            .unwrap();
        assert!(r.in_measure_decay && !r.ui_vanishing && !r.lp_decay && r.consistent);

        let r = vitali_empirical(&space, &[g.clone(), g.clone()], &g, Exponent::ONE, &eps, &levels, DecayRule::default())
            .unwrap();
        assert!(r.rows.iter().all(|row| row.lp.is_zero()));
        assert!(r.consistent);
    }
}
