//! Upper and lower crossing times, upcrossing counts and the upcrossing
//! estimate.
//!
//! With `σ_0 = 0` the crossing times follow the mutual recursion
//!
//! ```text
//! τ_n     = hitting(f, (−∞, a], σ_n, N)
//! σ_{n+1} = hitting(f, [b, ∞),  τ_n, N)
//! ```
//!
//! and `U_N(a, b) = sup { n | σ_n < N }`. No ordering between `a` and `b`
//! is assumed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::RandomVariable;
use crate::process::{CheckedProcess, Process};
use crate::report::InequalityReport;
use crate::scalar::{ExtendedNonNeg, Scalar};
use crate::stopping::hitting_path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Band<S> {
    pub a: S,
    pub b: S,
}

impl<S: Scalar> Band<S> {
    pub fn new(a: S, b: S) -> Self {
        Band { a, b }
    }

    pub fn width(&self) -> S {
        self.b.clone() - self.a.clone()
    }

    pub fn is_proper(&self) -> bool {
        self.a < self.b
    }
}

/// `hitting(f, (−∞, a], c, N)` on one path.
pub fn lower_crossing_aux<S: Scalar>(a: &S, path: &[S], c: usize, horizon: usize) -> usize {
    hitting_path(path, |v| v <= a, c, horizon)
}

/// `σ_n` on one path, by direct recursion.
pub fn upper_crossing_path<S: Scalar>(band: &Band<S>, path: &[S], horizon: usize, n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let prev = upper_crossing_path(band, path, horizon, n - 1);
    let start = lower_crossing_aux(&band.a, path, prev, horizon);
    hitting_path(path, |v| v >= &band.b, start, horizon)
}

/// `τ_n` on one path, by direct recursion.
pub fn lower_crossing_path<S: Scalar>(band: &Band<S>, path: &[S], horizon: usize, n: usize) -> usize {
    let start = upper_crossing_path(band, path, horizon, n);
    hitting_path(path, |v| v <= &band.a, start, horizon)
}

/// The crossing chain of one path up to the point where it becomes
/// stationary.
///
/// `σ_{n+1}` depends only on `σ_n`, so once two consecutive values agree the
/// chain is constant from there on. Every strict step increases `σ`, so the
/// chain settles after at most `N + 1` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCrossings {
    sigma: Vec<usize>,
    tau: Vec<usize>,
    horizon: usize,
}

impl PathCrossings {
    pub fn new<S: Scalar>(band: &Band<S>, path: &[S], horizon: usize) -> Self {
        let mut sigma = vec![0];
        let mut tau = Vec::new();
        loop {
            let s = *sigma.last().expect("chain starts at σ_0");
            let t = lower_crossing_aux(&band.a, path, s, horizon);
            tau.push(t);
            let next = hitting_path(path, |v| v >= &band.b, t, horizon);
            if next == s {
                break;
            }
            sigma.push(next);
        }
        PathCrossings {
            sigma,
            tau,
            horizon,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn sigma(&self, n: usize) -> usize {
        self.sigma[n.min(self.sigma.len() - 1)]
    }

    pub fn tau(&self, n: usize) -> usize {
        self.tau[n.min(self.tau.len() - 1)]
    }

    /// Number of distinct `σ` values before the chain is stationary.
    pub fn settled_after(&self) -> usize {
        self.sigma.len()
    }

    /// `sup { n | σ_n < N }` with the natural-number convention that an
    /// empty or unbounded set has supremum 0.
    ///
    /// For `a < b` the chain always settles at `N`. For `a ≥ b` it can settle
    /// at a time `< N`, which makes the set unbounded.
    pub fn upcrossings(&self) -> usize {
        let last = *self.sigma.last().expect("nonempty");
        if last < self.horizon {
            return 0;
        }
        self.sigma
            .iter()
            .rposition(|&s| s < self.horizon)
            .unwrap_or(0)
    }
}

fn check_n<S>(f: &Process<S>, horizon: usize) -> Result<()>
where
    S: Scalar,
{
    if horizon > f.horizon() {
        return Err(Error::TimeOutOfRange {
            time: horizon,
            horizon: f.horizon(),
        });
    }
    Ok(())
}

fn per_atom<S: Scalar, T: Send>(f: &Process<S>, op: impl Fn(&[S]) -> T + Sync) -> Vec<T> {
    (0..f.atom_count())
        .into_par_iter()
        .map(|atom| op(&f.path(atom)))
        .collect()
}

/// `σ_n` per atom.
pub fn upper_crossing<S: Scalar>(
    band: &Band<S>,
    f: &Process<S>,
    horizon: usize,
    n: usize,
) -> Result<Vec<usize>> {
    check_n(f, horizon)?;
    Ok(per_atom(f, |p| upper_crossing_path(band, p, horizon, n)))
}

/// `τ_n` per atom.
pub fn lower_crossing<S: Scalar>(
    band: &Band<S>,
    f: &Process<S>,
    horizon: usize,
    n: usize,
) -> Result<Vec<usize>> {
    check_n(f, horizon)?;
    Ok(per_atom(f, |p| lower_crossing_path(band, p, horizon, n)))
}

/// `σ_k` and `τ_k` for `k` up to one past the point where every atom's
/// chain is stationary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossingTable {
    /// `sigma[k][atom]`
    pub sigma: Vec<Vec<usize>>,
    /// `tau[k][atom]`
    pub tau: Vec<Vec<usize>>,
    #[serde(rename = "N")]
    pub horizon: usize,
}

pub fn crossing_table<S: Scalar>(band: &Band<S>, f: &Process<S>, horizon: usize) -> Result<CrossingTable> {
    check_n(f, horizon)?;
    let chains = per_atom(f, |p| PathCrossings::new(band, p, horizon));
    let rows = chains.iter().map(PathCrossings::settled_after).max().unwrap_or(1) + 1;
    let column = |pick: &dyn Fn(&PathCrossings) -> usize| chains.iter().map(pick).collect();
    Ok(CrossingTable {
        sigma: (0..rows).map(|k| column(&|c| c.sigma(k))).collect(),
        tau: (0..rows).map(|k| column(&|c| c.tau(k))).collect(),
        horizon,
    })
}

/// `U_N(a, b)` per atom.
pub fn upcrossings_before<S: Scalar>(band: &Band<S>, f: &Process<S>, horizon: usize) -> Result<Vec<usize>> {
    check_n(f, horizon)?;
    Ok(per_atom(f, |p| PathCrossings::new(band, p, horizon).upcrossings()))
}

/// `sup_N U_N(a, b)` per atom, over `N ≤ horizon`, in `[0, ∞]`.
pub fn upcrossings<S: Scalar>(band: &Band<S>, f: &Process<S>) -> Vec<ExtendedNonNeg<S>> {
    per_atom(f, |p| {
        let best = (0..p.len())
            .map(|n| PathCrossings::new(band, p, n).upcrossings())
            .max()
            .unwrap_or(0);
        ExtendedNonNeg::Finite(S::from_i64(best as i64))
    })
}

fn counts_as_variable<S: Scalar>(counts: &[usize]) -> RandomVariable<S> {
    RandomVariable::new(counts.iter().map(|&c| S::from_i64(c as i64)).collect())
        .expect("integer counts are finite")
}

/// `(b − a) μ[U_N] ≤ μ[(f_N − a)⁺]` for a submartingale.
pub fn check_upcrossing_estimate<S: Scalar>(
    band: &Band<S>,
    sub: &CheckedProcess<'_, S>,
    horizon: usize,
) -> Result<InequalityReport<S>> {
    let f = sub.process;
    let counts = upcrossings_before(band, f, horizon)?;
    let lhs = band.width() * sub.space.integral(&counts_as_variable(&counts))?;
    let excess = f.at(horizon).map(|v| (v.clone() - band.a.clone()).pos_part());
    let rhs = sub.space.integral(&excess)?;
    Ok(InequalityReport::le(lhs, rhs))
}

/// `(b − a)⁺ ∫⁻ sup_N U_N ≤ sup_N ∫⁻ (f_N − a)⁺` in `[0, ∞]`.
pub fn check_upcrossing_estimate_sup<S: Scalar>(
    band: &Band<S>,
    sub: &CheckedProcess<'_, S>,
) -> Result<InequalityReport<ExtendedNonNeg<S>>> {
    let f = sub.process;
    let space = sub.space;
    let integral = upcrossings(band, f)
        .iter()
        .zip(space.weights())
        .fold(ExtendedNonNeg::zero(), |acc, (u, w)| {
            acc.add(&u.mul(&ExtendedNonNeg::of_real(w.clone())))
        });
    let lhs = ExtendedNonNeg::of_real(band.width()).mul(&integral);
    let mut rhs = ExtendedNonNeg::zero();
    for slice in f.slices() {
        let excess = slice.map(|v| (v.clone() - band.a.clone()).pos_part());
        rhs = rhs.max(ExtendedNonNeg::of_real(space.integral(&excess)?));
    }
    let holds = lhs.ae_le(&rhs);
    Ok(InequalityReport { lhs, rhs, holds })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationReport {
    pub holds: bool,
    /// First `(N, atom)` where the two counts differ.
    pub first_mismatch: Option<(usize, usize)>,
}

/// Checks `U_N^{(f − a)⁺}(0, b − a) = U_N^f(a, b)` for every `N ≤ horizon`.
pub fn band_translation_identity<S: Scalar>(band: &Band<S>, f: &Process<S>) -> Result<TranslationReport> {
    if !band.is_proper() {
        return Err(Error::InvalidArgument(
            "band translation needs a < b".into(),
        ));
    }
    let shifted = f.map(|v| (v.clone() - band.a.clone()).pos_part());
    let zero_band = Band::new(S::zero(), band.width());
    for n in 0..=f.horizon() {
        let direct = upcrossings_before(band, f, n)?;
        let translated = upcrossings_before(&zero_band, &shifted, n)?;
        if let Some(atom) = (0..direct.len()).find(|&i| direct[i] != translated[i]) {
            return Ok(TranslationReport {
                holds: false,
                first_mismatch: Some((n, atom)),
            });
        }
    }
    Ok(TranslationReport {
        holds: true,
        first_mismatch: None,
    })
}

/// One CSV row of an upcrossing-estimate sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct EstimateRow<S> {
    pub a: S,
    pub b: S,
    #[serde(rename = "N")]
    pub horizon: usize,
    pub lhs: S,
    pub rhs: S,
    pub holds: bool,
}

/// The estimate at every `N ≤ horizon` for each band.
pub fn upcrossing_estimate_sweep<S: Scalar>(
    bands: &[Band<S>],
    sub: &CheckedProcess<'_, S>,
) -> Result<Vec<EstimateRow<S>>> {
    let mut rows = Vec::new();
    for band in bands {
        for n in 0..=sub.process.horizon() {
            let r = check_upcrossing_estimate(band, sub, n)?;
            rows.push(EstimateRow {
                a: band.a.clone(),
                b: band.b.clone(),
                horizon: n,
                lhs: r.lhs,
                rhs: r.rhs,
                holds: r.holds,
            });
        }
    }
    Ok(rows)
}

/// The path used to illustrate crossing times: with band `(0, 1)` and
/// `N = 13` it has two completed upcrossings.
pub fn figure_one_path<S: Scalar>() -> Vec<S> {
    [5, -2, 3, 8, 9, 15, 6, -1, 4, 9, 13, -2, 5, 7]
        .iter()
        .map(|&v| S::from_ratio(v, 10))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{FiniteMeasureSpace, Partition};
    use crate::process::Filtration;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn single(vals: Vec<Rational>) -> Process<Rational> {
        Process::from_path(vals).unwrap()
    }

    fn unit_band() -> Band<Rational> {
        Band::new(q(0, 1), q(1, 1))
    }

    #[test]
    fn figure_one_table() {
        let f = single(figure_one_path());
        let t = crossing_table(&unit_band(), &f, 13).unwrap();
        let sigma: Vec<usize> = t.sigma.iter().map(|r| r[0]).collect();
        let tau: Vec<usize> = t.tau.iter().map(|r| r[0]).collect();
        assert_eq!(&sigma[..4], &[0, 5, 10, 13]);
        assert_eq!(&tau[..4], &[1, 7, 11, 13]);
        assert_eq!(upcrossings_before(&unit_band(), &f, 13).unwrap(), vec![2]);
        assert_eq!(
            upcrossings(&unit_band(), &f),
            vec![ExtendedNonNeg::Finite(q(2, 1))]
        );
    }

    #[test]
    fn recursion_matches_memoized_chain() {
        let path = figure_one_path::<Rational>();
        let band = unit_band();
        for horizon in 0..14 {
            let chain = PathCrossings::new(&band, &path, horizon);
            for n in 0..20 {
                assert_eq!(chain.sigma(n), upper_crossing_path(&band, &path, horizon, n));
                assert_eq!(chain.tau(n), lower_crossing_path(&band, &path, horizon, n));
            }
        }
    }

    #[test]
    fn degenerate_paths() {
        let band = unit_band();
        let inside = single(vec![q(1, 2); 6]);
        let f = &inside;
        for n in 0..4 {
            assert_eq!(lower_crossing(&band, f, 5, n).unwrap(), vec![5]);
            assert_eq!(upper_crossing(&band, f, 5, n + 1).unwrap(), vec![5]);
        }
        assert_eq!(upper_crossing(&band, f, 5, 0).unwrap(), vec![0]);
        let above = single(vec![q(2, 1); 6]);
        assert_eq!(upcrossings_before(&band, &above, 5).unwrap(), vec![0]);
        assert_eq!(upcrossings_before(&band, &above, 0).unwrap(), vec![0]);
    }

    #[test]
    fn crossing_completed_at_n_is_not_counted() {
        let walk = single(vec![q(0, 1), q(-1, 1), q(0, 1), q(1, 1)]);
        let band = Band::new(q(-1, 2), q(1, 2));
        assert_eq!(upper_crossing(&band, &walk, 3, 1).unwrap(), vec![3]);
        assert_eq!(upcrossings_before(&band, &walk, 3).unwrap(), vec![0]);
        let longer = single(vec![q(0, 1), q(-1, 1), q(0, 1), q(1, 1), q(0, 1)]);
        assert_eq!(upcrossings_before(&band, &longer, 4).unwrap(), vec![1]);
    }

    #[test]
    fn inverted_band_fixed_point() {
        // a ≥ b: a value in [b, a] is both a low and a high hit
        let band = Band::new(q(1, 1), q(0, 1));
        let f = single(vec![q(3, 1), q(1, 2), q(3, 1), q(3, 1)]);
        let chain = PathCrossings::new(&band, &f.path(0), 3);
        assert_eq!(chain.sigma(5), 1);
        assert_eq!(chain.upcrossings(), 0);
    }

    fn walk2() -> (FiniteMeasureSpace<Rational>, Process<Rational>, Filtration) {
        let space = FiniteMeasureSpace::uniform(4).unwrap();
        let rows = [[0, 0, 0, 0], [1, 1, -1, -1], [2, 0, 0, -2]];
        let f = Process::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| q(v, 1)).collect())
                .collect(),
        )
        .unwrap();
        let filt = Filtration::natural(&f, Partition::discrete(4)).unwrap();
        (space, f, filt)
    }

    #[test]
    fn estimate_on_fair_walk() {
        let (space, f, filt) = walk2();
        let sub = CheckedProcess::submartingale(&space, &filt, &f).unwrap();
        let band = Band::new(q(-1, 2), q(1, 2));
        let r = check_upcrossing_estimate(&band, &sub, 2).unwrap();
        assert_eq!(r.lhs, q(0, 1));
        assert_eq!(r.rhs, q(7, 8));
        assert!(r.holds);

        let inverted = Band::new(q(1, 1), q(-1, 1));
        let r = check_upcrossing_estimate(&inverted, &sub, 2).unwrap();
        assert!(r.lhs <= q(0, 1) && r.rhs >= q(0, 1) && r.holds);

        let r = check_upcrossing_estimate_sup(&band, &sub).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn estimate_rejects_supermartingale() {
        let (space, f, filt) = walk2();
        let down = f.map(|v| v.clone() - q(1, 1)).zip_with(
            &Process::from_fn(2, 4, |n, _| q(n as i64, 1)),
            |a, b| a.clone() - b.clone(),
        ).unwrap();
        assert!(matches!(
            CheckedProcess::submartingale(&space, &filt, &down),
            Err(Error::WrongClass { .. })
        ));
    }

    #[test]
    fn constant_process_estimate() {
        let space = FiniteMeasureSpace::uniform(3).unwrap();
        let f = Process::constant(4, 3, q(2, 1));
        let filt = Filtration::constant(Partition::trivial(3), 4);
        let sub = CheckedProcess::submartingale(&space, &filt, &f).unwrap();
        let r = check_upcrossing_estimate(&Band::new(q(1, 1), q(3, 1)), &sub, 4).unwrap();
        assert_eq!(r.lhs, q(0, 1));
        assert_eq!(r.rhs, q(1, 1));
    }

    #[test]
    fn sup_estimate_arithmetic_on_figure_path() {
        let f = single(figure_one_path());
        let space = FiniteMeasureSpace::uniform(1).unwrap();
        let filt = Filtration::constant(Partition::trivial(1), 13);
        let checked = CheckedProcess {
            space: &space,
            filtration: &filt,
            process: &f,
            class: crate::process::MartingaleClass::None,
        };
        let r = check_upcrossing_estimate_sup(&unit_band(), &checked).unwrap();
        assert_eq!(r.lhs, ExtendedNonNeg::Finite(q(2, 1)));
        assert_eq!(r.rhs, ExtendedNonNeg::Finite(q(3, 2)));
        assert!(!r.holds);
    }

    #[test]
    fn translation_identity_examples() {
        let f = single(figure_one_path());
        assert!(band_translation_identity(&unit_band(), &f).unwrap().holds);
        let shifted_band = Band::new(q(-1, 5), q(6, 5));
        assert!(band_translation_identity(&shifted_band, &f).unwrap().holds);
        assert!(band_translation_identity(&Band::new(q(1, 1), q(0, 1)), &f).is_err());
    }
}
