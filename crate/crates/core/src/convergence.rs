//! Maximal inequality, limit estimation and finite-horizon surrogates of the
//! martingale convergence theorems.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::crossings::{Band, PathCrossings};
use crate::error::{Error, Result};
use crate::measure::{AtomSet, Exponent, FiniteMeasureSpace, Norm, Partition, RandomVariable};
use crate::process::{CheckedProcess, Filtration, Process};
use crate::report::{geometric_checkpoints, InequalityReport};
use crate::scalar::Scalar;
use crate::ui::ModulusPoint;

/// `λ μ{max_{k ≤ n} f_k ≥ λ} ≤ ∫_{max_{k ≤ n} f_k ≥ λ} f_n dμ`.
pub fn check_maximal_inequality<S: Scalar>(
    sub: &CheckedProcess<'_, S>,
    n: usize,
    lambda: &S,
) -> Result<InequalityReport<S>> {
    let f = sub.process;
    if n > f.horizon() {
        return Err(Error::TimeOutOfRange {
            time: n,
            horizon: f.horizon(),
        });
    }
    if lambda.partial_cmp(&S::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidArgument("λ must be positive".into()));
    }
    let running_max = (1..=n).fold(f.at(0).clone(), |acc, k| {
        acc.zip_with(f.at(k), |a, b| a.clone().max_of(b.clone()))
    });
    let level = running_max.level_set(|v| v >= lambda);
    let lhs = lambda.clone() * sub.space.measure(&level)?;
    let rhs = sub.space.set_integral(f.at(n), &level)?;
    Ok(InequalityReport::le(lhs, rhs))
}

/// `max − min` of a window of values.
pub fn oscillation<S: Scalar>(values: &[S]) -> S {
    let Some(first) = values.first() else {
        return S::zero();
    };
    let (lo, hi) = values[1..]
        .iter()
        .fold((first.clone(), first.clone()), |(lo, hi), v| {
            (lo.min_of(v.clone()), hi.max_of(v.clone()))
        });
    hi - lo
}

/// Oscillation of the last `window` entries of a path.
pub fn tail_oscillation<S: Scalar>(path: &[S], window: usize) -> S {
    oscillation(&path[path.len().saturating_sub(window)..])
}

/// Windowed-oscillation estimate of the almost-everywhere limit.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate<S> {
    /// Final value where the tail settled, 0 elsewhere.
    pub values: RandomVariable<S>,
    pub converged_mask: AtomSet,
    pub sup_partition: Partition,
}

impl<S: Scalar> LimitEstimate<S> {
    /// Fraction of mass on which the tail settled.
    pub fn converged_fraction(&self, space: &FiniteMeasureSpace<S>) -> Result<S> {
        Ok(space.measure(&self.converged_mask)? / space.total_mass())
    }
}

/// Per atom: if the last `window` values oscillate by at most `tol` the
/// estimate is the final value, otherwise 0.
pub fn limit_process_estimate<S: Scalar>(
    f: &Process<S>,
    filt: &Filtration,
    tol: &S,
    window: usize,
) -> Result<LimitEstimate<S>> {
    if window == 0 || window > f.horizon() + 1 {
        return Err(Error::InvalidArgument(format!(
            "window {window} must lie in 1..={}",
            f.horizon() + 1
        )));
    }
    if filt.atom_count() != f.atom_count() {
        return Err(Error::AtomCountMismatch {
            expected: filt.atom_count(),
            found: f.atom_count(),
        });
    }
    let n = f.atom_count();
    let converged: Vec<bool> = (0..n)
        .map(|atom| tail_oscillation(&f.path(atom), window) <= *tol)
        .collect();
    let values = RandomVariable::new(
        (0..n)
            .map(|atom| {
                if converged[atom] {
                    f.value(f.horizon(), atom).clone()
                } else {
                    S::zero()
                }
            })
            .collect(),
    )?;
    Ok(LimitEstimate {
        values,
        converged_mask: AtomSet::from_mask(converged),
        sup_partition: filt.sup(),
    })
}

/// `k ↦ μ{U ≥ k}` for `k = 1, 2, 4, …` while any atom reaches `k`, as a
/// fraction of the total mass.
pub fn band_violation_curve(counts: &[usize], weights: &[f64]) -> Vec<(usize, f64)> {
    let total = weights.iter().fold(0.0, |acc, w| acc + w);
    let top = counts.iter().copied().max().unwrap_or(0);
    let mut out = Vec::new();
    let mut k = 1;
    loop {
        let mass: f64 = counts
            .iter()
            .zip(weights)
            .filter(|(c, _)| **c >= k)
            .fold(0.0, |acc, (_, w)| acc + w);
        out.push((k, if total > 0.0 { mass / total } else { 0.0 }));
        if k > top {
            break;
        }
        k *= 2;
    }
    out
}

/// Whether the violation measure at least halves each time `k` doubles.
pub fn halves_per_doubling(curve: &[(usize, f64)]) -> bool {
    curve.windows(2).all(|w| w[1].1 <= 0.5 * w[0].1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct BandDiagnostic<S> {
    pub band: Band<S>,
    /// `(k, μ{U ≥ k} / μ(Ω))`
    pub violations: Vec<(usize, f64)>,
    /// `μ[U]` against `(R + |a| μ(Ω)) / (b − a)` when an L¹ bound `R` is given.
    pub chain_bound: Option<InequalityReport<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceDiagnostic<S> {
    /// Fraction of mass with `sup_n |f_n| ≤ cutoff`.
    pub bounded_fraction: S,
    pub bands: Vec<BandDiagnostic<S>>,
    /// `‖f_m − f_n‖₁` between consecutive geometric checkpoints `(n, m)`.
    pub cauchy_gap: Vec<(usize, usize, S)>,
}

pub fn ae_convergence_diagnostic<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    f: &Process<S>,
    cutoff: &S,
    bands: &[Band<S>],
    l1_bound: Option<&S>,
) -> Result<ConvergenceDiagnostic<S>> {
    space.check_len(f.atom_count())?;
    let total = space.total_mass();
    let bounded = AtomSet::from_predicate(f.atom_count(), |atom| {
        f.path(atom).iter().all(|v| v.abs() <= *cutoff)
    });
    let bounded_fraction = space.measure(&bounded)? / total.clone();
    let weights: Vec<f64> = space.weights().iter().map(Scalar::to_f64).collect();
    let horizon = f.horizon();
    let bands = bands
        .iter()
        .map(|band| {
            let counts: Vec<usize> = (0..f.atom_count())
                .map(|atom| PathCrossings::new(band, &f.path(atom), horizon).upcrossings())
                .collect();
            let chain_bound = match l1_bound {
                Some(r) if band.is_proper() => {
                    let mean = space.integral(&RandomVariable::new(
                        counts.iter().map(|&c| S::from_i64(c as i64)).collect(),
                    )?)?;
                    let rhs = (r.clone() + band.a.abs() * total.clone()) / band.width();
                    Some(InequalityReport::le(mean, rhs))
                }
                _ => None,
            };
            Ok(BandDiagnostic {
                band: band.clone(),
                violations: band_violation_curve(&counts, &weights),
                chain_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let checkpoints = geometric_checkpoints(horizon);
    let cauchy_gap = checkpoints
        .windows(2)
        .map(|w| {
            let gap = space.snorm(&f.at(w[1]).sub(f.at(w[0])), Exponent::ONE)?;
            Ok((w[0], w[1], gap.raw().clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceDiagnostic {
        bounded_fraction,
        bands,
        cauchy_gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1ConvergenceReport<S> {
    /// `(n, ‖f_n − f_∞‖₁)` at geometric checkpoints.
    pub distances: Vec<(usize, S)>,
    /// Last point of the supplied truncation-modulus curve is below the
    /// threshold.
    pub ui_small: bool,
    pub final_below_tol: bool,
    /// Distances never increase across checkpoints. Reported, not required.
    pub monotone: bool,
    /// `ui_small ⇒ final_below_tol`.
    pub holds: bool,
}

/// L¹ convergence to the estimated limit, conditional on a small
/// uniform-integrability modulus.
pub fn check_l1_convergence_a<S: Scalar>(
    sub: &CheckedProcess<'_, S>,
    limit: &LimitEstimate<S>,
    ui_curve: &[ModulusPoint<S>],
    ui_threshold: f64,
    tol: &S,
) -> Result<L1ConvergenceReport<S>> {
    let f = sub.process;
    let mut checkpoints = vec![0];
    checkpoints.extend(geometric_checkpoints(f.horizon()));
    let distances = checkpoints
        .iter()
        .map(|&n| {
            let d = sub.space.snorm(&f.at(n).sub(&limit.values), Exponent::ONE)?;
            Ok((n, d.raw().clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let ui_small = ui_curve
        .last()
        .is_some_and(|m| m.modulus.to_f64() <= ui_threshold);
    let final_below_tol = distances.last().is_some_and(|(_, d)| d <= tol);
    let monotone = distances.windows(2).all(|w| w[1].1.ae_le(&w[0].1));
    Ok(L1ConvergenceReport {
        distances,
        ui_small,
        final_below_tol,
        monotone,
        holds: !ui_small || final_below_tol,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureReport {
    pub holds: bool,
    /// First `(n, atom)` with `f_n ≠ μ[f_H | ℱ_n]` on a charged atom.
    pub witness: Option<(usize, usize)>,
}

/// `f_n = μ[f_H | ℱ_n]` a.e. for every `n`: on a finite horizon the
/// filtration reaches its supremum at `H`, so `f_H` is the limit.
pub fn check_l1_convergence_b<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    filt: &Filtration,
    f: &Process<S>,
) -> Result<ClosureReport> {
    if let Some(time) = filt.first_non_adapted(f)? {
        return Err(Error::NotAdapted { time });
    }
    let last = f.at(f.horizon());
    for n in 0..=f.horizon() {
        let ce = filt.condexp(space, last, n)?;
        if let Some(atom) = space.first_ae_violation(&ce, f.at(n), |a, b| a.ae_eq(b))? {
            return Ok(ClosureReport {
                holds: false,
                witness: Some((n, atom)),
            });
        }
    }
    Ok(ClosureReport {
        holds: true,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevyReport<S> {
    /// `d_n = ‖μ[g | ℱ_n] − g‖₁`
    pub distances: Vec<S>,
    pub nonincreasing: bool,
    /// First `n` with `d_{n+1} > d_n`.
    pub first_increase: Option<usize>,
    pub terminal_zero: bool,
}

impl<S> LevyReport<S> {
    pub fn holds(&self) -> bool {
        self.nonincreasing && self.terminal_zero
    }
}

/// Distances from `g` to its conditional expectations along the filtration.
pub fn check_levy_upward<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    filt: &Filtration,
    g: &RandomVariable<S>,
) -> Result<LevyReport<S>> {
    if !filt.sup().is_measurable(g)? {
        return Err(Error::NotLimitMeasurable);
    }
    let distances = (0..=filt.horizon())
        .map(|n| {
            let ce = filt.condexp(space, g, n)?;
            Ok(space.snorm(&ce.sub(g), Exponent::ONE)?.raw().clone())
        })
        .collect::<Result<Vec<S>>>()?;
    let first_increase = distances.windows(2).position(|w| w[1] > w[0]);
    let terminal_zero = distances.last().is_some_and(|d| d.is_zero());
    Ok(LevyReport {
        distances,
        nonincreasing: first_increase.is_none(),
        first_increase,
        terminal_zero,
    })
}

/// `‖g‖ₚ` against the smallest `‖f_n‖ₚ` over the last `window` times, a
/// finite stand-in for `liminf ‖f_n‖ₚ`.
pub fn fatou_norm_check<S: Scalar>(
    space: &FiniteMeasureSpace<S>,
    f: &Process<S>,
    g: &RandomVariable<S>,
    p: Exponent,
    window: usize,
    tol: &S,
) -> Result<InequalityReport<Norm<S>>> {
    space.check_len(f.atom_count())?;
    space.check_len(g.atom_count())?;
    if window == 0 || window > f.horizon() + 1 {
        return Err(Error::InvalidArgument(format!(
            "window {window} must lie in 1..={}",
            f.horizon() + 1
        )));
    }
    if let Some(atom) =
        space.first_ae_violation(f.at(f.horizon()), g, |a, b| (a.clone() - b.clone()).abs() <= *tol)?
    {
        return Err(Error::InvalidArgument(format!(
            "f_H is not within tolerance of g at atom {atom}"
        )));
    }
    let lhs = space.snorm(g, p)?;
    let mut rhs: Option<Norm<S>> = None;
    for n in (f.horizon() + 1 - window)..=f.horizon() {
        let norm = space.snorm(f.at(n), p)?;
        rhs = Some(match rhs {
            Some(best) if best.le(&norm) => best,
            _ => norm,
        });
    }
    let rhs = rhs.expect("window is nonempty");
    let holds = lhs.le(&rhs);
    Ok(InequalityReport { lhs, rhs, holds })
}

/// Groups atoms by estimated limit value: the blocks on which the estimate is
/// constant. Used to check that the estimate is measurable with respect to
/// the supremum σ-algebra on the converged atoms.
pub fn estimate_is_limit_measurable<S: Scalar>(est: &LimitEstimate<S>) -> Result<bool> {
    let mut seen: BTreeMap<usize, S::Key> = BTreeMap::new();
    for atom in est.converged_mask.iter() {
        let block = est.sup_partition.block_of(atom);
        let key = est.values.get(atom).key();
        if let Some(prev) = seen.insert(block, key.clone()) {
            if prev != key {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
