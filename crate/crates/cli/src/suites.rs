//! The thirteen acceptance suites run by `mgale selftest`.
//!
//! Every suite draws its random instances from per-instance streams keyed by
//! `(seed, suite, instance)`, so results do not depend on the thread count.

use std::ops::RangeInclusive;

use martingale_core::convergence::{band_violation_curve, halves_per_doubling, tail_oscillation};
use martingale_core::crossings::{figure_one_path, upcrossing_estimate_sweep};
use martingale_core::instances::{
    random_filtration, random_measurable, random_partition, random_path, random_predictable,
    random_probability_space, random_refinement, random_space, random_submartingale, random_variable,
};
use martingale_core::montecarlo::{trial_rng, DEFAULT_PATH_CAP};
use martingale_core::ui::{KnapsackStrategy, SpikeKind};
use martingale_core::{
    band_translation_identity, borel_cantelli_martingale, check_borel_cantelli, check_bridging_inequality,
    check_levy_upward, check_maximal_inequality, check_optional_stopping, check_p_monotonicity,
    check_upcrossing_estimate_sup, classify, crossing_table, doob_decomposition, exhaustive_space, hitting,
    simulate_map, spike_family, stochastic_integral, upcrossings_before, vitali_empirical, AtomSet, Band,
    BorelCantelliConfig, CheckedProcess, CondexpInput, EventSchedule, EventSequence, Exponent, ExtendedTime,
    Filtration, FiniteMeasureSpace, FunctionFamily, MartingaleClass, Partition, PathCrossings, Process,
    RandomVariable, Rational, RunConfig, Scalar, StoppingTime, TrajectoryModel, ValuePredicate,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::output::{CheckOutcome, Table};
use crate::row;

pub const CRITERIA: RangeInclusive<usize> = 1..=13;

pub fn name(id: usize) -> &'static str {
    match id {
        1 => "c01_condexp_routes",
        2 => "c02_upcrossing_estimate",
        3 => "c03_band_translation",
        4 => "c04_figure_one",
        5 => "c05_stochastic_integral",
        6 => "c06_doob_decomposition",
        7 => "c07_maximal_and_optional_stopping",
        8 => "c08_levy_upward",
        9 => "c09_ui_moduli",
        10 => "c10_vitali_spikes",
        11 => "c11_ae_convergence",
        12 => "c12_borel_cantelli",
        13 => "c13_determinism",
        _ => panic!("no criterion {id}"),
    }
}

pub fn criterion(id: usize, seed: u64) -> CheckOutcome {
    match id {
        1 => condexp_routes(seed),
        2 => upcrossing_estimate(),
        3 => band_translation(seed),
        4 => figure_one(),
        5 => stochastic_integrals(seed),
        6 => doob(seed),
        7 => maximal_and_optional_stopping(),
        8 => levy(seed),
        9 => ui_moduli(seed),
        10 => vitali_spikes(),
        11 => ae_convergence(seed),
        12 => borel_cantelli(seed),
        13 => determinism(seed),
        _ => panic!("no criterion {id}"),
    }
}

/// Runs `count` instances in parallel, each with its own stream.
fn instances<T: Send>(
    seed: u64,
    suite: u64,
    count: usize,
    run: impl Fn(usize, &mut ChaCha8Rng) -> T + Sync + Send,
) -> Vec<T> {
    let base = seed ^ suite.rotate_right(8);
    (0..count)
        .into_par_iter()
        .map(|i| run(i, &mut trial_rng(base, i)))
        .collect()
}

/// `(failures, first failure)` over per-instance verdicts.
fn tally(results: &[Result<(), String>]) -> (usize, Option<String>) {
    let failures = results.iter().filter(|r| r.is_err()).count();
    let first = results
        .iter()
        .enumerate()
        .find_map(|(i, r)| r.as_ref().err().map(|e| format!("instance {i}: {e}")));
    (failures, first)
}

fn verdict_table(results: &[Result<(), String>]) -> Table {
    let mut t = Table::new(&["instance", "holds", "note"]);
    for (i, r) in results.iter().enumerate() {
        t.push(row![i, r.is_ok(), r.as_ref().err().map_or("", String::as_str)]);
    }
    t
}

fn counted(name: &str, results: Vec<Result<(), String>>, what: &str) -> CheckOutcome {
    let (failures, first) = tally(&results);
    let mut summary = format!("{} {what}, {failures} violations", results.len());
    if let Some(first) = first {
        summary.push_str(&format!("; {first}"));
    }
    CheckOutcome::new(name, failures == 0, summary, verdict_table(&results))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn condexp_routes(seed: u64) -> CheckOutcome {
    let results = instances(seed, 1, 1000, |_, rng| {
        let atoms = rng.random_range(1..=16);
        let space = random_space::<Rational, _>(rng, atoms);
        let sub = random_partition(rng, atoms);
        let ambient = random_refinement(rng, &sub, 3);
        let f = random_measurable::<Rational, _>(rng, &ambient, -8, 8);
        let input = CondexpInput::new(&space, &ambient, &sub, &f).map_err(|e| e.to_string())?;
        let l2 = input.condexp_l2().map_err(|e| e.to_string())?;
        ensure(space.ae_eq(&input.condexp(), &l2).unwrap_or(false), || {
            "block average and projection differ".into()
        })?;
        let ch = input.check_set_integral_characterization().map_err(|e| e.to_string())?;
        ensure(ch.holds, || format!("set integrals differ by {}", ch.worst_block_gap))
    });
    counted(name(1), results, "instances")
}

fn band_grid() -> Vec<Band<Rational>> {
    let grid = [q(-2, 1), q(-1, 1), q(-1, 2), q(0, 1), q(1, 2), q(1, 1), q(2, 1)];
    let mut bands = Vec::new();
    for a in &grid {
        for b in &grid {
            if a != b {
                bands.push(Band::new(a.clone(), b.clone()));
            }
        }
    }
    bands
}

fn upcrossing_estimate() -> CheckOutcome {
    let bands = band_grid();
    let walk = TrajectoryModel::FairWalk { step: Rational::one() };
    let per_horizon: Vec<(Table, usize, Option<String>)> = (0..=10usize)
        .into_par_iter()
        .map(|h| {
            let e = exhaustive_space::<Rational>(&walk, h, DEFAULT_PATH_CAP).expect("2^10 paths fit the cap");
            let sub = CheckedProcess::submartingale(&e.space, &e.filtration, &e.process)
                .expect("the fair walk is a martingale");
            let mut table = Table::new(&["H", "a", "b", "N", "lhs", "rhs", "holds"]);
            let mut violations = 0;
            let mut first = None;
            for band in &bands {
                let rows = upcrossing_estimate_sweep(std::slice::from_ref(band), &sub).expect("N ≤ H");
                for r in rows {
                    let ok = if band.is_proper() {
                        r.holds
                    } else {
                        r.lhs <= Rational::zero() && Rational::zero() <= r.rhs
                    };
                    if !ok {
                        violations += 1;
                        first.get_or_insert_with(|| format!("H={h} band ({}, {}) N={}", r.a, r.b, r.horizon));
                    }
                    table.push(row![h, r.a, r.b, r.horizon, r.lhs, r.rhs, ok]);
                }
                let sup = check_upcrossing_estimate_sup(band, &sub).expect("dimensions agree");
                if !sup.holds {
                    violations += 1;
                    first.get_or_insert_with(|| format!("H={h} band ({}, {}) sup form", band.a, band.b));
                }
            }
            (table, violations, first)
        })
        .collect();
    let mut table = Table::new(&["H", "a", "b", "N", "lhs", "rhs", "holds"]);
    let mut violations = 0;
    let mut first = None;
    for (t, v, f) in per_horizon {
        table.rows.extend(t.rows);
        violations += v;
        first = first.or(f);
    }
    let summary = format!(
        "{} (H, band, N) rows over H ≤ 10 and {} bands, {violations} violations{}",
        table.rows.len(),
        bands.len(),
        first.map_or(String::new(), |f| format!("; first at {f}"))
    );
    CheckOutcome::new(name(2), violations == 0, summary, table)
}

fn band_translation(seed: u64) -> CheckOutcome {
    let results = instances(seed, 3, 10_000, |_, rng| {
        let len = rng.random_range(1..=30);
        let path = random_path::<Rational, _>(rng, len, 6);
        let d = rng.random_range(1..=4);
        let a = q(rng.random_range(-12..=12), d);
        let b = a.clone() + q(rng.random_range(1..=12), rng.random_range(1..=4));
        let f = Process::from_path(path).expect("nonempty path");
        let r = band_translation_identity(&Band::new(a.clone(), b.clone()), &f).map_err(|e| e.to_string())?;
        ensure(r.holds, || format!("band ({a}, {b}) mismatch at {:?}", r.first_mismatch))
    });
    counted(name(3), results, "paths")
}

fn figure_one() -> CheckOutcome {
    let f = Process::from_path(figure_one_path::<Rational>()).expect("fourteen points");
    let band = Band::new(Rational::zero(), Rational::one());
    let t = crossing_table(&band, &f, 13).expect("N = 13 is the horizon");
    let sigma: Vec<usize> = t.sigma.iter().map(|r| r[0]).collect();
    let tau: Vec<usize> = t.tau.iter().map(|r| r[0]).collect();
    let count = upcrossings_before(&band, &f, 13).expect("N = 13 is the horizon")[0];
    let chain = PathCrossings::new(&band, &figure_one_path::<Rational>(), 13);
    let labels_match = [0, 5, 10].iter().enumerate().all(|(k, &s)| chain.sigma(k) == s)
        && [1, 7].iter().enumerate().all(|(k, &s)| chain.tau(k) == s)
        && (3..20).all(|k| chain.sigma(k) == 13 && chain.tau(k) == 13);
    let mut table = Table::new(&["k", "sigma", "tau"]);
    for k in 0..sigma.len() {
        table.push(row![k, sigma[k], tau[k]]);
    }
    let summary = format!("σ = {sigma:?}, τ = {tau:?}, upcrossings_before = {count}");
    CheckOutcome::new(name(4), labels_match && count == 2, summary, table)
}

struct Instance {
    space: FiniteMeasureSpace<Rational>,
    filt: Filtration,
    f: Process<Rational>,
}

/// Random submartingale on `≤ 16` atoms with horizon `≤ 8`.
fn submartingale_instance(rng: &mut ChaCha8Rng) -> Instance {
    let atoms = rng.random_range(1..=16);
    let horizon = rng.random_range(1..=8);
    let space = random_space(rng, atoms);
    let singletons = rng.random_bool(0.5);
    let filt = random_filtration(rng, atoms, horizon, singletons);
    let f = random_submartingale(rng, &space, &filt);
    Instance { space, filt, f }
}

fn stochastic_integrals(seed: u64) -> CheckOutcome {
    let results = instances(seed, 5, 1000, |_, rng| {
        let Instance { space, filt, f } = submartingale_instance(rng);
        let bound = rng.random_range(1..=4);
        let c = random_predictable::<Rational, _>(rng, &filt, bound);
        let err = |e: martingale_core::Error| e.to_string();
        let integral = stochastic_integral(&c, &f).map_err(err)?;
        let class = classify(&space, &filt, &integral).map_err(err)?.class;
        ensure(class.is_submartingale(), || format!("integral classifies as {class}"))?;
        let h = f.horizon();
        let ones = Process::constant(h, space.atom_count(), Rational::one());
        let unit = stochastic_integral(&ones, &f).map_err(err)?;
        let lhs = space.integral(unit.at(h)).map_err(err)?;
        let rhs = space.integral(f.at(h)).map_err(err)? - space.integral(f.at(0)).map_err(err)?;
        ensure(lhs == rhs, || format!("μ[(1·f)_N] = {lhs} but μ[f_N] − μ[f_0] = {rhs}"))
    });
    counted(name(5), results, "submartingales")
}

fn random_measurable_set(rng: &mut ChaCha8Rng, p: &Partition) -> AtomSet {
    let keep: Vec<bool> = (0..p.block_count()).map(|_| rng.random_bool(0.5)).collect();
    AtomSet::from_mask((0..p.atom_count()).map(|atom| keep[p.block_of(atom)]).collect())
}

fn doob(seed: u64) -> CheckOutcome {
    let err = |e: martingale_core::Error| e.to_string();
    let decompositions = instances(seed, 5, 1000, |_, rng| {
        let Instance { space, filt, f } = submartingale_instance(rng);
        let d = doob_decomposition(&space, &filt, &f).map_err(err)?;
        let class = classify(&space, &filt, &d.martingale_part).map_err(err)?.class;
        ensure(class == MartingaleClass::Martingale, || {
            format!("martingale part classifies as {class}")
        })?;
        ensure(filt.is_predictable(&d.predictable_part).map_err(err)?, || {
            "predictable part is not predictable".into()
        })?;
        let a = &d.predictable_part;
        let nondecreasing = (1..=f.horizon()).all(|n| {
            (0..space.atom_count())
                .filter(|&atom| space.is_charged(atom))
                .all(|atom| a.value(n - 1, atom) <= a.value(n, atom))
        });
        ensure(nondecreasing, || "predictable part decreases".into())?;
        ensure(d.martingale_part.add(a).map_err(err)? == f, || "M + A ≠ f".into())
    });
    let events = instances(seed, 6, 1000, |_, rng| {
        let Instance { space, filt, .. } = submartingale_instance(rng);
        let sets = (0..=filt.horizon())
            .map(|n| random_measurable_set(rng, filt.step(n)))
            .collect();
        let seq = EventSequence::new(sets, filt.clone()).map_err(err)?;
        let m = borel_cantelli_martingale(&seq, &space).map_err(err)?;
        let d = doob_decomposition(&space, &filt, &seq.counting_process::<Rational>()).map_err(err)?;
        ensure(m == d.martingale_part, || "event martingale differs from the Doob part".into())
    });
    let (df, dfirst) = tally(&decompositions);
    let (ef, efirst) = tally(&events);
    let summary = format!(
        "{} decompositions with {df} violations, {} event sequences with {ef} mismatches{}",
        decompositions.len(),
        events.len(),
        dfirst.or(efirst).map_or(String::new(), |f| format!("; {f}"))
    );
    CheckOutcome::new(name(6), df == 0 && ef == 0, summary, verdict_table(&decompositions))
        .with_table("events", verdict_table(&events))
}

fn maximal_and_optional_stopping() -> CheckOutcome {
    let models = [
        ("fair", TrajectoryModel::FairWalk { step: Rational::one() }),
        ("biased_2_3", TrajectoryModel::BiasedWalk { p_up: q(2, 3), step: Rational::one() }),
        ("biased_3_4", TrajectoryModel::BiasedWalk { p_up: q(3, 4), step: Rational::one() }),
    ];
    let lambdas = [q(1, 2), q(1, 1), q(3, 2), q(2, 1), q(3, 1), q(5, 1)];
    let levels: Vec<Rational> = (-2..=2).map(Rational::from_i64).collect();
    let jobs: Vec<(usize, usize)> = (0..models.len()).flat_map(|m| (1..=10).map(move |h| (m, h))).collect();
    let per_job: Vec<(usize, usize, Option<String>)> = jobs
        .par_iter()
        .map(|&(m, h)| {
            let (label, model) = &models[m];
            let e = exhaustive_space::<Rational>(model, h, DEFAULT_PATH_CAP).expect("2^10 paths fit the cap");
            let sub = CheckedProcess::submartingale(&e.space, &e.filtration, &e.process)
                .expect("walks with p_up ≥ 1/2 are submartingales");
            let mut checks = 0;
            let mut violations = 0;
            let mut first = None;
            let mut record = |ok: bool, what: String| {
                checks += 1;
                if !ok {
                    violations += 1;
                    first.get_or_insert(format!("{label} H={h}: {what}"));
                }
            };
            for n in 0..=h {
                for l in &lambdas {
                    let r = check_maximal_inequality(&sub, n, l).expect("valid λ and n");
                    record(r.holds, format!("maximal n={n} λ={l}"));
                }
            }
            let atoms = e.space.atom_count();
            let horizon_time = StoppingTime::constant(atoms, ExtendedTime::Finite(h));
            for l in &levels {
                for pred in [ValuePredicate::AtLeast(l.clone()), ValuePredicate::AtMost(l.clone())] {
                    let late = StoppingTime::from_finite(hitting(&e.process, &pred, 0, h).expect("m = H"));
                    for m in 0..=h {
                        let early = StoppingTime::from_finite(hitting(&e.process, &pred, 0, m).expect("m ≤ H"));
                        for sigma in [&late, &horizon_time] {
                            let r = check_optional_stopping(&sub, &early, sigma).expect("hitting times are ordered");
                            record(r.holds(), format!("optional stopping {pred:?} m={m}"));
                        }
                    }
                }
            }
            (checks, violations, first)
        })
        .collect();
    let checks: usize = per_job.iter().map(|j| j.0).sum();
    let violations: usize = per_job.iter().map(|j| j.1).sum();
    let first = per_job.into_iter().find_map(|j| j.2);

    let e = exhaustive_space::<Rational>(&models[0].1, 2, DEFAULT_PATH_CAP).expect("four paths");
    let sub = CheckedProcess::submartingale(&e.space, &e.filtration, &e.process).expect("fair walk");
    let worked = check_maximal_inequality(&sub, 2, &Rational::one()).expect("n = 2 ≤ H");
    let worked_ok = worked.lhs == q(1, 2) && worked.rhs == q(1, 2);
    let mut table = Table::new(&["instance", "lhs", "rhs"]);
    table.push(row!["fair H=2 λ=1 n=2", worked.lhs, worked.rhs]);
    let summary = format!(
        "{checks} checks, {violations} violations{}; fair walk λ=1, n=2: lhs = {}, rhs = {}",
        first.map_or(String::new(), |f| format!(" (first: {f})")),
        worked.lhs,
        worked.rhs
    );
    CheckOutcome::new(name(7), violations == 0 && worked_ok, summary, table)
}

fn levy(seed: u64) -> CheckOutcome {
    let reports = instances(seed, 8, 500, |_, rng| {
        let atoms = rng.random_range(1..=16);
        let horizon = rng.random_range(1..=6);
        let space = random_space::<Rational, _>(rng, atoms);
        let filt = random_filtration(rng, atoms, horizon, true);
        let g = random_variable::<Rational, _>(rng, atoms, 8, true);
        check_levy_upward(&space, &filt, &g).expect("a filtration ending at singletons measures every g")
    });
    let increases = reports.iter().filter(|r| !r.nonincreasing).count();
    let nonzero_ends = reports.iter().filter(|r| !r.terminal_zero).count();
    let mut table = Table::new(&["instance", "nonincreasing", "terminal_zero", "distances"]);
    for (i, r) in reports.iter().enumerate() {
        let d: Vec<String> = r.distances.iter().map(Rational::to_string).collect();
        table.push(row![i, r.nonincreasing, r.terminal_zero, d.join(" ")]);
    }

    let space = FiniteMeasureSpace::uniform(4).expect("four atoms");
    let filt = Filtration::new(
        vec![
            Partition::trivial(4),
            Partition::from_blocks(4, &[vec![0, 1], vec![2, 3]]).expect("two blocks"),
            Partition::discrete(4),
        ],
        Partition::discrete(4),
    )
    .expect("nested");
    let g = RandomVariable::new((1..=4).map(Rational::from_i64).collect()).expect("finite");
    let example = check_levy_upward(&space, &filt, &g).expect("g is measurable");
    let example_ok = example.distances == [q(1, 1), q(1, 2), q(0, 1)];
    let example_d: Vec<String> = example.distances.iter().map(Rational::to_string).collect();

    let first = reports
        .iter()
        .position(|r| !r.nonincreasing)
        .map(|i| format!("; first increase in instance {i}: d = {}", table.rows[i][3]));
    let summary = format!(
        "{} instances: {increases} with an increasing step, {nonzero_ends} with d_H ≠ 0; \
         worked example d = [{}]{}",
        reports.len(),
        example_d.join(", "),
        first.unwrap_or_default()
    );
    let holds = increases == 0 && nonzero_ends == 0 && example_ok;
    CheckOutcome::new(name(8), holds, summary, table)
}

fn family(rng: &mut ChaCha8Rng, atoms: usize, p: Exponent) -> FunctionFamily<Rational> {
    let k = rng.random_range(1..=3);
    FunctionFamily::new((0..k).map(|_| random_variable(rng, atoms, 6, true)).collect(), p)
        .expect("nonempty family")
}

fn ui_moduli(seed: u64) -> CheckOutcome {
    let err = |e: martingale_core::Error| e.to_string();
    let bridging = instances(seed, 9, 10_000, |_, rng| {
        let atoms = rng.random_range(1..=16);
        let space = random_space::<Rational, _>(rng, atoms);
        let fam = family(rng, atoms, Exponent::ONE);
        let c = q(rng.random_range(0..=16), 2);
        let a = AtomSet::from_mask((0..atoms).map(|_| rng.random_bool(0.4)).collect());
        let r = check_bridging_inequality(&space, &fam, &c, &a).map_err(err)?;
        ensure(r.holds, || format!("C = {c}"))
    });
    // Sizes 1..=20, fewer draws at the sizes where enumeration dominates.
    let sizes: Vec<usize> = (1..=20).flat_map(|n| std::iter::repeat_n(n, if n <= 14 { 8 } else { 2 })).collect();
    let knapsack = instances(seed, 109, sizes.len(), |i, rng| {
        let atoms = sizes[i];
        let space = random_space::<Rational, _>(rng, atoms);
        let p = Exponent::Finite(rng.random_range(1..=3));
        let member = random_variable::<Rational, _>(rng, atoms, 6, true);
        let fam = FunctionFamily::new(vec![member], p).map_err(err)?;
        let delta = space.total_mass() * q(rng.random_range(0..=8), 8);
        let exhaustive = fam.analyst_modulus(&space, &delta, KnapsackStrategy::Exhaustive).map_err(err)?;
        let bnb = fam.analyst_modulus(&space, &delta, KnapsackStrategy::BranchAndBound).map_err(err)?;
        ensure(exhaustive.raw() == bnb.raw(), || {
            format!("{atoms} atoms: enumeration {exhaustive} vs branch-and-bound {bnb}")
        })
    });
    let holder = instances(seed, 209, 1000, |_, rng| {
        let atoms = rng.random_range(1..=10);
        let space = random_probability_space::<Rational, _>(rng, atoms);
        let fam = family(rng, atoms, Exponent::ONE);
        let p = rng.random_range(1..=3);
        let q_exp = if rng.random_bool(0.25) {
            Exponent::Infinity
        } else {
            Exponent::Finite(p + rng.random_range(0..=2))
        };
        let grid: Vec<Rational> = (0..=8).map(Rational::from_i64).collect();
        let r = check_p_monotonicity(&space, &fam, Exponent::Finite(p), q_exp, &grid).map_err(err)?;
        let ordered = r.rows.iter().all(|row| row.modulus_p.le(&row.modulus_q));
        ensure(r.holds && ordered, || format!("p = {p}, q = {q_exp}"))
    });
    let (bf, b1) = tally(&bridging);
    let (kf, k1) = tally(&knapsack);
    let (hf, h1) = tally(&holder);
    let summary = format!(
        "bridging {bf}/{} violations, knapsack {kf}/{} disagreements, Hölder {hf}/{} violations{}",
        bridging.len(),
        knapsack.len(),
        holder.len(),
        b1.or(k1).or(h1).map_or(String::new(), |f| format!("; {f}"))
    );
    CheckOutcome::new(name(9), bf + kf + hf == 0, summary, verdict_table(&knapsack))
        .with_table("holder", verdict_table(&holder))
}

fn vitali_spikes() -> CheckOutcome {
    const H: usize = 64;
    const TOL: f64 = 1e-12;
    let eps = [0.5];
    let levels: Vec<f64> = (0..=6).map(|k| f64::from(1u32 << k)).collect();
    let mut table = Table::new(&["family", "n", "lp", "expected_lp", "in_measure", "expected_in_measure"]);
    let mut curve = Table::new(&["family", "C", "modulus", "expected"]);
    let mut worst: f64 = 0.0;
    let mut flags = Vec::new();
    for kind in [SpikeKind::Shrinking, SpikeKind::FixedMass] {
        let (space, members) = spike_family::<f64>(kind, H).expect("H ≥ 1");
        let g = RandomVariable::zeros(space.atom_count());
        let r = vitali_empirical(&space, &members, &g, Exponent::ONE, &eps, &levels, Default::default())
            .expect("finite exponent");
        let label = match kind {
            SpikeKind::Shrinking => "shrinking",
            SpikeKind::FixedMass => "fixed_mass",
        };
        for row in &r.rows {
            let n = row.n as f64;
            let (lp, mu) = match kind {
                SpikeKind::Shrinking => (1.0 / n, 1.0 / (n * n)),
                SpikeKind::FixedMass => (1.0, 1.0 / n),
            };
            worst = worst.max((row.lp.to_f64() - lp).abs()).max((row.in_measure[0] - mu).abs());
            table.push(row![label, row.n, row.lp.to_f64(), lp, row.in_measure[0], mu]);
        }
        for p in &r.ui_modulus_curve {
            let expected = match kind {
                SpikeKind::Shrinking => 1.0 / p.level.ceil(),
                SpikeKind::FixedMass => 1.0,
            };
            worst = worst.max((p.modulus.to_f64() - expected).abs());
            curve.push(row![label, p.level, p.modulus.to_f64(), expected]);
        }
        let shape = match kind {
            SpikeKind::Shrinking => r.lp_decay && r.ui_vanishing && r.in_measure_decay,
            SpikeKind::FixedMass => r.in_measure_decay && !r.ui_vanishing && !r.lp_decay,
        };
        flags.push(format!(
            "{label}: L1 decay={} ui vanishing={} in measure={}",
            r.lp_decay, r.ui_vanishing, r.in_measure_decay
        ));
        worst = if shape && r.consistent { worst } else { f64::INFINITY };
    }
    let summary = format!("{}; worst closed-form gap {worst:e}", flags.join(", "));
    CheckOutcome::new(name(10), worst <= TOL, summary, table).with_table("curve", curve)
}

/// Parameters of the fair-walk band-decay check: the band spans about half
/// a standard deviation of `f_H`.
pub const BAND_DECAY_HORIZON: usize = 10_000;
pub const BAND_DECAY_TRIALS: usize = 10_000;
pub const BAND_DECAY_BAND: (f64, f64) = (-25.0, 25.0);

fn ae_convergence(seed: u64) -> CheckOutcome {
    let urn = TrajectoryModel::PolyaUrn { red: 1, black: 1 };
    let cfg = RunConfig {
        seed,
        trials: 10_000,
        horizon: 10_000,
        checkpoints: Vec::new(),
    };
    let settled = simulate_map(&urn, &cfg, |_, path| tail_oscillation(path, 1_000) <= 1e-2).expect("valid urn");
    let fraction = settled.iter().filter(|&&s| s).count() as f64 / settled.len() as f64;

    let walk = TrajectoryModel::FairWalk { step: Rational::one() };
    let cfg = RunConfig {
        seed,
        trials: BAND_DECAY_TRIALS,
        horizon: BAND_DECAY_HORIZON,
        checkpoints: Vec::new(),
    };
    let band = Band::new(BAND_DECAY_BAND.0, BAND_DECAY_BAND.1);
    let counts = simulate_map(&walk, &cfg, |_, path| PathCrossings::new(&band, path, BAND_DECAY_HORIZON).upcrossings())
        .expect("valid walk");
    let curve = band_violation_curve(&counts, &vec![1.0; counts.len()]);
    let halves = halves_per_doubling(&curve);

    let mut table = Table::new(&["k", "fraction"]);
    for (k, v) in &curve {
        table.push(row![k, v]);
    }
    let summary = format!(
        "Pólya: settled fraction {fraction} (last 1000 steps within 1e-2); \
         fair walk band ({}, {}): μ{{U ≥ k}} = {:?}, halves per doubling = {halves}",
        BAND_DECAY_BAND.0,
        BAND_DECAY_BAND.1,
        curve.iter().map(|c| c.1).collect::<Vec<_>>()
    );
    CheckOutcome::new(name(11), fraction >= 0.99 && halves, summary, table)
}

fn borel_cantelli(seed: u64) -> CheckOutcome {
    let cfg = BorelCantelliConfig {
        horizon: 200,
        trials: 10_000,
        seed,
        divergence_cut: 50.0,
        tail_start: 100,
        block_size: 1_000,
    };
    let schedules = [
        ("constant_half", EventSchedule::Constant { p: q(1, 2) }, 0.999),
        ("inverse_square", EventSchedule::InverseSquare, 0.95),
    ];
    let mut table = Table::new(&["schedule", "trial_block", "match_fraction", "p_horizon_mean"]);
    let mut parts = Vec::new();
    let mut holds = true;
    for (label, schedule, threshold) in &schedules {
        let r = check_borel_cantelli(schedule, &cfg).expect("valid schedule");
        let again = check_borel_cantelli(schedule, &cfg).expect("valid schedule");
        let block_csv = |r: &martingale_core::BorelCantelliReport| {
            let mut t = Table::new(&["trial_block", "match_fraction", "p_horizon_mean"]);
            for b in &r.blocks {
                t.push(row![b.trial_block, b.match_fraction, b.p_horizon_mean]);
            }
            t.to_csv()
        };
        let identical = block_csv(&r) == block_csv(&again);
        let floor = r.analytic_floor.unwrap_or(0.0);
        let floor_ok = match schedule {
            EventSchedule::Constant { .. } => floor >= 1.0 - 2f64.powi(-100),
            _ => true,
        };
        holds &= r.match_fraction >= *threshold && identical && floor_ok;
        for b in &r.blocks {
            table.push(row![label, b.trial_block, b.match_fraction, b.p_horizon_mean]);
        }
        parts.push(format!(
            "{label}: match_fraction {} (≥ {threshold}), analytic floor {floor}, rerun identical {identical}",
            r.match_fraction
        ));
    }
    CheckOutcome::new(name(12), holds, parts.join("; "), table)
}

fn determinism(seed: u64) -> CheckOutcome {
    let wide = std::thread::available_parallelism().map_or(8, |n| n.get()).max(8);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| {
            let mut outcomes = vec![criterion(3, seed), criterion(12, seed)];
            let urn = TrajectoryModel::PolyaUrn { red: 1, black: 1 };
            let cfg = RunConfig {
                seed,
                trials: 2_000,
                horizon: 2_000,
                checkpoints: Vec::new(),
            };
            let finals = simulate_map(&urn, &cfg, |_, path| path[cfg.horizon]).expect("valid urn");
            let mut t = Table::new(&["trial", "final"]);
            for (i, x) in finals.iter().enumerate() {
                t.push(row![i, x]);
            }
            outcomes.push(CheckOutcome::new("polya_finals", true, "", t));
            outcomes
                .iter()
                .flat_map(|o| {
                    let mut bytes = format!("{} {} {}\n", o.name, o.holds, o.summary).into_bytes();
                    for (_, t) in &o.tables {
                        bytes.extend(t.to_csv());
                    }
                    bytes
                })
                .collect::<Vec<u8>>()
        })
    };
    let single = run(1);
    let many = run(wide);
    let identical = single == many;
    let mut table = Table::new(&["threads", "bytes"]);
    table.push(row![1, single.len()]);
    table.push(row![wide, many.len()]);
    let summary = format!(
        "criteria 3 and 12 plus 2000 Pólya trajectories under 1 and {wide} threads: identical = {identical}"
    );
    CheckOutcome::new(name(13), identical, summary, table)
}
