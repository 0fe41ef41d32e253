//! Executes scenario checks in either arithmetic mode.

use martingale_core::convergence::{
    band_violation_curve, check_l1_convergence_b, check_levy_upward, check_maximal_inequality,
    halves_per_doubling, tail_oscillation,
};
use martingale_core::crossings::{
    band_translation_identity, crossing_table, upcrossing_estimate_sweep, upcrossings_before, Band,
    PathCrossings,
};
use martingale_core::montecarlo::{exhaustive_space, simulate_map, RunConfig};
use martingale_core::process::{classify, doob_decomposition, stochastic_integral};
use martingale_core::stopping::{check_optional_stopping, hitting, ExtendedTime, StoppingTime, ValuePredicate};
use martingale_core::ui::{check_bridging_inequality, spike_family, vitali_empirical, DecayRule, FunctionFamily, KnapsackStrategy};
use martingale_core::{
    check_borel_cantelli, AtomSet, BorelCantelliConfig, CheckedProcess, CondexpInput, Error, Exponent,
    Filtration, FiniteMeasureSpace, MartingaleClass, Mode, Partition, Process, RandomVariable, Rational,
    Scalar,
};

use crate::output::{CheckOutcome, Table};
use crate::row;
use crate::scenario::{BandSpec, CheckSpec, ConfigError, Scenario, SpaceSpec};

/// The space a scenario's exact checks run on.
pub struct Context<S> {
    pub space: FiniteMeasureSpace<S>,
    pub filtration: Filtration,
    pub process: Process<S>,
}

pub fn scalar<S: Scalar>(r: &Rational) -> S {
    S::parse_str(&r.to_string()).expect("p/q parses in every mode")
}

fn band<S: Scalar>((a, b): &BandSpec) -> Band<S> {
    Band::new(scalar(a), scalar(b))
}

fn config_err(e: Error) -> ConfigError {
    ConfigError::new(e.to_string())
}

impl<S: Scalar> Context<S> {
    pub fn build(spec: &SpaceSpec) -> Result<Self, ConfigError> {
        match spec {
            SpaceSpec::Exhaustive { model, horizon, cap } => {
                let e = exhaustive_space::<S>(model, *horizon, *cap).map_err(config_err)?;
                Ok(Context {
                    space: e.space,
                    filtration: e.filtration,
                    process: e.process,
                })
            }
            SpaceSpec::Explicit {
                weights,
                process,
                filtration,
                ambient,
            } => {
                let space = FiniteMeasureSpace::new(weights.iter().map(scalar).collect()).map_err(config_err)?;
                let process = Process::new(
                    process
                        .iter()
                        .map(|row| row.iter().map(scalar).collect())
                        .collect(),
                )
                .map_err(config_err)?;
                space.check_len(process.atom_count()).map_err(config_err)?;
                let ambient = ambient
                    .clone()
                    .unwrap_or_else(|| Partition::discrete(process.atom_count()));
                let filtration = match filtration {
                    Some(steps) => Filtration::new(steps.clone(), ambient),
                    None => Filtration::natural(&process, ambient),
                }
                .map_err(config_err)?;
                if filtration.horizon() != process.horizon() {
                    return Err(ConfigError::new(format!(
                        "filtration has {} steps but the process has {}",
                        filtration.horizon() + 1,
                        process.horizon() + 1
                    )));
                }
                Ok(Context {
                    space,
                    filtration,
                    process,
                })
            }
        }
    }

    fn checked(&self, required: MartingaleClass) -> Result<CheckedProcess<'_, S>, Error> {
        CheckedProcess::new(&self.space, &self.filtration, &self.process, required)
    }
}

/// Errors that mean the check's hypothesis or claim failed on this input,
/// as opposed to a malformed request.
fn is_verdict(e: &Error) -> bool {
    matches!(
        e,
        Error::WrongClass { .. }
            | Error::NotAdapted { .. }
            | Error::NotPredictable { .. }
            | Error::NotStoppingTime { .. }
            | Error::NotLimitMeasurable
            | Error::NotSubSigmaAlgebra
    )
}

/// Runs every check of the scenario in its mode; `seed` overrides the file.
pub fn run_scenario(scenario: &Scenario, seed: Option<u64>) -> Result<Vec<CheckOutcome>, ConfigError> {
    match scenario.mode {
        Mode::Exact => run_in::<Rational>(scenario, seed),
        Mode::Float => run_in::<f64>(scenario, seed),
    }
}

fn run_in<S: Scalar>(scenario: &Scenario, seed: Option<u64>) -> Result<Vec<CheckOutcome>, ConfigError> {
    let seed = seed.unwrap_or(scenario.seed);
    let ctx = scenario.space.as_ref().map(Context::<S>::build).transpose()?;
    let mut outcomes = Vec::with_capacity(scenario.checks.len());
    for check in &scenario.checks {
        let result = if check.is_monte_carlo() {
            run_monte_carlo(check, seed)
        } else if let CheckSpec::Vitali { .. } = check {
            run_vitali::<S>(check)
        } else {
            run_exact(check, ctx.as_ref().expect("validated: space present"))
        };
        outcomes.push(match result {
            Ok(o) => o,
            Err(e) if is_verdict(&e) => CheckOutcome::failed(check.name(), e.to_string()),
            Err(e) => return Err(ConfigError::new(format!("check `{}`: {e}", check.name()))),
        });
    }
    Ok(outcomes)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn run_exact<S: Scalar>(check: &CheckSpec, ctx: &Context<S>) -> Result<CheckOutcome, Error> {
    let name = check.name();
    let Context {
        space,
        filtration: filt,
        process: f,
    } = ctx;
    let h = f.horizon();
    match check {
        CheckSpec::Classify { expect } => {
            let c = classify(space, filt, f)?;
            let holds = c.class.satisfies(*expect);
            let mut table = Table::new(&["kind", "i", "j", "atom"]);
            for (kind, v) in [("excess", c.first_excess), ("deficit", c.first_deficit)] {
                if let Some(v) = v {
                    table.push(row![kind, v.i, v.j, v.atom]);
                }
            }
            let witness = match expect {
                _ if holds => None,
                MartingaleClass::Submartingale => c.first_deficit,
                MartingaleClass::Supermartingale => c.first_excess,
                _ => c.witness(),
            };
            let mut summary = format!("class={} expected={expect}", c.class);
            if let Some(n) = c.not_adapted_at {
                summary.push_str(&format!(" not adapted at {n}"));
            }
            if let Some(w) = witness {
                summary.push_str(&format!(" witness {w}"));
            }
            Ok(CheckOutcome::new(name, holds, summary, table))
        }
        CheckSpec::Condexp { time, sub } => {
            if *time > h {
                return Err(Error::TimeOutOfRange { time: *time, horizon: h });
            }
            let input = CondexpInput::new(space, filt.ambient(), sub, f.at(*time))?;
            let ce = input.condexp();
            let l2 = input.condexp_l2()?;
            let ch = input.check_set_integral_characterization()?;
            let mut table = Table::new(&["atom", "f", "condexp", "condexp_l2"]);
            for atom in 0..space.atom_count() {
                table.push(row![atom, f.value(*time, atom), ce.get(atom), l2.get(atom)]);
            }
            let agree = space.ae_eq(&ce, &l2)?;
            let summary = format!(
                "routes agree={agree} characterization={} worst gap={}",
                ch.holds, ch.worst_block_gap
            );
            Ok(CheckOutcome::new(name, agree && ch.holds, summary, table))
        }
        CheckSpec::UpcrossingEstimate { bands } => {
            let sub = ctx.checked(MartingaleClass::Submartingale)?;
            let bands: Vec<Band<S>> = bands.iter().map(band).collect();
            let rows = upcrossing_estimate_sweep(&bands, &sub)?;
            let mut table = Table::new(&["a", "b", "N", "lhs", "rhs", "holds"]);
            let mut violations = 0;
            for r in &rows {
                violations += usize::from(!r.holds);
                table.push(row![r.a, r.b, r.horizon, r.lhs, r.rhs, r.holds]);
            }
            let summary = format!("{} rows, {violations} violations", rows.len());
            Ok(CheckOutcome::new(name, violations == 0, summary, table))
        }
        CheckSpec::CrossingTable {
            band: b,
            horizon,
            expect_upcrossings,
        } => {
            let n = horizon.unwrap_or(h);
            let b = band::<S>(b);
            let t = crossing_table(&b, f, n)?;
            let counts = upcrossings_before(&b, f, n)?;
            let mut table = Table::new(&["k", "atom", "sigma", "tau"]);
            for k in 0..t.sigma.len() {
                for atom in 0..f.atom_count() {
                    table.push(row![k, atom, t.sigma[k][atom], t.tau[k][atom]]);
                }
            }
            let holds = expect_upcrossings.as_ref().is_none_or(|e| *e == counts);
            let summary = format!("N={n} upcrossings={counts:?}");
            Ok(CheckOutcome::new(name, holds, summary, table))
        }
        CheckSpec::BandTranslation { bands } => {
            let mut table = Table::new(&["a", "b", "holds", "mismatch_N", "mismatch_atom"]);
            let mut all = true;
            for spec in bands {
                let r = band_translation_identity(&band::<S>(spec), f)?;
                all &= r.holds;
                let (n, atom) = r.first_mismatch.unzip();
                table.push(row![spec.0, spec.1, r.holds, opt(n), opt(atom)]);
            }
            Ok(CheckOutcome::new(name, all, format!("{} bands", bands.len()), table))
        }
        CheckSpec::MaximalInequality { lambdas, times } => {
            let sub = ctx.checked(MartingaleClass::Submartingale)?;
            let times: Vec<usize> = times.clone().unwrap_or_else(|| (0..=h).collect());
            let mut table = Table::new(&["n", "lambda", "lhs", "rhs", "holds"]);
            let mut violations = 0;
            for &n in &times {
                for l in lambdas {
                    let r = check_maximal_inequality(&sub, n, &scalar::<S>(l))?;
                    violations += usize::from(!r.holds);
                    table.push(row![n, l, r.lhs, r.rhs, r.holds]);
                }
            }
            let summary = format!("{} rows, {violations} violations", table.rows.len());
            Ok(CheckOutcome::new(name, violations == 0, summary, table))
        }
        CheckSpec::OptionalStopping { levels } => {
            let sub = ctx.checked(MartingaleClass::Submartingale)?;
            let sigma = StoppingTime::constant(f.atom_count(), ExtendedTime::Finite(h));
            let mut table = Table::new(&["predicate", "level", "lhs", "rhs", "holds", "equality"]);
            let mut all = true;
            for l in levels {
                for (label, pred) in [
                    ("at_least", ValuePredicate::AtLeast(scalar::<S>(l))),
                    ("at_most", ValuePredicate::AtMost(scalar::<S>(l))),
                ] {
                    let tau = StoppingTime::from_finite(hitting(f, &pred, 0, h)?);
                    let r = check_optional_stopping(&sub, &tau, &sigma)?;
                    all &= r.holds();
                    let i = &r.inequality;
                    table.push(row![label, l, i.lhs, i.rhs, i.holds, opt(r.equality)]);
                }
            }
            let summary = format!("{} stopping times against σ ≡ {h}", table.rows.len());
            Ok(CheckOutcome::new(name, all, summary, table))
        }
        CheckSpec::Doob {} => {
            let d = doob_decomposition(space, filt, f)?;
            let m_class = classify(space, filt, &d.martingale_part)?.class;
            let predictable = filt.is_predictable(&d.predictable_part)?;
            let sum = d.martingale_part.add(&d.predictable_part)?;
            let rebuilt = (0..=h).all(|n| f.at(n).values().iter().zip(sum.at(n).values()).all(|(x, y)| x.ae_eq(y)));
            let mut table = Table::new(&["n", "atom", "f", "martingale", "predictable"]);
            for n in 0..=h {
                for atom in 0..f.atom_count() {
                    table.push(row![
                        n,
                        atom,
                        f.value(n, atom),
                        d.martingale_part.value(n, atom),
                        d.predictable_part.value(n, atom)
                    ]);
                }
            }
            let holds = m_class == MartingaleClass::Martingale && predictable && rebuilt;
            let summary = format!("martingale part class={m_class} predictable={predictable} reconstruction={rebuilt}");
            Ok(CheckOutcome::new(name, holds, summary, table))
        }
        CheckSpec::StochasticIntegral { weights } => {
            let c = Process::new(
                weights
                    .iter()
                    .map(|r| r.iter().map(scalar::<S>).collect())
                    .collect(),
            )?;
            if let Some(time) = filt.first_non_predictable(&c)? {
                return Err(Error::NotPredictable { time });
            }
            let sub = ctx.checked(MartingaleClass::Submartingale)?;
            let integral = stochastic_integral(&c, sub.process)?;
            let class = classify(space, filt, &integral)?.class;
            let mut table = Table::new(&["n", "atom", "integral"]);
            for n in 0..=h {
                for atom in 0..f.atom_count() {
                    table.push(row![n, atom, integral.value(n, atom)]);
                }
            }
            let nonneg = c.slices().iter().all(|s| s.values().iter().all(|v| !v.is_negative()));
            let holds = !nonneg || class.is_submartingale();
            let summary = format!("integral class={class} weights nonnegative={nonneg}");
            Ok(CheckOutcome::new(name, holds, summary, table))
        }
        CheckSpec::Closure {} => {
            let r = check_l1_convergence_b(space, filt, f)?;
            let (n, atom) = r.witness.unzip();
            let mut table = Table::new(&["holds", "witness_n", "witness_atom"]);
            table.push(row![r.holds, opt(n), opt(atom)]);
            let summary = match r.witness {
                Some((n, atom)) => format!("f_{n} ≠ μ[f_{h} | ℱ_{n}] at atom {atom}"),
                None => format!("f_n = μ[f_{h} | ℱ_n] for every n"),
            };
            Ok(CheckOutcome::new(name, r.holds, summary, table))
        }
        CheckSpec::Levy { g, require_monotone } => {
            let g = RandomVariable::new(g.iter().map(scalar::<S>).collect())?;
            let r = check_levy_upward(space, filt, &g)?;
            let mut table = Table::new(&["n", "distance"]);
            for (n, d) in r.distances.iter().enumerate() {
                table.push(row![n, d]);
            }
            let holds = r.terminal_zero && (r.nonincreasing || !require_monotone);
            let summary = format!(
                "terminal zero={} nonincreasing={}{}",
                r.terminal_zero,
                r.nonincreasing,
                r.first_increase.map_or(String::new(), |n| format!(" (d_{} > d_{n})", n + 1))
            );
            Ok(CheckOutcome::new(name, holds, summary, table))
        }
        CheckSpec::UiModuli {
            p,
            levels,
            deltas,
            max_final_modulus,
        } => {
            let fam = FunctionFamily::new(f.slices().to_vec(), *p)?;
            let mut table = Table::new(&["kind", "C_or_delta", "modulus"]);
            let mut prob = Vec::new();
            for c in levels {
                let m = fam.probabilist_modulus(space, &scalar::<S>(c))?;
                table.push(row!["C", c, m]);
                prob.push(m);
            }
            let mut small = Vec::new();
            for d in deltas {
                let m = fam.analyst_modulus(space, &scalar::<S>(d), KnapsackStrategy::Auto)?;
                table.push(row!["delta", d, m]);
                small.push(m);
            }
            let shapes = prob.windows(2).all(|w| w[1].le(&w[0])) && small.windows(2).all(|w| w[0].le(&w[1]));
            let below = match (max_final_modulus, prob.last()) {
                (Some(cap), Some(last)) => last.to_f64() <= cap.to_f64(),
                _ => true,
            };
            let summary = format!(
                "final truncation modulus={} curves monotone={shapes}",
                prob.last().map_or_else(String::new, |m| m.to_string())
            );
            Ok(CheckOutcome::new(name, shapes && below, summary, table))
        }
        CheckSpec::Bridging { c, set } => {
            let fam = FunctionFamily::new(f.slices().to_vec(), Exponent::ONE)?;
            let a = AtomSet::from_indices(f.atom_count(), set)?;
            let r = check_bridging_inequality(space, &fam, &scalar::<S>(c), &a)?;
            let mut table = Table::new(&["member", "lhs", "rhs", "holds"]);
            for (n, row) in r.rows.iter().enumerate() {
                table.push(row![n, row.lhs, row.rhs, row.holds]);
            }
            let summary = format!("{} members, C={c}", r.rows.len());
            Ok(CheckOutcome::new(name, r.holds, summary, table))
        }
        CheckSpec::Vitali { .. } | CheckSpec::AeConvergence { .. } | CheckSpec::BandDecay { .. } | CheckSpec::BorelCantelli { .. } => {
            unreachable!("dispatched elsewhere")
        }
    }
}

fn run_vitali<S: Scalar>(check: &CheckSpec) -> Result<CheckOutcome, Error> {
    let CheckSpec::Vitali {
        kind,
        horizon,
        epsilons,
        levels,
        expect_ui_vanishing,
    } = check
    else {
        unreachable!("dispatched on the variant")
    };
    let (space, members) = spike_family::<S>(*kind, *horizon)?;
    let g = RandomVariable::zeros(space.atom_count());
    let eps: Vec<S> = epsilons.iter().map(scalar).collect();
    let lv: Vec<S> = levels.iter().map(scalar).collect();
    let r = vitali_empirical(&space, &members, &g, Exponent::ONE, &eps, &lv, DecayRule::default())?;
    let mut header = vec!["n".to_string(), "lp".to_string()];
    header.extend(epsilons.iter().map(|e| format!("in_measure_{e}")));
    let mut rows = Table {
        header,
        rows: Vec::new(),
    };
    for row in &r.rows {
        let mut cells = row![row.n, row.lp];
        cells.extend(row.in_measure.iter().map(|v| v.to_string()));
        rows.push(cells);
    }
    let mut curve = Table::new(&["C_or_delta", "modulus"]);
    for p in &r.ui_modulus_curve {
        curve.push(row![p.level, p.modulus]);
    }
    let holds = r.consistent && r.ui_vanishing == *expect_ui_vanishing;
    let summary = format!(
        "in measure decay={} ui vanishing={} L1 decay={} consistent={}",
        r.in_measure_decay, r.ui_vanishing, r.lp_decay, r.consistent
    );
    Ok(CheckOutcome::new(check.name(), holds, summary, rows).with_table("curve", curve))
}

fn run_monte_carlo(check: &CheckSpec, seed: u64) -> Result<CheckOutcome, Error> {
    let name = check.name();
    match check {
        CheckSpec::AeConvergence {
            model,
            trials,
            horizon,
            window,
            tol,
            min_fraction,
        } => {
            if *window == 0 || *window > horizon + 1 {
                return Err(Error::InvalidArgument(format!("window {window} must lie in 1..={}", horizon + 1)));
            }
            let cfg = RunConfig {
                seed,
                trials: *trials,
                horizon: *horizon,
                checkpoints: Vec::new(),
            };
            let settled = simulate_map(model, &cfg, |_, path| tail_oscillation(path, *window) <= *tol)?;
            let mut table = Table::new(&["trial_block", "converged_fraction"]);
            for (i, block) in settled.chunks(1000).enumerate() {
                table.push(row![i, fraction(block)]);
            }
            let total = fraction(&settled);
            let summary = format!("converged fraction={total} (window {window}, tol {tol})");
            Ok(CheckOutcome::new(name, total >= *min_fraction, summary, table))
        }
        CheckSpec::BandDecay {
            model,
            trials,
            horizon,
            band: (a, b),
        } => {
            let cfg = RunConfig {
                seed,
                trials: *trials,
                horizon: *horizon,
                checkpoints: Vec::new(),
            };
            let band = Band::new(*a, *b);
            let counts = simulate_map(model, &cfg, |_, path| {
                PathCrossings::new(&band, path, *horizon).upcrossings()
            })?;
            let curve = band_violation_curve(&counts, &vec![1.0; counts.len()]);
            let mut table = Table::new(&["k", "fraction"]);
            for (k, v) in &curve {
                table.push(row![k, v]);
            }
            let holds = halves_per_doubling(&curve);
            let summary = format!("μ{{U ≥ k}} at k = 1, 2, 4, …: {:?}", curve.iter().map(|c| c.1).collect::<Vec<_>>());
            Ok(CheckOutcome::new(name, holds, summary, table))
        }
        CheckSpec::BorelCantelli {
            schedule,
            horizon,
            trials,
            divergence_cut,
            tail_start,
            block_size,
            min_match,
        } => {
            let cfg = BorelCantelliConfig {
                horizon: *horizon,
                trials: *trials,
                seed,
                divergence_cut: *divergence_cut,
                tail_start: *tail_start,
                block_size: *block_size,
            };
            let r = check_borel_cantelli(schedule, &cfg)?;
            let mut table = Table::new(&["trial_block", "match_fraction", "p_horizon_mean"]);
            for b in &r.blocks {
                table.push(row![b.trial_block, b.match_fraction, b.p_horizon_mean]);
            }
            let summary = format!(
                "match_fraction={} p_horizon_mean={} analytic floor={}",
                r.match_fraction,
                r.p_horizon_mean,
                opt(r.analytic_floor)
            );
            Ok(CheckOutcome::new(name, r.match_fraction >= *min_match, summary, table))
        }
        _ => unreachable!("not a Monte Carlo check"),
    }
}

fn fraction(flags: &[bool]) -> f64 {
    flags.iter().filter(|&&b| b).count() as f64 / flags.len().max(1) as f64
}
