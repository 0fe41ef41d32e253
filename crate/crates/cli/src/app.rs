//! Command-line parsing and dispatch for `mgale`.
//!
//! Every subcommand other than `selftest` builds a scenario and runs it
//! through the same check runner as `mgale run`, so flags only fill in the
//! scalar fields of a scenario.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use martingale_core::montecarlo::{EventSchedule, TrajectoryModel};
use martingale_core::ui::SpikeKind;
use martingale_core::{Mode, Partition, Rational, Scalar};
use serde::Deserialize;

use crate::checks::run_scenario;
use crate::output::{print_lines, write_outcomes, CheckOutcome};
use crate::scenario::{BandSpec, CheckSpec, ConfigError, Scenario, SpaceSpec};
use crate::suites;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

/// Seed used by `selftest` when `--seed` is absent.
pub const SELFTEST_SEED: u64 = 42;

/// Shipped scenarios with the exit code each is expected to produce.
pub const SHIPPED: &[(&str, &str, u8)] = &[
    ("constant_martingale", include_str!("../../../scenarios/constant_martingale.json"), EXIT_PASS),
    ("fair_walk", include_str!("../../../scenarios/fair_walk.json"), EXIT_PASS),
    ("levy_four_atoms", include_str!("../../../scenarios/levy_four_atoms.json"), EXIT_PASS),
    ("vitali_spikes", include_str!("../../../scenarios/vitali_spikes.json"), EXIT_PASS),
    ("monte_carlo", include_str!("../../../scenarios/monte_carlo.json"), EXIT_PASS),
    ("drifted_walk", include_str!("../../../scenarios/drifted_walk.json"), EXIT_FAIL),
];

#[derive(Debug, Parser)]
#[command(name = "mgale", version, about = "Verify discrete-time martingale theorems on finite spaces")]
pub struct Cli {
    /// Overrides the scenario seed; `selftest` defaults to 42.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the scenario arithmetic mode.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Directory receiving the CSV tables and summary.csv.
    #[arg(long, global = true, default_value = "mgale-out")]
    pub out_dir: PathBuf,
    /// Worker threads for parallel sections; defaults to one per core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every check of a scenario file.
    ///
    /// Checks: classify, condexp, upcrossing_estimate, crossing_table,
    /// band_translation, maximal_inequality, optional_stopping, doob,
    /// stochastic_integral, closure, levy, ui_moduli, bridging, vitali,
    /// ae_convergence, band_decay, borel_cantelli. The schema is described
    /// in docs/scenario.md.
    Run { scenario: PathBuf },
    /// Run only the exact (non Monte Carlo) checks of a scenario file.
    Check { scenario: PathBuf },
    /// Crossing times and upcrossing counts of a single path.
    Crossings(CrossingsArgs),
    /// Monte Carlo a.e. convergence and band-violation diagnostics.
    Converge(ConvergeArgs),
    /// Borel-Cantelli surrogate on independent events.
    Bc(BcArgs),
    /// Uniform-integrability curves of the spike families.
    Ui(UiArgs),
    /// Run the acceptance suites and the shipped scenarios.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct CrossingsArgs {
    /// Band as `a,b`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_band)]
    pub band: BandSpec,
    /// JSON file holding `{"path": [...]}` or a bare array; defaults to the
    /// built-in figure-one path.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Crossing horizon `N`; defaults to the last index of the path.
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Polya,
    FairWalk,
    BiasedWalk,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long, value_enum, default_value = "polya")]
    pub model: ModelArg,
    /// Up-probability of the biased walk.
    #[arg(long, default_value = "2/3")]
    pub p_up: Rational,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 10_000)]
    pub horizon: usize,
    #[arg(long, default_value_t = 1_000)]
    pub window: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.99)]
    pub min_fraction: f64,
    /// Also report `μ{U ≥ k}` for this band, given as `a,b`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_float_band)]
    pub band: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EventModelArg {
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    Constant,
    InverseSquare,
}

#[derive(Debug, Args)]
pub struct BcArgs {
    #[arg(long, value_enum, default_value = "independent")]
    pub model: EventModelArg,
    /// Constant event probability; implies `--schedule constant`.
    #[arg(long)]
    pub prob: Option<Rational>,
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleArg>,
    #[arg(long, default_value_t = 200)]
    pub horizon: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 50.0)]
    pub divergence_cut: f64,
    /// First event index of the tail window; defaults to half the horizon.
    #[arg(long)]
    pub tail_start: Option<usize>,
    #[arg(long, default_value_t = 1_000)]
    pub block_size: usize,
    #[arg(long, default_value_t = 0.95)]
    pub min_match: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpikeArg {
    Shrinking,
    FixedMass,
}

#[derive(Debug, Args)]
pub struct UiArgs {
    #[arg(long, value_enum, default_value = "shrinking")]
    pub kind: SpikeArg,
    #[arg(long, default_value_t = 64)]
    pub horizon: usize,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Run only these criteria, e.g. `--only 1,4,12`.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<usize>,
    /// Skip the shipped scenarios.
    #[arg(long)]
    pub skip_scenarios: bool,
}

fn parse_band(s: &str) -> Result<BandSpec, String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let parse = |v: &str| v.trim().parse::<Rational>().map_err(|e| e.to_string());
    Ok((parse(a)?, parse(b)?))
}

fn parse_float_band(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = parse_band(s)?;
    Ok((a.to_f64(), b.to_f64()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PathFile {
    Object { path: Vec<Rational> },
    Bare(Vec<Rational>),
}

fn read_path(file: &Path) -> Result<Vec<Rational>, ConfigError> {
    let text = read(file)?;
    let parsed: PathFile = serde_json::from_str(&text)
        .map_err(|e| ConfigError::at(e.line().max(1), format!("{}: {e}", file.display())))?;
    let path = match parsed {
        PathFile::Object { path } | PathFile::Bare(path) => path,
    };
    if path.is_empty() {
        return Err(ConfigError::new(format!("{}: the path is empty", file.display())));
    }
    Ok(path)
}

fn read(file: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(file).map_err(|e| ConfigError::new(format!("{}: {e}", file.display())))
}

fn single_path_space(path: Vec<Rational>) -> SpaceSpec {
    SpaceSpec::Explicit {
        weights: vec![Rational::one()],
        process: path.into_iter().map(|v| vec![v]).collect(),
        filtration: None,
        ambient: Some(Partition::trivial(1)),
    }
}

fn scenario(name: &str, mode: Mode, seed: u64, space: Option<SpaceSpec>, checks: Vec<CheckSpec>) -> Scenario {
    Scenario {
        name: name.to_string(),
        mode,
        seed,
        space,
        checks,
    }
}

fn crossings_scenario(args: &CrossingsArgs, mode: Mode) -> Result<Scenario, ConfigError> {
    let path = match &args.path {
        Some(file) => read_path(file)?,
        None => martingale_core::crossings::figure_one_path::<Rational>(),
    };
    if let Some(n) = args.horizon {
        if n >= path.len() {
            return Err(ConfigError::new(format!("horizon {n} exceeds the path's last index {}", path.len() - 1)));
        }
    }
    let mut checks = vec![CheckSpec::CrossingTable {
        band: args.band.clone(),
        horizon: args.horizon,
        expect_upcrossings: None,
    }];
    if args.band.0 < args.band.1 {
        checks.push(CheckSpec::BandTranslation {
            bands: vec![args.band.clone()],
        });
    }
    Ok(scenario("crossings", mode, 0, Some(single_path_space(path)), checks))
}

fn converge_scenario(args: &ConvergeArgs, seed: u64) -> Scenario {
    let model = match args.model {
        ModelArg::Polya => TrajectoryModel::PolyaUrn { red: 1, black: 1 },
        ModelArg::FairWalk => TrajectoryModel::FairWalk { step: Rational::one() },
        ModelArg::BiasedWalk => TrajectoryModel::BiasedWalk {
            p_up: args.p_up.clone(),
            step: Rational::one(),
        },
    };
    let mut checks = vec![CheckSpec::AeConvergence {
        model: model.clone(),
        trials: args.trials,
        horizon: args.horizon,
        window: args.window,
        tol: args.tol,
        min_fraction: args.min_fraction,
    }];
    if let Some(band) = args.band {
        checks.push(CheckSpec::BandDecay {
            model,
            trials: args.trials,
            horizon: args.horizon,
            band,
        });
    }
    scenario("converge", Mode::Float, seed, None, checks)
}

fn bc_scenario(args: &BcArgs, seed: u64) -> Result<Scenario, ConfigError> {
    let schedule = match (args.schedule, &args.prob) {
        (Some(ScheduleArg::InverseSquare), None) => EventSchedule::InverseSquare,
        (Some(ScheduleArg::InverseSquare), Some(_)) => {
            return Err(ConfigError::new("--prob applies only to the constant schedule"))
        }
        (_, Some(p)) => EventSchedule::Constant { p: p.clone() },
        (Some(ScheduleArg::Constant) | None, None) => {
            return Err(ConfigError::new("give --prob P or --schedule inverse-square"))
        }
    };
    let check = CheckSpec::BorelCantelli {
        schedule,
        horizon: args.horizon,
        trials: args.trials,
        divergence_cut: args.divergence_cut,
        tail_start: args.tail_start.unwrap_or(args.horizon / 2),
        block_size: args.block_size,
        min_match: args.min_match,
    };
    Ok(scenario("bc", Mode::Float, seed, None, vec![check]))
}

fn ui_scenario(args: &UiArgs, mode: Mode) -> Scenario {
    let kind = match args.kind {
        SpikeArg::Shrinking => SpikeKind::Shrinking,
        SpikeArg::FixedMass => SpikeKind::FixedMass,
    };
    let levels = std::iter::successors(Some(1usize), |c| c.checked_mul(2))
        .take_while(|&c| c <= args.horizon.max(1))
        .map(|c| Rational::from_i64(c as i64))
        .collect();
    let check = CheckSpec::Vitali {
        kind,
        horizon: args.horizon,
        epsilons: vec![Rational::new(1, 2)],
        levels,
        expect_ui_vanishing: kind == SpikeKind::Shrinking,
    };
    scenario("ui", mode, 0, None, vec![check])
}

/// Runs the scenario and writes its tables under `out_dir/<name>`.
fn execute(scenario: &Scenario, seed: Option<u64>, out_dir: &Path, out: &mut dyn Write) -> Result<u8, ConfigError> {
    let outcomes = run_scenario(scenario, seed)?;
    report(&outcomes, &out_dir.join(&scenario.name), out)
}

fn report(outcomes: &[CheckOutcome], dir: &Path, out: &mut dyn Write) -> Result<u8, ConfigError> {
    let lines = write_outcomes(dir, outcomes).map_err(|e| ConfigError::new(format!("{}: {e}", dir.display())))?;
    print_lines(out, &lines).map_err(|e| ConfigError::new(e.to_string()))?;
    Ok(if outcomes.iter().all(|o| o.holds) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn selftest(args: &SelftestArgs, seed: u64, out_dir: &Path, out: &mut dyn Write) -> Result<u8, ConfigError> {
    let ids: Vec<usize> = if args.only.is_empty() {
        suites::CRITERIA.collect()
    } else {
        args.only.clone()
    };
    if let Some(bad) = ids.iter().find(|id| !suites::CRITERIA.contains(id)) {
        return Err(ConfigError::new(format!("no criterion {bad}; criteria are 1 to 13")));
    }
    let root = out_dir.join("selftest");
    let outcomes: Vec<CheckOutcome> = ids.iter().map(|&id| suites::criterion(id, seed)).collect();
    let criteria_pass = report(&outcomes, &root.join("criteria"), out)? == EXIT_PASS;
    let passed = outcomes.iter().filter(|o| o.holds).count();
    writeln!(out, "criteria: {passed}/{} passed", outcomes.len()).map_err(|e| ConfigError::new(e.to_string()))?;

    let mut scenarios_ok = true;
    if !args.skip_scenarios {
        let mut as_expected = 0;
        for (name, text, expected) in SHIPPED {
            let scenario = Scenario::parse(text, None).map_err(|e| ConfigError::new(format!("{name}: {e}")))?;
            let mut buf = Vec::new();
            let code = execute(&scenario, Some(seed), &root.join("scenarios"), &mut buf)?;
            let ok = code == *expected;
            as_expected += usize::from(ok);
            scenarios_ok &= ok;
            let status = if ok { "PASS" } else { "FAIL" };
            writeln!(out, "[{status}] scenario {name}: exit {code}, expected {expected}")
                .map_err(|e| ConfigError::new(e.to_string()))?;
        }
        writeln!(out, "scenarios: {as_expected}/{} as expected", SHIPPED.len())
            .map_err(|e| ConfigError::new(e.to_string()))?;
    }
    Ok(if criteria_pass && scenarios_ok {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<u8, ConfigError> {
    let mode = cli.mode.map(Mode::from);
    let seed = cli.seed;
    let out_dir = cli.out_dir.as_path();
    match &cli.command {
        Command::Run { scenario } => {
            let s = Scenario::parse(&read(scenario)?, mode).map_err(|e| prefix(scenario, e))?;
            execute(&s, seed, out_dir, out)
        }
        Command::Check { scenario } => {
            let mut s = Scenario::parse(&read(scenario)?, mode).map_err(|e| prefix(scenario, e))?;
            s.checks.retain(|c| !c.is_monte_carlo());
            if s.checks.is_empty() {
                return Err(ConfigError::new(format!("{}: no exact checks", scenario.display())));
            }
            execute(&s, seed, out_dir, out)
        }
        Command::Crossings(args) => execute(&crossings_scenario(args, mode.unwrap_or(Mode::Exact))?, seed, out_dir, out),
        Command::Converge(args) => execute(&converge_scenario(args, seed.unwrap_or(0)), None, out_dir, out),
        Command::Bc(args) => execute(&bc_scenario(args, seed.unwrap_or(0))?, None, out_dir, out),
        Command::Ui(args) => execute(&ui_scenario(args, mode.unwrap_or(Mode::Exact)), seed, out_dir, out),
        Command::Selftest(args) => selftest(args, seed.unwrap_or(SELFTEST_SEED), out_dir, out),
    }
}

fn prefix(file: &Path, e: ConfigError) -> ConfigError {
    ConfigError {
        line: e.line,
        message: format!("{}: {}", file.display(), e.message),
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_CONFIG
            } else {
                let _ = write!(out, "{text}");
                EXIT_PASS
            };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(ConfigError::new("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => {
                let mut buf = Vec::new();
                let result = pool.install(|| dispatch(&cli, &mut buf));
                let _ = out.write_all(&buf);
                result
            }
            Err(e) => Err(ConfigError::new(e.to_string())),
        },
        None => dispatch(&cli, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}
