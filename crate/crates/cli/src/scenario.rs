//! Scenario files: a space, a mode and a list of checks.
//!
//! The schema is documented in `docs/scenario.md`. Scalars are written as
//! `"p/q"` strings, integers or terminating decimals and are converted to the
//! run's arithmetic mode when the scenario executes.

use std::fmt;

use martingale_core::montecarlo::{EventSchedule, TrajectoryModel, DEFAULT_PATH_CAP};
use martingale_core::ui::SpikeKind;
use martingale_core::{Exponent, MartingaleClass, Mode, Partition, Rational};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub space: Option<SpaceSpec>,
    pub checks: Vec<CheckSpec>,
}

fn default_mode() -> Mode {
    Mode::Exact
}

fn default_cap() -> usize {
    DEFAULT_PATH_CAP
}

fn yes() -> bool {
    true
}

fn default_block() -> usize {
    1000
}

/// Where the exact checks get their space, process and filtration.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    /// Every path of a finitely branching model, weighted by its probability.
    Exhaustive {
        model: TrajectoryModel,
        horizon: usize,
        #[serde(default = "default_cap")]
        cap: usize,
    },
    /// Weights per atom and a time-major process; the filtration defaults to
    /// the natural one.
    Explicit {
        weights: Vec<Rational>,
        process: Vec<Vec<Rational>>,
        #[serde(default)]
        filtration: Option<Vec<Partition>>,
        #[serde(default)]
        ambient: Option<Partition>,
    },
}

pub type BandSpec = (Rational, Rational);

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// The process satisfies the claimed class; reports a witness `(i, j, atom)`
    /// otherwise.
    Classify { expect: MartingaleClass },
    /// Block averaging against the L² projection and the set-integral
    /// characterization for `f_time` given `sub`.
    Condexp { time: usize, sub: Partition },
    /// `(b − a) μ[U_N] ≤ μ[(f_N − a)⁺]` for every band and every `N`.
    UpcrossingEstimate { bands: Vec<BandSpec> },
    /// Crossing times `σ_k`, `τ_k` per atom.
    CrossingTable {
        band: BandSpec,
        #[serde(default)]
        horizon: Option<usize>,
        #[serde(default)]
        expect_upcrossings: Option<Vec<usize>>,
    },
    BandTranslation { bands: Vec<BandSpec> },
    MaximalInequality {
        lambdas: Vec<Rational>,
        #[serde(default)]
        times: Option<Vec<usize>>,
    },
    /// `μ[f_τ] ≤ μ[f_N]` for hitting times of `[ℓ, ∞)` and `(−∞, ℓ]`.
    OptionalStopping { levels: Vec<Rational> },
    Doob {},
    /// The integral of predictable weights against a submartingale.
    StochasticIntegral { weights: Vec<Vec<Rational>> },
    /// `f_n = μ[f_H | ℱ_n]` for every `n`.
    Closure {},
    /// `‖μ[g | ℱ_n] − g‖₁` along the filtration.
    Levy {
        g: Vec<Rational>,
        #[serde(default = "yes")]
        require_monotone: bool,
    },
    /// Truncation and small-set moduli of `{f_0, …, f_H}`.
    UiModuli {
        p: Exponent,
        levels: Vec<Rational>,
        deltas: Vec<Rational>,
        #[serde(default)]
        max_final_modulus: Option<Rational>,
    },
    Bridging { c: Rational, set: Vec<usize> },
    Vitali {
        kind: SpikeKind,
        horizon: usize,
        epsilons: Vec<Rational>,
        levels: Vec<Rational>,
        expect_ui_vanishing: bool,
    },
    /// Fraction of simulated paths whose final window settles.
    AeConvergence {
        model: TrajectoryModel,
        trials: usize,
        horizon: usize,
        window: usize,
        tol: f64,
        min_fraction: f64,
    },
    /// `μ{U ≥ 2k} ≤ μ{U ≥ k} / 2` on simulated paths.
    BandDecay {
        model: TrajectoryModel,
        trials: usize,
        horizon: usize,
        band: (f64, f64),
    },
    BorelCantelli {
        schedule: EventSchedule,
        horizon: usize,
        trials: usize,
        divergence_cut: f64,
        tail_start: usize,
        #[serde(default = "default_block")]
        block_size: usize,
        min_match: f64,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::Classify { .. } => "classify",
            CheckSpec::Condexp { .. } => "condexp",
            CheckSpec::UpcrossingEstimate { .. } => "upcrossing_estimate",
            CheckSpec::CrossingTable { .. } => "crossing_table",
            CheckSpec::BandTranslation { .. } => "band_translation",
            CheckSpec::MaximalInequality { .. } => "maximal_inequality",
            CheckSpec::OptionalStopping { .. } => "optional_stopping",
            CheckSpec::Doob {} => "doob",
            CheckSpec::StochasticIntegral { .. } => "stochastic_integral",
            CheckSpec::Closure {} => "closure",
            CheckSpec::Levy { .. } => "levy",
            CheckSpec::UiModuli { .. } => "ui_moduli",
            CheckSpec::Bridging { .. } => "bridging",
            CheckSpec::Vitali { .. } => "vitali",
            CheckSpec::AeConvergence { .. } => "ae_convergence",
            CheckSpec::BandDecay { .. } => "band_decay",
            CheckSpec::BorelCantelli { .. } => "borel_cantelli",
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(
            self,
            CheckSpec::AeConvergence { .. } | CheckSpec::BandDecay { .. } | CheckSpec::BorelCantelli { .. }
        )
    }

    /// Checks that read the scenario's space.
    pub fn needs_space(&self) -> bool {
        !self.is_monte_carlo() && !matches!(self, CheckSpec::Vitali { .. })
    }
}

/// A configuration problem, with the 1-based line it refers to when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            message: message.into(),
        }
    }

    pub fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Line of the `index`-th `"check"` key, counting from 0.
fn check_line(text: &str, index: usize) -> Option<usize> {
    let mut seen = 0;
    for (i, line) in text.lines().enumerate() {
        for _ in line.matches("\"check\"") {
            if seen == index {
                return Some(i + 1);
            }
            seen += 1;
        }
    }
    None
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

impl Scenario {
    /// Parses and validates; `mode` overrides the file's mode.
    pub fn parse(text: &str, mode: Option<Mode>) -> Result<Scenario, ConfigError> {
        let mut scenario: Scenario = serde_json::from_str(text)
            .map_err(|e| ConfigError::at(e.line().max(1), format!("column {}: {e}", e.column())))?;
        if let Some(mode) = mode {
            scenario.mode = mode;
        }
        scenario.validate(text)?;
        Ok(scenario)
    }

    fn validate(&self, text: &str) -> Result<(), ConfigError> {
        if self.checks.is_empty() {
            return Err(ConfigError {
                line: key_line(text, "checks"),
                message: "a scenario needs at least one check".into(),
            });
        }
        for (i, check) in self.checks.iter().enumerate() {
            let fail = |message: String| ConfigError {
                line: check_line(text, i),
                message,
            };
            if check.is_monte_carlo() && self.mode == Mode::Exact {
                return Err(fail(format!(
                    "check `{}` is Monte Carlo and cannot run in exact mode",
                    check.name()
                )));
            }
            if check.needs_space() && self.space.is_none() {
                return Err(fail(format!("check `{}` needs a `space`", check.name())));
            }
        }
        Ok(())
    }
}
