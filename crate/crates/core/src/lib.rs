//! Finite-atom martingale theory: conditional expectation, filtrations,
//! stopping times, upcrossings, uniform integrability and the discrete
//! convergence theorems, with exact rational and floating-point backends.

pub mod borel_cantelli;
pub mod condexp;
pub mod convergence;
pub mod crossings;
pub mod error;
pub mod instances;
pub mod measure;
pub mod montecarlo;
pub mod process;
pub mod report;
pub mod scalar;
pub mod stopping;
pub mod ui;

pub use borel_cantelli::{
    borel_cantelli_martingale, check_borel_cantelli, predictable_sum, BorelCantelliConfig,
    BorelCantelliReport, EventSequence,
};
pub use condexp::{conditional_measure, CondexpInput};
pub use convergence::{
    ae_convergence_diagnostic, check_l1_convergence_a, check_l1_convergence_b, check_levy_upward,
    check_maximal_inequality, fatou_norm_check, limit_process_estimate, ConvergenceDiagnostic,
    LimitEstimate,
};
pub use crossings::{
    band_translation_identity, check_upcrossing_estimate, check_upcrossing_estimate_sup,
    crossing_table, upcrossings, upcrossings_before, Band, CrossingTable, PathCrossings,
};
pub use error::{Error, Result};
pub use measure::{AtomSet, Exponent, FiniteMeasureSpace, Norm, Partition, RandomVariable};
pub use montecarlo::{
    exhaustive_space, simulate, simulate_map, EventSchedule, ExhaustiveSpace, RunConfig,
    StakeRule, TrajectoryBatch, TrajectoryModel,
};
pub use process::{
    classify, classify_consecutive, doob_decomposition, stochastic_integral, CheckedProcess,
    Classification, DoobDecomposition, Filtration, MartingaleClass, PairViolation, Process,
};
pub use scalar::{ExtendedNonNeg, Mode, Rational, Scalar};
pub use report::InequalityReport;
pub use stopping::{
    check_hitting_is_stopping_time, check_optional_stopping, hitting, hitting_unbounded,
    stopped_process, ExtendedTime, StoppingTime, ValuePredicate,
};
pub use ui::{
    check_bridging_inequality, check_p_monotonicity, spike_family, vitali_empirical,
    FunctionFamily, KnapsackStrategy, SpikeKind,
};
