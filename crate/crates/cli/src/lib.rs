//! Scenario runner, theorem suites and the `mgale` command line.

pub mod app;
pub mod checks;
pub mod output;
pub mod scenario;
pub mod suites;
