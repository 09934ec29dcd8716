//! Monte-Carlo scenario runner, figure sweeps and CSV reports.
//!
//! A report is a pure function of its [`ScenarioConfig`]: every trial draws
//! from its own seeded stream and results are reduced in trial order, so the
//! worker count never changes a single output byte.

pub mod config;
pub mod figures;
pub mod report;
pub mod run;
pub mod seed;

pub use config::{GridPoint, PhasePolicy, ScenarioConfig, Scheme};
pub use figures::{reproduce_figure, reproduce_named, Figure};
pub use report::{RmseReport, RmseRow, CSV_COLUMNS};
pub use run::{run_scenario, run_scenario_with_workers, run_trial, PointSetup, TrialErrors};
