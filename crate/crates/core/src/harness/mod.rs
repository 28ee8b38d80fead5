//! Experiment driver: a sweep over environment counts comparing the
//! exchangeable estimator with the i.i.d. baseline, each with a discovered
//! or a given graph, scored against the analytic post-interventional table.

mod config;
mod svg;
mod sweep;
mod trial;

pub use config::{ExperimentConfig, Method, SEED_ENV_VAR};
pub use svg::render_svg;
pub use sweep::{execute_sweep, run_sweep, summarize, SummaryRow, SweepOutcome};
pub use trial::{run_trial, TrialRecord, TrialSpec};
