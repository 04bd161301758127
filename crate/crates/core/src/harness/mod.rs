//! Evaluation, hyperparameter search and the extrapolation sweep.

pub mod metrics;
pub mod search;
pub mod sweep;

pub use metrics::{compute_metrics, evaluate_model, MetricsEntry, MetricsReport};
pub use search::{random_search, Param, SearchOutcome, SearchSpace, TrialRecord};
pub use sweep::{monotonicity_score, run_sweep, SweepColumn, SweepReport, SweepRow, SweepScenario};
