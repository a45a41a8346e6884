//! Confusion counts, macro precision/recall/F, bootstrap intervals and
//! report tables. Scores are percentages.

mod bootstrap;
mod metrics;
mod table;

pub use bootstrap::{accuracy, bootstrap_ci, constant_baseline, evaluate, percentile, DEFAULT_RESAMPLES};
pub use metrics::{confusion_counts, macro_f, macro_prf, ClassReport, ConfusionCounts, EvalReport, Interval, Prf};
pub use table::{aggregate_subtasks, mean_std, metric_lines, report_table, SubtaskAggregate};
