//! Score fusion, retrieval metrics, weight tuning and significance testing.

mod fusion;
mod metrics;
mod report;
mod run;
mod significance;
mod tune;

pub use fusion::{fuse, minmax_normalize, Candidate, CandidateList, Lambdas, NormalizedList};
pub use metrics::{evaluate, map_at_k, mrr_at_k, ndcg_at_k, MetricCutoffs, QueryMetrics};
pub use report::{ablation_table, metric_table, Comparison, MetricReport, SystemResult};
pub use run::{read_run, write_run, RunEntry, RunFile};
pub use significance::significance_test;
pub use tune::{fused_map, lambda_grid, tune_lambdas, tune_over, TuneResult};
