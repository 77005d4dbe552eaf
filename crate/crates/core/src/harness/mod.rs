//! Experiment orchestration: planning, BER sweeps, confidence bounds,
//! annealing-parameter calibration and reporting.

pub mod beta;
pub mod config;
pub mod plan;
pub mod report;
pub mod stats;
pub mod sweep;

pub use beta::{
    beta_sweep, fit_scaling_law, log_grid, BetaCurve, BetaMinimum, BetaSweepConfig, ScalingFamily, ScalingFit,
};
pub use plan::{plan_experiment, ExperimentPlan, MESSAGES_PER_CHANNEL, REFERENCE_TOTAL_BITS};
pub use report::{ensure_writable, format_csv, write_run, RunManifest, CSV_HEADER};
pub use stats::{ber_interval_95, ber_upper_bound, intervals_overlap, wilson_interval};
pub use sweep::{run_ber_sweep, run_ber_sweep_with_threads, BerPoint, SweepOutput};
