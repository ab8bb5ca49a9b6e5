//! Monte Carlo harness: sample-size sweeps, the fine-period table, the
//! bias-versus-SNR curve, and their CSV/JSON/SVG artifacts.

mod bias;
mod report;
mod svg;
mod sweep;
mod table1;

pub use bias::{normalized_bias, run_bias_vs_snr, BiasCurveReport, BiasPoint, BiasSpec, METRIC_GRID};
pub use report::{emit_report, read_bias_csv, read_sweep_csv, Report};
pub use sweep::{
    log_spaced, log_spaced_sizes, run_consistency_sweep, MethodEntry, PointSummary, RunOutcome, SweepReport,
    SweepSpec, MAX_FAILURE_RATE,
};
pub use table1::{run_table1, run_table1_with, table1_scenario, Table1Report, Table1Row};
