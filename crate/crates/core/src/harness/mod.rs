//! Configuration-driven experiment runner and report output.

mod config;
mod report;
mod run;

pub use config::{
    CellSpec, DataSource, ExperimentConfig, Grid, GroupSpec, MarginalInput, TestKind,
};
pub use report::{
    emit_report, p_value_histogram, report_csv, wilson_interval, CellReport, ReportFormat,
    RejectionRateReport, WILSON_Z,
};
pub use run::{run_experiment, run_replication};
