//! Dataset files, run reports, the benchmark harness and the `kmu` CLI
//! built on [`kmu_core`].

pub mod bench;
pub mod io;
pub mod report;

pub use bench::{run_experiment, ExperimentOutcome, ExperimentPlan, KSummary};
pub use io::{load_csv, standardize, CsvOptions, IoError, ScalerParams};
pub use report::{Algorithm, RunReport};
