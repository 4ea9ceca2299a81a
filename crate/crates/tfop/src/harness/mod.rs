//! Config-driven experiments, the verification suite and report emission.

pub mod bound;
pub mod calibration;
pub mod config;
pub mod experiments;
pub mod report;
pub mod suite;

pub use bound::{run_bound_experiment, BoundReport};
pub use config::{Experiment, ExperimentConfig, Format};
pub use experiments::{run_experiment, run_schatten_experiment, SchattenReport};
pub use report::{emit_report, to_csv, to_json, CheckRecord, Report};
pub use suite::run_verification_suite;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

/// Exit status for an error: numerical trouble (non-finite values, degenerate
/// phases, unfit discretizations) is 2, everything else a configuration error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::DegeneratePhase(_) | Error::Fitness(_) => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

/// Exit status for a finished report.
pub fn report_exit_code(r: &Report) -> i32 {
    if r.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    }
}
