//! Operator-norm bound report for the reference configuration: the empirical
//! norm, the nondegeneracy value, the amplitude and phase norms and their
//! ratio, printed as JSON.
//!
//! Run with `cargo run --release --example bound_report`.

use tfop::harness::{run_bound_experiment, to_json, ExperimentConfig};
use tfop::Result;

fn main() -> Result<()> {
    let report = run_bound_experiment(&ExperimentConfig::default())?;
    print!("{}", to_json(&report)?);
    Ok(())
}
