//! Sweep the initialization share p on the shipped Branin spec.

use std::path::PathBuf;

use chpo::harness::{run_sensitivity, Axis, ExperimentSpec};

fn main() -> chpo::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs/sensitivity.toml");
    let mut spec = ExperimentSpec::from_file(&path)?;
    spec.repetitions = 3;
    let report = run_sensitivity(&spec, Axis::P, &[0.1, 0.5, 0.9], None)?;
    print!("{}", report.summary_csv());
    Ok(())
}
