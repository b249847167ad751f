//! Feature-subset selection for k-NN on the bundled zoo dataset.

use std::path::PathBuf;
use std::sync::Arc;

use chpo::driver::{pirate, solve, EtSettings, Problem};
use chpo::objectives::{DatasetRegistry, FeatureSubsetObjective, FeatureSubsetSettings};

fn main() -> chpo::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/datasets.toml");
    let dataset = Arc::new(DatasetRegistry::from_file(&root)?.load("zoo")?);
    println!(
        "{}: {} rows, {} features, {} classes",
        dataset.name(),
        dataset.n_rows(),
        dataset.n_features(),
        dataset.n_classes()
    );

    let objective = FeatureSubsetObjective::new(dataset, FeatureSubsetSettings::default())?;
    let space = objective.space().clone();
    let default = objective.default_config();
    let f_ideal = objective.f_ideal();
    let objective = Arc::new(objective);
    let problem = Problem::new(space, objective.clone(), f_ideal, 64)?.with_default_config(default)?;

    let result = solve(&problem, &EtSettings::default().with_m(3).with_seed(1))?;
    let mask = objective.decode_mask(&result.best_config)?;
    let kept: Vec<&str> = objective
        .dataset()
        .feature_names()
        .iter()
        .zip(&mask)
        .filter(|(_, on)| **on)
        .map(|(n, _)| n.as_str())
        .collect();
    println!("cross-validated accuracy {:.4} with {} features", result.best_score, kept.len());
    println!("features: {}", kept.join(", "));
    println!("PIRate {:.2}%", pirate(&result, &problem)?);
    Ok(())
}
