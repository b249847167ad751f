//! Objective functions for experiments: closed-form test functions and
//! feature-subset selection over tabular datasets.

pub mod dataset;
pub mod feature_subset;
pub mod synthetic;

pub use dataset::{load_csv, read_csv, DatasetRegistry, TabularDataset};
pub use feature_subset::{FeatureSubsetObjective, FeatureSubsetSettings};
pub use synthetic::{SyntheticFunction, SyntheticObjective};
