//! Comparison algorithms that spend the same hard budget as
//! [`crate::driver::solve`]: random search, grid search and Bayesian
//! optimization with a Gaussian-process surrogate.

mod bayes;
mod grid;
mod random;

pub use bayes::{bayes_opt, bayes_opt_with_settings, expected_improvement, BoSettings, GpSurrogate};
pub use grid::{grid_levels, grid_search, integer_root, GridPlan};
pub use random::random_search;
