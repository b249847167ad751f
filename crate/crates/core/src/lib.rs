//! Budget-constrained hyperparameter optimization.
//!
//! The central entry point is [`driver::solve`], which runs ExperienceThinking
//! on a [`driver::Problem`]: a search space, an objective, the ideal score and
//! a hard cap on the number of objective evaluations. Random search, grid
//! search and Gaussian-process Bayesian optimization live in [`baselines`] and
//! share the same [`run::RunResult`] ledger, so every algorithm is compared on
//! exactly the same terms.
//!
//! ```no_run
//! use std::sync::Arc;
//! use chpo::driver::{solve, EtSettings, Problem};
//! use chpo::space::{HyperparameterDef, SearchSpace, Value};
//!
//! let space = SearchSpace::new(vec![
//!     HyperparameterDef::real("x", 0.0, 1.0).unwrap(),
//!     HyperparameterDef::integer("depth", 1, 20).unwrap(),
//! ])
//! .unwrap();
//! let objective = |cfg: &chpo::space::Configuration| match cfg.values() {
//!     [Value::Real(x), Value::Int(d)] => 1.0 - (x - 0.3).powi(2) - 0.001 * (*d as f64 - 7.0).abs(),
//!     _ => unreachable!(),
//! };
//! let problem = Problem::new(space, Arc::new(objective), 1.0, 32).unwrap();
//! let result = solve(&problem, &EtSettings::default().with_m(2)).unwrap();
//! println!("best {:.4} at {}", result.best_score, problem.space().display(&result.best_config));
//! ```

pub mod baselines;
pub mod driver;
pub mod error;
pub mod experience;
pub mod forest;
pub mod harness;
pub mod human_experience;
pub mod nn;
pub mod objectives;
pub mod parameter_analysis;
pub mod rng;
pub mod run;
pub mod space;

pub use error::{Error, Result};
