//! Random, grid, Bayesian and ExperienceThinking on Branin at the same budget.

use std::sync::Arc;

use chpo::baselines::{bayes_opt, grid_search, random_search};
use chpo::driver::{solve, EtSettings, Problem};
use chpo::objectives::{SyntheticFunction, SyntheticObjective};

fn main() -> chpo::Result<()> {
    let objective = SyntheticObjective::new(SyntheticFunction::Branin, 0);
    let (space, f_ideal) = (objective.space().clone(), objective.f_ideal());
    let problem = Problem::new(space, Arc::new(objective), f_ideal, 40)?;

    let seeds = 0..5u64;
    let mut totals = [0.0; 4];
    for seed in seeds.clone() {
        totals[0] += random_search(&problem, seed)?.best_score;
        totals[1] += grid_search(&problem, seed)?.best_score;
        totals[2] += bayes_opt(&problem, seed)?.best_score;
        totals[3] += solve(&problem, &EtSettings::default().with_m(2).with_seed(seed))?.best_score;
    }
    let runs = seeds.count() as f64;
    println!("ideal score {f_ideal:.4}");
    for (name, total) in ["random", "grid", "bayes", "experience-thinking"].iter().zip(totals) {
        println!("{name:>20}: mean best {:.4}", total / runs);
    }
    Ok(())
}
