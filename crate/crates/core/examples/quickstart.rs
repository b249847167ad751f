//! Tune a small mixed space with ExperienceThinking under a 48-call budget.

use std::sync::Arc;

use chpo::driver::{pirate, solve, EtSettings, Problem};
use chpo::space::{Configuration, HyperparameterDef, SearchSpace, Value};

fn score(cfg: &Configuration) -> f64 {
    match cfg.values() {
        [Value::Real(lr), Value::Int(depth), Value::Category(act)] => {
            let act_bonus = [0.0, 0.02, -0.03][*act];
            0.9 - 40.0 * (lr.log10() + 2.0).powi(2) / 100.0 - 0.004 * (*depth as f64 - 6.0).abs() + act_bonus
        }
        _ => unreachable!("space has three parameters"),
    }
}

fn main() -> chpo::Result<()> {
    let space = SearchSpace::new(vec![
        HyperparameterDef::real("learning_rate", 1e-4, 1e-1)?,
        HyperparameterDef::integer("depth", 1, 16)?,
        HyperparameterDef::categorical("activation", ["relu", "tanh", "sigmoid"])?,
    ])?;
    let default = Configuration::new(vec![Value::Real(1e-1), Value::Int(3), Value::Category(0)]);
    let problem = Problem::new(space, Arc::new(score), 0.92, 48)?.with_default_config(default)?;

    let result = solve(&problem, &EtSettings::default().with_m(3).with_seed(7))?;
    println!("evaluations: {} of {}", result.evaluations_used, result.budget);
    println!("best score:  {:.4}", result.best_score);
    println!("best config: {}", problem.space().display(&result.best_config));
    println!("improvement over default: {:.2}%", pirate(&result, &problem)?);
    println!("analysis time: {:.2}s", result.analysis_time.as_secs_f64());
    Ok(())
}
