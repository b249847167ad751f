//! Inspect what the adjustment and verification networks propose.

use chpo::experience::{build_triples, ExperienceSet};
use chpo::human_experience::{score_candidates, select_candidates, GapOrder, HumanExperienceSettings, NetworkPair};
use chpo::rng::seeded;
use chpo::space::{HyperparameterDef, SearchSpace, Value};

fn main() -> chpo::Result<()> {
    let space = SearchSpace::new(vec![
        HyperparameterDef::real("x", 0.0, 1.0)?,
        HyperparameterDef::real("y", 0.0, 1.0)?,
    ])?;
    let score = |x: f64, y: f64| 1.0 - (x - 0.7).powi(2) - (y - 0.2).powi(2);

    let mut rng = seeded(5);
    let mut exp = ExperienceSet::new();
    for _ in 0..12 {
        let cfg = space.sample_novel(exp.configurations(), &mut rng).expect("continuous space");
        let s = match cfg.values() {
            [Value::Real(x), Value::Real(y)] => score(*x, *y),
            _ => unreachable!(),
        };
        exp.push(cfg, s)?;
    }
    println!("{} entries give {} adjustment triples", exp.len(), build_triples(&exp, &space)?.len());

    let settings = HumanExperienceSettings::default();
    let pair = NetworkPair::train(&exp, &space, &settings, 9)?;
    let scored = score_candidates(&exp, &space, 1.0, &pair, &pair)?;
    for c in select_candidates(scored, &exp, 4, GapOrder::Ascending) {
        println!("gap {:8.3}  {}", c.confidence_gap, space.display(&c.config));
    }
    println!("best so far {:.4}", exp.best().map_or(f64::NAN, |e| e.score));
    Ok(())
}
