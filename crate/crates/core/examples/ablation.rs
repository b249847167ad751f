//! Full ExperienceThinking against its single-module variants on a bowl
//! hidden among inert dimensions.

use std::sync::Arc;

use chpo::driver::{solve, EtSettings, Problem, Variant};
use chpo::objectives::{SyntheticFunction, SyntheticObjective};

fn main() -> chpo::Result<()> {
    let objective = SyntheticObjective::new(SyntheticFunction::QuadraticBowl { dims: 2 }, 8);
    let (space, f_ideal) = (objective.space().clone(), objective.f_ideal());
    let problem = Problem::new(space, Arc::new(objective), f_ideal, 64)?;

    for variant in [Variant::Full, Variant::HeOnly, Variant::PaOnly] {
        let settings = EtSettings::default().with_m(2).with_variant(variant);
        let mean: f64 = (0..4)
            .map(|seed| solve(&problem, &settings.with_seed(seed)).map(|r| r.best_score))
            .sum::<chpo::Result<f64>>()?
            / 4.0;
        println!("{:>8}: mean best {mean:.5}", variant.name());
    }
    Ok(())
}
