//! Declare a search space in TOML and round-trip configurations through it.

use chpo::rng::seeded;
use chpo::space::SearchSpace;

const SPACE: &str = r#"
[[param]]
name = "learning_rate"
kind = "real"
lo = 0.0001
hi = 0.1

[[param]]
name = "layers"
kind = "integer"
lo = 1
hi = 8

[[param]]
name = "optimizer"
kind = "categorical"
options = ["sgd", "adam", "rmsprop"]
"#;

fn main() -> chpo::Result<()> {
    let space = SearchSpace::from_toml_str(SPACE)?;
    println!("{} parameters, cardinality {:?}", space.dim(), space.cardinality());
    let mut rng = seeded(2);
    for _ in 0..3 {
        let cfg = space.sample_uniform(&mut rng);
        let unit = space.normalize(&cfg)?;
        let back = space.denormalize(unit.coords())?;
        println!("{}  ->  {:?}", space.display(&cfg), unit.coords());
        assert_eq!(space.display(&back).to_string(), space.display(&cfg).to_string());
    }
    Ok(())
}
