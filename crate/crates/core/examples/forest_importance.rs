//! Random-forest importances find the one feature that decides the label.

use chpo::forest::{ForestSettings, RandomForest};
use chpo::rng::seeded;
use rand::Rng;

fn main() -> chpo::Result<()> {
    let mut rng = seeded(11);
    let x: Vec<Vec<f64>> = (0..400).map(|_| (0..6).map(|_| rng.random::<f64>()).collect()).collect();
    let y: Vec<usize> = x.iter().map(|row| usize::from(row[2] > 0.4)).collect();

    let forest = RandomForest::fit(&x, &y, &ForestSettings::default().with_seed(3))?;
    for (i, imp) in forest.importances().iter().enumerate() {
        println!("feature {i}: {imp:.3} {}", "#".repeat((imp * 50.0) as usize));
    }
    let correct = x.iter().zip(&y).filter(|(row, &label)| forest.predict(row).ok() == Some(label)).count();
    println!("training accuracy {:.3}", correct as f64 / x.len() as f64);
    Ok(())
}
