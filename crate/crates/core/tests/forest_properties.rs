use chpo::forest::{ForestSettings, RandomForest};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 500 rows; the class is decided by feature 0 alone.
fn threshold_data(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..500).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
    let y = x.iter().map(|r| usize::from(r[0] > 0.5)).collect();
    (x, y)
}

#[test]
fn decisive_feature_dominates_across_seeds() {
    let mut wins = 0;
    for seed in 0..10 {
        let (x, y) = threshold_data(seed);
        let forest = RandomForest::fit(&x, &y, &ForestSettings::default().with_seed(seed)).unwrap();
        let imp = forest.importances();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        if imp[1..].iter().all(|&v| imp[0] > v) {
            wins += 1;
        }
    }
    assert!(wins >= 9, "decisive feature won {wins}/10");
}

#[test]
fn permuting_columns_permutes_the_decisive_feature() {
    let (x, y) = threshold_data(3);
    // move column 0 to position 3
    let perm = [1, 2, 3, 0, 4];
    let xp: Vec<Vec<f64>> = x.iter().map(|r| perm.iter().map(|&c| r[c]).collect()).collect();
    let forest = RandomForest::fit(&xp, &y, &ForestSettings::default().with_seed(3)).unwrap();
    let imp = forest.importances();
    let top = (0..5).max_by(|&a, &b| imp[a].total_cmp(&imp[b])).unwrap();
    assert_eq!(top, 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn importances_form_a_distribution(seed in any::<u64>(), rows in 4usize..60, cols in 1usize..6, classes in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..rows).map(|_| (0..cols).map(|_| rng.random::<f64>()).collect()).collect();
        let y: Vec<usize> = (0..rows).map(|_| rng.random_range(0..classes)).collect();
        let settings = ForestSettings { n_trees: 10, ..ForestSettings::default().with_seed(seed) };
        let forest = RandomForest::fit(&x, &y, &settings).unwrap();
        let imp = forest.importances();
        prop_assert_eq!(imp.len(), cols);
        prop_assert!(imp.iter().all(|v| *v >= 0.0));
        let total: f64 = imp.iter().sum();
        prop_assert!(total == 0.0 || (total - 1.0).abs() < 1e-9);
        for r in &x {
            prop_assert!(forest.predict(r).unwrap() < classes.max(1));
        }
    }
}
