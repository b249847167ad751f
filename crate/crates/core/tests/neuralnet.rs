use chpo::nn::{MlpNetwork, TrainSettings};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;

fn random_batch(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

/// Largest relative error between the analytic gradient and central
/// differences, using `max(|a|, |n|, 1e-7)` as the scale.
fn worst_relative_error(net: &MlpNetwork, x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let (_, analytic) = net.loss_and_gradient(x.view(), y.view()).unwrap();
    let base = net.flat_parameters();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + STEP;
        probe.set_flat_parameters(&p).unwrap();
        let up = probe.loss(x.view(), y.view()).unwrap();
        p[i] = base[i] - STEP;
        probe.set_flat_parameters(&p).unwrap();
        let down = probe.loss(x.view(), y.view()).unwrap();
        let numeric = (up - down) / (2.0 * STEP);
        let scale = analytic[i].abs().max(numeric.abs()).max(1e-7);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    worst
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let shapes: [&[usize]; 4] = [&[3, 5, 2], &[4, 8, 8, 3], &[7, 16, 16, 1], &[2, 4, 4, 2]];
    let mut cases = 0;
    for seed in 0..24u64 {
        let sizes = shapes[seed as usize % shapes.len()];
        let net = MlpNetwork::init(sizes, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let rows = 3 + (seed as usize % 5);
        let x = random_batch(&mut rng, rows, sizes[0]);
        let y = random_batch(&mut rng, rows, *sizes.last().unwrap());
        let err = worst_relative_error(&net, &x, &y);
        assert!(err < 1e-4, "seed {seed}: relative error {err:e}");
        cases += 1;
    }
    assert!(cases >= 20);
}

#[test]
fn gradient_of_a_perfect_fit_is_zero() {
    let net = MlpNetwork::init(&[2, 4, 1], 3).unwrap();
    let x = Array2::from_shape_vec((2, 2), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let y = net.forward_batch(x.view());
    let (loss, g) = net.loss_and_gradient(x.view(), y.view()).unwrap();
    assert_eq!(loss, 0.0);
    assert!(g.iter().all(|v| *v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn training_does_not_increase_loss(seed in 0u64..10_000, lr in 0.001f64..0.1, rows in 2usize..12) {
        let mut net = MlpNetwork::init(&[3, 16, 16, 2], seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let x = random_batch(&mut rng, rows, 3);
        let y = random_batch(&mut rng, rows, 2);
        let before = net.loss(x.view(), y.view()).unwrap();
        let after = net
            .train(x.view(), y.view(), &TrainSettings { epochs: 50, learning_rate: lr })
            .unwrap();
        prop_assert!(after <= before + 1e-12, "{before} -> {after}");
    }
}
