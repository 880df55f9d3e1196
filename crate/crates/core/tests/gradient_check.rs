use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentimarket::forecast::{loss_and_gradients, FeatureWindow, LstmParameters};

const EPS: f64 = 1e-5;

fn random_case(seed: u64, input_size: usize, hidden: usize) -> (LstmParameters, Vec<FeatureWindow>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = LstmParameters::init_uniform(input_size, hidden, &mut rng);
    let windows = (0..3)
        .map(|_| FeatureWindow {
            inputs: (0..4)
                .map(|_| (0..input_size).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
            target: rng.random_range(-1.0..1.0),
        })
        .collect();
    (params, windows)
}

/// Largest relative disagreement between the analytic gradient and central
/// differences, `|a - n| / max(|a|, |n|, 1e-5)`. The floor sits at the
/// resolution of a central difference of an O(1) loss in f64: below it the
/// numeric estimate is dominated by rounding (~1e-16 / 1e-5 absolute).
fn max_relative_error(params: &LstmParameters, windows: &[FeatureWindow]) -> f64 {
    let (_, grad) = loss_and_gradients(params, windows).unwrap();
    let analytic = grad.flatten();
    let base = params.flatten();
    let mut probe = params.clone();
    let mut worst = 0.0f64;
    for k in 0..base.len() {
        let mut theta = base.clone();
        theta[k] = base[k] + EPS;
        probe.assign_flat(&theta);
        let (up, _) = loss_and_gradients(&probe, windows).unwrap();
        theta[k] = base[k] - EPS;
        probe.assign_flat(&theta);
        let (down, _) = loss_and_gradients(&probe, windows).unwrap();
        let numeric = (up - down) / (2.0 * EPS);
        let denom = analytic[k].abs().max(numeric.abs()).max(1e-5);
        worst = worst.max((analytic[k] - numeric).abs() / denom);
    }
    worst
}

#[test]
fn bptt_matches_finite_differences() {
    let mut worst = 0.0f64;
    for hidden in [2, 8] {
        for seed in 0..50 {
            let (p, w) = random_case(seed, 2, hidden);
            worst = worst.max(max_relative_error(&p, &w));
        }
    }
    println!("max relative gradient error: {worst:.3e}");
    assert!(worst < 1e-5, "max relative error {worst:e}");
}
