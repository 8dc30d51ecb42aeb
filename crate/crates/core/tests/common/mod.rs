#![allow(dead_code)]

use clearq_core::{ModelParams, ValidatedModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn p_star() -> ModelParams {
    ModelParams::new([2.0, 1.0], [1.0, 3.0], 1.0, 2.0)
}

pub fn p_zero() -> ModelParams {
    ModelParams::new([1.0; 2], [1.0; 2], 1.0, 1.0)
}

pub fn case_b_example() -> ModelParams {
    ModelParams::new([1.0, 6.0], [1.0, 3.0], 1.0, 1.0)
}

pub fn rate(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.1..=10.0)
}

/// Six rates drawn uniformly from `[0.1, 10]`.
pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams::new(
        [rate(rng), rate(rng)],
        [rate(rng), rate(rng)],
        rate(rng),
        rate(rng),
    )
}

pub fn validated(p: ModelParams) -> ValidatedModel {
    ValidatedModel::new(p).unwrap()
}
