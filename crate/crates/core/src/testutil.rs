use crate::cyclic::GroupFunction;
use crate::rng::{derive_rng, random_bounded_function};

pub fn random_bounded(n: usize, seed: u64) -> GroupFunction {
    random_bounded_function(n, &mut derive_rng(seed, "unit-test", n as u64))
}
