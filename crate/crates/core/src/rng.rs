//! Deterministic randomness.
//!
//! Every random stream is derived from one user seed plus a component name and
//! an index, so results never depend on evaluation order or thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::cyclic::GroupFunction;

pub fn derive_rng(seed: u64, component: &str, index: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((component.len() as u64).to_le_bytes());
    hasher.update(component.as_bytes());
    hasher.update(index.to_le_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

/// A function with values drawn uniformly from the closed unit disc.
pub fn random_bounded_function<R: Rng>(n: usize, rng: &mut R) -> GroupFunction {
    GroupFunction::from_fn_mut(n, |_| {
        let r = rng.gen::<f64>().sqrt();
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        Complex64::from_polar(r, theta)
    })
    .expect("caller supplies a prime modulus")
}

/// A real function with values in `[0, 1]`.
pub fn random_unit_interval_function<R: Rng>(n: usize, rng: &mut R) -> GroupFunction {
    GroupFunction::from_fn_mut(n, |_| Complex64::new(rng.gen::<f64>(), 0.0))
        .expect("caller supplies a prime modulus")
}

/// A uniformly random subset of `0..n` of the given size, sorted.
pub fn random_subset<R: Rng>(n: usize, size: usize, rng: &mut R) -> Vec<usize> {
    let mut set = rand::seq::index::sample(rng, n, size.min(n)).into_vec();
    set.sort_unstable();
    set
}
