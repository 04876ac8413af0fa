use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::Network;

/// Fan-in scaled uniform initialization: every weight and bias of a layer is
/// drawn from `U(−b, b)` with `b = √(1/fan_in)`. Deterministic per seed.
pub fn init_params(net: &Network, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = Vec::with_capacity(net.dim());
    for block in net.param_blocks() {
        let bound = (1.0 / block.fan_in as f64).sqrt();
        theta.extend((0..block.len).map(|_| rng.random_range(-bound..bound)));
    }
    theta
}
