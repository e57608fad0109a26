//! Reproducible Wiener increments.
//!
//! Each trajectory draws from its own ChaCha8 stream: the key is derived from
//! the master seed and the stream id is the trajectory index, so trajectory
//! `n` sees the same increments no matter how trajectories are scheduled
//! across threads. ChaCha is counter-based, which makes the streams
//! independent without any shared state.
//!
//! Standard normal variates come from `rand_distr::StandardNormal` (ziggurat
//! transform of uniform 64-bit draws) and are scaled by `sqrt(dt)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Debug)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    sqrt_dt: f64,
}

impl NoiseStream {
    pub fn new(master_seed: u64, trajectory: u64, dt: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(trajectory);
        NoiseStream { rng, sqrt_dt: dt.sqrt() }
    }

    /// Next increment `dW ~ Normal(0, dt)`.
    pub fn next_increment(&mut self) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        z * self.sqrt_dt
    }
}
