//! One transition of the sampled chain, split into its random inputs and a
//! deterministic update so that coupled systems can share the inputs.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::configuration::Configuration;
use crate::kernels::arrivals::sample_count;
use crate::kernels::params::SystemParams;
use crate::kernels::polling::poll_at;

/// Random inputs of one step: the interpolling time, the arrival locations,
/// the scan point and a coin for equidistant ties.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepNoise {
    pub duration: f64,
    pub locations: Vec<f64>,
    pub poll_location: f64,
    pub tie_coin: f64,
}

impl StepNoise {
    /// Redraws all inputs in place, reusing the location buffer.
    pub fn draw<R: Rng + ?Sized>(&mut self, params: &SystemParams, rng: &mut R) {
        let ell = params.circumference();
        self.duration = params.interpolling().sample(rng);
        let n = sample_count(params.lambda(), self.duration, rng);
        self.locations.clear();
        self.locations.extend((0..n).map(|_| rng.random::<f64>() * ell));
        self.poll_location = rng.random::<f64>() * ell;
        self.tie_coin = rng.random::<f64>();
    }
}

/// What happened during one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub arrivals: usize,
    pub served: bool,
}

/// Adds the batch, then polls with radius `r`.
pub fn apply_step(zeta: &mut Configuration, noise: &StepNoise, r: f64) -> StepOutcome {
    for &x in &noise.locations {
        zeta.insert(x);
    }
    let served = poll_at(zeta, r, noise.poll_location, noise.tie_coin).is_some();
    StepOutcome {
        arrivals: noise.locations.len(),
        served,
    }
}

/// Generator for worker `stream` of a run seeded with `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for sweep point or replication `index` of a run seeded with `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    substream(master, index.wrapping_add(1)).next_u64()
}
