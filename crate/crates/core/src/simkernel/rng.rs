use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator recorded in every report header.
pub const RNG_NAME: &str = "ChaCha8Rng/rand_chacha-0.9/seed_from_u64";

/// Seeded pseudo-random stream for one simulation run.
#[derive(Debug, Clone)]
pub struct SimRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        SimRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// One Bernoulli trial. `p` is clamped to `[0, 1]`; 0 and 1 are exact.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            // keep stream consumption independent of p
            self.inner.next_u64();
            return false;
        }
        if p >= 1.0 {
            self.inner.next_u64();
            return true;
        }
        self.uniform() < p
    }

    pub fn sample<D: Distribution<bool>>(&mut self, dist: &D) -> bool {
        dist.sample(&mut self.inner)
    }

    pub fn bernoulli_dist(p: f64) -> Bernoulli {
        Bernoulli::new(p.clamp(0.0, 1.0)).expect("clamped probability")
    }
}

/// Mixes a base seed with a path of identifiers (cell coordinates, run
/// index, ...) into an independent child seed. SplitMix64 finalizer.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut state = base;
    for &part in path {
        state = splitmix(state ^ splitmix(part.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    splitmix(state)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
