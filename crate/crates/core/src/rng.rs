//! Seeded random streams.
//!
//! Every random draw in a training run comes from an [`RngStream`] whose seed is
//! derived from the master seed, a stream label and (for per-iteration streams)
//! the iteration index. Two streams with the same `(seed, id)` produce
//! bit-identical sequences, which is how agents agree on the common episode
//! horizons without exchanging them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Label distinguishing independent streams derived from one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamId {
    /// Episode horizons shared by all agents.
    Horizon,
    /// Environment randomness (initial distribution and transitions).
    Environment,
    /// Action sampling of one agent.
    Action(usize),
    /// Parameter initialization.
    Init,
    /// Anything else; used by test harnesses and examples.
    Custom(u64),
}

impl StreamId {
    fn tag(self) -> u64 {
        match self {
            StreamId::Horizon => 0x484f_5249_5a4f_4e00,
            StreamId::Environment => 0x454e_5649_524f_4e00,
            StreamId::Action(i) => 0x4143_5400_0000_0000 ^ (i as u64),
            StreamId::Init => 0x494e_4954_0000_0000,
            StreamId::Custom(x) => 0x4355_5354_0000_0000 ^ x.rotate_left(17),
        }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a master seed together with a path of words (replication, iteration, ...).
///
/// Each word is folded in separately, so appending words never changes the
/// seeds derived from a shorter path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |acc, &w| mix(acc ^ mix(w)))
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    id: StreamId,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, id: StreamId) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(mix(seed ^ id.tag()));
        RngStream { seed, id, rng }
    }

    /// Stream for one iteration of a run: seed path `(master, iteration)` plus label.
    pub fn for_iteration(master: u64, iteration: u64, id: StreamId) -> Self {
        RngStream::new(derive_seed(master, &[iteration]), id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn id(&self) -> StreamId {
        self.id
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(rand_distr::StandardNormal)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    /// Geometric draw with support `{0, 1, ...}` and `P(T = x) = (1 - p)^x p`.
    ///
    /// Inverse-CDF: `P(T >= x) = (1 - p)^x`, so `T = floor(ln U / ln(1 - p))`
    /// for `U` uniform on `(0, 1]`.
    pub fn geometric(&mut self, success_prob: f64) -> Result<u64> {
        if !(success_prob > 0.0 && success_prob <= 1.0) {
            return Err(Error::InvalidProbability(success_prob));
        }
        if success_prob == 1.0 {
            return Ok(0);
        }
        let u = 1.0 - self.uniform();
        let x = (u.ln() / (-success_prob).ln_1p()).floor();
        Ok(if x >= u64::MAX as f64 { u64::MAX } else { x as u64 })
    }

    /// Index drawn from a discrete distribution by inverse CDF.
    ///
    /// Falls back to the last index with positive mass when rounding leaves
    /// the cumulative sum just below the uniform draw.
    pub fn categorical(&mut self, probs: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        for (k, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

/// Free-function form of [`RngStream::geometric`].
pub fn draw_geometric(stream: &mut RngStream, success_prob: f64) -> Result<u64> {
    stream.geometric(success_prob)
}
