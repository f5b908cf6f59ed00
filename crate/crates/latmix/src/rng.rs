//! Deterministic random-number streams.
//!
//! All randomness in the pipeline flows from one master seed through
//! explicitly numbered streams, so any stage (a single bound permutation, a
//! group shuffle) can be re-run in isolation and parallel workers never race
//! for draws. ChaCha8 gives independent streams for distinct `stream_id`s
//! under the same seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A (seed, stream) pair identifying one reproducible draw sequence.
///
/// Identical `(seed, stream_id)` values always reproduce identical draws,
/// independent of thread scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

/// Pipeline stages that consume their own stream block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    /// Conditioned sampling for one (engine, permutation) pair.
    Permutation { engine: u64, perm_index: u64 },
    /// Shuffling / random shortlist selection inside one subproblem.
    GroupSelect { engine: u64 },
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Stream for a stage of one subproblem. Layout (high to low bits):
    /// subproblem id, stage tag, engine, permutation index.
    pub fn for_stage(seed: u64, subproblem: u64, kind: StreamKind) -> Self {
        let stream_id = match kind {
            StreamKind::Permutation { engine, perm_index } => {
                (subproblem << 40) | (engine << 32) | perm_index
            }
            StreamKind::GroupSelect { engine } => (subproblem << 40) | (1 << 39) | (engine << 32),
        };
        Self { seed, stream_id }
    }

    /// Materialize the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id.into());
        rng
    }
}
