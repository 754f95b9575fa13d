//! Reproducible randomness.
//!
//! Every source of randomness in this crate is an [`RngStream`]: a
//! counter-based generator keyed by a `(seed, stream_id)` pair. The same pair
//! always reproduces the same draw sequence, and distinct stream ids are
//! independent, so Monte-Carlo runs can execute in any order (or in parallel)
//! without sharing mutable generator state.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// What a stream is used for. Mixed into the stream id so that the different
/// consumers inside one run never share a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    /// Environment transitions.
    Environment = 0,
    /// The exploration coin of an epsilon-greedy agent.
    ExploreCoin = 1,
    /// Uniform action draws on exploration steps.
    ExploreAction = 2,
    /// Posterior sampling inside an agent.
    PosteriorDraw = 3,
    /// Posterior draws made purely for metric reporting.
    Metrics = 4,
    /// Initial-state draws.
    Init = 5,
    /// Randomized regressors and simulated planning datasets.
    Planner = 6,
}

const INDEX_BITS: u32 = 10;
const PURPOSE_BITS: u32 = 4;

/// Derive a stream id from a run index, a purpose tag and a sub-index
/// (patient number, tree number, ...). Sub-indices must stay below 2^10.
pub fn stream_id(run: u64, purpose: StreamPurpose, index: u64) -> u64 {
    debug_assert!(index < (1 << INDEX_BITS));
    (run << (INDEX_BITS + PURPOSE_BITS)) | ((purpose as u64) << INDEX_BITS) | index
}

/// A counter-based random stream keyed by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    /// Stream for a given run and purpose.
    pub fn for_run(seed: u64, run: u64, purpose: StreamPurpose) -> Self {
        Self::new(seed, stream_id(run, purpose, 0))
    }

    /// Stream for a given run, purpose and sub-index.
    pub fn for_run_indexed(seed: u64, run: u64, purpose: StreamPurpose, index: u64) -> Self {
        Self::new(seed, stream_id(run, purpose, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
