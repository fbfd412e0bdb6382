//! Synthetic twirled-benchmarking experiments.
//!
//! The simulator works on channel diagonals only: with ideal twirling a
//! length-`m` sequence acts on the averaged eigenvalues as `A ∘ λ^{∘m}`.

mod average;
mod model;
mod random;
mod record;
mod sample;

pub use average::clifford_average;
pub use model::{NoiseModel, NoiseSpec, PauliChain, SpamModel};
pub use random::{compose_pair_channel, RandomNoise};
pub use record::{CountTable, ExperimentRecord, Outcome};
pub use sample::{
    inject_correlation, sample_experiment, sequence_distribution, SamplingMode, Schedule,
    DENSE_SAMPLING_MAX_K,
};
