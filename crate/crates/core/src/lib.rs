//! Learning averaged Pauli noise from twirled benchmarking data.
//!
//! Sequences of random single- (or two-) qubit Clifford layers of varying
//! length are run on every twirled set of a register at once. The measured
//! outcome patterns are Walsh–Hadamard transformed, each transformed entry is
//! fitted to an exponential decay `A·p^m`, and the SPAM-free decays are
//! transformed back into the distribution of observed error rates over the
//! sets. From that distribution the crate computes correlation matrices,
//! information measures and divergences, fits Gibbs random fields along a
//! junction chain, and attaches bootstrap confidence intervals to all of it.
//!
//! Modules:
//!
//! - [`dist`]: index conventions, transforms, simplex projection and the
//!   conversions between observed rates, averaged eigenvalues and Pauli rates.
//! - [`sim`]: ground-truth noise models, Clifford averaging, SPAM and shot
//!   sampling into [`sim::ExperimentRecord`]s.
//! - [`protocol`]: the reconstruction pipeline and decay fitting.
//! - [`grf`]: junction-chain Gibbs random fields.
//! - [`analysis`]: divergences, information measures, correlation, fidelity.
//! - [`bootstrap`]: non-parametric bootstrap and percentile intervals.
//! - [`cli`]: configuration and the batch commands behind the `noisecorr` binary.

pub mod analysis;
pub mod bootstrap;
pub mod cli;
pub mod dist;
pub mod error;
pub mod grf;
pub mod layout;
pub mod protocol;
pub mod rng;
pub mod sim;

pub use dist::{EigenvalueVector, PauliErrorRates, ProbVector};
pub use error::{Error, Result};
pub use layout::PartitionLayout;
