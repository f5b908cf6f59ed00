//! Space-filling experimental design for mixture systems under a limited budget.
//!
//! The library recommends new experiments for composition problems where the
//! component fractions must sum to one, each component lives inside its own
//! bounds, and previously collected experiments should be kept at arm's
//! length. Sampling is done with sequential, bound-permuted Latin hypercube
//! draws (plain LHS or LHS with multidimensional uniformity), high-dimensional
//! problems are split into a main problem over group aggregates plus small
//! group subproblems, and manufacturability rules (allowed pairs, one-hot
//! exclusivity) are enforced in post-processing.
//!
//! The top-level entry point is [`orchestrator::run_pipeline`]; the individual
//! stages are usable on their own:
//!
//! * [`problem`] — problem definition, config parsing, experiment CSV loading
//! * [`lhs`] — unit-cube LHS / LHSMDU engines and bound scaling
//! * [`sampler`] — sequential conditioned sampling with pairing repair
//! * [`driver`] — the bound-permutation loop that stacks feasible samples
//! * [`selection`] — farthest-point selection against prior data and rounding
//! * [`synthesis`] — allowed-pair and one-hot manufacturability projection
//! * [`orchestrator`] — divide-and-conquer pipeline and final recommendation
//! * [`metrics`] — centered/wrap-around L2 discrepancy, variance, PCA export

pub mod driver;
pub mod error;
pub mod lhs;
pub mod matrix;
pub mod metrics;
pub mod orchestrator;
pub mod problem;
pub mod rng;
pub mod sampler;
pub mod selection;
pub mod synthesis;

pub use error::Error;
pub use matrix::SampleMatrix;
pub use rng::RngStream;
