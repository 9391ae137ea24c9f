//! Priority-aware random access: throughput model, exact optimizer and
//! cross-entropy bandit solver for two UE classes sharing `M` resource blocks.
//!
//! Module map:
//!
//! * [`model`]: network load, access probabilities, slot events and patterns.
//! * [`exact`]: exact throughputs, pattern enumeration and probabilities.
//! * [`baselines`]: uniform allocation and access class barring.
//! * [`action_space`]: discretized and compact action spaces for the bandit.
//! * [`simulator`]: Monte-Carlo slot simulation and empirical throughputs.
//! * [`optimizer`]: multistart solver for the constrained allocation problem.
//! * [`mab`]: cross-entropy multi-armed bandit over an action space.

pub mod action_space;
pub mod baselines;
pub mod error;
pub mod exact;
pub mod mab;
pub mod model;
pub mod optimizer;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{
    canonical_rotation, count_successes, pattern_of_occupancy, AccessPattern, AccessProbabilityPair,
    NetworkConfig, OccupancyPair, SlotEvent, ThroughputPair,
};
