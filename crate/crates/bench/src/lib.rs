//! Fixtures shared by the benchmarks.

use prioaccess_core::action_space::{generate_reduced, ActionSpace, GridSpec, DEFAULT_ACTION_CAP};
use prioaccess_core::{AccessProbabilityPair, NetworkConfig};

/// Four H-UEs and five L-UEs on `m` RBs.
pub fn reference_load(m: usize) -> NetworkConfig {
    NetworkConfig::new(4, 5, m).expect("m >= 1")
}

/// A non-uniform allocation with every RB in use by both classes.
pub fn skewed_pair(m: usize) -> AccessProbabilityPair {
    let weights: Vec<f64> = (1..=m).map(|i| i as f64).collect();
    let total: f64 = weights.iter().sum();
    let p_h: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let p_l: Vec<f64> = p_h.iter().rev().copied().collect();
    AccessProbabilityPair::new(p_h, p_l).expect("normalized")
}

/// Rotation-reduced space on the 0.2 grid.
pub fn reduced_space(m: usize) -> ActionSpace {
    generate_reduced(m, GridSpec::new(5).expect("q > 0"), DEFAULT_ACTION_CAP).expect("within cap")
}
