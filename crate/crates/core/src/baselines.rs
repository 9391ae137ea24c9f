//! Reference schemes: uniform allocation and access class barring (ACB).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::throughput_closed_form;
use crate::model::{AccessProbabilityPair, NetworkConfig, ThroughputPair};

pub fn uniform_pair(m: usize) -> Result<AccessProbabilityPair> {
    AccessProbabilityPair::uniform(m)
}

/// Uniform allocation for both classes, evaluated exactly.
pub fn uniform_throughput(cfg: &NetworkConfig) -> Result<ThroughputPair> {
    throughput_closed_form(cfg, &uniform_pair(cfg.m)?)
}

/// UEs admitted per slot after barring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcbAdmission {
    pub admitted_h: usize,
    pub admitted_l: usize,
}

/// Bars UEs down to an overloading factor of one while keeping the class
/// ratio: `floor(m n_h / n)` H-UEs, the rest of the `m` seats to L-UEs.
pub fn acb_admission(cfg: &NetworkConfig) -> AcbAdmission {
    let n = cfg.n();
    if n <= cfg.m {
        return AcbAdmission {
            admitted_h: cfg.n_h,
            admitted_l: cfg.n_l,
        };
    }
    let admitted_h = cfg.m * cfg.n_h / n;
    AcbAdmission {
        admitted_h,
        admitted_l: cfg.m - admitted_h,
    }
}

/// Admitted UEs contend with uniform allocation.
pub fn acb_throughput(cfg: &NetworkConfig) -> Result<ThroughputPair> {
    let adm = acb_admission(cfg);
    uniform_throughput(&cfg.with_load(adm.admitted_h, adm.admitted_l))
}
