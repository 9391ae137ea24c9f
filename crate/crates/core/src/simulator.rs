//! Monte-Carlo slot simulation.
//!
//! Each UE independently draws one RB per slot from its class's access
//! probabilities (inverse CDF over cumulative sums in RB order, H-UEs first,
//! then L-UEs). Slot `s` of a trace seeded with `seed` draws from
//! [`rng::slot_rng`]`(seed, s)`, so traces are reproducible and slots can be
//! generated in any order.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AccessPattern, AccessProbabilityPair, NetworkConfig, SlotEvent};
use crate::rng;

#[derive(Debug, Clone)]
pub struct SimTrace {
    pub cfg: NetworkConfig,
    pub pair: AccessProbabilityPair,
    pub seed: u64,
    pub patterns: Vec<AccessPattern>,
}

impl SimTrace {
    pub fn t(&self) -> usize {
        self.patterns.len()
    }
}

/// Success counts averaged over `t` slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalThroughput {
    pub mu_h_t: f64,
    pub mu_l_t: f64,
    pub t: usize,
}

impl EmpiricalThroughput {
    pub fn from_counts(h_successes: u64, l_successes: u64, t: usize) -> Self {
        Self {
            mu_h_t: h_successes as f64 / t as f64,
            mu_l_t: l_successes as f64 / t as f64,
            t,
        }
    }
}

/// Per-class cumulative distributions ready for inverse-CDF sampling.
#[derive(Debug, Clone)]
pub struct SlotSampler {
    n_h: usize,
    n_l: usize,
    cdf_h: Vec<f64>,
    cdf_l: Vec<f64>,
    fallback_h: usize,
    fallback_l: usize,
}

impl SlotSampler {
    pub fn new(cfg: &NetworkConfig, pair: &AccessProbabilityPair) -> Result<Self> {
        pair.ensure_m(cfg.m)?;
        let cdf = |p: &[f64]| -> Vec<f64> {
            p.iter()
                .scan(0.0, |acc, x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect()
        };
        // Rounding can leave the last cumulative value a hair below one; such
        // draws go to the last RB with positive mass.
        let last_positive = |p: &[f64]| p.iter().rposition(|x| *x > 0.0).unwrap_or(0);
        Ok(Self {
            n_h: cfg.n_h,
            n_l: cfg.n_l,
            cdf_h: cdf(pair.p_h()),
            cdf_l: cdf(pair.p_l()),
            fallback_h: last_positive(pair.p_h()),
            fallback_l: last_positive(pair.p_l()),
        })
    }

    pub fn m(&self) -> usize {
        self.cdf_h.len()
    }

    fn pick(cdf: &[f64], fallback: usize, u: f64) -> usize {
        cdf.iter().position(|c| u < *c).unwrap_or(fallback)
    }

    /// Fills per-RB occupancy counts for one slot.
    pub fn sample_counts<R: Rng>(&self, rng: &mut R, c_h: &mut [usize], c_l: &mut [usize]) {
        c_h.fill(0);
        c_l.fill(0);
        for _ in 0..self.n_h {
            c_h[Self::pick(&self.cdf_h, self.fallback_h, rng.random::<f64>())] += 1;
        }
        for _ in 0..self.n_l {
            c_l[Self::pick(&self.cdf_l, self.fallback_l, rng.random::<f64>())] += 1;
        }
    }

    /// Occupancy of slot `slot` under `seed`.
    pub fn slot_counts(&self, seed: u64, slot: u64, c_h: &mut [usize], c_l: &mut [usize]) {
        let mut rng = rng::slot_rng(seed, slot);
        self.sample_counts(&mut rng, c_h, c_l);
    }
}

/// Simulates `t` i.i.d. slots and keeps every observed pattern.
pub fn simulate(cfg: &NetworkConfig, pair: &AccessProbabilityPair, t: usize, seed: u64) -> Result<SimTrace> {
    check_slots(t)?;
    let sampler = SlotSampler::new(cfg, pair)?;
    let mut c_h = vec![0; cfg.m];
    let mut c_l = vec![0; cfg.m];
    let patterns = (0..t as u64)
        .map(|slot| {
            sampler.slot_counts(seed, slot, &mut c_h, &mut c_l);
            AccessPattern::new(
                c_h.iter()
                    .zip(&c_l)
                    .map(|(&h, &l)| SlotEvent::from_counts(h, l))
                    .collect(),
            )
        })
        .collect();
    Ok(SimTrace {
        cfg: *cfg,
        pair: pair.clone(),
        seed,
        patterns,
    })
}

/// Empirical throughputs of a trace.
pub fn empirical_throughput(trace: &SimTrace) -> Result<EmpiricalThroughput> {
    check_slots(trace.t())?;
    let (mut h, mut l) = (0u64, 0u64);
    for p in &trace.patterns {
        let (sh, sl) = crate::model::count_successes(p);
        h += sh as u64;
        l += sl as u64;
    }
    Ok(EmpiricalThroughput::from_counts(h, l, trace.t()))
}

/// Same draws as [`simulate`] followed by [`empirical_throughput`], without
/// materializing the trace.
pub fn simulate_throughput(
    cfg: &NetworkConfig,
    pair: &AccessProbabilityPair,
    t: usize,
    seed: u64,
) -> Result<EmpiricalThroughput> {
    check_slots(t)?;
    let sampler = SlotSampler::new(cfg, pair)?;
    Ok(sampler_throughput(&sampler, t, seed))
}

pub(crate) fn sampler_throughput(sampler: &SlotSampler, t: usize, seed: u64) -> EmpiricalThroughput {
    let m = sampler.m();
    let mut c_h = vec![0; m];
    let mut c_l = vec![0; m];
    let (mut h, mut l) = (0u64, 0u64);
    for slot in 0..t as u64 {
        sampler.slot_counts(seed, slot, &mut c_h, &mut c_l);
        for (&a, &b) in c_h.iter().zip(&c_l) {
            match (a, b) {
                (1, 0) => h += 1,
                (0, 1) => l += 1,
                _ => {}
            }
        }
    }
    EmpiricalThroughput::from_counts(h, l, t)
}

fn check_slots(t: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidConfig("a trace needs at least one slot".into()));
    }
    Ok(())
}

/// Writes `m,t,seed` on the first line, then one pattern per slot.
pub fn write_trace<W: Write>(trace: &SimTrace, mut out: W) -> Result<()> {
    writeln!(out, "{},{},{}", trace.cfg.m, trace.t(), trace.seed)?;
    for p in &trace.patterns {
        writeln!(out, "{p}")?;
    }
    Ok(())
}

/// Trace file contents: slot width, seed and patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub m: usize,
    pub seed: u64,
    pub patterns: Vec<AccessPattern>,
}

impl TraceFile {
    pub fn empirical_throughput(&self) -> Result<EmpiricalThroughput> {
        check_slots(self.patterns.len())?;
        let (h, l) = self.patterns.iter().fold((0u64, 0u64), |(h, l), p| {
            let (a, b) = crate::model::count_successes(p);
            (h + a as u64, l + b as u64)
        });
        Ok(EmpiricalThroughput::from_counts(h, l, self.patterns.len()))
    }
}

pub fn read_trace<R: BufRead>(input: R) -> Result<TraceFile> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing m,t,seed header"))?;
    let header = header?;
    let fields: Vec<&str> = header.trim().split(',').collect();
    if fields.len() != 3 {
        return Err(Error::parse(1, format!("expected m,t,seed, got {header:?}")));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|e| Error::parse(1, e.to_string()))
    };
    let (m, t, seed) = (
        num(fields[0])? as usize,
        num(fields[1])? as usize,
        num(fields[2])?,
    );

    let mut patterns = Vec::with_capacity(t);
    for (i, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let p: AccessPattern = line
            .parse()
            .map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
        if p.m() != m {
            return Err(Error::parse(
                i + 1,
                format!("pattern has {} RBs, header says {m}", p.m()),
            ));
        }
        patterns.push(p);
    }
    if patterns.len() != t {
        return Err(Error::parse(
            0,
            format!("header promises {t} slots, found {}", patterns.len()),
        ));
    }
    Ok(TraceFile { m, seed, patterns })
}
