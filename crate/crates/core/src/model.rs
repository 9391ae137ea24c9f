//! Domain types for the two-priority random access channel.
//!
//! A slot holds `m` resource blocks (RBs). Every H-UE and L-UE picks one RB
//! per slot according to its class's access probability vector, and the base
//! station observes one [`SlotEvent`] per RB.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the unit sum of an access probability vector.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Network load and slot width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub n_h: usize,
    pub n_l: usize,
    pub m: usize,
}

impl NetworkConfig {
    pub fn new(n_h: usize, n_l: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig(
                "a slot needs at least one resource block".into(),
            ));
        }
        Ok(Self { n_h, n_l, m })
    }

    /// Total number of contending UEs.
    pub fn n(&self) -> usize {
        self.n_h + self.n_l
    }

    pub fn with_load(&self, n_h: usize, n_l: usize) -> Self {
        Self { n_h, n_l, m: self.m }
    }
}

impl fmt::Display for NetworkConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n_h={}, n_l={}, M={})", self.n_h, self.n_l, self.m)
    }
}

/// Per-RB access probabilities for both priority classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessProbabilityPair {
    p_h: Vec<f64>,
    p_l: Vec<f64>,
}

impl AccessProbabilityPair {
    pub fn new(p_h: Vec<f64>, p_l: Vec<f64>) -> Result<Self> {
        if p_h.len() != p_l.len() {
            return Err(Error::DimensionMismatch {
                expected: p_h.len(),
                found: p_l.len(),
            });
        }
        if p_h.is_empty() {
            return Err(Error::InvalidProbabilities(
                "vectors must hold at least one entry".into(),
            ));
        }
        check_simplex("p_h", &p_h)?;
        check_simplex("p_l", &p_l)?;
        Ok(Self { p_h, p_l })
    }

    /// Both classes spread uniformly over `m` RBs.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig(
                "a slot needs at least one resource block".into(),
            ));
        }
        let v = vec![1.0 / m as f64; m];
        Ok(Self {
            p_h: v.clone(),
            p_l: v,
        })
    }

    pub fn p_h(&self) -> &[f64] {
        &self.p_h
    }

    pub fn p_l(&self) -> &[f64] {
        &self.p_l
    }

    pub fn m(&self) -> usize {
        self.p_h.len()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.p_h, self.p_l)
    }

    /// Same shift applied to both vectors: entry `i` of the result is entry
    /// `(i + shift) % m` of the input.
    pub fn rotated(&self, shift: usize) -> Self {
        Self {
            p_h: rotate_left(&self.p_h, shift),
            p_l: rotate_left(&self.p_l, shift),
        }
    }

    /// Applies `perm` to both vectors: entry `i` of the result is entry
    /// `perm[i]` of the input.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            p_h: perm.iter().map(|&j| self.p_h[j]).collect(),
            p_l: perm.iter().map(|&j| self.p_l[j]).collect(),
        }
    }

    pub(crate) fn from_parts_unchecked(p_h: Vec<f64>, p_l: Vec<f64>) -> Self {
        debug_assert_eq!(p_h.len(), p_l.len());
        Self { p_h, p_l }
    }

    pub fn ensure_m(&self, m: usize) -> Result<()> {
        if self.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: self.m(),
            });
        }
        Ok(())
    }
}

fn check_simplex(name: &str, v: &[f64]) -> Result<()> {
    if let Some(bad) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidProbabilities(format!(
            "{name} entry {bad} outside [0, 1]"
        )));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::InvalidProbabilities(format!(
            "{name} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

pub(crate) fn rotate_left<T: Clone>(v: &[T], shift: usize) -> Vec<T> {
    let m = v.len();
    (0..m).map(|i| v[(i + shift) % m].clone()).collect()
}

/// Shift amount of the lexicographically smallest joint rotation of
/// `(h, l)`, comparing `h` then `l`. Ties go to the smaller shift.
pub(crate) fn min_joint_rotation_by<T, F>(h: &[T], l: &[T], mut cmp: F) -> usize
where
    F: FnMut(&T, &T) -> Ordering,
{
    let m = h.len();
    let mut best = 0;
    for shift in 1..m {
        let rotated = (0..m)
            .map(|i| (i + shift) % m)
            .chain((0..m).map(|i| m + (i + shift) % m));
        let current = (0..m)
            .map(|i| (i + best) % m)
            .chain((0..m).map(|i| m + (i + best) % m));
        let at = |k: usize| if k < m { &h[k] } else { &l[k - m] };
        let ord = rotated
            .zip(current)
            .map(|(a, b)| cmp(at(a), at(b)))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal);
        if ord == Ordering::Less {
            best = shift;
        }
    }
    best
}

/// Representative of the joint-rotation orbit of `pair`: the rotation whose
/// concatenation `p_h ++ p_l` is lexicographically smallest.
pub fn canonical_rotation(pair: &AccessProbabilityPair) -> AccessProbabilityPair {
    let shift = min_joint_rotation_by(pair.p_h(), pair.p_l(), |a, b| a.total_cmp(b));
    pair.rotated(shift)
}

/// What the base station observes on one RB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SlotEvent {
    HighSuccess,
    LowSuccess,
    Empty,
    Collision,
}

impl SlotEvent {
    pub const ALL: [SlotEvent; 4] = [
        SlotEvent::HighSuccess,
        SlotEvent::LowSuccess,
        SlotEvent::Empty,
        SlotEvent::Collision,
    ];

    pub fn as_char(self) -> char {
        match self {
            SlotEvent::HighSuccess => 'h',
            SlotEvent::LowSuccess => 'l',
            SlotEvent::Empty => 'o',
            SlotEvent::Collision => 'x',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'h' => Some(SlotEvent::HighSuccess),
            'l' => Some(SlotEvent::LowSuccess),
            'o' => Some(SlotEvent::Empty),
            'x' => Some(SlotEvent::Collision),
            _ => None,
        }
    }

    /// Event on an RB chosen by `h` H-UEs and `l` L-UEs.
    pub fn from_counts(h: usize, l: usize) -> Self {
        match (h, l) {
            (0, 0) => SlotEvent::Empty,
            (1, 0) => SlotEvent::HighSuccess,
            (0, 1) => SlotEvent::LowSuccess,
            _ => SlotEvent::Collision,
        }
    }
}

/// One slot's sequence of per-RB events.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccessPattern {
    events: Vec<SlotEvent>,
}

impl AccessPattern {
    pub fn new(events: Vec<SlotEvent>) -> Self {
        Self { events }
    }

    pub fn events(&self) -> &[SlotEvent] {
        &self.events
    }

    pub fn m(&self) -> usize {
        self.events.len()
    }

    /// RB indices carrying `event`.
    pub fn positions(&self, event: SlotEvent) -> Vec<usize> {
        self.events
            .iter()
            .enumerate()
            .filter(|(_, e)| **e == event)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, event: SlotEvent) -> usize {
        self.events.iter().filter(|e| **e == event).count()
    }
}

impl fmt::Display for AccessPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            write!(f, "{}", e.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for AccessPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                SlotEvent::from_char(c).ok_or_else(|| Error::parse(0, format!("unknown slot event {c:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(AccessPattern::new)
    }
}

/// Per-RB UE counts of one slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OccupancyPair {
    c_h: Vec<usize>,
    c_l: Vec<usize>,
}

impl OccupancyPair {
    pub fn new(c_h: Vec<usize>, c_l: Vec<usize>) -> Result<Self> {
        if c_h.len() != c_l.len() {
            return Err(Error::DimensionMismatch {
                expected: c_h.len(),
                found: c_l.len(),
            });
        }
        Ok(Self { c_h, c_l })
    }

    /// Checks the counts against a load.
    pub fn validate(&self, cfg: &NetworkConfig) -> Result<()> {
        if self.c_h.len() != cfg.m {
            return Err(Error::DimensionMismatch {
                expected: cfg.m,
                found: self.c_h.len(),
            });
        }
        let (sh, sl) = (self.c_h.iter().sum::<usize>(), self.c_l.iter().sum::<usize>());
        if sh != cfg.n_h || sl != cfg.n_l {
            return Err(Error::InvalidConfig(format!(
                "occupancy sums ({sh}, {sl}) do not match load ({}, {})",
                cfg.n_h, cfg.n_l
            )));
        }
        Ok(())
    }

    pub fn c_h(&self) -> &[usize] {
        &self.c_h
    }

    pub fn c_l(&self) -> &[usize] {
        &self.c_l
    }
}

pub fn pattern_of_occupancy(occ: &OccupancyPair) -> AccessPattern {
    AccessPattern::new(
        occ.c_h
            .iter()
            .zip(&occ.c_l)
            .map(|(&h, &l)| SlotEvent::from_counts(h, l))
            .collect(),
    )
}

/// Successful H-UEs and L-UEs in a pattern.
pub fn count_successes(pattern: &AccessPattern) -> (usize, usize) {
    pattern.events.iter().fold((0, 0), |(h, l), e| match e {
        SlotEvent::HighSuccess => (h + 1, l),
        SlotEvent::LowSuccess => (h, l + 1),
        _ => (h, l),
    })
}

/// Expected successes per slot for each class.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThroughputPair {
    pub mu_h: f64,
    pub mu_l: f64,
}

impl ThroughputPair {
    pub fn new(mu_h: f64, mu_l: f64) -> Self {
        Self { mu_h, mu_l }
    }
}
