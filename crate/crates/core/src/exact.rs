//! Exact throughput evaluation.
//!
//! Two routes compute the same expectations:
//!
//! * [`throughput_closed_form`] sums per-RB success probabilities (linearity of
//!   expectation). It is polynomial in `m` and is the default everywhere.
//! * [`throughput_by_pattern_sum`] enumerates every observable access pattern,
//!   weighs its success count by [`pattern_probability`], and sums. It is
//!   exponential in `m` and exists as the literal pattern-level definition and
//!   as a cross-check.
//!
//! A pattern's probability is the total multinomial mass of the per-RB
//! occupancy pairs that produce it.

use crate::error::{Error, Result};
use crate::model::{
    count_successes, AccessPattern, AccessProbabilityPair, NetworkConfig, SlotEvent, ThroughputPair,
};

/// Default bound on the number of occupancy pairs the pattern route may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Expected successes per slot, `mu_h = sum_i n_h p_h[i] (1-p_h[i])^(n_h-1) (1-p_l[i])^n_l`
/// and symmetrically for `mu_l`.
pub fn throughput_closed_form(cfg: &NetworkConfig, pair: &AccessProbabilityPair) -> Result<ThroughputPair> {
    pair.ensure_m(cfg.m)?;
    Ok(ThroughputPair::new(
        class_throughput(cfg.n_h, pair.p_h(), cfg.n_l, pair.p_l()),
        class_throughput(cfg.n_l, pair.p_l(), cfg.n_h, pair.p_h()),
    ))
}

/// Expected successes of the class with `n` UEs using `p`, against `n_other`
/// UEs of the other class using `q`.
pub(crate) fn class_throughput(n: usize, p: &[f64], n_other: usize, q: &[f64]) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mut terms: Vec<f64> = p
        .iter()
        .zip(q)
        .map(|(&pi, &qi)| nf * pi * (1.0 - pi).powi(n as i32 - 1) * (1.0 - qi).powi(n_other as i32))
        .collect();
    // Summing in sorted order makes the result bit-identical under any joint
    // permutation of the RBs.
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Every access pattern a configuration can produce, in lexicographic order of
/// event tags (`h < l < o < x`).
#[derive(Debug, Clone)]
pub struct PatternSet {
    config: NetworkConfig,
    patterns: Vec<AccessPattern>,
}

impl PatternSet {
    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn patterns(&self) -> &[AccessPattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AccessPattern> {
        self.patterns.iter()
    }

    pub fn contains(&self, pattern: &AccessPattern) -> bool {
        self.patterns.binary_search(pattern).is_ok()
    }
}

impl<'a> IntoIterator for &'a PatternSet {
    type Item = &'a AccessPattern;
    type IntoIter = std::slice::Iter<'a, AccessPattern>;

    fn into_iter(self) -> Self::IntoIter {
        self.patterns.iter()
    }
}

/// Whether a pattern can be observed under the load of `cfg`.
///
/// The UEs not accounted for by singleton successes must fill every collision
/// RB with at least two UEs, and there can be no leftover UEs without a
/// collision to absorb them.
pub fn is_feasible_pattern(cfg: &NetworkConfig, pattern: &AccessPattern) -> bool {
    if pattern.m() != cfg.m {
        return false;
    }
    let h = pattern.count(SlotEvent::HighSuccess);
    let l = pattern.count(SlotEvent::LowSuccess);
    let x = pattern.count(SlotEvent::Collision);
    if h > cfg.n_h || l > cfg.n_l {
        return false;
    }
    let rest = cfg.n() - h - l;
    rest >= 2 * x && ((rest == 0) == (x == 0))
}

/// Backtracking enumeration of all feasible patterns.
pub fn enumerate_patterns(cfg: &NetworkConfig) -> PatternSet {
    fn walk(
        cfg: &NetworkConfig,
        prefix: &mut Vec<SlotEvent>,
        (h, l, x): (usize, usize, usize),
        out: &mut Vec<AccessPattern>,
    ) {
        // Prune: successes and minimum collision fill must fit in the load.
        if h > cfg.n_h || l > cfg.n_l || h + l + 2 * x > cfg.n() {
            return;
        }
        if prefix.len() == cfg.m {
            let rest = cfg.n() - h - l;
            if (rest == 0) == (x == 0) {
                out.push(AccessPattern::new(prefix.clone()));
            }
            return;
        }
        for event in SlotEvent::ALL {
            let counts = match event {
                SlotEvent::HighSuccess => (h + 1, l, x),
                SlotEvent::LowSuccess => (h, l + 1, x),
                SlotEvent::Empty => (h, l, x),
                SlotEvent::Collision => (h, l, x + 1),
            };
            prefix.push(event);
            walk(cfg, prefix, counts, out);
            prefix.pop();
        }
    }

    let mut patterns = Vec::new();
    walk(cfg, &mut Vec::with_capacity(cfg.m), (0, 0, 0), &mut patterns);
    PatternSet {
        config: *cfg,
        patterns,
    }
}

/// Probability that one slot produces `pattern`.
pub fn pattern_probability(
    cfg: &NetworkConfig,
    pair: &AccessProbabilityPair,
    pattern: &AccessPattern,
) -> Result<f64> {
    pair.ensure_m(cfg.m)?;
    if pattern.m() != cfg.m {
        return Err(Error::DimensionMismatch {
            expected: cfg.m,
            found: pattern.m(),
        });
    }
    if !is_feasible_pattern(cfg, pattern) {
        return Ok(0.0);
    }

    let mut c_h = vec![0usize; cfg.m];
    let mut c_l = vec![0usize; cfg.m];
    for (i, e) in pattern.events().iter().enumerate() {
        match e {
            SlotEvent::HighSuccess => c_h[i] = 1,
            SlotEvent::LowSuccess => c_l[i] = 1,
            _ => {}
        }
    }
    let collisions = pattern.positions(SlotEvent::Collision);
    let rest_h = cfg.n_h - pattern.count(SlotEvent::HighSuccess);
    let rest_l = cfg.n_l - pattern.count(SlotEvent::LowSuccess);

    let mut total = 0.0;
    fill_collisions(
        &collisions,
        0,
        rest_h,
        rest_l,
        &mut c_h,
        &mut c_l,
        &mut |c_h, c_l| {
            total += multinomial_pmf(cfg.n_h, c_h, pair.p_h()) * multinomial_pmf(cfg.n_l, c_l, pair.p_l());
        },
    );
    Ok(total)
}

/// Visits every way of placing the remaining UEs on the collision RBs with at
/// least two UEs per RB.
fn fill_collisions<F: FnMut(&[usize], &[usize])>(
    collisions: &[usize],
    k: usize,
    rest_h: usize,
    rest_l: usize,
    c_h: &mut [usize],
    c_l: &mut [usize],
    visit: &mut F,
) {
    if k == collisions.len() {
        if rest_h == 0 && rest_l == 0 {
            visit(c_h, c_l);
        }
        return;
    }
    let slots_after = collisions.len() - k - 1;
    let rb = collisions[k];
    for a in 0..=rest_h {
        for b in 0..=rest_l {
            if a + b < 2 || (rest_h - a) + (rest_l - b) < 2 * slots_after {
                continue;
            }
            c_h[rb] = a;
            c_l[rb] = b;
            fill_collisions(collisions, k + 1, rest_h - a, rest_l - b, c_h, c_l, visit);
        }
    }
    c_h[rb] = 0;
    c_l[rb] = 0;
}

/// `n! / prod(counts!) * prod(p^counts)`, with `0^0 = 1`.
pub fn multinomial_pmf(n: usize, counts: &[usize], p: &[f64]) -> f64 {
    let mut mass = multinomial_coefficient(n, counts);
    for (&c, &pi) in counts.iter().zip(p) {
        if c > 0 {
            if pi == 0.0 {
                return 0.0;
            }
            mass *= pi.powi(c as i32);
        }
    }
    mass
}

/// Multinomial coefficient; exact integer arithmetic up to `n = 20`, log-space
/// beyond.
pub fn multinomial_coefficient(n: usize, counts: &[usize]) -> f64 {
    debug_assert_eq!(counts.iter().sum::<usize>(), n);
    if n <= 20 {
        let num = factorial_u64(n);
        let den: u64 = counts.iter().map(|&c| factorial_u64(c)).product();
        (num / den) as f64
    } else {
        let ln = ln_factorial(n) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>();
        ln.exp().round()
    }
}

fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `C(n + k - 1, k - 1)`: the number of ways to spread `n` identical items over
/// `k` bins.
pub fn weak_compositions(n: usize, k: usize) -> u128 {
    if k == 0 {
        return u128::from(n == 0);
    }
    binomial(n + k - 1, k - 1)
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of distinct occupancy pairs for a configuration.
pub fn occupancy_pair_count(cfg: &NetworkConfig) -> u128 {
    weak_compositions(cfg.n_h, cfg.m).saturating_mul(weak_compositions(cfg.n_l, cfg.m))
}

/// `mu_h = sum_pi H_pi P(pi)` and `mu_l = sum_pi L_pi P(pi)` over the full
/// pattern set. Refuses configurations whose occupancy space exceeds `cap`.
pub fn throughput_by_pattern_sum(
    cfg: &NetworkConfig,
    pair: &AccessProbabilityPair,
    cap: u128,
) -> Result<ThroughputPair> {
    pair.ensure_m(cfg.m)?;
    let required = occupancy_pair_count(cfg);
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }
    let set = enumerate_patterns(cfg);
    let mut mu = ThroughputPair::default();
    for pattern in &set {
        let (h, l) = count_successes(pattern);
        if h == 0 && l == 0 {
            continue;
        }
        let p = pattern_probability(cfg, pair, pattern)?;
        mu.mu_h += h as f64 * p;
        mu.mu_l += l as f64 * p;
    }
    Ok(mu)
}

/// H-UEs spread uniformly over RBs `1..m-1`, all L-UEs on RB `m`.
pub fn scaling_allocation(m: usize) -> Result<AccessProbabilityPair> {
    if m < 2 {
        return Err(Error::ScalingUndefined(format!(
            "reference allocation needs at least 2 RBs, got {m}"
        )));
    }
    let mut p_h = vec![1.0 / (m - 1) as f64; m];
    p_h[m - 1] = 0.0;
    let mut p_l = vec![0.0; m];
    p_l[m - 1] = 1.0;
    Ok(AccessProbabilityPair::from_parts_unchecked(p_h, p_l))
}

/// Reward denominator: `mu_h` at the reference allocation,
/// `n_h (1 - 1/(m-1))^(n_h-1)`.
pub fn scaling_reference(cfg: &NetworkConfig) -> Result<f64> {
    if cfg.n_h == 0 {
        return Err(Error::ScalingUndefined("no H-UEs in the load".into()));
    }
    let pair = scaling_allocation(cfg.m)?;
    let mu_h = throughput_closed_form(cfg, &pair)?.mu_h;
    if mu_h <= 0.0 {
        // m = 2 with several H-UEs: every H-UE lands on the one shared RB.
        return Err(Error::ScalingUndefined(format!(
            "reference throughput is zero for {cfg}"
        )));
    }
    Ok(mu_h)
}
