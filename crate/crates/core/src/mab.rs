//! Cross-entropy multi-armed bandit over an [`ActionSpace`].
//!
//! Each batch draws `batch_size` actions from the sampling distribution
//! `p_as`, observes empirical throughputs over `t` simulated slots, turns
//! them into a penalized, scaled reward and updates the per-action running
//! mean `q`. At the end of the batch the elite records (highest post-update
//! `q`) define a new distribution that is blended into `p_as`.
//!
//! Pull `k` selects its action with a generator seeded from `(seed, k)` and
//! simulates with another seed derived from `(seed, k)`, so pulls inside a
//! batch run in parallel without changing results.

use std::io::{BufRead, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action_space::{Action, ActionSpace};
use crate::error::{Error, Result};
use crate::exact::{scaling_reference, throughput_closed_form};
use crate::model::NetworkConfig;
use crate::rng::derive_seed;
use crate::simulator::simulate_throughput;

/// How a pull's throughputs are observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardSource {
    /// Simulate `t` slots.
    Simulated,
    /// Use the exact throughputs, i.e. the `t -> infinity` limit.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MabConfig {
    pub gamma: f64,
    pub rho: f64,
    /// Slots simulated per pull.
    pub t: usize,
    pub runs: usize,
    pub batch_size: usize,
    pub elite_fraction: f64,
    pub alpha: f64,
    pub seed: u64,
    pub source: RewardSource,
}

impl MabConfig {
    /// Parameters used with discretized spaces.
    pub fn discretized(gamma: f64) -> Self {
        Self {
            gamma,
            rho: 0.0,
            t: 1000,
            runs: 15000,
            batch_size: 500,
            elite_fraction: 0.1,
            alpha: 0.2,
            seed: 0,
            source: RewardSource::Simulated,
        }
    }

    /// Parameters used with compact lookup-table spaces.
    pub fn compact(gamma: f64) -> Self {
        Self {
            gamma,
            rho: 0.1,
            t: 100,
            runs: 2000,
            batch_size: 200,
            elite_fraction: 0.1,
            alpha: 0.1,
            seed: 0,
            source: RewardSource::Simulated,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.gamma.is_nan() || self.gamma < 0.0 {
            return bad(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if self.rho.is_nan() || self.rho < 0.0 {
            return bad(format!("rho must be >= 0, got {}", self.rho));
        }
        if self.t == 0 && self.source == RewardSource::Simulated {
            return bad("t must be >= 1".into());
        }
        if self.batch_size == 0 || self.runs < self.batch_size {
            return bad(format!(
                "need runs >= batch_size >= 1, got runs={} batch_size={}",
                self.runs, self.batch_size
            ));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return bad(format!(
                "elite fraction must lie in (0, 1], got {}",
                self.elite_fraction
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if self.elite_size() == 0 {
            return bad("elite batch is empty; raise elite_fraction or batch_size".into());
        }
        Ok(())
    }

    /// `int(runs / batch_size)`; leftover pulls are not played.
    pub fn batches(&self) -> usize {
        self.runs / self.batch_size
    }

    /// `int(elite_fraction * batch_size)`.
    pub fn elite_size(&self) -> usize {
        (self.elite_fraction * self.batch_size as f64 + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MabState {
    pub q: Vec<f64>,
    pub v: Vec<u64>,
    pub p_as: Vec<f64>,
}

impl MabState {
    pub fn new(size: usize) -> Self {
        Self {
            q: vec![0.0; size],
            v: vec![0; size],
            p_as: vec![1.0 / size as f64; size],
        }
    }

    /// Index of the largest `q`; ties go to the smallest index.
    pub fn best_index(&self) -> usize {
        argmax(&self.q)
    }
}

fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in q.iter().enumerate() {
        if x > q[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PullRecord {
    pub action_index: usize,
    pub q_snapshot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PullOutcome {
    pub pull: usize,
    pub action_index: usize,
    pub mu_h_t: f64,
    pub mu_l_t: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MabResult {
    pub best_index: usize,
    pub best_action: Action,
    pub trace: Vec<PullOutcome>,
    pub state: MabState,
    pub batch_size: usize,
    /// Load in force from each listed pull onwards.
    pub schedule: Vec<(usize, NetworkConfig)>,
}

impl MabResult {
    /// Load in force at pull `pull`.
    pub fn cfg_at(&self, pull: usize) -> NetworkConfig {
        cfg_at(&self.schedule, pull)
    }
}

fn cfg_at(schedule: &[(usize, NetworkConfig)], pull: usize) -> NetworkConfig {
    schedule
        .iter()
        .rev()
        .find(|(start, _)| *start <= pull)
        .map(|(_, c)| *c)
        .unwrap_or(schedule[0].1)
}

/// Penalized, scaled reward.
pub fn reward(mu_h_t: f64, mu_l_t: f64, gamma: f64, rho: f64, scale: f64) -> f64 {
    if mu_l_t >= gamma {
        mu_h_t / scale
    } else {
        rho * mu_h_t / scale
    }
}

/// Counts one more pull of `action` and folds `r` into its running mean.
pub fn q_update(state: &mut MabState, action: usize, r: f64) {
    state.v[action] += 1;
    state.q[action] += (r - state.q[action]) / state.v[action] as f64;
}

/// Empirical action frequencies among the `elite_size` records with the
/// highest `q_snapshot`. Equal snapshots keep record order.
pub fn ce_update(space_size: usize, elite_size: usize, records: &[PullRecord]) -> Vec<f64> {
    let mut order: Vec<&PullRecord> = records.iter().collect();
    order.sort_by(|a, b| b.q_snapshot.total_cmp(&a.q_snapshot));
    let elite = elite_size.min(order.len());
    let mut p = vec![0.0; space_size];
    for r in &order[..elite] {
        p[r.action_index] += 1.0 / elite as f64;
    }
    p
}

/// `(1 - alpha) p + alpha p_tilde`.
pub fn smooth(p: &[f64], p_tilde: &[f64], alpha: f64) -> Vec<f64> {
    p.iter()
        .zip(p_tilde)
        .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
        .collect()
}

/// Stationary run under load `cfg`.
pub fn run(space: &ActionSpace, cfg: &NetworkConfig, mcfg: &MabConfig) -> Result<MabResult> {
    run_nonstationary(space, &[(0, *cfg)], mcfg)
}

/// Like [`run`], with the load switching at the scheduled pulls. The bandit
/// state carries over each switch; only the reward scale is recomputed.
pub fn run_nonstationary(
    space: &ActionSpace,
    schedule: &[(usize, NetworkConfig)],
    mcfg: &MabConfig,
) -> Result<MabResult> {
    mcfg.validate()?;
    if space.is_empty() {
        return Err(Error::InvalidConfig("action space is empty".into()));
    }
    check_schedule(schedule, space.m())?;
    let scales: Vec<f64> = schedule.iter().map(|(_, c)| reward_scale(c)).collect();

    let n = space.len();
    let mut state = MabState::new(n);
    let mut trace = Vec::with_capacity(mcfg.batches() * mcfg.batch_size);
    let select_seed = derive_seed(mcfg.seed, 0);
    let sim_seed = derive_seed(mcfg.seed, 1);

    for batch in 0..mcfg.batches() {
        let sampler = WeightedIndex::new(&state.p_as)
            .map_err(|e| Error::InvalidProbabilities(format!("sampling distribution: {e}")))?;
        let first = batch * mcfg.batch_size;
        let pull = |k: usize| -> Result<PullOutcome> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(select_seed, k as u64));
            let a = sampler.sample(&mut rng);
            let segment = schedule.iter().rposition(|(s, _)| *s <= k).unwrap_or(0);
            let cfg = schedule[segment].1;
            let pair = space.action(a).pair();
            let (mu_h_t, mu_l_t) = match mcfg.source {
                RewardSource::Simulated => {
                    let e = simulate_throughput(&cfg, pair, mcfg.t, derive_seed(sim_seed, k as u64))?;
                    (e.mu_h_t, e.mu_l_t)
                }
                RewardSource::Exact => {
                    let mu = throughput_closed_form(&cfg, pair)?;
                    (mu.mu_h, mu.mu_l)
                }
            };
            Ok(PullOutcome {
                pull: k,
                action_index: a,
                mu_h_t,
                mu_l_t,
                reward: reward(mu_h_t, mu_l_t, mcfg.gamma, mcfg.rho, scales[segment]),
            })
        };
        let outcomes: Vec<PullOutcome> = (first..first + mcfg.batch_size)
            .into_par_iter()
            .map(pull)
            .collect::<Result<_>>()?;

        let mut records = Vec::with_capacity(outcomes.len());
        for o in &outcomes {
            q_update(&mut state, o.action_index, o.reward);
            records.push(PullRecord {
                action_index: o.action_index,
                q_snapshot: state.q[o.action_index],
            });
        }
        let p_tilde = ce_update(n, mcfg.elite_size(), &records);
        state.p_as = smooth(&state.p_as, &p_tilde, mcfg.alpha);
        trace.extend(outcomes);
    }

    let best_index = state.best_index();
    Ok(MabResult {
        best_index,
        best_action: space.action(best_index).clone(),
        trace,
        state,
        batch_size: mcfg.batch_size,
        schedule: schedule.to_vec(),
    })
}

fn check_schedule(schedule: &[(usize, NetworkConfig)], m: usize) -> Result<()> {
    match schedule.first() {
        Some((0, _)) => {}
        _ => return Err(Error::InvalidConfig("schedule must start at pull 0".into())),
    }
    if schedule.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidConfig(
            "schedule pulls must be strictly increasing".into(),
        ));
    }
    for (_, c) in schedule {
        if c.m != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: c.m,
            });
        }
    }
    Ok(())
}

fn reward_scale(cfg: &NetworkConfig) -> f64 {
    match scaling_reference(cfg) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("rewards left unscaled for {cfg}: {e}");
            1.0
        }
    }
}

/// Load key of the best action's lookup-table cell.
pub fn estimate_load(space: &ActionSpace, result: &MabResult) -> Result<(usize, usize)> {
    let e = space.compact_entry(result.best_index)?;
    Ok((e.n_h, e.n_l))
}

/// `(|n_h_hat - n_h| + |n_l_hat - n_l|) / 2`.
pub fn load_error(estimate: (usize, usize), cfg: &NetworkConfig) -> f64 {
    (estimate.0.abs_diff(cfg.n_h) + estimate.1.abs_diff(cfg.n_l)) as f64 / 2.0
}

/// Load-estimation error after every pull, replaying the running means from
/// the trace and taking the argmax after each update.
pub fn mae_trace(space: &ActionSpace, result: &MabResult) -> Result<Vec<(usize, f64)>> {
    let entries = space.compact_entries()?;
    let n = space.len();
    let mut q = vec![0.0; n];
    let mut v = vec![0u64; n];
    let mut best = 0;
    let mut out = Vec::with_capacity(result.trace.len());
    for o in &result.trace {
        let a = o.action_index;
        v[a] += 1;
        let old = q[a];
        q[a] += (o.reward - q[a]) / v[a] as f64;
        if a == best && q[a] < old {
            best = argmax(&q);
        } else if q[a] > q[best] || (q[a] == q[best] && a < best) {
            best = a;
        }
        let e = &entries[best];
        out.push((o.pull, load_error((e.n_h, e.n_l), &result.cfg_at(o.pull))));
    }
    Ok(out)
}

/// Running means of `mu_h_t` and `mu_l_t`, restarted at each load switch.
pub fn running_means(result: &MabResult) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::with_capacity(result.trace.len());
    let (mut h, mut l, mut count) = (0.0, 0.0, 0usize);
    for o in &result.trace {
        if result.schedule.iter().any(|(s, _)| *s == o.pull) {
            (h, l, count) = (0.0, 0.0, 0);
        }
        count += 1;
        h += (o.mu_h_t - h) / count as f64;
        l += (o.mu_l_t - l) / count as f64;
        out.push((o.pull, h, l));
    }
    out
}

/// Mean `(mu_h_t, mu_l_t)` over the last `window` pulls.
pub fn trailing_means(result: &MabResult, window: usize) -> (f64, f64) {
    let tail = &result.trace[result.trace.len().saturating_sub(window)..];
    let k = tail.len().max(1) as f64;
    (
        tail.iter().map(|o| o.mu_h_t).sum::<f64>() / k,
        tail.iter().map(|o| o.mu_l_t).sum::<f64>() / k,
    )
}

pub const TRACE_HEADER: &str = "pull,action_index,mu_h_T,mu_l_T,reward";

/// Per-pull CSV with a `# batch k` line before each batch.
pub fn write_trace_csv<W: Write>(result: &MabResult, mut out: W) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for o in &result.trace {
        if o.pull % result.batch_size == 0 {
            writeln!(out, "# batch {}", o.pull / result.batch_size)?;
        }
        writeln!(
            out,
            "{},{},{},{},{}",
            o.pull, o.action_index, o.mu_h_t, o.mu_l_t, o.reward
        )?;
    }
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(input: R) -> Result<Vec<PullOutcome>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if i == 0 {
            if line != TRACE_HEADER {
                return Err(Error::parse(1, format!("unexpected header {line:?}")));
            }
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::parse(i + 1, format!("expected 5 fields, got {}", f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| Error::parse(i + 1, e.to_string()));
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::parse(i + 1, e.to_string()));
        out.push(PullOutcome {
            pull: int(f[0])?,
            action_index: int(f[1])?,
            mu_h_t: num(f[2])?,
            mu_l_t: num(f[3])?,
            reward: num(f[4])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AccessProbabilityPair;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn reward_examples() {
        assert!((reward(1.0, 0.5, 0.4, 0.1, 1.6875) - 0.592_592_592_592_592_6).abs() < 1e-12);
        assert_eq!(reward(1.0, 0.3, 0.4, 0.0, 1.0), 0.0);
        assert!(close(reward(1.2, 0.3, 0.4, 0.1, 1.0), 0.12));
    }

    #[test]
    fn q_update_examples() {
        let mut s = MabState::new(1);
        q_update(&mut s, 0, 0.5);
        assert_eq!((s.q[0], s.v[0]), (0.5, 1));
        q_update(&mut s, 0, 1.0);
        assert_eq!((s.q[0], s.v[0]), (0.75, 2));
    }

    #[test]
    fn ce_update_examples() {
        let rec = |v: &[(usize, f64)]| {
            v.iter()
                .map(|&(action_index, q_snapshot)| PullRecord {
                    action_index,
                    q_snapshot,
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(
            ce_update(3, 2, &rec(&[(0, 0.9), (1, 0.2), (0, 0.8)])),
            vec![1.0, 0.0, 0.0]
        );
        assert_eq!(
            ce_update(3, 2, &rec(&[(2, 0.9), (1, 0.8), (0, 0.1)])),
            vec![0.0, 0.5, 0.5]
        );
        assert_eq!(ce_update(2, 1, &rec(&[(1, 0.7)])), vec![0.0, 1.0]);
        // Equal snapshots: the earlier record wins.
        assert_eq!(ce_update(3, 1, &rec(&[(2, 0.5), (0, 0.5)])), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn smooth_examples() {
        let p = [1.0 / 3.0; 3];
        let s = smooth(&p, &[1.0, 0.0, 0.0], 0.2);
        assert!((s[0] - 0.466_666_666_666_666_7).abs() < 1e-12);
        assert!((s[1] - 0.266_666_666_666_666_7).abs() < 1e-12);
        assert_eq!(smooth(&p, &[1.0, 0.0, 0.0], 1.0), vec![1.0, 0.0, 0.0]);
        assert_eq!(smooth(&p, &[1.0, 0.0, 0.0], 0.0), p.to_vec());
    }

    #[test]
    fn config_derived_sizes() {
        let c = MabConfig::discretized(0.4);
        assert_eq!((c.batches(), c.elite_size()), (30, 50));
        let c = MabConfig::compact(0.4);
        assert_eq!((c.batches(), c.elite_size()), (10, 20));
        let c = MabConfig {
            runs: 1250,
            ..MabConfig::discretized(0.0)
        };
        assert_eq!(c.batches(), 2);
        assert!(MabConfig {
            elite_fraction: 0.001,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(MabConfig { runs: 10, ..c }.validate().is_err());
    }

    fn small_cfg() -> MabConfig {
        MabConfig {
            t: 50,
            runs: 200,
            batch_size: 20,
            elite_fraction: 0.2,
            ..MabConfig::discretized(0.0)
        }
    }

    #[test]
    fn single_action_space() {
        let cfg = NetworkConfig::new(2, 2, 3).unwrap();
        let space = ActionSpace::from_actions(vec![Action::from_pair(
            AccessProbabilityPair::uniform(3).unwrap(),
        )])
        .unwrap();
        let r = run(&space, &cfg, &small_cfg()).unwrap();
        assert_eq!(r.best_index, 0);
        let mean = r.trace.iter().map(|o| o.reward).sum::<f64>() / r.trace.len() as f64;
        assert!((r.state.q[0] - mean).abs() < 1e-12);
        assert_eq!(r.state.v[0], 200);
    }

    fn three_actions() -> ActionSpace {
        let p = |h: [f64; 2], l: [f64; 2]| {
            Action::from_pair(AccessProbabilityPair::new(h.to_vec(), l.to_vec()).unwrap())
        };
        ActionSpace::from_actions(vec![
            p([0.5, 0.5], [0.5, 0.5]),
            p([1.0, 0.0], [1.0, 0.0]),
            p([1.0, 0.0], [0.0, 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn concentrates_on_best_action() {
        let cfg = NetworkConfig::new(1, 1, 2).unwrap();
        let space = three_actions();
        let mut hits = 0;
        for seed in 0..10 {
            let mcfg = MabConfig {
                runs: 20 * 30,
                batch_size: 30,
                elite_fraction: 0.1,
                alpha: 0.2,
                seed,
                source: RewardSource::Exact,
                ..MabConfig::discretized(0.0)
            };
            let r = run(&space, &cfg, &mcfg).unwrap();
            if r.state.p_as[2] >= 0.9 && r.best_index == 2 {
                hits += 1;
            }
        }
        assert!(hits >= 9, "{hits}/10");
    }

    #[test]
    fn deterministic_and_consistent() {
        let cfg = NetworkConfig::new(1, 1, 2).unwrap();
        let space = three_actions();
        let mcfg = MabConfig {
            seed: 5,
            ..small_cfg()
        };
        let a = run(&space, &cfg, &mcfg).unwrap();
        let b = run(&space, &cfg, &mcfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.state, b.state);
        for i in 0..space.len() {
            let rs: Vec<f64> = a
                .trace
                .iter()
                .filter(|o| o.action_index == i)
                .map(|o| o.reward)
                .collect();
            assert_eq!(rs.len() as u64, a.state.v[i]);
            if !rs.is_empty() {
                assert!((a.state.q[i] - rs.iter().sum::<f64>() / rs.len() as f64).abs() < 1e-12);
            }
        }
        assert!((a.state.p_as.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn penalty_zeroes_violators() {
        // Action 1 stacks both classes on one RB, so no L-UE ever succeeds.
        let cfg = NetworkConfig::new(1, 1, 2).unwrap();
        let mcfg = MabConfig {
            gamma: 0.5,
            seed: 2,
            ..small_cfg()
        };
        let r = run(&three_actions(), &cfg, &mcfg).unwrap();
        assert!(r.state.v[1] > 0);
        assert_eq!(r.state.q[1], 0.0);
    }

    #[test]
    fn single_entry_schedule_is_stationary() {
        let cfg = NetworkConfig::new(1, 1, 2).unwrap();
        let mcfg = small_cfg();
        let a = run(&three_actions(), &cfg, &mcfg).unwrap();
        let b = run_nonstationary(&three_actions(), &[(0, cfg)], &mcfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert!(run_nonstationary(&three_actions(), &[(5, cfg)], &mcfg).is_err());
    }

    #[test]
    fn trace_csv_round_trip() {
        let cfg = NetworkConfig::new(1, 1, 2).unwrap();
        let r = run(&three_actions(), &cfg, &small_cfg()).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("pull,action_index,mu_h_T,mu_l_T,reward\n# batch 0\n0,"));
        assert_eq!(text.matches("# batch").count(), 10);
        assert_eq!(read_trace_csv(buf.as_slice()).unwrap(), r.trace);
    }

    #[test]
    fn running_means_restart_at_switch() {
        let c1 = NetworkConfig::new(1, 1, 2).unwrap();
        let c2 = NetworkConfig::new(2, 1, 2).unwrap();
        let r = run_nonstationary(&three_actions(), &[(0, c1), (100, c2)], &small_cfg()).unwrap();
        let rm = running_means(&r);
        assert_eq!(rm[100].1, r.trace[100].mu_h_t);
        assert_eq!(r.cfg_at(99), c1);
        assert_eq!(r.cfg_at(100), c2);
    }

    proptest! {
        #[test]
        fn smoothing_keeps_a_distribution(
            raw in prop::collection::vec(0.01f64..1.0, 2..20),
            picks in prop::collection::vec((0usize..64, 0.0f64..1.0), 1..40),
            alpha in 0.01f64..=1.0,
            elite in 1usize..10,
        ) {
            let n = raw.len();
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let records: Vec<PullRecord> = picks
                .iter()
                .map(|&(a, q)| PullRecord { action_index: a % n, q_snapshot: q })
                .collect();
            let pt = ce_update(n, elite.min(records.len()), &records);
            prop_assert!((pt.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let s = smooth(&p, &pt, alpha);
            prop_assert!(s.iter().all(|x| *x >= 0.0));
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn q_is_running_mean(rewards in prop::collection::vec(0.0f64..2.0, 1..50)) {
            let mut s = MabState::new(1);
            for r in &rewards {
                q_update(&mut s, 0, *r);
            }
            let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
            prop_assert!((s.q[0] - mean).abs() < 1e-12);
        }
    }
}
