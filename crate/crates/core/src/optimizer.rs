//! Exact-optimal access probabilities.
//!
//! Maximizes `mu_h` subject to `mu_l >= gamma` with both vectors on the
//! probability simplex. The problem is smooth, has `2m` variables and many
//! symmetric local optima, so it is solved by multistart local search:
//!
//! * the simplex constraints are enforced exactly by Euclidean projection;
//! * the throughput floor is handled with an augmented Lagrangian whose
//!   subproblems are solved by projected gradient descent with Armijo
//!   backtracking;
//! * gradients are analytic (see [`throughput_gradient`]).

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{class_throughput, throughput_closed_form};
use crate::model::{AccessProbabilityPair, NetworkConfig, ThroughputPair};

/// Slack on `mu_l >= gamma` for a solution to count as feasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptProblem {
    pub cfg: NetworkConfig,
    pub gamma: f64,
}

impl OptProblem {
    pub fn new(cfg: NetworkConfig, gamma: f64) -> Result<Self> {
        if gamma.is_nan() || gamma < 0.0 {
            return Err(Error::InvalidConfig(format!("gamma must be >= 0, got {gamma}")));
        }
        let cap = cfg.n_l.min(cfg.m) as f64;
        if gamma > cap {
            return Err(Error::InvalidConfig(format!(
                "gamma {gamma} exceeds min(n_l, M) = {cap}; no allocation can reach it"
            )));
        }
        Ok(Self { cfg, gamma })
    }

    /// Skips the reachability check; the solver then reports the least
    /// violating allocation.
    pub(crate) fn unchecked(cfg: NetworkConfig, gamma: f64) -> Self {
        Self { cfg, gamma }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Total number of starting points, including the structural and uniform
    /// allocations; the rest are Dirichlet(1, ..., 1) draws.
    pub starts: usize,
    pub seed: u64,
    /// Projected-gradient iterations per augmented-Lagrangian subproblem.
    pub max_inner_iterations: usize,
    pub max_outer_iterations: usize,
    pub objective_tolerance: f64,
    pub constraint_tolerance: f64,
    pub parallel: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            starts: 20,
            seed: 0x5eed,
            max_inner_iterations: 500,
            max_outer_iterations: 40,
            objective_tolerance: 1e-9,
            constraint_tolerance: 1e-8,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Structural,
    Uniform,
    Dirichlet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartReport {
    pub kind: StartKind,
    pub objective: f64,
    pub mu_l: f64,
    pub feasible: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptResult {
    pub pair: AccessProbabilityPair,
    pub mu: ThroughputPair,
    pub feasible: bool,
    pub starts: Vec<StartReport>,
}

impl OptResult {
    pub fn iterations(&self) -> usize {
        self.starts.iter().map(|s| s.iterations).sum()
    }
}

/// Best feasible local optimum over all starts, reported in
/// [`canonical_permutation`] form.
pub fn solve(problem: &OptProblem, options: &SolverOptions) -> Result<OptResult> {
    let result = solve_relaxed(problem, options)?;
    if !result.feasible {
        return Err(Error::Infeasible {
            gamma: problem.gamma,
            best_mu_l: result.mu.mu_l,
        });
    }
    Ok(result)
}

/// Like [`solve`], but returns the least violating allocation (flagged
/// infeasible) instead of an error when no start reaches the floor.
pub fn solve_relaxed(problem: &OptProblem, options: &SolverOptions) -> Result<OptResult> {
    let cfg = problem.cfg;
    let starts = starting_points(&cfg, options);

    let run = |(kind, x0): &(StartKind, AccessProbabilityPair)| {
        let (pair, iterations) = local_search(problem, x0.clone(), options);
        let pair = canonical_permutation(&pair);
        let mu = throughput_closed_form(&cfg, &pair).expect("dimensions checked");
        (*kind, pair, mu, iterations)
    };
    let outcomes: Vec<_> = if options.parallel {
        starts.par_iter().map(run).collect()
    } else {
        starts.iter().map(run).collect()
    };

    let feasible = |mu: &ThroughputPair| mu.mu_l >= problem.gamma - FEASIBILITY_TOLERANCE;
    let reports = outcomes
        .iter()
        .map(|(kind, _, mu, iterations)| StartReport {
            kind: *kind,
            objective: mu.mu_h,
            mu_l: mu.mu_l,
            feasible: feasible(mu),
            iterations: *iterations,
        })
        .collect();

    let best = outcomes
        .iter()
        .min_by(|a, b| rank(feasible(&a.2), &a.2, &a.1, feasible(&b.2), &b.2, &b.1))
        .ok_or_else(|| Error::InvalidConfig("solver needs at least one start".into()))?;

    Ok(OptResult {
        pair: best.1.clone(),
        mu: best.2,
        feasible: feasible(&best.2),
        starts: reports,
    })
}

/// Ordering for the best-of reduction: feasible first, then higher `mu_h`
/// (least violation when infeasible), then lexicographic pair.
fn rank(
    fa: bool,
    ma: &ThroughputPair,
    pa: &AccessProbabilityPair,
    fb: bool,
    mb: &ThroughputPair,
    pb: &AccessProbabilityPair,
) -> Ordering {
    fb.cmp(&fa)
        .then_with(|| {
            if fa {
                mb.mu_h.total_cmp(&ma.mu_h)
            } else {
                mb.mu_l.total_cmp(&ma.mu_l).then(mb.mu_h.total_cmp(&ma.mu_h))
            }
        })
        .then_with(|| lexicographic(pa, pb))
}

fn lexicographic(a: &AccessProbabilityPair, b: &AccessProbabilityPair) -> Ordering {
    a.p_h()
        .iter()
        .chain(a.p_l())
        .zip(b.p_h().iter().chain(b.p_l()))
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn starting_points(cfg: &NetworkConfig, options: &SolverOptions) -> Vec<(StartKind, AccessProbabilityPair)> {
    let mut starts = Vec::with_capacity(options.starts);
    if let Ok(p) = structural_unconstrained(cfg) {
        starts.push((StartKind::Structural, p));
    }
    starts.push((
        StartKind::Uniform,
        AccessProbabilityPair::uniform(cfg.m).expect("m >= 1"),
    ));
    starts.truncate(options.starts.max(1));
    let mut stream = 0u64;
    while starts.len() < options.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        rng.set_stream(stream);
        stream += 1;
        let mut draw = || -> Vec<f64> {
            let e: Vec<f64> = (0..cfg.m).map(|_| Exp1.sample(&mut rng)).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|x| x / s).collect()
        };
        let p_h = draw();
        let p_l = draw();
        starts.push((
            StartKind::Dirichlet,
            AccessProbabilityPair::from_parts_unchecked(p_h, p_l),
        ));
    }
    starts
}

/// Augmented-Lagrangian local search from `x0`. Returns the final point and
/// the number of projected-gradient iterations spent.
fn local_search(
    problem: &OptProblem,
    x0: AccessProbabilityPair,
    options: &SolverOptions,
) -> (AccessProbabilityPair, usize) {
    let cfg = &problem.cfg;
    let gamma = problem.gamma;
    let (mut h, mut l) = x0.into_parts();
    let mut multiplier = 0.0f64;
    let mut penalty = 10.0f64;
    let mut prev_violation = f64::INFINITY;
    let mut prev_objective = f64::NEG_INFINITY;
    let mut iterations = 0;
    let mut step = 0.1;

    for _ in 0..options.max_outer_iterations {
        let merit = |h: &[f64], l: &[f64]| -> f64 {
            let mu_h = class_throughput(cfg.n_h, h, cfg.n_l, l);
            let mu_l = class_throughput(cfg.n_l, l, cfg.n_h, h);
            let shifted = (multiplier + penalty * (gamma - mu_l)).max(0.0);
            -mu_h + (shifted * shifted - multiplier * multiplier) / (2.0 * penalty)
        };

        let mut value = merit(&h, &l);
        for _ in 0..options.max_inner_iterations {
            iterations += 1;
            let grad = throughput_gradient(cfg, &h, &l);
            let mu_l = class_throughput(cfg.n_l, &l, cfg.n_h, &h);
            let weight = (multiplier + penalty * (gamma - mu_l)).max(0.0);
            let g_h: Vec<f64> = grad
                .mu_h
                .0
                .iter()
                .zip(&grad.mu_l.0)
                .map(|(a, b)| -a - weight * b)
                .collect();
            let g_l: Vec<f64> = grad
                .mu_h
                .1
                .iter()
                .zip(&grad.mu_l.1)
                .map(|(a, b)| -a - weight * b)
                .collect();

            // Armijo backtracking along the projection arc.
            let mut accepted = None;
            while step > 1e-14 {
                let nh =
                    project_to_simplex(&h.iter().zip(&g_h).map(|(x, g)| x - step * g).collect::<Vec<_>>());
                let nl =
                    project_to_simplex(&l.iter().zip(&g_l).map(|(x, g)| x - step * g).collect::<Vec<_>>());
                let moved: f64 = nh
                    .iter()
                    .zip(&h)
                    .chain(nl.iter().zip(&l))
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                let next = merit(&nh, &nl);
                if next <= value - 1e-4 * moved / step {
                    accepted = Some((nh, nl, next, moved));
                    break;
                }
                step *= 0.5;
            }
            let Some((nh, nl, next, moved)) = accepted else {
                break;
            };
            let change = value - next;
            h = nh;
            l = nl;
            value = next;
            step = (step * 2.0).min(1e3);
            if moved.sqrt() < 1e-12 || (change < options.objective_tolerance * 1e-3 && moved.sqrt() < 1e-9) {
                break;
            }
        }

        let mu = ThroughputPair::new(
            class_throughput(cfg.n_h, &h, cfg.n_l, &l),
            class_throughput(cfg.n_l, &l, cfg.n_h, &h),
        );
        let violation = (gamma - mu.mu_l).max(0.0);
        multiplier = (multiplier + penalty * (gamma - mu.mu_l)).max(0.0);
        if violation <= options.constraint_tolerance
            && (mu.mu_h - prev_objective).abs() < options.objective_tolerance
        {
            break;
        }
        if violation > 0.25 * prev_violation {
            penalty = (penalty * 10.0).min(1e8);
        }
        prev_violation = violation;
        prev_objective = mu.mu_h;
    }
    (AccessProbabilityPair::from_parts_unchecked(h, l), iterations)
}

/// Partial derivatives of `mu_h` and `mu_l`, each as `(d/dp_h, d/dp_l)`.
#[derive(Debug, Clone)]
pub struct ThroughputGradient {
    pub mu_h: (Vec<f64>, Vec<f64>),
    pub mu_l: (Vec<f64>, Vec<f64>),
}

pub fn throughput_gradient(cfg: &NetworkConfig, p_h: &[f64], p_l: &[f64]) -> ThroughputGradient {
    let (h_own, h_other) = class_gradient(cfg.n_h, p_h, cfg.n_l, p_l);
    let (l_own, l_other) = class_gradient(cfg.n_l, p_l, cfg.n_h, p_h);
    ThroughputGradient {
        mu_h: (h_own, h_other),
        mu_l: (l_other, l_own),
    }
}

/// Gradient of `sum_i n p_i (1-p_i)^(n-1) (1-q_i)^k` with respect to `p` and `q`.
fn class_gradient(n: usize, p: &[f64], k: usize, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (vec![0.0; p.len()], vec![0.0; p.len()]);
    }
    let nf = n as f64;
    let kf = k as f64;
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            let blocked = (1.0 - qi).powi(k as i32);
            let own_tail = (1.0 - pi).powi(n as i32 - 1);
            let slope = if n >= 2 {
                own_tail - (nf - 1.0) * pi * (1.0 - pi).powi(n as i32 - 2)
            } else {
                1.0
            };
            let d_p = nf * blocked * slope;
            let d_q = if k == 0 {
                0.0
            } else {
                -nf * pi * own_tail * kf * (1.0 - qi).powi(k as i32 - 1)
            };
            (d_p, d_q)
        })
        .unzip()
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    // Absorb rounding so the result sums to one to machine precision.
    let s: f64 = out.iter().sum();
    if s > 0.0 {
        out.iter_mut().for_each(|x| *x /= s);
    }
    out
}

/// Unconstrained optimum pattern: H-UEs spread over RBs `1..m-1` with RB `m`
/// reserved for L-UEs. When `n_h > m - 1` each of the first `m - 1` RBs gets
/// `1/n_h` so that on average `m - 1` H-UEs contend, and the remainder goes to
/// RB `m` as a soft barring slot.
pub fn structural_unconstrained(cfg: &NetworkConfig) -> Result<AccessProbabilityPair> {
    let m = cfg.m;
    if m < 2 {
        return Err(Error::InvalidConfig(format!(
            "structural allocation needs at least 2 RBs, got {m}"
        )));
    }
    let mut p_h = vec![0.0; m];
    if cfg.n_h < m {
        p_h[..m - 1].fill(1.0 / (m - 1) as f64);
    } else {
        let share = 1.0 / cfg.n_h as f64;
        p_h[..m - 1].fill(share);
        p_h[m - 1] = 1.0 - share * (m - 1) as f64;
    }
    let mut p_l = vec![0.0; m];
    p_l[m - 1] = 1.0;
    Ok(AccessProbabilityPair::from_parts_unchecked(p_h, p_l))
}

/// Joint permutation sorting RBs by `(p_h, p_l)` ascending.
pub fn canonical_permutation(pair: &AccessProbabilityPair) -> AccessProbabilityPair {
    let mut order: Vec<usize> = (0..pair.m()).collect();
    order.sort_by(|&a, &b| {
        pair.p_h()[a]
            .total_cmp(&pair.p_h()[b])
            .then(pair.p_l()[a].total_cmp(&pair.p_l()[b]))
    });
    pair.permuted(&order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_h: usize, n_l: usize, m: usize) -> NetworkConfig {
        NetworkConfig::new(n_h, n_l, m).unwrap()
    }

    fn pair(h: &[f64], l: &[f64]) -> AccessProbabilityPair {
        AccessProbabilityPair::new(h.to_vec(), l.to_vec()).unwrap()
    }

    #[test]
    fn structural_examples() {
        let p = structural_unconstrained(&cfg(4, 5, 5)).unwrap();
        assert_eq!(p.p_h(), &[0.25, 0.25, 0.25, 0.25, 0.0]);
        assert_eq!(p.p_l(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
        let p = structural_unconstrained(&cfg(4, 5, 4)).unwrap();
        assert_eq!(p.p_h(), &[0.25; 4]);
        let p = structural_unconstrained(&cfg(1, 1, 2)).unwrap();
        assert_eq!((p.p_h(), p.p_l()), (&[1.0, 0.0][..], &[0.0, 1.0][..]));
        assert!(structural_unconstrained(&cfg(1, 1, 1)).is_err());
    }

    #[test]
    fn canonical_permutation_examples() {
        let c = canonical_permutation(&pair(&[0.5, 0.25, 0.25], &[1.0, 0.0, 0.0]));
        assert_eq!(c.p_h(), &[0.25, 0.25, 0.5]);
        assert_eq!(c.p_l(), &[0.0, 0.0, 1.0]);
        let u = AccessProbabilityPair::uniform(4).unwrap();
        assert_eq!(canonical_permutation(&u), u);
        let c = canonical_permutation(&pair(&[0.25, 0.006, 0.744], &[0.0, 0.195, 0.805]));
        assert_eq!(c.p_h(), &[0.006, 0.25, 0.744]);
        assert_eq!(c.p_l(), &[0.195, 0.0, 0.805]);
    }

    #[test]
    fn simplex_projection() {
        let p = project_to_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(project_to_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_to_simplex(&[0.2, 0.3, 0.5]);
        assert!((p[0] - 0.2).abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
        let p = project_to_simplex(&[-1.0, 0.4, 0.9]);
        assert_eq!(p[0], 0.0);
        assert!((p[1] - 0.25).abs() < 1e-15 && (p[2] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn contention_free_split() {
        let r = solve(
            &OptProblem::new(cfg(1, 1, 2), 0.0).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((r.mu.mu_h - 1.0).abs() < 1e-9);
        assert!(r.feasible);
    }

    #[test]
    fn unreachable_gamma_is_rejected() {
        assert!(OptProblem::new(cfg(4, 0, 3), 0.4).is_err());
        assert!(OptProblem::new(cfg(4, 5, 3), -0.1).is_err());
        assert!(OptProblem::new(cfg(4, 5, 3), 3.5).is_err());
    }

    #[test]
    fn infeasible_floor_reports_best_attained() {
        // Five L-UEs on two RBs can average at most ~0.66 successes per slot.
        let problem = OptProblem::new(cfg(2, 5, 2), 1.5).unwrap();
        match solve(&problem, &SolverOptions::default()) {
            Err(Error::Infeasible { best_mu_l, .. }) => assert!(best_mu_l < 1.5 && best_mu_l > 0.0),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_across_parallel_and_serial() {
        let problem = OptProblem::new(cfg(4, 5, 4), 0.4).unwrap();
        let par = solve(&problem, &SolverOptions::default()).unwrap();
        let ser = solve(
            &problem,
            &SolverOptions {
                parallel: false,
                ..SolverOptions::default()
            },
        )
        .unwrap();
        assert_eq!(par.pair, ser.pair);
        assert_eq!(par.mu, ser.mu);
    }
}
