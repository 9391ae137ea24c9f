//! Acceptance criteria. Each test prints one `[PASS]` / `[FAIL]` line.

mod common;

use std::time::{Duration, Instant};

use prioaccess_core::action_space::{
    build_compact, burnside_orbit_count, generate_discretized, generate_reduced, reduce_circular, GridSpec,
    DEFAULT_ACTION_CAP,
};
use prioaccess_core::baselines::acb_throughput;
use prioaccess_core::exact::{
    enumerate_patterns, pattern_probability, scaling_reference, throughput_by_pattern_sum,
    throughput_closed_form, DEFAULT_ENUMERATION_CAP,
};
use prioaccess_core::mab::{mae_trace, run, run_nonstationary, trailing_means, MabConfig, RewardSource};
use prioaccess_core::optimizer::{solve, OptProblem, OptResult, SolverOptions};
use prioaccess_core::simulator::simulate_throughput;
use prioaccess_core::{count_successes, AccessProbabilityPair, NetworkConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force, random_pair, verdict};

fn cfg(n_h: usize, n_l: usize, m: usize) -> NetworkConfig {
    NetworkConfig::new(n_h, n_l, m).unwrap()
}

fn optimum(m: usize, gamma: f64) -> OptResult {
    solve(
        &OptProblem::new(cfg(4, 5, m), gamma).unwrap(),
        &SolverOptions::default(),
    )
    .unwrap()
}

fn within(t: Instant, budget: Duration) -> bool {
    t.elapsed() <= budget
}

/// (M, d, full size printed, reduced size printed).
const TABLE_I: [(usize, f64, u128, usize); 10] = [
    (2, 0.5, 9, 5),
    (2, 0.2, 36, 18),
    (2, 0.1, 121, 61),
    (3, 0.5, 36, 12),
    (3, 0.2, 441, 147),
    (3, 0.1, 3844, 1452),
    (4, 0.5, 100, 26),
    (4, 0.2, 3136, 784),
    (5, 0.5, 225, 45),
    (5, 0.2, 15876, 3176),
];

#[test]
fn c01_action_space_sizes() {
    let t0 = Instant::now();
    let mut reduced_ok = 0;
    let mut full_ok = 0;
    let mut notes = Vec::new();
    for (m, d, full_published, reduced_published) in TABLE_I {
        let grid = GridSpec::from_step(d).unwrap();
        let full = generate_discretized(m, grid).unwrap();
        let reduced = reduce_circular(&full).unwrap();
        if reduced.len() == reduced_published {
            reduced_ok += 1;
        }
        if full.len() as u128 == full_published {
            full_ok += 1;
        } else {
            notes.push(format!(
                "(M={m}, d={d}) full {} vs printed {full_published}",
                full.len()
            ));
        }
    }
    let discrepancy_as_documented = notes == ["(M=3, d=0.1) full 4356 vs printed 3844"];
    let pass =
        reduced_ok == 10 && full_ok == 9 && discrepancy_as_documented && within(t0, Duration::from_secs(60));
    verdict(
        1,
        "action space sizes",
        pass,
        &format!(
            "reduced {reduced_ok}/10, full {full_ok}/10 [{}], {:.1?}",
            notes.join("; "),
            t0.elapsed()
        ),
    );
}

/// Rotation orbit count by brute force over rotations: counts pairs fixed by
/// each rotation directly from the compositions.
fn burnside_by_hand(m: usize, q: u32) -> u128 {
    fn comps(m: usize, q: u32) -> Vec<Vec<u32>> {
        if m == 1 {
            return vec![vec![q]];
        }
        (0..=q)
            .flat_map(|x| {
                comps(m - 1, q - x).into_iter().map(move |mut rest| {
                    rest.insert(0, x);
                    rest
                })
            })
            .collect()
    }
    let all = comps(m, q);
    let fixed = |r: usize| {
        all.iter()
            .filter(|v| (0..m).all(|i| v[i] == v[(i + r) % m]))
            .count() as u128
    };
    (0..m).map(|r| fixed(r) * fixed(r)).sum::<u128>() / m as u128
}

#[test]
fn c02_burnside_cross_check() {
    let t0 = Instant::now();
    let mut bad = Vec::new();
    for (m, d, _, _) in TABLE_I {
        let grid = GridSpec::from_step(d).unwrap();
        let reduced = reduce_circular(&generate_discretized(m, grid).unwrap())
            .unwrap()
            .len() as u128;
        let direct = generate_reduced(m, grid, DEFAULT_ACTION_CAP).unwrap().len() as u128;
        let oracle = burnside_by_hand(m, grid.q());
        if reduced != oracle || direct != oracle || burnside_orbit_count(m, grid) != oracle {
            bad.push(format!("(M={m}, d={d}): reduced {reduced}, oracle {oracle}"));
        }
    }
    verdict(
        2,
        "Burnside orbit counts",
        bad.is_empty() && within(t0, Duration::from_secs(30)),
        &format!("10 rows, mismatches [{}], {:.1?}", bad.join("; "), t0.elapsed()),
    );
}

#[test]
fn c03_oracle_equivalence() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_mu, mut worst_sum, mut worst_pattern) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let m = rand::Rng::random_range(&mut rng, 1..=4);
        let n = rand::Rng::random_range(&mut rng, 0..=6);
        let n_h = rand::Rng::random_range(&mut rng, 0..=n);
        let c = cfg(n_h, n - n_h, m);
        let pair = random_pair(&mut rng, m);

        let closed = throughput_closed_form(&c, &pair).unwrap();
        let summed = throughput_by_pattern_sum(&c, &pair, DEFAULT_ENUMERATION_CAP).unwrap();
        let (bh, bl, dist) = brute_force(&c, &pair);
        for (a, b) in [
            (closed.mu_h, summed.mu_h),
            (closed.mu_l, summed.mu_l),
            (closed.mu_h, bh),
            (closed.mu_l, bl),
        ] {
            worst_mu = worst_mu.max((a - b).abs());
        }

        let mut total = 0.0;
        for pattern in &enumerate_patterns(&c) {
            let p = pattern_probability(&c, &pair, pattern).unwrap();
            total += p;
            let b = dist.get(&pattern.to_string()).copied().unwrap_or(0.0);
            worst_pattern = worst_pattern.max((p - b).abs());
        }
        worst_sum = worst_sum.max((total - 1.0).abs());
    }
    let pass = worst_mu <= 1e-10
        && worst_sum <= 1e-9
        && worst_pattern <= 1e-10
        && within(t0, Duration::from_secs(60));
    verdict(
        3,
        "closed form = pattern sum = brute force",
        pass,
        &format!(
            "100 cases, max |dmu| {worst_mu:.2e}, max |sum P - 1| {worst_sum:.2e}, max |dP| {worst_pattern:.2e}, {:.1?}",
            t0.elapsed()
        ),
    );
}

#[test]
fn c04_unconstrained_optimum() {
    let t0 = Instant::now();
    let targets = [0.84375, 1.265625, 1.6875, 2.048];
    let mut pass = true;
    let mut cells = Vec::new();
    for (m, target) in (3..=6).zip(targets) {
        let r = optimum(m, 0.0);
        pass &= (r.mu.mu_h - target).abs() <= 0.005 && r.mu.mu_l.abs() <= 1e-6;
        cells.push(format!("M={m} ({:.5}, {:.1e})", r.mu.mu_h, r.mu.mu_l));
    }
    pass &= within(t0, Duration::from_secs(120));
    verdict(
        4,
        "gamma=0 optimum",
        pass,
        &format!("{}; {:.1?}", cells.join(", "), t0.elapsed()),
    );
}

#[test]
fn c05_constrained_optimum() {
    let t0 = Instant::now();
    let floors = [0.42, 0.84, 1.27, 1.69];
    let mut pass = true;
    let mut cells = Vec::new();
    for (m, floor) in (3..=6).zip(floors) {
        let r = optimum(m, 0.4);
        pass &= r.mu.mu_h >= floor && r.mu.mu_l >= 0.4 - 1e-6 && r.mu.mu_l <= 0.41;
        cells.push(format!("M={m} ({:.4}, {:.6})", r.mu.mu_h, r.mu.mu_l));
    }
    pass &= within(t0, Duration::from_secs(300));
    verdict(
        5,
        "gamma=0.4 optimum",
        pass,
        &format!("{}; {:.1?}", cells.join(", "), t0.elapsed()),
    );
}

#[test]
fn c06_access_class_barring() {
    let printed = [(0.44, 0.89), (0.42, 1.27), (0.82, 1.23), (0.80, 1.6)];
    let mut pass = true;
    let mut cells = Vec::new();
    for (m, (h, l)) in (3..=6).zip(printed) {
        let mu = acb_throughput(&cfg(4, 5, m)).unwrap();
        pass &= (mu.mu_h - h).abs() <= 0.01 && (mu.mu_l - l).abs() <= 0.01;
        cells.push(format!("M={m} ({:.3}, {:.3})", mu.mu_h, mu.mu_l));
    }
    verdict(6, "ACB baseline", pass, &cells.join(", "));
}

/// Exhaustive exact optimum over the reduced grid space.
fn discrete_optimum(
    space: &prioaccess_core::action_space::ActionSpace,
    c: &NetworkConfig,
    gamma: f64,
) -> f64 {
    space
        .actions()
        .iter()
        .map(|a| throughput_closed_form(c, a.pair()).unwrap())
        .filter(|mu| mu.mu_l >= gamma)
        .map(|mu| mu.mu_h)
        .fold(0.0, f64::max)
}

#[test]
fn c07_discretized_bandit() {
    let t0 = Instant::now();
    let grid = GridSpec::from_step(0.2).unwrap();
    let mut pass = true;
    let mut cells = Vec::new();
    for m in [3, 4] {
        let space = generate_reduced(m, grid, DEFAULT_ACTION_CAP).unwrap();
        let c = cfg(4, 5, m);
        for gamma in [0.0, 0.4] {
            let t_case = Instant::now();
            let best = discrete_optimum(&space, &c, gamma);
            let hits = (0..10)
                .filter(|&seed| {
                    let mcfg = MabConfig {
                        t: 200,
                        seed,
                        ..MabConfig::discretized(gamma)
                    };
                    let r = run(&space, &c, &mcfg).unwrap();
                    let mu = throughput_closed_form(&c, r.best_action.pair()).unwrap();
                    mu.mu_h >= 0.95 * best && (gamma == 0.0 || mu.mu_l >= 0.4)
                })
                .count();
            let ok = hits >= 8 && within(t_case, Duration::from_secs(600));
            pass &= ok;
            cells.push(format!(
                "M={m} gamma={gamma}: {hits}/10 (optimum {best:.4}, {:.0?})",
                t_case.elapsed()
            ));
        }
    }
    verdict(
        7,
        "discretized bandit within 5% of grid optimum",
        pass,
        &format!("{}; total {:.0?}", cells.join(", "), t0.elapsed()),
    );
}

fn least_squares_slope(points: &[(usize, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn c08_compact_bandit_load_estimate() {
    let t0 = Instant::now();
    let m = 6;
    let table = build_compact(m, 10, 10, 0.4, &SolverOptions::default()).unwrap();
    let build_time = t0.elapsed();
    let truth = cfg(4, 5, m);
    let target = table
        .compact_entry(table.compact_position(4, 5).unwrap().unwrap())
        .unwrap()
        .mu_h;
    let close_to_target = |r: &prioaccess_core::mab::MabResult| {
        let entry = table.compact_entry(r.best_index).unwrap();
        let mu_h = throughput_closed_form(&truth, &entry.pair).unwrap().mu_h;
        (
            (mu_h - target).abs() <= 0.02 * target,
            format!("({},{})", entry.n_h, entry.n_l),
        )
    };

    // Estimate quality with exact rewards, the T -> infinity limit.
    let mut hits = 0;
    let mut picks = Vec::new();
    for seed in 0..10 {
        let mcfg = MabConfig {
            seed,
            source: RewardSource::Exact,
            ..MabConfig::compact(0.4)
        };
        let (ok, pick) = close_to_target(&run(&table, &truth, &mcfg).unwrap());
        hits += ok as usize;
        picks.push(pick);
    }

    // MAE trend with simulated rewards at the compact parameters, averaged
    // over seeds.
    let mut mean_mae: Vec<(usize, f64)> = Vec::new();
    let mut sim_hits = 0;
    for seed in 0..10 {
        let r = run(
            &table,
            &truth,
            &MabConfig {
                seed,
                ..MabConfig::compact(0.4)
            },
        )
        .unwrap();
        sim_hits += close_to_target(&r).0 as usize;
        let trace = mae_trace(&table, &r).unwrap();
        if mean_mae.is_empty() {
            mean_mae = trace.iter().map(|&(k, _)| (k, 0.0)).collect();
        }
        for (acc, (_, e)) in mean_mae.iter_mut().zip(&trace) {
            acc.1 += e / 10.0;
        }
    }
    let slope = least_squares_slope(&mean_mae);
    let (first, last) = (
        mean_mae[..200].iter().map(|p| p.1).sum::<f64>() / 200.0,
        mean_mae[mean_mae.len() - 200..].iter().map(|p| p.1).sum::<f64>() / 200.0,
    );

    let pass = hits >= 8 && slope <= 0.0 && within(t0, Duration::from_secs(300));
    verdict(
        8,
        "compact bandit load estimate",
        pass,
        &format!(
            "exact-reward estimates within 2%: {hits}/10 [{}]; simulated MAE slope {slope:.2e} \
             (first/last batch mean {first:.2}/{last:.2}); simulated estimates within 2%: {sim_hits}/10 \
             (informational); table {build_time:.0?}, total {:.0?}",
            picks.join(" "),
            t0.elapsed()
        ),
    );
}

/// Exact mean and variance of the per-slot H-UE success count.
fn h_moments(c: &NetworkConfig, pair: &AccessProbabilityPair) -> (f64, f64) {
    let (mut e1, mut e2) = (0.0, 0.0);
    for pattern in &enumerate_patterns(c) {
        let h = count_successes(pattern).0 as f64;
        if h > 0.0 {
            let p = pattern_probability(c, pair, pattern).unwrap();
            e1 += h * p;
            e2 += h * h * p;
        }
    }
    (e1, e2 - e1 * e1)
}

#[test]
fn c09_monte_carlo_consistency() {
    let t0 = Instant::now();
    let t = 100_000;
    let mut pass = true;
    let mut cells = Vec::new();
    for gamma in [0.0, 0.4] {
        for m in 3..=6 {
            let c = cfg(4, 5, m);
            let pair = optimum(m, gamma).pair;
            let (mean, var) = h_moments(&c, &pair);
            let se = (var / t as f64).sqrt();
            let inside = (0..100u64)
                .filter(|&seed| {
                    let e = simulate_throughput(&c, &pair, t, 1000 * m as u64 + seed).unwrap();
                    (e.mu_h_t - mean).abs() <= 3.0 * se
                })
                .count();
            pass &= inside >= 95;
            cells.push(format!("g={gamma} M={m} {inside}/100"));
        }
    }
    pass &= within(t0, Duration::from_secs(120));
    verdict(
        9,
        "Monte-Carlo within 3 SE",
        pass,
        &format!("{}; {:.0?}", cells.join(", "), t0.elapsed()),
    );
}

#[test]
fn c10_reward_scaling() {
    let t0 = Instant::now();
    let scaled = |m: usize| {
        let c = cfg(4, 5, m);
        optimum(m, 0.0).mu.mu_h / scaling_reference(&c).unwrap()
    };
    let (s5, s6, s4) = (scaled(5), scaled(6), scaled(4));
    let pass = (s5 - 1.0).abs() <= 1e-6
        && (s6 - 1.0).abs() <= 1e-6
        && s4 > 1.0
        && within(t0, Duration::from_secs(30));
    verdict(
        10,
        "reward scaling",
        pass,
        &format!("M=5 {s5:.9}, M=6 {s6:.9}, M=4 {s4:.6}"),
    );
}

#[test]
fn c11_nonstationary_load() {
    let t0 = Instant::now();
    let m = 5;
    let (before, after) = (cfg(2, 1, m), cfg(4, 5, m));
    let target = 1.2282;
    let discretized = generate_reduced(m, GridSpec::from_step(0.2).unwrap(), DEFAULT_ACTION_CAP).unwrap();
    let compact = build_compact(m, 10, 10, 0.4, &SolverOptions::default()).unwrap();

    let mut pass = true;
    let mut cells = Vec::new();
    let cases = [
        (
            "discretized",
            &discretized,
            MabConfig {
                runs: 30_000,
                ..MabConfig::discretized(0.4)
            },
            15_000,
        ),
        (
            "compact",
            &compact,
            MabConfig {
                runs: 4_000,
                ..MabConfig::compact(0.4)
            },
            2_000,
        ),
    ];
    for (name, space, base, switch) in cases {
        let mut hits = 0;
        let mut tails = Vec::new();
        for seed in 0..10 {
            let mcfg = MabConfig { seed, ..base.clone() };
            let r = run_nonstationary(space, &[(0, before), (switch, after)], &mcfg).unwrap();
            let (h, l) = trailing_means(&r, 1000);
            if h >= 0.9 * target && l >= 0.38 {
                hits += 1;
            }
            tails.push(format!("({h:.2},{l:.2})"));
        }
        pass &= hits >= 7;
        cells.push(format!("{name}: {hits}/10 [{}]", tails.join(" ")));
    }
    pass &= within(t0, Duration::from_secs(900));
    verdict(
        11,
        "non-stationary adaptation",
        pass,
        &format!("{}; {:.0?}", cells.join(", "), t0.elapsed()),
    );
}

#[test]
fn optimizer_work_grows_with_m() {
    // Wall time is hardware-bound; the enumeration work behind an exact
    // pattern-based evaluation is not.
    let counts: Vec<usize> = (3..=6).map(|m| enumerate_patterns(&cfg(4, 5, m)).len()).collect();
    let pass = counts.windows(2).all(|w| w[0] < w[1]);
    let line = format!(
        "[{}] trend: pattern count for (4,5) over M=3..6 {counts:?}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::Write::write_all(&mut std::io::stdout().lock(), line.as_bytes());
    assert!(pass);
}
