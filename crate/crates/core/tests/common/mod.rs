#![allow(dead_code)]

use std::collections::HashMap;
use std::io::Write;

use prioaccess_core::{AccessProbabilityPair, NetworkConfig};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Walks all `m^n` per-UE RB assignments. Returns `(mu_h, mu_l)` and the
/// probability of every observed pattern string.
pub fn brute_force(cfg: &NetworkConfig, pair: &AccessProbabilityPair) -> (f64, f64, HashMap<String, f64>) {
    let (m, n) = (cfg.m, cfg.n());
    let mut assign = vec![0usize; n];
    let mut dist = HashMap::new();
    let (mut mu_h, mut mu_l) = (0.0, 0.0);
    loop {
        let mut prob = 1.0;
        let mut c_h = vec![0usize; m];
        let mut c_l = vec![0usize; m];
        for (ue, &rb) in assign.iter().enumerate() {
            if ue < cfg.n_h {
                prob *= pair.p_h()[rb];
                c_h[rb] += 1;
            } else {
                prob *= pair.p_l()[rb];
                c_l[rb] += 1;
            }
        }
        let pattern: String = (0..m)
            .map(|i| match (c_h[i], c_l[i]) {
                (1, 0) => 'h',
                (0, 1) => 'l',
                (0, 0) => 'o',
                _ => 'x',
            })
            .collect();
        mu_h += prob * pattern.matches('h').count() as f64;
        mu_l += prob * pattern.matches('l').count() as f64;
        *dist.entry(pattern).or_insert(0.0) += prob;

        let mut k = 0;
        loop {
            if k == n {
                return (mu_h, mu_l, dist);
            }
            assign[k] += 1;
            if assign[k] < m {
                break;
            }
            assign[k] = 0;
            k += 1;
        }
    }
}

/// Random point of the simplex; with probability 1/3 a few entries are
/// zeroed first.
pub fn random_simplex<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
    if rng.random_range(0..3) == 0 {
        for x in v.iter_mut().skip(1) {
            if rng.random_bool(0.4) {
                *x = 0.0;
            }
        }
    }
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

pub fn random_pair<R: Rng>(rng: &mut R, m: usize) -> AccessProbabilityPair {
    loop {
        if let Ok(p) = AccessProbabilityPair::new(random_simplex(rng, m), random_simplex(rng, m)) {
            return p;
        }
    }
}

/// One verdict line straight to stdout, so it shows even when the harness
/// captures test output.
pub fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    let line = format!(
        "[{}] C{id} {title}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}
