//! Action spaces for the bandit solver.
//!
//! A discretized space holds every pair of access probability vectors whose
//! entries are multiples of `1/q`. Grid arithmetic is exact: actions carry
//! their integer numerators, so sums and rotation comparisons never round.
//! Two allocations that differ by a joint circular shift of the RBs have the
//! same throughputs, and [`reduce_circular`] keeps one per orbit.
//!
//! A compact space is a lookup table holding one optimized allocation per
//! network load `(n_h, n_l)` on a grid.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{binomial, throughput_closed_form};
use crate::model::{min_joint_rotation_by, rotate_left, AccessProbabilityPair, NetworkConfig};
use crate::optimizer::{solve_relaxed, OptProblem, SolverOptions, FEASIBILITY_TOLERANCE};

/// Default ceiling on the number of actions materialized at once.
pub const DEFAULT_ACTION_CAP: u128 = 1_000_000;

/// Tolerance when checking stored throughputs against a fresh evaluation.
const TABLE_MU_TOLERANCE: f64 = 1e-9;

/// Discretization step `d = 1/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    q: u32,
}

impl GridSpec {
    pub fn new(q: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidConfig("grid denominator must be >= 1".into()));
        }
        Ok(Self { q })
    }

    /// Accepts `d` only if it is the reciprocal of a positive integer.
    pub fn from_step(d: f64) -> Result<Self> {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::InvalidConfig(format!("step {d} must lie in (0, 1]")));
        }
        let q = (1.0 / d).round();
        if (q * d - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "step {d} is not 1/q for an integer q"
            )));
        }
        Self::new(q as u32)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn d(&self) -> f64 {
        1.0 / self.q as f64
    }
}

/// One bandit arm: an allocation, plus its grid numerators when it lies on a
/// grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pair: AccessProbabilityPair,
    grid: Option<(Vec<u32>, Vec<u32>)>,
}

impl Action {
    pub fn from_pair(pair: AccessProbabilityPair) -> Self {
        Self { pair, grid: None }
    }

    pub fn from_grid(h: Vec<u32>, l: Vec<u32>, grid: GridSpec) -> Result<Self> {
        if h.len() != l.len() {
            return Err(Error::DimensionMismatch {
                expected: h.len(),
                found: l.len(),
            });
        }
        let q = grid.q();
        for (name, v) in [("p_h", &h), ("p_l", &l)] {
            let sum: u64 = v.iter().map(|&x| x as u64).sum();
            if sum != q as u64 {
                return Err(Error::InvalidProbabilities(format!(
                    "{name} numerators sum to {sum}, expected {q}"
                )));
            }
        }
        let to_f = |v: &[u32]| v.iter().map(|&x| x as f64 / q as f64).collect();
        let pair = AccessProbabilityPair::new(to_f(&h), to_f(&l))?;
        Ok(Self {
            pair,
            grid: Some((h, l)),
        })
    }

    pub fn pair(&self) -> &AccessProbabilityPair {
        &self.pair
    }

    pub fn grid_numerators(&self) -> Option<(&[u32], &[u32])> {
        self.grid.as_ref().map(|(h, l)| (h.as_slice(), l.as_slice()))
    }

    pub fn m(&self) -> usize {
        self.pair.m()
    }

    /// Joint rotation, same convention as [`AccessProbabilityPair::rotated`].
    pub fn rotated(&self, shift: usize) -> Self {
        Self {
            pair: self.pair.rotated(shift),
            grid: self
                .grid
                .as_ref()
                .map(|(h, l)| (rotate_left(h, shift), rotate_left(l, shift))),
        }
    }

    /// Orbit representative under joint rotation.
    pub fn canonical(&self) -> Self {
        let shift = match &self.grid {
            Some((h, l)) => min_joint_rotation_by(h, l, |a, b| a.cmp(b)),
            None => min_joint_rotation_by(self.pair.p_h(), self.pair.p_l(), |a, b| a.total_cmp(b)),
        };
        self.rotated(shift)
    }

    fn same_point(&self, other: &Self) -> bool {
        match (&self.grid, &other.grid) {
            (Some(a), Some(b)) => a == b,
            _ => self.pair == other.pair,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p_h={:?} p_l={:?}", self.pair.p_h(), self.pair.p_l())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Discretized {
        m: usize,
        grid: GridSpec,
        reduced: bool,
    },
    Compact {
        m: usize,
        n_h_max: usize,
        n_l_max: usize,
        gamma: f64,
    },
}

/// One lookup-table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactEntry {
    pub n_h: usize,
    pub n_l: usize,
    pub pair: AccessProbabilityPair,
    pub mu_h: f64,
    pub mu_l: f64,
    /// False when the cell's floor could not be met; the pair is then the
    /// least violating allocation found.
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct ActionSpace {
    actions: Vec<Action>,
    kind: SpaceKind,
    index: HashMap<Vec<u32>, usize>,
    entries: Vec<CompactEntry>,
}

impl ActionSpace {
    fn discretized(actions: Vec<Action>, m: usize, grid: GridSpec, reduced: bool) -> Self {
        let index = actions
            .iter()
            .enumerate()
            .map(|(i, a)| (grid_key(a), i))
            .collect();
        Self {
            actions,
            kind: SpaceKind::Discretized { m, grid, reduced },
            index,
            entries: Vec::new(),
        }
    }

    /// Wraps arbitrary allocations, e.g. a hand-picked candidate set.
    pub fn from_actions(actions: Vec<Action>) -> Result<Self> {
        let m = actions
            .first()
            .map(Action::m)
            .ok_or_else(|| Error::InvalidConfig("action space is empty".into()))?;
        if let Some(a) = actions.iter().find(|a| a.m() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: a.m(),
            });
        }
        Ok(Self {
            actions,
            kind: SpaceKind::Discretized {
                m,
                grid: GridSpec { q: 1 },
                reduced: false,
            },
            index: HashMap::new(),
            entries: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, index: usize) -> &Action {
        &self.actions[index]
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        match self.kind {
            SpaceKind::Discretized { m, .. } | SpaceKind::Compact { m, .. } => m,
        }
    }

    /// Position of a grid action. In a reduced space any member of the
    /// action's rotation orbit is found.
    pub fn position(&self, action: &Action) -> Option<usize> {
        if let SpaceKind::Discretized { reduced: true, .. } = self.kind {
            return self.index.get(&grid_key(&action.canonical())).copied();
        }
        if action.grid.is_some() {
            return self.index.get(&grid_key(action)).copied();
        }
        self.actions.iter().position(|a| a.same_point(action))
    }

    pub fn compact_entries(&self) -> Result<&[CompactEntry]> {
        match self.kind {
            SpaceKind::Compact { .. } => Ok(&self.entries),
            _ => Err(Error::NotCompact),
        }
    }

    /// Lookup-table cell of action `index`.
    pub fn compact_entry(&self, index: usize) -> Result<&CompactEntry> {
        Ok(&self.compact_entries()?[index])
    }

    /// Index of the `(n_h, n_l)` cell.
    pub fn compact_position(&self, n_h: usize, n_l: usize) -> Result<Option<usize>> {
        match self.kind {
            SpaceKind::Compact { n_h_max, n_l_max, .. } => {
                Ok((n_h <= n_h_max && n_l <= n_l_max).then(|| n_h * (n_l_max + 1) + n_l))
            }
            _ => Err(Error::NotCompact),
        }
    }
}

fn grid_key(a: &Action) -> Vec<u32> {
    match &a.grid {
        Some((h, l)) => h.iter().chain(l).copied().collect(),
        None => a
            .pair
            .p_h()
            .iter()
            .chain(a.pair.p_l())
            .map(|x| x.to_bits() as u32 ^ (x.to_bits() >> 32) as u32)
            .collect(),
    }
}

/// Number of length-`m` vectors on the `1/q` grid summing to one.
pub fn composition_count(m: usize, q: u32) -> u128 {
    binomial(q as usize + m - 1, m - 1)
}

/// `C(q+m-1, m-1)^2`.
pub fn discretized_size(m: usize, grid: GridSpec) -> u128 {
    let c = composition_count(m, grid.q());
    c * c
}

/// Number of joint-rotation orbits, by Burnside's lemma.
pub fn burnside_orbit_count(m: usize, grid: GridSpec) -> u128 {
    let q = grid.q() as u128;
    let fixed: u128 = (0..m)
        .map(|r| {
            let g = gcd(r, m);
            let period_copies = (m / g) as u128;
            if !q.is_multiple_of(period_copies) {
                return 0;
            }
            let c = binomial((q / period_copies) as usize + g - 1, g - 1);
            c * c
        })
        .sum();
    fixed / m as u128
}

fn gcd(a: usize, b: usize) -> usize {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}

/// Compositions of `q` into `m` nonnegative parts in lexicographic order.
fn compositions(m: usize, q: u32) -> Vec<Vec<u32>> {
    fn rec(m: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == m {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(m, left - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, q, &mut Vec::with_capacity(m), &mut out);
    out
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig(
            "a slot needs at least one resource block".into(),
        ));
    }
    Ok(())
}

/// Every grid pair, ordered lexicographically on `(h numerators, l numerators)`.
pub fn generate_discretized(m: usize, grid: GridSpec) -> Result<ActionSpace> {
    generate_discretized_capped(m, grid, DEFAULT_ACTION_CAP)
}

pub fn generate_discretized_capped(m: usize, grid: GridSpec, cap: u128) -> Result<ActionSpace> {
    check_m(m)?;
    let required = discretized_size(m, grid);
    if required > cap {
        return Err(Error::SpaceTooLarge { required, cap });
    }
    let comps = compositions(m, grid.q());
    let mut actions = Vec::with_capacity(required as usize);
    for h in &comps {
        for l in &comps {
            actions.push(Action::from_grid(h.clone(), l.clone(), grid)?);
        }
    }
    Ok(ActionSpace::discretized(actions, m, grid, false))
}

/// Reduced space built directly, keeping only orbit representatives, so the
/// full space is never materialized. Same result as
/// `reduce_circular(generate_discretized(..))`.
pub fn generate_reduced(m: usize, grid: GridSpec, cap: u128) -> Result<ActionSpace> {
    check_m(m)?;
    let required = burnside_orbit_count(m, grid);
    if required > cap {
        return Err(Error::SpaceTooLarge { required, cap });
    }
    let comps = compositions(m, grid.q());
    let mut actions = Vec::with_capacity(required as usize);
    for h in &comps {
        for l in &comps {
            if min_joint_rotation_by(h, l, |a, b| a.cmp(b)) == 0 {
                actions.push(Action::from_grid(h.clone(), l.clone(), grid)?);
            }
        }
    }
    Ok(ActionSpace::discretized(actions, m, grid, true))
}

/// True iff some joint rotation of `candidate` is in `existing`.
pub fn is_circular_shift(candidate: &Action, existing: &[Action]) -> bool {
    (0..candidate.m()).any(|r| {
        let rotated = candidate.rotated(r);
        existing.iter().any(|e| e.same_point(&rotated))
    })
}

/// One canonical representative per rotation orbit, in lexicographic order.
/// The result does not depend on the input order.
pub fn reduce_circular(space: &ActionSpace) -> Result<ActionSpace> {
    let (m, grid) = match space.kind {
        SpaceKind::Discretized { m, grid, .. } => (m, grid),
        SpaceKind::Compact { .. } => {
            return Err(Error::InvalidConfig(
                "only discretized spaces can be reduced".into(),
            ))
        }
    };
    if space.actions.iter().any(|a| a.grid.is_none()) {
        return Err(Error::InvalidConfig("reduction needs grid actions".into()));
    }
    let mut seen = HashSet::new();
    let mut reps: Vec<Action> = space
        .actions
        .iter()
        .map(Action::canonical)
        .filter(|c| seen.insert(grid_key(c)))
        .collect();
    reps.sort_by_cached_key(grid_key);
    Ok(ActionSpace::discretized(reps, m, grid, true))
}

/// Solves every cell `(n_h, n_l)` of the table offline.
///
/// Cells where the floor cannot be met keep the least violating allocation
/// and are flagged infeasible. With `n_h = 0` the objective is identically
/// zero and every allocation is optimal; those cells store the uniform pair,
/// which is where a local solver started from uniform stays. Likewise `p_l`
/// is stored uniform when `n_l = 0`.
pub fn build_compact(
    m: usize,
    n_h_max: usize,
    n_l_max: usize,
    gamma: f64,
    options: &SolverOptions,
) -> Result<ActionSpace> {
    check_m(m)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::InvalidConfig(format!("gamma must be >= 0, got {gamma}")));
    }
    let cells: Vec<(usize, usize)> = (0..=n_h_max)
        .flat_map(|h| (0..=n_l_max).map(move |l| (h, l)))
        .collect();
    let inner = SolverOptions {
        parallel: false,
        ..options.clone()
    };
    let solve_cell = |&(n_h, n_l): &(usize, usize)| -> Result<CompactEntry> {
        let cfg = NetworkConfig::new(n_h, n_l, m)?;
        let (pair, feasible) = if n_h == 0 {
            (AccessProbabilityPair::uniform(m)?, true)
        } else {
            let problem = OptProblem::new(cfg, gamma).unwrap_or(OptProblem::unchecked(cfg, gamma));
            let r = solve_relaxed(&problem, &inner)?;
            if n_l == 0 {
                let (p_h, _) = r.pair.into_parts();
                (
                    AccessProbabilityPair::new(p_h, vec![1.0 / m as f64; m])?,
                    r.feasible,
                )
            } else {
                (r.pair, r.feasible)
            }
        };
        let mu = throughput_closed_form(&cfg, &pair)?;
        Ok(CompactEntry {
            n_h,
            n_l,
            pair,
            mu_h: mu.mu_h,
            mu_l: mu.mu_l,
            feasible: feasible && mu.mu_l >= gamma - FEASIBILITY_TOLERANCE,
        })
    };
    let entries: Vec<CompactEntry> = if options.parallel {
        cells.par_iter().map(solve_cell).collect::<Result<_>>()?
    } else {
        cells.iter().map(solve_cell).collect::<Result<_>>()?
    };
    Ok(compact_space(m, n_h_max, n_l_max, gamma, entries))
}

fn compact_space(
    m: usize,
    n_h_max: usize,
    n_l_max: usize,
    gamma: f64,
    entries: Vec<CompactEntry>,
) -> ActionSpace {
    ActionSpace {
        actions: entries
            .iter()
            .map(|e| Action::from_pair(e.pair.clone()))
            .collect(),
        kind: SpaceKind::Compact {
            m,
            n_h_max,
            n_l_max,
            gamma,
        },
        index: HashMap::new(),
        entries,
    }
}

/// Writes the lookup table as CSV, 12 significant digits per number.
pub fn save_compact<W: Write>(space: &ActionSpace, mut out: W) -> Result<()> {
    let SpaceKind::Compact { m, gamma, .. } = space.kind else {
        return Err(Error::NotCompact);
    };
    writeln!(out, "{}", compact_header(m))?;
    for e in &space.entries {
        let mut fields = vec![m.to_string(), e.n_h.to_string(), e.n_l.to_string(), sig12(gamma)];
        fields.extend(e.pair.p_h().iter().chain(e.pair.p_l()).map(|&x| sig12(x)));
        fields.push(sig12(e.mu_h));
        fields.push(sig12(e.mu_l));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

fn compact_header(m: usize) -> String {
    let mut cols = vec!["m".to_string(), "n_h".into(), "n_l".into(), "gamma".into()];
    cols.extend((1..=m).map(|i| format!("p_h_{i}")));
    cols.extend((1..=m).map(|i| format!("p_l_{i}")));
    cols.push("mu_h".into());
    cols.push("mu_l".into());
    cols.join(",")
}

fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Reads a table written by [`save_compact`] and re-checks every cell.
pub fn load_compact<R: BufRead>(input: R) -> Result<ActionSpace> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
    let width = header.trim().split(',').count();
    if width < 8 || width % 2 != 0 {
        return Err(Error::parse(1, format!("malformed header {header:?}")));
    }
    let m = (width - 6) / 2;
    if header.trim() != compact_header(m) {
        return Err(Error::parse(1, format!("unexpected header {header:?}")));
    }

    let mut entries = Vec::new();
    let mut gamma_seen: Option<f64> = None;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != width {
            return Err(Error::parse(
                lineno,
                format!("expected {width} fields, got {}", fields.len()),
            ));
        }
        let int = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::parse(lineno, e.to_string()))
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(lineno, e.to_string()))
        };
        if int(fields[0])? != m {
            return Err(Error::parse(lineno, "m does not match header width"));
        }
        let (n_h, n_l, gamma) = (int(fields[1])?, int(fields[2])?, num(fields[3])?);
        match gamma_seen {
            Some(g) if g != gamma => return Err(Error::parse(lineno, "gamma differs between rows")),
            _ => gamma_seen = Some(gamma),
        }
        let p_h = fields[4..4 + m]
            .iter()
            .map(|s| num(s))
            .collect::<Result<Vec<_>>>()?;
        let p_l = fields[4 + m..4 + 2 * m]
            .iter()
            .map(|s| num(s))
            .collect::<Result<Vec<_>>>()?;
        let (mu_h, mu_l) = (num(fields[4 + 2 * m])?, num(fields[5 + 2 * m])?);
        let pair = AccessProbabilityPair::new(p_h, p_l).map_err(|e| Error::parse(lineno, e.to_string()))?;
        let mu = throughput_closed_form(&NetworkConfig::new(n_h, n_l, m)?, &pair)?;
        if (mu.mu_h - mu_h).abs() > TABLE_MU_TOLERANCE || (mu.mu_l - mu_l).abs() > TABLE_MU_TOLERANCE {
            return Err(Error::parse(
                lineno,
                format!(
                    "stored throughputs ({mu_h}, {mu_l}) disagree with ({}, {})",
                    mu.mu_h, mu.mu_l
                ),
            ));
        }
        entries.push(CompactEntry {
            n_h,
            n_l,
            feasible: mu.mu_l >= gamma - FEASIBILITY_TOLERANCE,
            pair,
            mu_h: mu.mu_h,
            mu_l: mu.mu_l,
        });
    }

    let gamma = gamma_seen.ok_or_else(|| Error::parse(2, "table has no rows"))?;
    let n_h_max = entries.iter().map(|e| e.n_h).max().unwrap_or(0);
    let n_l_max = entries.iter().map(|e| e.n_l).max().unwrap_or(0);
    let row_major = entries.len() == (n_h_max + 1) * (n_l_max + 1)
        && entries
            .iter()
            .enumerate()
            .all(|(i, e)| (e.n_h, e.n_l) == (i / (n_l_max + 1), i % (n_l_max + 1)));
    if !row_major {
        return Err(Error::parse(
            0,
            "rows do not cover the load grid in row-major order",
        ));
    }
    Ok(compact_space(m, n_h_max, n_l_max, gamma, entries))
}
