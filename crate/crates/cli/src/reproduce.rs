use std::fmt;
use std::str::FromStr;

use anyhow::bail;
use prioaccess_core::action_space::{
    burnside_orbit_count, discretized_size, generate_reduced, ActionSpace, GridSpec, DEFAULT_ACTION_CAP,
};
use prioaccess_core::baselines::{acb_throughput, uniform_throughput};
use prioaccess_core::exact::throughput_closed_form;
use prioaccess_core::mab::{run, MabConfig};
use prioaccess_core::optimizer::{solve, OptProblem, SolverOptions};
use prioaccess_core::NetworkConfig;
use serde::{Deserialize, Serialize};

const N_H: usize = 4;
const N_L: usize = 5;
const RB_COUNTS: [usize; 4] = [3, 4, 5, 6];
const TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

impl TableId {
    pub const ALL: [TableId; 7] = [
        TableId::I,
        TableId::II,
        TableId::III,
        TableId::IV,
        TableId::V,
        TableId::VI,
        TableId::VII,
    ];
}

impl FromStr for TableId {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "I" | "1" => TableId::I,
            "II" | "2" => TableId::II,
            "III" | "3" => TableId::III,
            "IV" | "4" => TableId::IV,
            "V" | "5" => TableId::V,
            "VI" | "6" => TableId::VI,
            "VII" | "7" => TableId::VII,
            _ => bail!("unknown table {s:?}; expected one of I, II, III, IV, V, VI, VII"),
        })
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Known, explained mismatch with the printed value.
    Documented,
    /// Shown for reference only.
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Documented => "DOCUMENTED",
            Status::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub computed: f64,
    pub published: Option<f64>,
    /// What `computed` was checked against.
    pub check: String,
    pub status: Status,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub table: TableId,
    pub title: String,
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Fail)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Table {}: {}", self.table, self.title)?;
        for r in &self.rows {
            let published = r.published.map_or("-".to_string(), |p| format!("{p}"));
            write!(
                f,
                "  {:<16} computed {:>12.6}  published {:>8}  {:<28} {}",
                r.label, r.computed, published, r.check, r.status
            )?;
            if !r.note.is_empty() {
                write!(f, "  ({})", r.note)?;
            }
            writeln!(f)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// Seeds and bandit sizes for the MAB tables.
#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub seed: u64,
    pub runs: Option<usize>,
    pub t: Option<usize>,
    pub solver: SolverOptions,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            runs: None,
            t: None,
            solver: SolverOptions::default(),
        }
    }
}

/// Recomputes one table and compares it with the printed values. Failures
/// are reported in the rows, not returned as errors.
pub fn reproduce(table: TableId, opts: &ReproduceOptions) -> anyhow::Result<Report> {
    match table {
        TableId::I => table_i(),
        TableId::II => table_ii(),
        TableId::III => table_iii(),
        TableId::IV => optimizer_table(TableId::IV, 0.0, [0.84, 1.27, 1.68, 2.05], 0.0, opts),
        TableId::V => optimizer_table(TableId::V, 0.4, [0.43, 0.85, 1.28, 1.7], 0.4, opts),
        TableId::VI => mab_table(TableId::VI, 0.0, [0.82, 1.23, 1.57, 2.05], 0.0, opts),
        TableId::VII => mab_table(TableId::VII, 0.4, [0.41, 0.82, 1.23, 1.64], 0.41, opts),
    }
}

fn cfg(m: usize) -> NetworkConfig {
    NetworkConfig::new(N_H, N_L, m).expect("fixed load is valid")
}

fn close(label: String, computed: f64, published: f64) -> Row {
    Row {
        label,
        computed,
        published: Some(published),
        check: format!("|computed - published| <= {TOLERANCE}"),
        status: if (computed - published).abs() <= TOLERANCE {
            Status::Pass
        } else {
            Status::Fail
        },
        note: String::new(),
    }
}

fn table_i() -> anyhow::Result<Report> {
    const ROWS: [(usize, f64, u128, u128); 10] = [
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
    let mut rows = Vec::new();
    for (m, d, full, reduced) in ROWS {
        let grid = GridSpec::from_step(d)?;
        let f = discretized_size(m, grid);
        let r = generate_reduced(m, grid, DEFAULT_ACTION_CAP)?.len() as u128;
        let exact = |label: &str, computed: u128, published: u128| Row {
            label: format!("M={m} d={d} {label}"),
            computed: computed as f64,
            published: Some(published as f64),
            check: "exact match".into(),
            status: if computed == published {
                Status::Pass
            } else {
                Status::Fail
            },
            note: String::new(),
        };
        let mut full_row = exact("full", f, full);
        if m == 3 && full == 3844 && f == 66 * 66 {
            full_row.status = Status::Documented;
            full_row.note = "66 compositions per class give 66^2; the reduced 1452 = 4356/3 agrees".into();
        }
        rows.push(full_row);
        let mut reduced_row = exact("reduced", r, reduced);
        if r != burnside_orbit_count(m, grid) {
            reduced_row.status = Status::Fail;
            reduced_row.note = "disagrees with the orbit count".into();
        }
        rows.push(reduced_row);
    }
    Ok(Report {
        table: TableId::I,
        title: "action space sizes, full and with rotations removed".into(),
        rows,
        notes: vec![],
    })
}

fn table_ii() -> anyhow::Result<Report> {
    let printed = [(0.31, 0.62), (0.34, 0.51), (0.40, 0.53), (0.45, 0.57)];
    let mut rows = Vec::new();
    for (m, (ph, pl)) in RB_COUNTS.into_iter().zip(printed) {
        let mu = uniform_throughput(&cfg(m))?;
        for (name, c, p) in [("mu_h", mu.mu_h, ph), ("mu_l", mu.mu_l, pl)] {
            rows.push(Row {
                label: format!("M={m} {name}"),
                computed: c,
                published: Some(p),
                check: "not compared".into(),
                status: Status::Info,
                note: String::new(),
            });
        }
    }
    Ok(Report {
        table: TableId::II,
        title: "uniform allocation, n_h=4, n_l=5 (excluded)".into(),
        rows,
        notes: vec![
            "The printed values do not follow from the throughput model. At M=3 an H-UE \
             succeeds only if the other 8 UEs avoid its RB, so mu_h = 4 (2/3)^8 ~ 0.156, \
             not 0.31. The uniform baseline is checked against the pattern-sum and brute-force \
             oracles instead."
                .into(),
        ],
    })
}

fn table_iii() -> anyhow::Result<Report> {
    let printed = [(0.44, 0.89), (0.42, 1.27), (0.82, 1.23), (0.80, 1.6)];
    let mut rows = Vec::new();
    for (m, (ph, pl)) in RB_COUNTS.into_iter().zip(printed) {
        let mu = acb_throughput(&cfg(m))?;
        rows.push(close(format!("M={m} mu_h"), mu.mu_h, ph));
        rows.push(close(format!("M={m} mu_l"), mu.mu_l, pl));
    }
    Ok(Report {
        table: TableId::III,
        title: "access class barring, n_h=4, n_l=5".into(),
        rows,
        notes: vec!["Admission keeps floor(M n_h / n) H-UEs and fills the remaining RBs with L-UEs.".into()],
    })
}

fn optimizer_table(
    table: TableId,
    gamma: f64,
    published_h: [f64; 4],
    published_l: f64,
    opts: &ReproduceOptions,
) -> anyhow::Result<Report> {
    let mut rows = Vec::new();
    for (m, ph) in RB_COUNTS.into_iter().zip(published_h) {
        let res = solve(&OptProblem::new(cfg(m), gamma)?, &opts.solver)?;
        let mut row = close(format!("M={m} mu_h"), res.mu.mu_h, ph);
        row.note = format!("p_h={} p_l={}", fmt_vec(res.pair.p_h()), fmt_vec(res.pair.p_l()));
        rows.push(row);
        rows.push(close(format!("M={m} mu_l"), res.mu.mu_l, published_l));
    }
    Ok(Report {
        table,
        title: format!("optimal allocation, n_h=4, n_l=5, gamma={gamma}"),
        rows,
        notes: vec!["Solve times depend on hardware and are not compared.".into()],
    })
}

fn mab_table(
    table: TableId,
    gamma: f64,
    published_h: [f64; 4],
    published_l: f64,
    opts: &ReproduceOptions,
) -> anyhow::Result<Report> {
    let grid = GridSpec::from_step(0.2)?;
    let mut rows = Vec::new();
    for (m, ph) in RB_COUNTS.into_iter().zip(published_h) {
        let c = cfg(m);
        let space = generate_reduced(m, grid, DEFAULT_ACTION_CAP)?;
        let optimum = discrete_optimum(&space, &c, gamma)?;
        let base = MabConfig::discretized(gamma);
        let mcfg = MabConfig {
            seed: opts.seed,
            runs: opts.runs.unwrap_or(base.runs),
            t: opts.t.unwrap_or(base.t),
            ..base
        };
        let result = run(&space, &c, &mcfg)?;
        let exact = throughput_closed_form(&c, result.best_action.pair())?;
        let ok = exact.mu_h >= 0.95 * optimum && exact.mu_l >= gamma;
        rows.push(Row {
            label: format!("M={m} mu_h"),
            computed: exact.mu_h,
            published: Some(ph),
            check: format!(">= 95% of grid optimum {optimum:.4}"),
            status: if ok { Status::Pass } else { Status::Fail },
            note: format!("{}", result.best_action),
        });
        rows.push(Row {
            label: format!("M={m} mu_l"),
            computed: exact.mu_l,
            published: Some(published_l),
            check: format!(">= gamma {gamma}"),
            status: if exact.mu_l >= gamma {
                Status::Pass
            } else {
                Status::Fail
            },
            note: String::new(),
        });
    }
    Ok(Report {
        table,
        title: format!("bandit on the d=0.2 grid, n_h=4, n_l=5, gamma={gamma}"),
        rows,
        notes: vec![
            format!(
                "seed {}; computed values are the exact throughputs of the returned action.",
                opts.seed
            ),
            "Printed values are per-run averages; the check is against exhaustive search of the same grid."
                .into(),
        ],
    })
}

/// Best exact `mu_h` over the space subject to `mu_l >= gamma`.
pub fn discrete_optimum(space: &ActionSpace, cfg: &NetworkConfig, gamma: f64) -> anyhow::Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for a in space.actions() {
        let mu = throughput_closed_form(cfg, a.pair())?;
        if mu.mu_l >= gamma {
            best = best.max(mu.mu_h);
        }
    }
    if best == f64::NEG_INFINITY {
        bail!("no action reaches gamma {gamma}");
    }
    Ok(best)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}
