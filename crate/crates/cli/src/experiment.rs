use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use log::info;
use prioaccess_core::action_space::{
    build_compact, generate_discretized_capped, generate_reduced, load_compact, save_compact, ActionSpace,
    GridSpec, SpaceKind, DEFAULT_ACTION_CAP,
};
use prioaccess_core::baselines::{acb_admission, acb_throughput, uniform_pair, uniform_throughput};
use prioaccess_core::exact::throughput_closed_form;
use prioaccess_core::mab::{
    estimate_load, mae_trace, run_nonstationary, running_means, trailing_means, write_trace_csv,
};
use prioaccess_core::optimizer::{solve_relaxed, OptProblem, FEASIBILITY_TOLERANCE};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::plot::{write_mae, write_running};
use crate::spec::{ExperimentSpec, Method};

pub const RESULT_FILE: &str = "result.json";
const TRAILING_WINDOW: usize = 1000;

/// Closed-form result of a non-bandit method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub p_h: Vec<f64>,
    pub p_l: Vec<f64>,
    pub mu_h: f64,
    pub mu_l: f64,
    pub feasible: bool,
    /// `(admitted_h, admitted_l)` for barring.
    pub admitted: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub best_index: usize,
    pub p_h: Vec<f64>,
    pub p_l: Vec<f64>,
    /// Exact throughputs of the best action under the final load.
    pub exact_mu_h: f64,
    pub exact_mu_l: f64,
    /// Mean observed throughputs over the last 1000 pulls.
    pub trailing_mu_h_t: f64,
    pub trailing_mu_l_t: f64,
    pub estimated_load: Option<(usize, usize)>,
    pub final_mae: Option<f64>,
    pub trace_csv: String,
    pub running_csv: String,
    pub mae_csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub name: String,
    pub method: Method,
    pub m: usize,
    pub n_h: usize,
    pub n_l: usize,
    pub gamma: f64,
    pub action_space_size: Option<usize>,
    pub baseline: Option<BaselineRecord>,
    pub seeds: Vec<SeedRecord>,
}

impl ExperimentRecord {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Ok(serde_json::from_reader(BufReader::new(f))?)
    }
}

/// Runs `spec` and writes `result.json` plus, for bandit methods, one trace
/// CSV and plot-data CSVs per seed into `spec.out`.
pub fn run_experiment(spec: &ExperimentSpec) -> anyhow::Result<ExperimentRecord> {
    spec.validate()?;
    let cfg = spec.cfg()?;
    let gamma = spec.network.gamma;
    std::fs::create_dir_all(&spec.out).with_context(|| format!("creating {}", spec.out.display()))?;

    let mut record = ExperimentRecord {
        name: spec.name.clone(),
        method: spec.method,
        m: cfg.m,
        n_h: cfg.n_h,
        n_l: cfg.n_l,
        gamma,
        action_space_size: None,
        baseline: None,
        seeds: Vec::new(),
    };

    match spec.method {
        Method::Uniform => {
            let mu = uniform_throughput(&cfg)?;
            let (p_h, p_l) = uniform_pair(cfg.m)?.into_parts();
            record.baseline = Some(BaselineRecord {
                p_h,
                p_l,
                mu_h: mu.mu_h,
                mu_l: mu.mu_l,
                feasible: mu.mu_l >= gamma - FEASIBILITY_TOLERANCE,
                admitted: None,
            });
        }
        Method::Acb => {
            let mu = acb_throughput(&cfg)?;
            let adm = acb_admission(&cfg);
            let (p_h, p_l) = uniform_pair(cfg.m)?.into_parts();
            record.baseline = Some(BaselineRecord {
                p_h,
                p_l,
                mu_h: mu.mu_h,
                mu_l: mu.mu_l,
                feasible: mu.mu_l >= gamma - FEASIBILITY_TOLERANCE,
                admitted: Some((adm.admitted_h, adm.admitted_l)),
            });
        }
        Method::ExactOpt => {
            let res = solve_relaxed(&OptProblem::new(cfg, gamma)?, &spec.solver.options())?;
            let (p_h, p_l) = res.pair.into_parts();
            record.baseline = Some(BaselineRecord {
                p_h,
                p_l,
                mu_h: res.mu.mu_h,
                mu_l: res.mu.mu_l,
                feasible: res.feasible,
                admitted: None,
            });
        }
        Method::MabDiscretized | Method::MabCompact => {
            let space = action_space(spec)?;
            record.action_space_size = Some(space.len());
            let schedule = spec.load_schedule()?;
            record.seeds = spec
                .seeds
                .par_iter()
                .map(|&seed| {
                    let result = run_nonstationary(&space, &schedule, &spec.mab_config(seed))?;
                    let final_cfg = schedule[schedule.len() - 1].1;
                    let exact = throughput_closed_form(&final_cfg, result.best_action.pair())?;
                    let (th, tl) = trailing_means(&result, TRAILING_WINDOW);

                    let trace_csv = format!("seed{seed}_trace.csv");
                    write_trace_csv(&result, create(&spec.out.join(&trace_csv))?)?;
                    let running_csv = format!("seed{seed}_running.csv");
                    write_running(&running_means(&result), create(&spec.out.join(&running_csv))?)?;

                    let (mut estimated_load, mut final_mae, mut mae_csv) = (None, None, None);
                    if spec.method == Method::MabCompact {
                        let mae = mae_trace(&space, &result)?;
                        let name = format!("seed{seed}_mae.csv");
                        write_mae(&mae, create(&spec.out.join(&name))?)?;
                        estimated_load = Some(estimate_load(&space, &result)?);
                        final_mae = mae.last().map(|(_, e)| *e);
                        mae_csv = Some(name);
                    }
                    info!("{}: seed {seed} best {}", spec.name, result.best_action);
                    let (p_h, p_l) = result.best_action.pair().clone().into_parts();
                    Ok(SeedRecord {
                        seed,
                        best_index: result.best_index,
                        p_h,
                        p_l,
                        exact_mu_h: exact.mu_h,
                        exact_mu_l: exact.mu_l,
                        trailing_mu_h_t: th,
                        trailing_mu_l_t: tl,
                        estimated_load,
                        final_mae,
                        trace_csv,
                        running_csv,
                        mae_csv,
                    })
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
        }
    }

    let mut out = create(&spec.out.join(RESULT_FILE))?;
    serde_json::to_writer_pretty(&mut out, &record)?;
    writeln!(out)?;
    out.flush()?;
    Ok(record)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Action space for a bandit spec. A compact table is read from
/// `compact.table` when that file exists and built (and saved there) when it
/// does not.
pub fn action_space(spec: &ExperimentSpec) -> anyhow::Result<ActionSpace> {
    let m = spec.network.m;
    match spec.method {
        Method::MabDiscretized => {
            let grid = GridSpec::from_step(spec.discretized.d)?;
            Ok(if spec.discretized.reduced {
                generate_reduced(m, grid, DEFAULT_ACTION_CAP)?
            } else {
                generate_discretized_capped(m, grid, DEFAULT_ACTION_CAP)?
            })
        }
        Method::MabCompact => {
            let c = &spec.compact;
            if let Some(path) = c.table.as_ref().filter(|p| p.exists()) {
                let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                let space =
                    load_compact(BufReader::new(f)).with_context(|| format!("loading {}", path.display()))?;
                let SpaceKind::Compact { m: tm, gamma: tg, .. } = space.kind() else {
                    bail!("{} is not a compact table", path.display());
                };
                if tm != m || (tg - spec.network.gamma).abs() > 1e-12 {
                    bail!(
                        "{} was built for m={tm}, gamma={tg}; spec has m={m}, gamma={}",
                        path.display(),
                        spec.network.gamma
                    );
                }
                return Ok(space);
            }
            info!(
                "building {}x{} compact table for m={m}",
                c.n_h_max + 1,
                c.n_l_max + 1
            );
            let space = build_compact(
                m,
                c.n_h_max,
                c.n_l_max,
                spec.network.gamma,
                &spec.solver.options(),
            )?;
            if let Some(path) = &c.table {
                let mut out = create(path)?;
                save_compact(&space, &mut out)?;
                out.flush()?;
            }
            Ok(space)
        }
        other => bail!("method {other:?} has no action space"),
    }
}
