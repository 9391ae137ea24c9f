use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use prioaccess_cli::experiment::run_experiment;
use prioaccess_cli::reproduce::{reproduce, ReproduceOptions, TableId};
use prioaccess_cli::spec::{
    CompactParams, DiscretizedParams, ExperimentSpec, MabOverrides, Method, Network, SolverParams,
};
use prioaccess_core::action_space::{
    build_compact, burnside_orbit_count, discretized_size, generate_reduced, save_compact, GridSpec,
    DEFAULT_ACTION_CAP,
};
use prioaccess_core::exact::{enumerate_patterns, pattern_probability, throughput_closed_form};
use prioaccess_core::mab::RewardSource;
use prioaccess_core::optimizer::{solve_relaxed, OptProblem, SolverOptions};
use prioaccess_core::simulator::{empirical_throughput, simulate, write_trace};
use prioaccess_core::{AccessProbabilityPair, NetworkConfig};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "prioaccess",
    version,
    about = "Priority-aware random access experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Load {
    /// Resource blocks per slot.
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long = "n-h", default_value_t = 4)]
    n_h: usize,
    #[arg(long = "n-l", default_value_t = 5)]
    n_l: usize,
}

impl Load {
    fn cfg(&self) -> anyhow::Result<NetworkConfig> {
        Ok(NetworkConfig::new(self.n_h, self.n_l, self.m)?)
    }
}

#[derive(Args)]
struct Pair {
    /// Comma-separated H-UE access probabilities; uniform when omitted.
    #[arg(long = "p-h", value_delimiter = ',', allow_hyphen_values = true)]
    p_h: Option<Vec<f64>>,
    /// Comma-separated L-UE access probabilities; uniform when omitted.
    #[arg(long = "p-l", value_delimiter = ',', allow_hyphen_values = true)]
    p_l: Option<Vec<f64>>,
}

impl Pair {
    fn resolve(&self, m: usize) -> anyhow::Result<AccessProbabilityPair> {
        let uniform = vec![1.0 / m as f64; m];
        Ok(AccessProbabilityPair::new(
            self.p_h.clone().unwrap_or_else(|| uniform.clone()),
            self.p_l.clone().unwrap_or(uniform),
        )?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Discretized,
    Compact,
}

#[derive(Subcommand)]
enum Command {
    /// Exact throughputs of an allocation.
    Exact {
        #[command(flatten)]
        load: Load,
        #[command(flatten)]
        pair: Pair,
        /// Also list every feasible access pattern with its probability.
        #[arg(long)]
        patterns: bool,
    },
    /// Simulate slots and report empirical throughputs.
    Simulate {
        #[command(flatten)]
        load: Load,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 1000)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the per-slot patterns here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for the best allocation under the L-UE floor.
    Optimize {
        #[command(flatten)]
        load: Load,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = SolverOptions::default().starts)]
        starts: usize,
        #[arg(long, default_value_t = SolverOptions::default().seed)]
        seed: u64,
        /// Write the full result as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Action space sizes for a grid.
    AsStats {
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 0.2)]
        d: f64,
    },
    /// Build a compact lookup table and save it as CSV.
    CompactBuild {
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long = "n-h-max", default_value_t = 10)]
        n_h_max: usize,
        #[arg(long = "n-l-max", default_value_t = 10)]
        n_l_max: usize,
        #[arg(long, default_value_t = SolverOptions::default().starts)]
        starts: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the bandit and write traces and plot data.
    Mab {
        #[command(flatten)]
        load: Load,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, value_enum, default_value_t = Space::Discretized)]
        space: Space,
        /// Grid step of the discretized space.
        #[arg(long, default_value_t = 0.2)]
        d: f64,
        /// Compact table CSV, built when missing.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seed: Vec<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        t: Option<usize>,
        /// Reward from exact throughputs instead of simulated slots.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute a results table and compare with the printed values.
    Reproduce {
        /// I, II, III, IV, V, VI, VII or all.
        table: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Bandit pulls for tables VI and VII.
        #[arg(long)]
        runs: Option<usize>,
        /// Slots per pull for tables VI and VII.
        #[arg(long)]
        t: Option<usize>,
        /// Exit nonzero when any row fails.
        #[arg(long)]
        strict: bool,
        /// Write the reports as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment described by a TOML spec file.
    Scenario { spec: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Exact { load, pair, patterns } => {
            let cfg = load.cfg()?;
            let pair = pair.resolve(cfg.m)?;
            let mu = throughput_closed_form(&cfg, &pair)?;
            println!("{}", json!({ "mu_h": mu.mu_h, "mu_l": mu.mu_l }));
            if patterns {
                for p in &enumerate_patterns(&cfg) {
                    println!("{p} {:.12}", pattern_probability(&cfg, &pair, p)?);
                }
            }
        }
        Command::Simulate {
            load,
            pair,
            t,
            seed,
            out,
        } => {
            let cfg = load.cfg()?;
            let pair = pair.resolve(cfg.m)?;
            let trace = simulate(&cfg, &pair, t, seed)?;
            let emp = empirical_throughput(&trace)?;
            let mu = throughput_closed_form(&cfg, &pair)?;
            if let Some(path) = out {
                let mut w = create(&path)?;
                write_trace(&trace, &mut w)?;
                w.flush()?;
            }
            println!(
                "{}",
                json!({ "t": t, "seed": seed, "mu_h_T": emp.mu_h_t, "mu_l_T": emp.mu_l_t,
                        "mu_h": mu.mu_h, "mu_l": mu.mu_l })
            );
        }
        Command::Optimize {
            load,
            gamma,
            starts,
            seed,
            out,
        } => {
            let problem = OptProblem::new(load.cfg()?, gamma)?;
            let options = SolverOptions {
                starts,
                seed,
                ..SolverOptions::default()
            };
            let res = solve_relaxed(&problem, &options)?;
            println!(
                "{}",
                json!({ "m": load.m, "n_h": load.n_h, "n_l": load.n_l, "gamma": gamma,
                        "p_h": res.pair.p_h(), "p_l": res.pair.p_l(),
                        "mu_h": res.mu.mu_h, "mu_l": res.mu.mu_l,
                        "feasible": res.feasible, "iterations": res.iterations() })
            );
            if let Some(path) = out {
                let mut w = create(&path)?;
                serde_json::to_writer_pretty(&mut w, &res)?;
                w.flush()?;
            }
            if !res.feasible {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::AsStats { m, d } => {
            let grid = GridSpec::from_step(d)?;
            let reduced = generate_reduced(m, grid, DEFAULT_ACTION_CAP)?;
            println!(
                "{}",
                json!({ "m": m, "d": grid.d(), "full": discretized_size(m, grid) as u64,
                        "reduced": reduced.len(), "orbits": burnside_orbit_count(m, grid) as u64 })
            );
        }
        Command::CompactBuild {
            m,
            gamma,
            n_h_max,
            n_l_max,
            starts,
            out,
        } => {
            let options = SolverOptions {
                starts,
                ..SolverOptions::default()
            };
            let space = build_compact(m, n_h_max, n_l_max, gamma, &options)?;
            let mut w = create(&out)?;
            save_compact(&space, &mut w)?;
            w.flush()?;
            let infeasible = space.compact_entries()?.iter().filter(|e| !e.feasible).count();
            println!(
                "{}",
                json!({ "cells": space.len(), "infeasible": infeasible, "out": out })
            );
        }
        Command::Mab {
            load,
            gamma,
            space,
            d,
            table,
            seed,
            runs,
            t,
            exact,
            out,
        } => {
            let method = match space {
                Space::Discretized => Method::MabDiscretized,
                Space::Compact => Method::MabCompact,
            };
            let spec = ExperimentSpec {
                name: "mab".into(),
                method,
                seeds: seed,
                out,
                network: Network {
                    m: load.m,
                    n_h: load.n_h,
                    n_l: load.n_l,
                    gamma,
                },
                mab: MabOverrides {
                    runs,
                    t,
                    source: exact.then_some(RewardSource::Exact),
                    ..MabOverrides::default()
                },
                discretized: DiscretizedParams { d, reduced: true },
                compact: CompactParams {
                    table,
                    ..CompactParams::default()
                },
                solver: SolverParams::default(),
                schedule: Vec::new(),
            };
            print_record(&run_experiment(&spec)?)?;
        }
        Command::Reproduce {
            table,
            seed,
            runs,
            t,
            strict,
            out,
        } => {
            let tables = if table.eq_ignore_ascii_case("all") {
                TableId::ALL.to_vec()
            } else {
                vec![table.parse()?]
            };
            let opts = ReproduceOptions {
                seed,
                runs,
                t,
                ..ReproduceOptions::default()
            };
            let mut reports = Vec::new();
            for id in tables {
                let report = reproduce(id, &opts)?;
                println!("{report}");
                reports.push(report);
            }
            if let Some(path) = out {
                let mut w = create(&path)?;
                serde_json::to_writer_pretty(&mut w, &reports)?;
                w.flush()?;
            }
            if strict && !reports.iter().all(|r| r.passed()) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Scenario { spec } => {
            let spec = ExperimentSpec::load(&spec)?;
            print_record(&run_experiment(&spec)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_record(record: &prioaccess_cli::ExperimentRecord) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(record)?);
    Ok(())
}

fn create(path: &PathBuf) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}
