use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use prioaccess_core::action_space::GridSpec;
use prioaccess_core::mab::{MabConfig, RewardSource};
use prioaccess_core::optimizer::SolverOptions;
use prioaccess_core::NetworkConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Uniform,
    Acb,
    ExactOpt,
    MabDiscretized,
    MabCompact,
}

impl Method {
    pub fn is_bandit(self) -> bool {
        matches!(self, Method::MabDiscretized | Method::MabCompact)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub m: usize,
    pub n_h: usize,
    pub n_l: usize,
    #[serde(default)]
    pub gamma: f64,
}

/// Overrides on top of the method's default bandit parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MabOverrides {
    pub alpha: Option<f64>,
    pub elite_fraction: Option<f64>,
    pub batch_size: Option<usize>,
    pub rho: Option<f64>,
    pub t: Option<usize>,
    pub runs: Option<usize>,
    pub source: Option<RewardSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizedParams {
    pub d: f64,
    pub reduced: bool,
}

impl Default for DiscretizedParams {
    fn default() -> Self {
        Self {
            d: 0.2,
            reduced: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompactParams {
    pub n_h_max: usize,
    pub n_l_max: usize,
    /// Lookup table CSV. Loaded when it exists, otherwise built and saved
    /// there.
    pub table: Option<PathBuf>,
}

impl Default for CompactParams {
    fn default() -> Self {
        Self {
            n_h_max: 10,
            n_l_max: 10,
            table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    pub starts: usize,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            starts: d.starts,
            seed: d.seed,
        }
    }
}

impl SolverParams {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            starts: self.starts,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }
}

/// Load switch at pull `at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSwitch {
    pub at: usize,
    pub n_h: usize,
    pub n_l: usize,
}

/// One experiment, read from TOML:
///
/// ```toml
/// name = "m5-shift"
/// method = "mab-compact"
/// seeds = [1, 2, 3]
/// out = "results/m5-shift"
///
/// [network]
/// m = 5
/// n_h = 2
/// n_l = 1
/// gamma = 0.4
///
/// [[schedule]]
/// at = 1000
/// n_h = 4
/// n_l = 5
/// ```
///
/// `[mab]`, `[discretized]`, `[compact]` and `[solver]` are optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub method: Method,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub network: Network,
    #[serde(default)]
    pub mab: MabOverrides,
    #[serde(default)]
    pub discretized: DiscretizedParams,
    #[serde(default)]
    pub compact: CompactParams,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub schedule: Vec<LoadSwitch>,
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a spec file. Relative `out` and `table` paths are taken relative
    /// to the file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut spec = Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if spec.out.is_relative() {
            spec.out = base.join(&spec.out);
        }
        if let Some(t) = spec.compact.table.as_mut().filter(|t| t.is_relative()) {
            *t = base.join(&*t);
        }
        Ok(spec)
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.cfg()?;
        if self.network.gamma.is_nan() || self.network.gamma < 0.0 {
            bail!("gamma must be >= 0, got {}", self.network.gamma);
        }
        if self.method.is_bandit() {
            if self.seeds.is_empty() {
                bail!("method {:?} needs at least one seed", self.method);
            }
            let mcfg = self.mab_config(self.seeds[0]);
            mcfg.validate()?;
            if self.method == Method::MabDiscretized {
                GridSpec::from_step(self.discretized.d)?;
            }
            self.load_schedule()?;
        } else if !self.schedule.is_empty() {
            bail!("a load schedule only applies to bandit methods");
        }
        Ok(())
    }

    pub fn cfg(&self) -> anyhow::Result<NetworkConfig> {
        Ok(NetworkConfig::new(
            self.network.n_h,
            self.network.n_l,
            self.network.m,
        )?)
    }

    pub fn mab_config(&self, seed: u64) -> MabConfig {
        let base = match self.method {
            Method::MabCompact => MabConfig::compact(self.network.gamma),
            _ => MabConfig::discretized(self.network.gamma),
        };
        let o = &self.mab;
        MabConfig {
            alpha: o.alpha.unwrap_or(base.alpha),
            elite_fraction: o.elite_fraction.unwrap_or(base.elite_fraction),
            batch_size: o.batch_size.unwrap_or(base.batch_size),
            rho: o.rho.unwrap_or(base.rho),
            t: o.t.unwrap_or(base.t),
            runs: o.runs.unwrap_or(base.runs),
            source: o.source.unwrap_or(base.source),
            seed,
            ..base
        }
    }

    /// `[network]` load from pull 0, then each scheduled switch.
    pub fn load_schedule(&self) -> anyhow::Result<Vec<(usize, NetworkConfig)>> {
        let cfg = self.cfg()?;
        let mut out = vec![(0, cfg)];
        for (i, s) in self.schedule.iter().enumerate() {
            let load = cfg.with_load(s.n_h, s.n_l);
            if i == 0 && s.at == 0 {
                out[0].1 = load;
                continue;
            }
            let last = out[out.len() - 1].0;
            if s.at <= last {
                bail!(
                    "schedule entries must have increasing `at`, got {} after {last}",
                    s.at
                );
            }
            out.push((s.at, load));
        }
        Ok(out)
    }
}
