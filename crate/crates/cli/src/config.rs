//! TOML experiment files.
//!
//! ```toml
//! scenario = "fig1b"          # or: arms = ["bernoulli(0.7)", "bernoulli(0.5)"]
//! horizon = 100000
//! seeds = 20
//! c2 = [0.1, 0.25, 1.0]
//!
//! [policy.bge]
//! family = "bge"
//!
//! [policy.explore-commit]
//! schedule = "two-phase"
//! delta = 0.2
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use bge_core::bounds::tau_explore_commit;
use bge_core::sim::{
    build_scenario_with, log_checkpoints, MaliciousInit, OverrideBasis, ScenarioOverrides,
};
use bge_core::{
    BanditInstance, Cell, ExperimentGrid, PolicyFamily, PolicySpec, RewardDistribution, Schedule,
    SimulationConfig, DEFAULT_C2_GRID,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub scenario: Option<String>,
    /// Label for an explicit instance.
    pub name: Option<String>,
    pub arms: Option<Vec<String>>,
    pub horizon: Option<u64>,
    /// Number of arms of a named scenario.
    pub k: Option<usize>,
    pub seeds: Option<u64>,
    pub master_seed: Option<u64>,
    pub c2: Option<Vec<f64>>,
    pub checkpoints: Option<usize>,
    pub gap: Option<f64>,
    pub malicious_t0: Option<u64>,
    pub override_basis: Option<String>,
    #[serde(default)]
    pub policy: toml::Table,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub family: Option<String>,
    pub c2: Option<Vec<f64>>,
    pub schedule: Option<String>,
    #[serde(default)]
    pub oracle: bool,
    pub eta: Option<f64>,
    pub c: Option<f64>,
    pub delta: Option<f64>,
    pub tau: Option<u64>,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub horizon: Option<u64>,
    pub seeds: Option<u64>,
    pub master_seed: Option<u64>,
    pub c2: Option<Vec<f64>>,
}

pub fn load(path: &Path, cli: &CliOverrides) -> Result<ExperimentGrid> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let file: ExperimentFile =
        toml::from_str(&text).with_context(|| format!("cannot parse config {}", path.display()))?;
    file.into_grid(cli)
}

impl ExperimentFile {
    pub fn into_grid(self, cli: &CliOverrides) -> Result<ExperimentGrid> {
        let horizon = cli.horizon.or(self.horizon);
        let seeds = cli.seeds.or(self.seeds);
        let master_seed = cli.master_seed.or(self.master_seed);
        let basis = self
            .override_basis
            .as_deref()
            .map(str::parse::<OverrideBasis>)
            .transpose()?;

        let (label, mut base) = match (&self.scenario, &self.arms) {
            (Some(_), Some(_)) => bail!("config sets both `scenario` and `arms`"),
            (None, None) => bail!("config needs `scenario` or `arms`"),
            (Some(name), None) => {
                let name = name.parse()?;
                let o = ScenarioOverrides {
                    arms: self.k,
                    horizon,
                    seeds,
                    master_seed,
                    gap: self.gap,
                    malicious_t0: self.malicious_t0,
                    override_basis: basis,
                    ..Default::default()
                };
                let config = build_scenario_with(name, &o)?;
                (name.as_str().to_string(), config)
            }
            (None, Some(arms)) => {
                if self.gap.is_some() || self.k.is_some() {
                    bail!("`gap` and `k` only apply to named scenarios");
                }
                let arms = arms
                    .iter()
                    .map(|a| a.parse::<RewardDistribution>())
                    .collect::<Result<Vec<_>, _>>()?;
                let malicious = self.malicious_t0.map(|first| MaliciousInit {
                    first,
                    basis: basis.unwrap_or_default(),
                });
                let instance = BanditInstance::new(arms)?.with_malicious(malicious);
                let Some(horizon) = horizon else {
                    bail!("config with explicit `arms` needs `horizon`");
                };
                let mut config =
                    SimulationConfig::new(instance, PolicySpec::Bge { c: 1.0 }, horizon);
                config.num_replications = seeds.unwrap_or(1);
                config.master_seed = master_seed.unwrap_or(0);
                (self.name.clone().unwrap_or_else(|| "custom".into()), config)
            }
        };
        if let Some(n) = self.checkpoints {
            if n == 0 {
                bail!("`checkpoints` must be positive");
            }
            base.checkpoints = log_checkpoints(base.horizon, n);
        }

        let grid = cli
            .c2
            .clone()
            .or(self.c2)
            .unwrap_or_else(|| DEFAULT_C2_GRID.to_vec());
        if self.policy.is_empty() {
            bail!("config defines no [policy.*] sections");
        }
        let mut cells = Vec::new();
        for (name, value) in self.policy {
            let section: PolicySection = value
                .try_into()
                .with_context(|| format!("invalid section [policy.{name}]"))?;
            cells.extend(
                section
                    .cells(&name, &grid, &base)
                    .with_context(|| format!("invalid section [policy.{name}]"))?,
            );
        }
        let grid = ExperimentGrid {
            scenario: label,
            base,
            cells,
        };
        grid.validate()?;
        Ok(grid)
    }
}

impl PolicySection {
    fn cells(&self, name: &str, grid: &[f64], base: &SimulationConfig) -> Result<Vec<Cell>> {
        match (&self.family, &self.schedule) {
            (Some(_), Some(_)) => bail!("set either `family` or `schedule`, not both"),
            (None, None) => bail!("needs `family` or `schedule`"),
            (Some(family), None) => {
                if self.oracle
                    || self.eta.is_some()
                    || self.c.is_some()
                    || self.delta.is_some()
                    || self.tau.is_some()
                {
                    bail!("`family` sections take only an optional `c2` list");
                }
                let family: PolicyFamily = family.parse().map_err(anyhow::Error::msg)?;
                let values = self.c2.as_deref().unwrap_or(grid);
                if values.is_empty() {
                    bail!("empty C^2 list");
                }
                Ok(values.iter().map(|&c2| Cell::family(family, c2)).collect())
            }
            (None, Some(schedule)) => {
                if self.c2.is_some() {
                    bail!("`c2` applies to `family` sections");
                }
                let schedule = self.schedule(schedule, base)?;
                let spec = if self.oracle {
                    PolicySpec::OracleBoltzmann(schedule)
                } else {
                    PolicySpec::Boltzmann(schedule)
                };
                Ok(vec![Cell::fixed(name, spec)])
            }
        }
    }

    fn schedule(&self, kind: &str, base: &SimulationConfig) -> Result<Schedule> {
        let need = |v: Option<f64>, key: &str| {
            v.with_context(|| format!("schedule {kind:?} needs `{key}`"))
        };
        let schedule = match kind {
            "const" | "constant" => Schedule::Constant {
                eta: need(self.eta, "eta")?,
            },
            "log" => Schedule::LogT {
                c: need(self.c, "c")?,
            },
            "sqrt" => Schedule::SqrtT {
                c: need(self.c, "c")?,
            },
            "two-phase" => {
                let delta = need(self.delta, "delta")?;
                let tau = match self.tau {
                    Some(tau) => tau,
                    None => {
                        let k = base.instance.len() as u64;
                        tau_explore_commit(k, base.horizon, delta)?.ceil() as u64
                    }
                };
                Schedule::TwoPhase { delta, tau }
            }
            _ => bail!("unknown schedule {kind:?}; expected const, log, sqrt or two-phase"),
        };
        schedule.validate()?;
        Ok(schedule)
    }
}
