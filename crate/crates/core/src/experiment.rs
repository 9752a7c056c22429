//! Policy × C² grids over a common environment.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::policies::{PolicySpec, Schedule};
use crate::sim::{
    build_scenario_with, run_episode, Replication, ScenarioName, ScenarioOverrides, SimError,
    SimulationConfig,
};

/// Default C² grid, log-spaced over [0.01, 10] and containing 1/4.
pub const DEFAULT_C2_GRID: [f64; 7] = [0.01, 0.03, 0.1, 0.25, 1.0, 3.0, 10.0];

/// Policies parameterised by a single constant C².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyFamily {
    /// `eta_t = 1 / C^2`
    BeConst,
    /// `eta_t = log t / C^2`
    BeLog,
    /// `eta_t = sqrt t / C^2`
    BeSqrt,
    Bge,
    BgeCatoni,
    Ucb,
}

impl PolicyFamily {
    /// The set compared in the Figure-1 style experiments.
    pub const FIGURE: [PolicyFamily; 5] = [
        Self::BeConst,
        Self::BeLog,
        Self::BeSqrt,
        Self::Bge,
        Self::Ucb,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Self::BeConst => "BE-const",
            Self::BeLog => "BE-log",
            Self::BeSqrt => "BE-sqrt",
            Self::Bge => "BGE",
            Self::BgeCatoni => "BGE-Catoni",
            Self::Ucb => "UCB",
        }
    }

    pub fn is_boltzmann(&self) -> bool {
        matches!(self, Self::BeConst | Self::BeLog | Self::BeSqrt)
    }

    pub fn spec(&self, c2: f64) -> PolicySpec {
        match self {
            Self::BeConst => PolicySpec::Boltzmann(Schedule::Constant { eta: 1.0 / c2 }),
            Self::BeLog => PolicySpec::Boltzmann(Schedule::LogT { c: 1.0 / c2 }),
            Self::BeSqrt => PolicySpec::Boltzmann(Schedule::SqrtT { c: 1.0 / c2 }),
            Self::Bge => PolicySpec::Bge { c: c2.sqrt() },
            Self::BgeCatoni => PolicySpec::BgeCatoni { c: c2.sqrt() },
            Self::Ucb => PolicySpec::Ucb { c2 },
        }
    }
}

impl fmt::Display for PolicyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolicyFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "be-const" | "const" => Self::BeConst,
            "be-log" | "log" => Self::BeLog,
            "be-sqrt" | "sqrt" => Self::BeSqrt,
            "bge" => Self::Bge,
            "bge-catoni" | "catoni" => Self::BgeCatoni,
            "ucb" => Self::Ucb,
            _ => {
                return Err(format!(
                    "unknown policy family {s:?}; expected be-const, be-log, be-sqrt, bge, bge-catoni or ucb"
                ))
            }
        })
    }
}

/// One (policy, C²) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub policy: String,
    pub c2: Option<f64>,
    pub spec: PolicySpec,
}

impl Cell {
    pub fn family(family: PolicyFamily, c2: f64) -> Self {
        Self {
            policy: family.label().to_string(),
            c2: Some(c2),
            spec: family.spec(c2),
        }
    }

    pub fn fixed(label: impl Into<String>, spec: PolicySpec) -> Self {
        Self {
            policy: label.into(),
            c2: None,
            spec,
        }
    }
}

/// Cells sharing an environment, horizon, checkpoints and seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub scenario: String,
    /// Environment and run settings; its `policy` field is ignored.
    pub base: SimulationConfig,
    pub cells: Vec<Cell>,
}

impl ExperimentGrid {
    pub fn cross(
        scenario: impl Into<String>,
        base: SimulationConfig,
        families: &[PolicyFamily],
        c2_grid: &[f64],
    ) -> Self {
        let cells = families
            .iter()
            .flat_map(|&f| c2_grid.iter().map(move |&c2| Cell::family(f, c2)))
            .collect();
        Self {
            scenario: scenario.into(),
            base,
            cells,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.cells.is_empty() {
            return Err(SimError::Config("experiment grid has no cells".into()));
        }
        for cell in &self.cells {
            if let Some(c2) = cell.c2 {
                if !(c2 > 0.0 && c2.is_finite()) {
                    return Err(SimError::Config(format!("C^2 must be positive, got {c2}")));
                }
            }
            self.config_for(cell).validate()?;
        }
        Ok(())
    }

    pub fn config_for(&self, cell: &Cell) -> SimulationConfig {
        SimulationConfig {
            policy: cell.spec,
            ..self.base.clone()
        }
    }

    /// Runs every (cell, seed) pair on the current rayon pool. Results come
    /// back in cell order regardless of completion order.
    pub fn run(&self) -> Result<Vec<CellResult>, SimError> {
        self.validate()?;
        let reps = self.base.num_replications;
        let configs: Vec<SimulationConfig> =
            self.cells.iter().map(|c| self.config_for(c)).collect();
        let jobs: Vec<(usize, u64)> = (0..configs.len())
            .flat_map(|i| (0..reps).map(move |r| (i, r)))
            .collect();
        let mut traces = jobs
            .par_iter()
            .map(|&(i, r)| run_episode(&configs[i], r))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter();
        Ok(self
            .cells
            .iter()
            .map(|cell| CellResult {
                cell: cell.clone(),
                replication: Replication::from_traces(
                    traces.by_ref().take(reps as usize).collect(),
                ),
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub replication: Replication,
}

impl CellResult {
    pub fn final_mean(&self) -> f64 {
        self.replication.final_summary().mean
    }
}

/// Grid a named scenario runs by default: the five compared families across
/// `c2_grid` for the figure scenarios, the scenario's own policy otherwise.
pub fn scenario_grid(
    name: ScenarioName,
    overrides: &ScenarioOverrides,
    c2_grid: &[f64],
) -> Result<ExperimentGrid, SimError> {
    let base = build_scenario_with(name, overrides)?;
    Ok(match name {
        ScenarioName::Fig1a | ScenarioName::Fig1b => {
            ExperimentGrid::cross(name.as_str(), base, &PolicyFamily::FIGURE, c2_grid)
        }
        ScenarioName::Thm5Worstcase => {
            let cells = vec![Cell::family(PolicyFamily::Bge, 1.0)];
            ExperimentGrid {
                scenario: name.as_str().into(),
                base,
                cells,
            }
        }
        ScenarioName::Thm2Lockin | ScenarioName::Prop1Oracle => {
            let label = if base.policy.needs_true_means() {
                "Oracle-BE"
            } else {
                "BE-log"
            };
            let cells = vec![Cell::fixed(label, base.policy)];
            ExperimentGrid {
                scenario: name.as_str().into(),
                base,
                cells,
            }
        }
    })
}
