//! Stochastic multi-armed bandits with Boltzmann exploration and
//! Boltzmann–Gumbel exploration.
//!
//! The crate provides reward laws, estimators, selection rules, a
//! deterministic simulation engine and closed-form regret bounds. Every run
//! is reproducible from `(master_seed, run_index)`.
//!
//! ```
//! use bge_core::sim::{build_scenario_with, replicate, ScenarioName, ScenarioOverrides};
//!
//! let overrides = ScenarioOverrides { horizon: Some(1_000), seeds: Some(2), ..Default::default() };
//! let config = build_scenario_with(ScenarioName::Fig1a, &overrides).unwrap();
//! let rep = replicate(&config).unwrap();
//! assert_eq!(rep.traces.len(), 2);
//! assert!(rep.final_summary().mean >= 0.0);
//! ```

pub mod bounds;
pub mod distributions;
pub mod estimators;
pub mod experiment;
pub mod policies;
pub mod rng;
pub mod sim;

pub use distributions::RewardDistribution;
pub use experiment::{Cell, CellResult, ExperimentGrid, PolicyFamily, DEFAULT_C2_GRID};
pub use policies::{PolicySpec, Schedule};
pub use rng::{RngStream, StreamKey};
pub use sim::{
    BanditInstance, Checkpoint, RegretTrace, Replication, ScenarioName, SimError, SimulationConfig,
};
