//! Bandit environments, the interaction loop and pseudo-regret accounting.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::distributions::{DistributionError, RewardDistribution};
use crate::estimators::PolicyState;
use crate::policies::{ArmSelector, PolicyError, PolicySpec, Schedule};
use crate::rng::{RngStream, StreamKey};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown scenario {0:?}; expected one of fig1a, fig1b, thm2, thm5, prop1")]
    UnknownScenario(String),
}

/// What the malicious-initialization count refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverrideBasis {
    /// Rounds `1..=first` of the game.
    #[default]
    Rounds,
    /// The optimal arm's own first pulls.
    Pulls,
}

impl FromStr for OverrideBasis {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rounds" => Ok(Self::Rounds),
            "pulls" => Ok(Self::Pulls),
            _ => Err(SimError::Config(format!(
                "override basis must be rounds or pulls, got {s:?}"
            ))),
        }
    }
}

/// Forces the optimal arm's early rewards to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaliciousInit {
    pub first: u64,
    pub basis: OverrideBasis,
}

impl MaliciousInit {
    pub fn rounds(first: u64) -> Self {
        Self {
            first,
            basis: OverrideBasis::Rounds,
        }
    }

    #[inline]
    fn silences(&self, round: u64, pull: u64) -> bool {
        match self.basis {
            OverrideBasis::Rounds => round <= self.first,
            OverrideBasis::Pulls => pull < self.first,
        }
    }
}

/// Arms with the unique optimal arm at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    arms: Vec<RewardDistribution>,
    means: Vec<f64>,
    gaps: Vec<f64>,
    malicious: Option<MaliciousInit>,
}

impl BanditInstance {
    pub fn new(arms: Vec<RewardDistribution>) -> Result<Self, SimError> {
        if arms.len() < 2 {
            return Err(SimError::Instance(format!(
                "need at least 2 arms, got {}",
                arms.len()
            )));
        }
        let arms = arms
            .into_iter()
            .map(RewardDistribution::validated)
            .collect::<Result<Vec<_>, _>>()?;
        let means: Vec<f64> = arms.iter().map(RewardDistribution::mean).collect();
        let best = means[0];
        if let Some((i, m)) = means.iter().enumerate().skip(1).find(|(_, &m)| m >= best) {
            return Err(SimError::Instance(format!(
                "arm 0 must be the unique optimum, but arm {i} has mean {m} >= {best}"
            )));
        }
        let gaps = means.iter().map(|m| best - m).collect();
        Ok(Self {
            arms,
            means,
            gaps,
            malicious: None,
        })
    }

    pub fn with_malicious(mut self, malicious: Option<MaliciousInit>) -> Self {
        self.malicious = malicious;
        self
    }

    pub fn arms(&self) -> &[RewardDistribution] {
        &self.arms
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mu_star(&self) -> f64 {
        self.means[0]
    }

    /// `mu_star - mu_i`; entry 0 is zero.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn malicious(&self) -> Option<MaliciousInit> {
        self.malicious
    }

    /// Reward of the `pull`-th (0-based) pull of `arm`, played at `round`.
    #[inline]
    pub fn reward(
        &self,
        master_seed: u64,
        run_index: u64,
        arm: usize,
        pull: u64,
        round: u64,
    ) -> f64 {
        if arm == 0 {
            if let Some(m) = self.malicious {
                if m.silences(round, pull) {
                    return 0.0;
                }
            }
        }
        let mut stream = RngStream::new(master_seed, StreamKey::env(run_index, arm, pull));
        self.arms[arm].sample(&mut stream)
    }
}

/// `sum_i gap_i * N_i`.
pub fn pseudo_regret(pull_counts: &[u64], gaps: &[f64]) -> f64 {
    assert_eq!(
        pull_counts.len(),
        gaps.len(),
        "count and gap vectors differ in length"
    );
    pull_counts
        .iter()
        .zip(gaps)
        .map(|(&n, &g)| g * n as f64)
        .sum()
}

/// `n` log-spaced rounds in `[1, horizon)` followed by `horizon` itself,
/// bumped upwards where rounding would repeat a value. Horizons too short
/// for that many distinct points get every round.
pub fn log_checkpoints(horizon: u64, n: usize) -> Vec<u64> {
    assert!(horizon >= 1);
    if horizon as usize <= n + 1 {
        return (1..=horizon).collect();
    }
    let mut out = Vec::with_capacity(n + 1);
    let log_h = (horizon as f64).ln();
    let mut last = 0u64;
    for j in 0..n {
        let remaining = (n - j) as u64;
        let raw = (log_h * j as f64 / n as f64).exp().round() as u64;
        let t = raw.max(last + 1).min(horizon - remaining);
        out.push(t);
        last = t;
    }
    out.push(horizon);
    out
}

pub const DEFAULT_CHECKPOINTS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub instance: BanditInstance,
    pub policy: PolicySpec,
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    pub master_seed: u64,
    pub num_replications: u64,
}

impl SimulationConfig {
    /// Config with the default log-spaced checkpoint grid.
    pub fn new(instance: BanditInstance, policy: PolicySpec, horizon: u64) -> Self {
        Self {
            instance,
            policy,
            horizon,
            checkpoints: log_checkpoints(horizon, DEFAULT_CHECKPOINTS),
            master_seed: 0,
            num_replications: 1,
        }
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self.checkpoints = log_checkpoints(horizon, DEFAULT_CHECKPOINTS);
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let k = self.instance.len() as u64;
        if self.horizon < k {
            return Err(SimError::Config(format!(
                "horizon {} is shorter than the {} initialization rounds",
                self.horizon, k
            )));
        }
        if self.checkpoints.last() != Some(&self.horizon) {
            return Err(SimError::Config(
                "last checkpoint must equal the horizon".into(),
            ));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) || self.checkpoints[0] < 1 {
            return Err(SimError::Config(
                "checkpoints must be strictly increasing from 1".into(),
            ));
        }
        if self.num_replications < 1 {
            return Err(SimError::Config("need at least one replication".into()));
        }
        self.policy.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    pub cum_regret: f64,
    pub pull_counts: Vec<u64>,
}

/// Pseudo-regret of one run at the configured checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub policy: String,
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
}

impl RegretTrace {
    pub fn last(&self) -> &Checkpoint {
        self.checkpoints
            .last()
            .expect("trace has at least one checkpoint")
    }

    pub fn at(&self, t: u64) -> Option<&Checkpoint> {
        self.checkpoints.iter().find(|c| c.t == t)
    }
}

/// Plays one game of `config.horizon` rounds.
///
/// Rounds `1..=K` pull the arms in order; later rounds ask the policy.
/// Randomness comes from per-pull environment streams and one policy stream,
/// all keyed by `run_index`.
pub fn run_episode(config: &SimulationConfig, run_index: u64) -> Result<RegretTrace, SimError> {
    play(config, run_index, |_, _, _| {})
}

/// [`run_episode`], reporting every `(round, arm, reward)` to `observe`.
pub fn play(
    config: &SimulationConfig,
    run_index: u64,
    mut observe: impl FnMut(u64, usize, f64),
) -> Result<RegretTrace, SimError> {
    config.validate()?;
    let instance = &config.instance;
    let k = instance.len();
    let mut state: PolicyState = config.policy.initial_state(k);
    let mut selector = ArmSelector::new(config.policy)?;
    let mut policy_stream = RngStream::new(config.master_seed, StreamKey::policy(run_index));
    let true_means = config.policy.needs_true_means().then(|| instance.means());

    let mut checkpoints = Vec::with_capacity(config.checkpoints.len());
    let mut next = config.checkpoints.iter().copied().peekable();
    for t in 1..=config.horizon {
        let arm = if t <= k as u64 {
            (t - 1) as usize
        } else {
            selector.select(&mut state, true_means, t, &mut policy_stream)?
        };
        let reward = instance.reward(config.master_seed, run_index, arm, state.count(arm), t);
        observe(t, arm, reward);
        state.update(arm, reward);
        if next.peek() == Some(&t) {
            next.next();
            checkpoints.push(Checkpoint {
                t,
                cum_regret: pseudo_regret(state.counts(), instance.gaps()),
                pull_counts: state.counts().to_vec(),
            });
        }
    }
    Ok(RegretTrace {
        policy: config.policy.to_string(),
        seed: run_index,
        checkpoints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointSummary {
    pub t: u64,
    pub mean: f64,
    /// Sample standard deviation; zero for a single replication.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub traces: Vec<RegretTrace>,
    pub summary: Vec<CheckpointSummary>,
}

impl Replication {
    pub fn from_traces(traces: Vec<RegretTrace>) -> Self {
        assert!(!traces.is_empty());
        let n = traces.len() as f64;
        let summary = (0..traces[0].checkpoints.len())
            .map(|j| {
                let vals: Vec<f64> = traces
                    .iter()
                    .map(|tr| tr.checkpoints[j].cum_regret)
                    .collect();
                let mean = vals.iter().sum::<f64>() / n;
                let sd = if vals.len() > 1 {
                    (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                } else {
                    0.0
                };
                CheckpointSummary {
                    t: traces[0].checkpoints[j].t,
                    mean,
                    sd,
                    min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                    max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect();
        Self { traces, summary }
    }

    pub fn final_summary(&self) -> &CheckpointSummary {
        self.summary.last().expect("non-empty summary")
    }

    pub fn summary_at(&self, t: u64) -> Option<&CheckpointSummary> {
        self.summary.iter().find(|s| s.t == t)
    }
}

/// Runs `num_replications` independent episodes (run indices `0..n`) on the
/// current rayon pool and aggregates them in run order.
pub fn replicate(config: &SimulationConfig) -> Result<Replication, SimError> {
    config.validate()?;
    let traces = (0..config.num_replications)
        .into_par_iter()
        .map(|r| run_episode(config, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Replication::from_traces(traces))
}

/// Named environments used by the experiments and the lower-bound
/// constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    /// Ten Bernoulli arms, gap 0.01, horizon 10^6.
    Fig1a,
    /// `Fig1a` with the optimal arm silenced for the first 5000 rounds.
    Fig1b,
    /// Bernoulli(1/2 + gap) against a deterministic 1/2.
    Thm2Lockin,
    /// Deterministic arms; the optimum pays `sqrt(K/T) log K`.
    Thm5Worstcase,
    /// Two arms with Boltzmann on the true means.
    Prop1Oracle,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        Self::Fig1a,
        Self::Fig1b,
        Self::Thm2Lockin,
        Self::Thm5Worstcase,
        Self::Prop1Oracle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fig1a => "fig1a",
            Self::Fig1b => "fig1b",
            Self::Thm2Lockin => "thm2",
            Self::Thm5Worstcase => "thm5",
            Self::Prop1Oracle => "prop1",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "fig1a" => Ok(Self::Fig1a),
            "fig1b" => Ok(Self::Fig1b),
            "thm2" | "thm2_lockin" => Ok(Self::Thm2Lockin),
            "thm5" | "thm5_worstcase" => Ok(Self::Thm5Worstcase),
            "prop1" | "prop1_oracle" => Ok(Self::Prop1Oracle),
            _ => Err(SimError::UnknownScenario(s.to_string())),
        }
    }
}

/// Optional replacements for a scenario's defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioOverrides {
    pub arms: Option<usize>,
    pub horizon: Option<u64>,
    pub gap: Option<f64>,
    pub malicious_t0: Option<u64>,
    pub override_basis: Option<OverrideBasis>,
    /// Constant learning rate of the oracle scenario.
    pub eta: Option<f64>,
    /// Coefficient `c` of `eta_t = c log t` in the lock-in scenario.
    pub log_rate: Option<f64>,
    pub seeds: Option<u64>,
    pub master_seed: Option<u64>,
}

pub const FIG1_ARMS: usize = 10;
pub const FIG1_GAP: f64 = 0.01;
pub const FIG1_HORIZON: u64 = 1_000_000;
pub const FIG1_MALICIOUS_T0: u64 = 5_000;

fn bernoulli_field(k: usize, gap: f64) -> Result<Vec<RewardDistribution>, SimError> {
    let mut arms = vec![RewardDistribution::bernoulli(0.5 + gap)?];
    arms.extend(std::iter::repeat_n(
        RewardDistribution::bernoulli(0.5)?,
        k - 1,
    ));
    Ok(arms)
}

/// Scenario with its default parameters.
pub fn build_scenario(name: ScenarioName) -> Result<SimulationConfig, SimError> {
    build_scenario_with(name, &ScenarioOverrides::default())
}

pub fn build_scenario_with(
    name: ScenarioName,
    o: &ScenarioOverrides,
) -> Result<SimulationConfig, SimError> {
    let positive_gap = |g: f64| {
        if g > 0.0 && g < 0.5 {
            Ok(g)
        } else {
            Err(SimError::Config(format!(
                "gap must lie in (0, 1/2), got {g}"
            )))
        }
    };
    let (instance, policy, horizon, reps) = match name {
        ScenarioName::Fig1a | ScenarioName::Fig1b => {
            let k = o.arms.unwrap_or(FIG1_ARMS);
            let gap = positive_gap(o.gap.unwrap_or(FIG1_GAP))?;
            let mut instance = BanditInstance::new(bernoulli_field(k, gap)?)?;
            if name == ScenarioName::Fig1b {
                instance = instance.with_malicious(Some(MaliciousInit {
                    first: o.malicious_t0.unwrap_or(FIG1_MALICIOUS_T0),
                    basis: o.override_basis.unwrap_or_default(),
                }));
            }
            (
                instance,
                PolicySpec::Bge { c: 0.5 },
                o.horizon.unwrap_or(FIG1_HORIZON),
                20,
            )
        }
        ScenarioName::Thm2Lockin => {
            let gap = positive_gap(o.gap.unwrap_or(0.25))?;
            let instance = BanditInstance::new(vec![
                RewardDistribution::bernoulli(0.5 + gap)?,
                RewardDistribution::deterministic(0.5)?,
            ])?;
            let c = o.log_rate.unwrap_or(2.5);
            let policy = PolicySpec::Boltzmann(Schedule::LogT { c });
            (instance, policy, o.horizon.unwrap_or(100_000), 200)
        }
        ScenarioName::Thm5Worstcase => {
            let k = o.arms.unwrap_or(10);
            let horizon = o.horizon.unwrap_or(100_000);
            let gap = crate::bounds::thm5_gap(k as u64, horizon)
                .map_err(|e| SimError::Config(e.to_string()))?;
            let mut arms = vec![RewardDistribution::deterministic(gap)?];
            arms.extend(std::iter::repeat_n(
                RewardDistribution::deterministic(0.0)?,
                k - 1,
            ));
            (
                BanditInstance::new(arms)?,
                PolicySpec::Bge { c: 1.0 },
                horizon,
                10,
            )
        }
        ScenarioName::Prop1Oracle => {
            let gap = positive_gap(o.gap.unwrap_or(0.2))?;
            let instance = BanditInstance::new(vec![
                RewardDistribution::bernoulli(0.5 + gap)?,
                RewardDistribution::bernoulli(0.5)?,
            ])?;
            let eta = o.eta.unwrap_or(10.0);
            let policy = PolicySpec::OracleBoltzmann(Schedule::Constant { eta });
            (instance, policy, o.horizon.unwrap_or(100_000), 1)
        }
    };
    let mut config = SimulationConfig::new(instance, policy, horizon);
    config.num_replications = o.seeds.unwrap_or(reps);
    config.master_seed = o.master_seed.unwrap_or(0);
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det_pair() -> BanditInstance {
        BanditInstance::new(vec![
            RewardDistribution::deterministic(0.6).unwrap(),
            RewardDistribution::deterministic(0.4).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn pseudo_regret_examples() {
        assert_eq!(pseudo_regret(&[5, 6, 7], &[0.0; 3]), 0.0);
        let counts = [0, 100, 100, 100, 100, 100, 100, 100, 100, 100];
        let mut gaps = [0.01; 10];
        gaps[0] = 0.0;
        assert!((pseudo_regret(&counts, &gaps) - 9.0).abs() < 1e-12);
        assert!((pseudo_regret(&[990, 10], &[0.0, 0.2]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn instance_requires_unique_optimum_first() {
        let b = |p| RewardDistribution::bernoulli(p).unwrap();
        assert!(BanditInstance::new(vec![b(0.5), b(0.6)]).is_err());
        assert!(BanditInstance::new(vec![b(0.5), b(0.5)]).is_err());
        assert!(BanditInstance::new(vec![b(0.5)]).is_err());
        let inst = BanditInstance::new(vec![b(0.6), b(0.5), b(0.2)]).unwrap();
        assert!((inst.gaps()[2] - 0.4).abs() < 1e-15);
        assert_eq!(inst.gaps()[0], 0.0);
    }

    #[test]
    fn checkpoint_grid() {
        let g = log_checkpoints(1000, 50);
        assert_eq!(g.len(), 51);
        assert_eq!(g[0], 1);
        assert_eq!(*g.last().unwrap(), 1000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log_checkpoints(10, 50), (1..=10).collect::<Vec<_>>());
        let g = log_checkpoints(1_000_000, 50);
        assert_eq!(g.len(), 51);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g[49], 758_578);
    }

    #[test]
    fn two_rounds_two_arms() {
        let mut cfg = SimulationConfig::new(det_pair(), PolicySpec::Bge { c: 0.5 }, 2);
        cfg.checkpoints = vec![1, 2];
        let tr = run_episode(&cfg, 0).unwrap();
        assert_eq!(tr.last().pull_counts, vec![1, 1]);
        assert!((tr.last().cum_regret - 0.2).abs() < 1e-15);
        assert_eq!(tr.checkpoints[0].cum_regret, 0.0);
    }

    #[test]
    fn deterministic_regret_is_gap_times_pulls() {
        let cfg = SimulationConfig::new(det_pair(), PolicySpec::Ucb { c2: 0.25 }, 5_000);
        let tr = run_episode(&cfg, 0).unwrap();
        for cp in &tr.checkpoints {
            assert_eq!(cp.pull_counts.iter().sum::<u64>(), cp.t);
            assert!((cp.cum_regret - 0.2 * cp.pull_counts[1] as f64).abs() < 1e-9);
        }
        assert!(tr.last().pull_counts[1] < 500);
    }

    #[test]
    fn horizon_shorter_than_arms_is_rejected() {
        let cfg = SimulationConfig::new(det_pair(), PolicySpec::Bge { c: 0.5 }, 1);
        assert!(matches!(run_episode(&cfg, 0), Err(SimError::Config(_))));
    }

    #[test]
    fn traces_are_reproducible_and_monotone() {
        let mut cfg = build_scenario(ScenarioName::Fig1b)
            .unwrap()
            .with_horizon(20_000);
        cfg.instance = cfg
            .instance
            .with_malicious(Some(MaliciousInit::rounds(500)));
        for policy in [
            PolicySpec::Bge { c: 0.5 },
            PolicySpec::Boltzmann(Schedule::LogT { c: 4.0 }),
            PolicySpec::BgeCatoni { c: 0.5 },
        ] {
            cfg.policy = policy;
            let a = run_episode(&cfg, 3).unwrap();
            let b = run_episode(&cfg, 3).unwrap();
            assert_eq!(a, b);
            for w in a.checkpoints.windows(2) {
                assert!(w[0].cum_regret <= w[1].cum_regret);
            }
            for cp in &a.checkpoints {
                assert_eq!(cp.pull_counts.iter().sum::<u64>(), cp.t);
                assert_eq!(
                    cp.cum_regret,
                    pseudo_regret(&cp.pull_counts, cfg.instance.gaps())
                );
            }
        }
    }

    #[test]
    fn rewards_are_common_across_policies() {
        let inst = build_scenario(ScenarioName::Fig1a).unwrap().instance;
        // The reward of a given (arm, pull) does not depend on the round it
        // happens in, so any two policies see the same sequence per arm.
        for arm in 0..inst.len() {
            for pull in 0..50 {
                let a = inst.reward(7, 2, arm, pull, 11);
                let b = inst.reward(7, 2, arm, pull, 999_999);
                assert_eq!(a, b);
            }
        }
        let cfg = build_scenario(ScenarioName::Fig1a)
            .unwrap()
            .with_horizon(3_000);
        let observed = |policy| {
            let mut cfg = cfg.clone();
            cfg.policy = policy;
            let mut per_arm = vec![Vec::new(); cfg.instance.len()];
            play(&cfg, 4, |_, arm, r| per_arm[arm].push(r)).unwrap();
            per_arm
        };
        let a = observed(PolicySpec::Ucb { c2: 0.25 });
        let b = observed(PolicySpec::Boltzmann(Schedule::Constant { eta: 1.0 }));
        assert_ne!(
            a.iter().map(Vec::len).collect::<Vec<_>>(),
            b.iter().map(Vec::len).collect::<Vec<_>>()
        );
        for (x, y) in a.iter().zip(&b) {
            let n = x.len().min(y.len());
            assert_eq!(x[..n], y[..n]);
        }
    }

    #[test]
    fn malicious_override_by_rounds_and_pulls() {
        let b = |p| RewardDistribution::bernoulli(p).unwrap();
        let base = BanditInstance::new(vec![b(1.0), b(0.0)]).unwrap();
        let rounds = base.clone().with_malicious(Some(MaliciousInit::rounds(10)));
        assert_eq!(rounds.reward(0, 0, 0, 0, 10), 0.0);
        assert_eq!(rounds.reward(0, 0, 0, 0, 11), 1.0);
        assert_eq!(rounds.reward(0, 0, 1, 0, 1), 0.0);
        let pulls = base.with_malicious(Some(MaliciousInit {
            first: 3,
            basis: OverrideBasis::Pulls,
        }));
        assert_eq!(pulls.reward(0, 0, 0, 2, 1_000), 0.0);
        assert_eq!(pulls.reward(0, 0, 0, 3, 4), 1.0);
    }

    #[test]
    fn replicate_single_equals_trace() {
        let mut cfg = build_scenario(ScenarioName::Fig1a)
            .unwrap()
            .with_horizon(2_000);
        cfg.num_replications = 1;
        let rep = replicate(&cfg).unwrap();
        let tr = run_episode(&cfg, 0).unwrap();
        for (s, cp) in rep.summary.iter().zip(&tr.checkpoints) {
            assert_eq!(s.mean, cp.cum_regret);
            assert_eq!(s.min, cp.cum_regret);
            assert_eq!(s.max, cp.cum_regret);
            assert_eq!(s.sd, 0.0);
        }
    }

    #[test]
    fn deterministic_instance_and_policy_have_zero_spread() {
        let mut cfg = SimulationConfig::new(det_pair(), PolicySpec::Ucb { c2: 0.5 }, 3_000);
        cfg.num_replications = 5;
        let rep = replicate(&cfg).unwrap();
        assert!(rep.summary.iter().all(|s| s.sd == 0.0 && s.min == s.max));
    }

    #[test]
    fn standard_error_shrinks_with_replications() {
        let mut cfg = build_scenario(ScenarioName::Fig1a)
            .unwrap()
            .with_horizon(5_000);
        cfg.policy = PolicySpec::Bge { c: 0.5 };
        let se = |n: u64, cfg: &mut SimulationConfig| {
            cfg.num_replications = n;
            cfg.master_seed = 1000 + n;
            let s = *replicate(cfg).unwrap().final_summary();
            s.sd / (n as f64).sqrt()
        };
        let ratio = se(10, &mut cfg) / se(40, &mut cfg);
        assert!((ratio - 2.0).abs() <= 0.8, "ratio {ratio}");
    }

    #[test]
    fn scenario_defaults() {
        let f = build_scenario(ScenarioName::Fig1a).unwrap();
        assert_eq!(f.instance.len(), 10);
        assert_eq!(f.horizon, 1_000_000);
        assert!((f.instance.gaps()[1] - 0.01).abs() < 1e-12);
        assert!(f.instance.malicious().is_none());
        let f = build_scenario(ScenarioName::Fig1b).unwrap();
        assert_eq!(f.instance.malicious().unwrap().first, 5_000);
        let w = build_scenario(ScenarioName::Thm5Worstcase).unwrap();
        assert!((w.instance.mu_star() - 0.023_025_850_929_940_46).abs() < 1e-12);
        assert!(w.instance.means()[1..].iter().all(|&m| m == 0.0));
        let l = build_scenario(ScenarioName::Thm2Lockin).unwrap();
        assert_eq!(
            l.instance.arms()[1],
            RewardDistribution::Deterministic { v: 0.5 }
        );
        assert!("ucb-land".parse::<ScenarioName>().is_err());
        for name in ScenarioName::ALL {
            assert_eq!(name.as_str().parse::<ScenarioName>().unwrap(), name);
        }
    }

    #[test]
    fn oracle_scenario_pull_rate() {
        let cfg = build_scenario(ScenarioName::Prop1Oracle).unwrap();
        let tr = run_episode(&cfg, 0).unwrap();
        let rate = (tr.last().pull_counts[1] - 1) as f64 / (cfg.horizon - 2) as f64;
        assert!((rate - 0.119_202_922_022_117_55).abs() < 0.01, "{rate}");
    }
}
