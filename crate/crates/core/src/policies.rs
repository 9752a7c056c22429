//! Arm-selection rules.
//!
//! Time is 1-based. The caller pulls every arm once before the first call
//! into a selector, so every estimate is defined and `t > K` whenever a
//! schedule is evaluated. A selection at round `t` sees statistics through
//! round `t - 1`.

use std::fmt;

use thiserror::Error;

use crate::distributions::sample_standard_gumbel;
use crate::estimators::PolicyState;
use crate::rng::RngStream;

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("{0} must be positive and finite, got {1}")]
    NonPositive(&'static str, f64),
    #[error("two-phase schedule needs tau * delta^2 > 1 (tau = {tau}, delta = {delta})")]
    TwoPhaseDegenerate { tau: u64, delta: f64 },
    #[error("two-phase learning rate at t = {t} is not positive (t * delta^2 = {product})")]
    TwoPhaseNonPositive { t: u64, product: f64 },
    #[error("oracle Boltzmann needs the true arm means")]
    MissingTrueMeans,
    #[error("policy state has {state} arms but {given} means were supplied")]
    ArmMismatch { state: usize, given: usize },
}

fn positive(name: &'static str, v: f64) -> Result<f64, PolicyError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(PolicyError::NonPositive(name, v))
    }
}

/// Learning-rate sequence `eta_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Constant {
        eta: f64,
    },
    /// `c * log t`
    LogT {
        c: f64,
    },
    /// `c * sqrt t`
    SqrtT {
        c: f64,
    },
    /// `1` for `t < tau`, `log(t delta^2) / delta` afterwards.
    TwoPhase {
        delta: f64,
        tau: u64,
    },
}

impl Schedule {
    pub fn validate(&self) -> Result<(), PolicyError> {
        match *self {
            Self::Constant { eta } => positive("eta", eta).map(drop),
            Self::LogT { c } | Self::SqrtT { c } => positive("schedule coefficient", c).map(drop),
            Self::TwoPhase { delta, tau } => {
                positive("delta", delta)?;
                if tau as f64 * delta * delta <= 1.0 {
                    return Err(PolicyError::TwoPhaseDegenerate { tau, delta });
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn eta(&self, t: u64) -> Result<f64, PolicyError> {
        debug_assert!(t >= 1);
        let tf = t as f64;
        Ok(match *self {
            Self::Constant { eta } => eta,
            Self::LogT { c } => c * tf.ln(),
            Self::SqrtT { c } => c * tf.sqrt(),
            Self::TwoPhase { delta, tau } => {
                if t < tau {
                    1.0
                } else {
                    let product = tf * delta * delta;
                    if product <= 1.0 {
                        return Err(PolicyError::TwoPhaseNonPositive { t, product });
                    }
                    product.ln() / delta
                }
            }
        })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { eta } => write!(f, "const({eta})"),
            Self::LogT { c } => write!(f, "log({c})"),
            Self::SqrtT { c } => write!(f, "sqrt({c})"),
            Self::TwoPhase { delta, tau } => write!(f, "two-phase({delta},{tau})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    Boltzmann(Schedule),
    /// Boltzmann–Gumbel exploration on empirical means, `beta_i = C / sqrt(N_i)`.
    Bge {
        c: f64,
    },
    /// Boltzmann–Gumbel exploration on Catoni estimates.
    BgeCatoni {
        c: f64,
    },
    /// Index `mu_i + sqrt(c2 log t / N_i)`.
    Ucb {
        c2: f64,
    },
    /// Boltzmann with the estimates frozen at the true means.
    OracleBoltzmann(Schedule),
}

impl PolicySpec {
    pub fn validate(&self) -> Result<(), PolicyError> {
        match self {
            Self::Boltzmann(s) | Self::OracleBoltzmann(s) => s.validate(),
            Self::Bge { c } | Self::BgeCatoni { c } => positive("C", *c).map(drop),
            Self::Ucb { c2 } => positive("C^2", *c2).map(drop),
        }
    }

    /// Fresh per-arm state of the kind this policy reads.
    pub fn initial_state(&self, arms: usize) -> PolicyState {
        match *self {
            Self::BgeCatoni { c } => PolicyState::with_catoni(arms, c),
            _ => PolicyState::new(arms),
        }
    }

    pub fn needs_true_means(&self) -> bool {
        matches!(self, Self::OracleBoltzmann(_))
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Boltzmann(s) => write!(f, "boltzmann[{s}]"),
            Self::Bge { c } => write!(f, "bge[C={c}]"),
            Self::BgeCatoni { c } => write!(f, "bge-catoni[C={c}]"),
            Self::Ucb { c2 } => write!(f, "ucb[C2={c2}]"),
            Self::OracleBoltzmann(s) => write!(f, "oracle-boltzmann[{s}]"),
        }
    }
}

/// Unnormalised softmax weights `exp(eta (mu_i - max mu))` written into
/// `out`; returns their sum.
#[inline]
fn softmax_weights(means: &[f64], eta: f64, out: &mut Vec<f64>) -> f64 {
    let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.clear();
    let mut total = 0.0;
    for &m in means {
        let w = (eta * (m - top)).exp();
        total += w;
        out.push(w);
    }
    total
}

/// Boltzmann distribution `p_i ∝ exp(eta * mu_i)`.
pub fn boltzmann_probs(means: &[f64], eta: f64) -> Vec<f64> {
    let mut w = Vec::with_capacity(means.len());
    let total = softmax_weights(means, eta, &mut w);
    w.iter_mut().for_each(|p| *p /= total);
    w
}

/// Index of the first maximum.
#[inline]
fn first_argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// `argmax_i mu_i + scale_i * z_i` with fixed perturbations.
pub fn perturbed_argmax(means: &[f64], scales: &[f64], perturbations: &[f64]) -> usize {
    first_argmax(
        means
            .iter()
            .zip(scales)
            .zip(perturbations)
            .map(|((m, s), z)| m + s * z),
    )
}

/// Boltzmann–Gumbel choice with fresh perturbations from `stream`.
pub fn bge_select(means: &[f64], counts: &[u64], c: f64, stream: &mut RngStream) -> usize {
    first_argmax(means.iter().zip(counts).map(|(&m, &n)| {
        debug_assert!(n >= 1);
        m + c / (n as f64).sqrt() * sample_standard_gumbel(stream)
    }))
}

pub fn ucb_select(means: &[f64], counts: &[u64], t: u64, c2: f64) -> usize {
    let log_t = (t as f64).ln();
    first_argmax(
        means
            .iter()
            .zip(counts)
            .map(|(&m, &n)| m + (c2 * log_t / n as f64).sqrt()),
    )
}

/// Draws an index from unnormalised weights with a single uniform.
#[inline]
fn sample_weighted(weights: &[f64], total: f64, stream: &mut RngStream) -> usize {
    let mut target = stream.open_unit() * total;
    for (i, &w) in weights.iter().enumerate() {
        target -= w;
        if target < 0.0 {
            return i;
        }
    }
    // Rounding left a sliver past the last bucket; hand it to the last
    // arm with positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// A policy together with its scratch buffers.
#[derive(Debug, Clone)]
pub struct ArmSelector {
    spec: PolicySpec,
    means: Vec<f64>,
    weights: Vec<f64>,
}

impl ArmSelector {
    pub fn new(spec: PolicySpec) -> Result<Self, PolicyError> {
        spec.validate()?;
        Ok(Self {
            spec,
            means: Vec::new(),
            weights: Vec::new(),
        })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    /// Chooses the arm for round `t`.
    pub fn select(
        &mut self,
        state: &mut PolicyState,
        true_means: Option<&[f64]>,
        t: u64,
        stream: &mut RngStream,
    ) -> Result<usize, PolicyError> {
        let k = state.arms();
        match self.spec {
            PolicySpec::Boltzmann(schedule) => {
                let eta = schedule.eta(t)?;
                self.means.clear();
                self.means.extend((0..k).map(|i| state.empirical_mean(i)));
                let total = softmax_weights(&self.means, eta, &mut self.weights);
                Ok(sample_weighted(&self.weights, total, stream))
            }
            PolicySpec::OracleBoltzmann(schedule) => {
                let means = true_means.ok_or(PolicyError::MissingTrueMeans)?;
                if means.len() != k {
                    return Err(PolicyError::ArmMismatch {
                        state: k,
                        given: means.len(),
                    });
                }
                let eta = schedule.eta(t)?;
                let total = softmax_weights(means, eta, &mut self.weights);
                Ok(sample_weighted(&self.weights, total, stream))
            }
            PolicySpec::Bge { c } => {
                self.means.clear();
                self.means.extend((0..k).map(|i| state.empirical_mean(i)));
                Ok(bge_select(&self.means, state.counts(), c, stream))
            }
            PolicySpec::BgeCatoni { c } => {
                self.means.clear();
                for i in 0..k {
                    let m = state
                        .catoni_mean(i)
                        .expect("catoni policy runs on a catoni-tracking state");
                    self.means.push(m);
                }
                Ok(bge_select(&self.means, state.counts(), c, stream))
            }
            PolicySpec::Ucb { c2 } => {
                self.means.clear();
                self.means.extend((0..k).map(|i| state.empirical_mean(i)));
                Ok(ucb_select(&self.means, state.counts(), t, c2))
            }
        }
    }
}

/// One-shot form of [`ArmSelector::select`].
pub fn select_arm(
    spec: &PolicySpec,
    state: &mut PolicyState,
    true_means: Option<&[f64]>,
    t: u64,
    stream: &mut RngStream,
) -> Result<usize, PolicyError> {
    ArmSelector::new(*spec)?.select(state, true_means, t, stream)
}
