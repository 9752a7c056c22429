//! Closed-form regret bounds.
//!
//! Natural logarithms throughout; `log_plus(x) = max(0, log x)`.

use std::f64::consts::E;

use thiserror::Error;

use crate::distributions::EULER_GAMMA;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("need K >= 2, got {0}")]
    TooFewArms(u64),
    #[error("need T >= 2, got {0}")]
    HorizonTooShort(u64),
    #[error("gap must lie in (0, 1), got {0}")]
    Gap(f64),
    #[error("{0} must be positive, got {1}")]
    NonPositive(&'static str, f64),
    #[error("lower bound needs sqrt(K/T) log K <= 1, got {0}")]
    WorstCasePrecondition(f64),
    #[error("suboptimal gaps must be positive")]
    ZeroGap,
}

fn check_kt(k: u64, t: u64) -> Result<(), BoundError> {
    if k < 2 {
        return Err(BoundError::TooFewArms(k));
    }
    if t < 2 {
        return Err(BoundError::HorizonTooShort(t));
    }
    Ok(())
}

fn check_gap(delta: f64) -> Result<(), BoundError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(BoundError::Gap(delta))
    }
}

#[inline]
pub fn log_plus(x: f64) -> f64 {
    x.ln().max(0.0)
}

/// Length `16 e K log T / delta^2` of the constant-rate phase.
pub fn tau_explore_commit(k: u64, t: u64, delta: f64) -> Result<f64, BoundError> {
    check_kt(k, t)?;
    check_gap(delta)?;
    Ok(16.0 * E * k as f64 * (t as f64).ln() / (delta * delta))
}

/// `16 e K log T / delta^2 + 9 K / delta^2`.
pub fn thm3_bound(k: u64, t: u64, delta: f64) -> Result<f64, BoundError> {
    let tau = tau_explore_commit(k, t, delta)?;
    Ok(tau + 9.0 * k as f64 / (delta * delta))
}

/// Which argument the squared log term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogArgument {
    /// `T delta_i^2 / c^2`.
    #[default]
    GapSquared,
    /// `T delta_i / c^2`.
    GapLinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs {
    /// Gaps of the suboptimal arms (the optimal arm's zero gap may be
    /// included; zeros are skipped).
    pub gaps: Vec<f64>,
    pub sigma: f64,
    /// Bound on the second moment `E[X^2]`.
    pub v: f64,
    pub big_c: f64,
    pub small_c: f64,
    pub k: u64,
    pub t: u64,
    pub log_argument: LogArgument,
}

impl BoundInputs {
    fn check(&self) -> Result<(), BoundError> {
        for (name, x) in [
            ("sigma", self.sigma),
            ("V", self.v),
            ("C", self.big_c),
            ("c", self.small_c),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(BoundError::NonPositive(name, x));
            }
        }
        if self.gaps.iter().any(|&g| g < 0.0) {
            return Err(BoundError::ZeroGap);
        }
        if self.gaps.iter().all(|&g| g == 0.0) {
            return Err(BoundError::ZeroGap);
        }
        Ok(())
    }
}

/// Shared shape of the Boltzmann–Gumbel bounds with `e^{m / 2C^2}`, where
/// `m` is sigma^2 (subgaussian) or V (second moment).
fn bge_bound(inputs: &BoundInputs, moment: f64) -> Result<f64, BoundError> {
    inputs.check()?;
    let c2 = inputs.big_c * inputs.big_c;
    let small_c2 = inputs.small_c * inputs.small_c;
    let constant = small_c2 * EULER_GAMMA.exp()
        + 18.0 * c2 * (moment / (2.0 * c2)).exp() * (1.0 + (-EULER_GAMMA).exp());
    let t = inputs.t as f64;
    Ok(inputs
        .gaps
        .iter()
        .filter(|&&g| g > 0.0)
        .map(|&g| {
            let arg = match inputs.log_argument {
                LogArgument::GapSquared => t * g * g / small_c2,
                LogArgument::GapLinear => t * g / small_c2,
            };
            let lp = log_plus(arg);
            9.0 * c2 * lp * lp / g + constant / g + g
        })
        .sum())
}

/// Subgaussian Boltzmann–Gumbel bound.
pub fn thm4_bound(inputs: &BoundInputs) -> Result<f64, BoundError> {
    bge_bound(inputs, inputs.sigma * inputs.sigma)
}

/// Heavy-tailed (Catoni) Boltzmann–Gumbel bound.
pub fn thm6_bound(inputs: &BoundInputs) -> Result<f64, BoundError> {
    bge_bound(inputs, inputs.v)
}

/// `200 sigma sqrt(K T) log K`.
pub fn cor1_bound(sigma: f64, k: u64, t: u64) -> Result<f64, BoundError> {
    if k < 2 {
        return Err(BoundError::TooFewArms(k));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(BoundError::NonPositive("sigma", sigma));
    }
    Ok(200.0 * sigma * ((k * t) as f64).sqrt() * (k as f64).ln())
}

/// Gap `sqrt(K/T) log K` of the worst-case instance.
pub fn thm5_gap(k: u64, t: u64) -> Result<f64, BoundError> {
    check_kt(k, t)?;
    let g = (k as f64 / t as f64).sqrt() * (k as f64).ln();
    if g > 1.0 {
        return Err(BoundError::WorstCasePrecondition(g));
    }
    Ok(g)
}

/// `sqrt(K T) log K / 2`.
pub fn thm5_lower(k: u64, t: u64) -> Result<f64, BoundError> {
    thm5_gap(k, t)?;
    Ok(0.5 * ((k * t) as f64).sqrt() * (k as f64).ln())
}
