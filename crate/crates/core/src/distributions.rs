//! Reward laws and the Gumbel perturbation sampler.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::rng::RngStream;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Tail index of the heavy-tailed magnitude. Moments of order >= 2.5 diverge.
pub const HEAVY_TAIL_INDEX: f64 = 2.5;

#[derive(Debug, Error, PartialEq)]
pub enum DistributionError {
    #[error("bernoulli parameter {0} is outside [0, 1]")]
    BernoulliParameter(f64),
    #[error("gaussian variance {0} is negative")]
    NegativeVariance(f64),
    #[error("heavy-tail second moment {second_moment} is below mu^2 = {mu_sq}")]
    SecondMoment { second_moment: f64, mu_sq: f64 },
    #[error("non-finite parameter in {0}")]
    NonFinite(&'static str),
    #[error("cannot parse reward distribution {0:?}; expected bernoulli(p), gaussian(mu,sigma2), det(v) or heavy(mu,second_moment)")]
    Parse(String),
}

/// Reward law of a single arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardDistribution {
    Bernoulli {
        p: f64,
    },
    Gaussian {
        mu: f64,
        sigma2: f64,
    },
    Deterministic {
        v: f64,
    },
    /// `mu + S * T` with a fair sign `S` and a Pareto magnitude `T` of tail
    /// index 2.5, scaled so that `E[X^2] = second_moment`.
    HeavyTail {
        mu: f64,
        second_moment: f64,
    },
}

impl RewardDistribution {
    pub fn bernoulli(p: f64) -> Result<Self, DistributionError> {
        Self::Bernoulli { p }.validated()
    }

    pub fn gaussian(mu: f64, sigma2: f64) -> Result<Self, DistributionError> {
        Self::Gaussian { mu, sigma2 }.validated()
    }

    pub fn deterministic(v: f64) -> Result<Self, DistributionError> {
        Self::Deterministic { v }.validated()
    }

    pub fn heavy_tail(mu: f64, second_moment: f64) -> Result<Self, DistributionError> {
        Self::HeavyTail { mu, second_moment }.validated()
    }

    pub fn validated(self) -> Result<Self, DistributionError> {
        match self {
            Self::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(DistributionError::BernoulliParameter(p));
                }
            }
            Self::Gaussian { mu, sigma2 } => {
                if !mu.is_finite() || !sigma2.is_finite() {
                    return Err(DistributionError::NonFinite("gaussian"));
                }
                if sigma2 < 0.0 {
                    return Err(DistributionError::NegativeVariance(sigma2));
                }
            }
            Self::Deterministic { v } => {
                if !v.is_finite() {
                    return Err(DistributionError::NonFinite("deterministic"));
                }
            }
            Self::HeavyTail { mu, second_moment } => {
                if !mu.is_finite() || !second_moment.is_finite() {
                    return Err(DistributionError::NonFinite("heavy-tail"));
                }
                if second_moment < mu * mu {
                    return Err(DistributionError::SecondMoment {
                        second_moment,
                        mu_sq: mu * mu,
                    });
                }
            }
        }
        Ok(self)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Bernoulli { p } => p,
            Self::Gaussian { mu, .. } => mu,
            Self::Deterministic { v } => v,
            Self::HeavyTail { mu, .. } => mu,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Bernoulli { p } => p * (1.0 - p),
            Self::Gaussian { sigma2, .. } => sigma2,
            Self::Deterministic { .. } => 0.0,
            Self::HeavyTail { mu, second_moment } => second_moment - mu * mu,
        }
    }

    /// `E[X^2]`.
    pub fn second_moment(&self) -> f64 {
        let m = self.mean();
        self.variance() + m * m
    }

    /// Scale `x_m` of the Pareto magnitude: `E[T^2] = a x_m^2 / (a - 2)`.
    fn pareto_scale(mu: f64, second_moment: f64) -> f64 {
        let a = HEAVY_TAIL_INDEX;
        ((second_moment - mu * mu) * (a - 2.0) / a).max(0.0).sqrt()
    }

    pub fn sample(&self, stream: &mut RngStream) -> f64 {
        match *self {
            Self::Bernoulli { p } => {
                if stream.open_unit() < p {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Gaussian { mu, sigma2 } => {
                let z: f64 = stream.sample(StandardNormal);
                mu + sigma2.sqrt() * z
            }
            Self::Deterministic { v } => v,
            Self::HeavyTail { mu, second_moment } => {
                let sign = if stream.next_word() >> 63 == 0 {
                    1.0
                } else {
                    -1.0
                };
                let xm = Self::pareto_scale(mu, second_moment);
                let magnitude = xm * stream.open_unit().powf(-1.0 / HEAVY_TAIL_INDEX);
                mu + sign * magnitude
            }
        }
    }
}

impl fmt::Display for RewardDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bernoulli { p } => write!(f, "bernoulli({p})"),
            Self::Gaussian { mu, sigma2 } => write!(f, "gaussian({mu},{sigma2})"),
            Self::Deterministic { v } => write!(f, "det({v})"),
            Self::HeavyTail { mu, second_moment } => write!(f, "heavy({mu},{second_moment})"),
        }
    }
}

impl FromStr for RewardDistribution {
    type Err = DistributionError;

    /// Parses the `Display` form, e.g. `bernoulli(0.51)` or `heavy(0.5, 2)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DistributionError::Parse(s.to_string());
        let s_trim = s.trim();
        let open = s_trim.find('(').ok_or_else(bad)?;
        if !s_trim.ends_with(')') {
            return Err(bad());
        }
        let name = s_trim[..open].trim().to_ascii_lowercase();
        let args: Vec<f64> = s_trim[open + 1..s_trim.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match (name.as_str(), args.as_slice()) {
            ("bernoulli", [p]) => Self::bernoulli(*p),
            ("gaussian", [mu, s2]) => Self::gaussian(*mu, *s2),
            ("det" | "deterministic", [v]) => Self::deterministic(*v),
            ("heavy" | "heavytail", [mu, m2]) => Self::heavy_tail(*mu, *m2),
            _ => Err(bad()),
        }
    }
}

/// CDF of the standard Gumbel law in the shifted convention
/// `F(x) = exp(-exp(-x + gamma))`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x + EULER_GAMMA).exp()).exp()
}

/// Inverse of [`gumbel_cdf`] on (0, 1).
pub fn gumbel_quantile(u: f64) -> f64 {
    EULER_GAMMA - (-u.ln()).ln()
}

/// One draw with CDF [`gumbel_cdf`], by inversion of an open-interval uniform.
#[inline]
pub fn sample_standard_gumbel(stream: &mut RngStream) -> f64 {
    gumbel_quantile(stream.open_unit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn mean_and_se(d: &RewardDistribution, n: usize, seed: u64) -> (f64, f64) {
        let (mut s, mut s2) = (0.0, 0.0);
        for k in 0..n {
            let mut st = RngStream::new(seed, StreamKey::env(0, 0, k as u64));
            let x = d.sample(&mut st);
            s += x;
            s2 += x * x;
        }
        let m = s / n as f64;
        let var = (s2 / n as f64 - m * m).max(0.0);
        (m, (var / n as f64).sqrt())
    }

    #[test]
    fn deterministic_is_constant() {
        let d = RewardDistribution::deterministic(0.5).unwrap();
        let mut st = RngStream::new(1, StreamKey::env(0, 0, 0));
        for _ in 0..100 {
            assert_eq!(d.sample(&mut st), 0.5);
        }
    }

    #[test]
    fn bernoulli_sample_mean() {
        let d = RewardDistribution::bernoulli(0.51).unwrap();
        let (m, _) = mean_and_se(&d, 1_000_000, 3);
        assert!((m - 0.51).abs() < 0.002, "mean {m}");
    }

    #[test]
    fn empirical_means_within_four_standard_errors() {
        let laws = [
            RewardDistribution::bernoulli(0.3).unwrap(),
            RewardDistribution::gaussian(-0.2, 0.25).unwrap(),
            RewardDistribution::deterministic(0.7).unwrap(),
            RewardDistribution::heavy_tail(0.5, 2.0).unwrap(),
        ];
        for (i, d) in laws.iter().enumerate() {
            let (m, se) = mean_and_se(d, 1_000_000, 100 + i as u64);
            assert!(
                (m - d.mean()).abs() <= 4.0 * se + 1e-15,
                "{d}: {m} vs {}",
                d.mean()
            );
        }
    }

    #[test]
    fn heavy_tail_second_moment_matches() {
        let d = RewardDistribution::heavy_tail(0.5, 2.0).unwrap();
        assert!((d.second_moment() - 2.0).abs() < 1e-12);
        // E[T^2] for the Pareto magnitude, checked by quadrature of the
        // survival function: E[T^2] = xm^2 + int_{xm}^inf 2t (xm/t)^a dt.
        let xm = RewardDistribution::pareto_scale(0.5, 2.0);
        let a = HEAVY_TAIL_INDEX;
        let (mut integral, mut t, h) = (0.0, xm, 1e-3);
        while t < 2e4 {
            let f = |t: f64| 2.0 * t * (xm / t).powf(a);
            integral += 0.5 * h * (f(t) + f(t + h));
            t += h;
        }
        // Remaining tail beyond 2e4 in closed form.
        integral += 2.0 * xm.powf(a) * t.powf(2.0 - a) / (a - 2.0);
        let et2 = xm * xm + integral;
        assert!((0.25 + et2 - 2.0).abs() < 1e-3, "E[X^2] = {}", 0.25 + et2);
    }

    #[test]
    fn constructor_errors() {
        assert!(RewardDistribution::bernoulli(1.2).is_err());
        assert!(RewardDistribution::bernoulli(-0.1).is_err());
        assert!(RewardDistribution::gaussian(0.0, -1.0).is_err());
        assert!(RewardDistribution::heavy_tail(2.0, 1.0).is_err());
        assert!(RewardDistribution::deterministic(f64::NAN).is_err());
        assert!(RewardDistribution::heavy_tail(1.0, 1.0).is_ok());
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            "bernoulli(0.51)",
            "gaussian(0.5,0.25)",
            "det(0.5)",
            "heavy(0.5,2)",
        ] {
            let d: RewardDistribution = s.parse().unwrap();
            let again: RewardDistribution = d.to_string().parse().unwrap();
            assert_eq!(d, again);
        }
        assert_eq!(
            " Heavy( 0.5 , 2 ) ".parse::<RewardDistribution>().unwrap(),
            RewardDistribution::HeavyTail {
                mu: 0.5,
                second_moment: 2.0
            }
        );
        assert!("poisson(1)".parse::<RewardDistribution>().is_err());
        assert!("bernoulli(2)".parse::<RewardDistribution>().is_err());
        assert!("bernoulli".parse::<RewardDistribution>().is_err());
    }

    #[test]
    fn gumbel_cdf_values() {
        assert!((gumbel_cdf(EULER_GAMMA) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((gumbel_cdf(0.0) - 0.168_457_393_624_684_2).abs() < 1e-12);
        assert!(gumbel_cdf(0.0) >= 0.1);
        assert!(gumbel_cdf(50.0) > 1.0 - 1e-15);
        assert!(gumbel_cdf(-5.0) < 1e-50);
        for z in [0.0, 1.0, 5.0] {
            assert!(1.0 - gumbel_cdf(z) <= (-z + EULER_GAMMA).exp());
        }
    }

    #[test]
    fn gumbel_quantile_inverts_cdf() {
        assert!((gumbel_quantile((-1.0f64).exp()) - EULER_GAMMA).abs() < 1e-15);
        for u in [1e-9, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-9] {
            assert!((gumbel_cdf(gumbel_quantile(u)) - u).abs() < 1e-12 * u.max(1e-3));
        }
        // Extreme open-interval uniforms stay finite.
        assert!(gumbel_quantile(0.5 / (1u64 << 52) as f64).is_finite());
        assert!(gumbel_quantile(1.0 - 0.5 / (1u64 << 52) as f64).is_finite());
    }
}
