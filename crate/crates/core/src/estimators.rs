//! Per-arm mean estimators.
//!
//! Two estimators are provided: the running empirical mean, and Catoni's
//! robust estimator
//!
//! ```text
//! mu_hat = beta * sum_s psi(X_s / (beta * N)),   beta = sqrt(C^2 / N)
//! ```
//!
//! whose inner scale depends on the current pull count, so the whole sum
//! changes every time the arm is pulled. [`catoni_estimate`] evaluates it
//! directly from a history; [`CatoniAccumulator`] maintains the same value in
//! amortised O(1) per observation (see its docs for how).

/// Catoni's influence function.
///
/// `log(1 + x + x^2/2)` for `x >= 0` and `-log(1 - x + x^2/2)` for `x < 0`.
/// The argument of the logarithm is bounded below by 1/2, so this is finite
/// for every finite `x`.
#[inline]
pub fn catoni_psi(x: f64) -> f64 {
    let a = x.abs();
    let v = if a < 1e150 {
        (a + 0.5 * a * a).ln_1p()
    } else {
        2.0 * a.ln() - std::f64::consts::LN_2
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Per-arm scale `beta = sqrt(C^2 / N)` of the perturbation and of the
/// Catoni estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaScale {
    c: f64,
}

impl BetaScale {
    pub fn new(c: f64) -> Self {
        assert!(
            c > 0.0 && c.is_finite(),
            "scale constant must be positive, got {c}"
        );
        Self { c }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    #[inline]
    pub fn at(&self, pulls: u64) -> f64 {
        debug_assert!(pulls >= 1);
        self.c / (pulls as f64).sqrt()
    }
}

/// Catoni's estimate from a full history with `N = history.len()`.
///
/// `X / (beta * N)` is evaluated as `X / (C * sqrt(N))`.
pub fn catoni_estimate(history: &[f64], c: f64) -> f64 {
    assert!(!history.is_empty(), "catoni estimate of an empty history");
    let n = history.len() as f64;
    let beta = c / n.sqrt();
    let inv = 1.0 / (c * n.sqrt());
    beta * history.iter().map(|&x| catoni_psi(x * inv)).sum::<f64>()
}

/// Series coefficients of `log(1 + x + x^2/2)` at 0, indexed by power.
/// Zero terms (powers 0, 2, 6, 10, 14) are skipped by the evaluator.
const PSI_SERIES: [f64; 18] = [
    0.0,
    1.0,
    0.0,
    -1.0 / 6.0,
    1.0 / 8.0,
    -1.0 / 20.0,
    0.0,
    1.0 / 56.0,
    -1.0 / 64.0,
    1.0 / 144.0,
    0.0,
    -1.0 / 352.0,
    1.0 / 384.0,
    -1.0 / 832.0,
    0.0,
    1.0 / 1920.0,
    -1.0 / 2048.0,
    1.0 / 4352.0,
];

/// Largest scaled magnitude `|X| / (C sqrt(N))` handled by the series.
/// The series converges for `|x| < sqrt(2)`; at 0.05 the truncation error
/// after the x^17 term is below 1e-25 relative.
const SERIES_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Magnitude(f64);

impl Eq for Magnitude {}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Magnitude {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Incremental Catoni estimator.
///
/// Since `psi(-x) = -psi(x)`, its Taylor series is
/// `sum_k a_k sgn(x)^(k+1) x^k`, so for observations that are small relative
/// to the current scale `C sqrt(N)` the sum over `s` collapses into signed
/// power sums of the raw rewards, which do not depend on `N`. Observations
/// above the series radius are kept in a min-heap by magnitude and evaluated
/// exactly; as `N` grows they migrate into the power sums and never leave.
#[derive(Debug, Clone)]
pub struct CatoniAccumulator {
    c: f64,
    count: u64,
    /// `power_sums[k] = sum_s sgn(X_s)^(k+1) X_s^k` over the series group.
    power_sums: [f64; PSI_SERIES.len()],
    large: std::collections::BinaryHeap<std::cmp::Reverse<(Magnitude, u64)>>,
    large_values: Vec<f64>,
    cached: Option<f64>,
}

impl CatoniAccumulator {
    pub fn new(c: f64) -> Self {
        assert!(
            c > 0.0 && c.is_finite(),
            "scale constant must be positive, got {c}"
        );
        Self {
            c,
            count: 0,
            power_sums: [0.0; PSI_SERIES.len()],
            large: Default::default(),
            large_values: Vec::new(),
            cached: None,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn scale(&self) -> f64 {
        self.c * (self.count as f64).sqrt()
    }

    fn absorb_into_series(&mut self, x: f64) {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let mut p = x;
        for k in 1..PSI_SERIES.len() {
            // Even powers carry an extra sign so the sum reproduces psi's
            // odd extension.
            self.power_sums[k] += if k % 2 == 0 { sign * p } else { p };
            p *= x;
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.cached = None;
        let limit = SERIES_RADIUS * self.scale();
        if x.abs() <= limit {
            self.absorb_into_series(x);
        } else {
            let slot = self.large_values.len() as u64;
            self.large_values.push(x);
            self.large
                .push(std::cmp::Reverse((Magnitude(x.abs()), slot)));
        }
        while let Some(std::cmp::Reverse((Magnitude(m), slot))) = self.large.peek().copied() {
            if m > limit {
                break;
            }
            self.large.pop();
            let v = self.large_values[slot as usize];
            self.absorb_into_series(v);
        }
    }

    /// Current estimate; `None` before the first observation.
    pub fn estimate(&mut self) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        if let Some(v) = self.cached {
            return Some(v);
        }
        let n = self.count as f64;
        let inv = 1.0 / self.scale();
        let mut series = 0.0;
        let mut ik = inv;
        for (coef, sum) in PSI_SERIES.iter().zip(&self.power_sums).skip(1) {
            if *coef != 0.0 {
                series += coef * ik * sum;
            }
            ik *= inv;
        }
        let exact: f64 = self
            .large
            .iter()
            .map(|std::cmp::Reverse((_, slot))| catoni_psi(self.large_values[*slot as usize] * inv))
            .sum();
        let v = self.c / n.sqrt() * (series + exact);
        self.cached = Some(v);
        Some(v)
    }
}

/// Sufficient statistics for every arm of one simulation.
#[derive(Debug, Clone)]
pub struct PolicyState {
    counts: Vec<u64>,
    sums: Vec<f64>,
    history: Option<Vec<Vec<f64>>>,
    catoni: Option<Vec<CatoniAccumulator>>,
    round: u64,
}

impl PolicyState {
    /// Streaming state: counts and sums only.
    pub fn new(arms: usize) -> Self {
        Self {
            counts: vec![0; arms],
            sums: vec![0.0; arms],
            history: None,
            catoni: None,
            round: 0,
        }
    }

    /// State that also retains every reward and maintains Catoni estimates
    /// with scale constant `c`.
    pub fn with_catoni(arms: usize, c: f64) -> Self {
        Self {
            history: Some(vec![Vec::new(); arms]),
            catoni: Some(vec![CatoniAccumulator::new(c); arms]),
            ..Self::new(arms)
        }
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    /// Number of completed rounds.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn history(&self, arm: usize) -> Option<&[f64]> {
        self.history.as_ref().map(|h| h[arm].as_slice())
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        if let Some(h) = self.history.as_mut() {
            h[arm].push(reward);
        }
        if let Some(acc) = self.catoni.as_mut() {
            acc[arm].push(reward);
        }
        self.round += 1;
    }

    /// `S_i / N_i`. Panics on an arm that was never pulled.
    #[inline]
    pub fn empirical_mean(&self, arm: usize) -> f64 {
        let n = self.counts[arm];
        assert!(n >= 1, "empirical mean of unpulled arm {arm}");
        self.sums[arm] / n as f64
    }

    /// Catoni estimate of `arm`; `None` if the state does not track it.
    pub fn catoni_mean(&mut self, arm: usize) -> Option<f64> {
        assert!(
            self.counts[arm] >= 1,
            "catoni estimate of unpulled arm {arm}"
        );
        self.catoni.as_mut().and_then(|acc| acc[arm].estimate())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RewardDistribution;
    use crate::rng::{RngStream, StreamKey};
    use proptest::prelude::*;

    #[test]
    fn psi_values() {
        assert_eq!(catoni_psi(0.0), 0.0);
        assert!((catoni_psi(1.0) - 0.916_290_731_874_155_1).abs() < 1e-14);
        assert!((catoni_psi(-2.0) + 1.609_437_912_434_100_3).abs() < 1e-14);
        assert!(catoni_psi(1e300).is_finite());
    }

    #[test]
    fn update_and_mean() {
        let mut st = PolicyState::new(2);
        st.update(0, 1.0);
        assert_eq!(st.count(0), 1);
        assert_eq!(st.empirical_mean(0), 1.0);
        st.update(1, 1.0);
        st.update(1, 0.0);
        st.update(1, 1.0);
        assert!((st.empirical_mean(1) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(st.round(), 4);
        assert_eq!(st.counts().iter().sum::<u64>(), st.round());
    }

    #[test]
    fn bernoulli_updates_concentrate() {
        let d = RewardDistribution::bernoulli(0.3).unwrap();
        let mut st = PolicyState::new(1);
        for k in 0..10_000 {
            st.update(0, d.sample(&mut RngStream::new(5, StreamKey::env(0, 0, k))));
        }
        assert!((st.empirical_mean(0) - 0.3).abs() < 0.02);
    }

    #[test]
    #[should_panic(expected = "unpulled")]
    fn empirical_mean_of_unpulled_arm_panics() {
        PolicyState::new(3).empirical_mean(1);
    }

    #[test]
    fn history_tracks_counts() {
        let mut st = PolicyState::with_catoni(2, 1.0);
        for (arm, r) in [(0, 0.5), (1, 1.0), (0, -2.0)] {
            st.update(arm, r);
        }
        for arm in 0..2 {
            assert_eq!(st.history(arm).unwrap().len() as u64, st.count(arm));
        }
        assert!(PolicyState::new(2).history(0).is_none());
    }

    #[test]
    fn catoni_examples() {
        assert_eq!(catoni_estimate(&[0.0, 0.0, 0.0], 1.0), 0.0);
        assert!((catoni_estimate(&[1.0], 1.0) - 2.5f64.ln()).abs() < 1e-15);
        // N = 1: beta * psi(c / beta) with beta = C.
        let c = 0.7;
        assert!((catoni_estimate(&[c], 2.0) - 2.0 * catoni_psi(c / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn catoni_constant_history_converges() {
        let mut prev = f64::INFINITY;
        for n in [1usize, 10, 100, 1000, 10_000] {
            let err = (catoni_estimate(&vec![0.8; n], 1.0) - 0.8).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn catoni_heavy_tail_consistency() {
        let d = RewardDistribution::heavy_tail(0.5, 2.0).unwrap();
        let h: Vec<f64> = (0..10_000)
            .map(|k| d.sample(&mut RngStream::new(17, StreamKey::env(0, 0, k))))
            .collect();
        let est = catoni_estimate(&h, 2f64.sqrt());
        assert!((est - 0.5).abs() < 0.05, "estimate {est}");
    }

    #[test]
    fn accumulator_matches_direct_on_heavy_tail() {
        let d = RewardDistribution::heavy_tail(0.3, 5.0).unwrap();
        let c = 2f64.sqrt();
        let mut acc = CatoniAccumulator::new(c);
        let mut h = Vec::new();
        for k in 0..20_000u64 {
            let x = d.sample(&mut RngStream::new(9, StreamKey::env(0, 0, k)));
            acc.push(x);
            h.push(x);
            if k < 50 || k % 997 == 0 {
                let direct = catoni_estimate(&h, c);
                let fast = acc.estimate().unwrap();
                assert!(
                    (direct - fast).abs() <= 1e-12 * (1.0 + direct.abs()),
                    "n={} {direct} {fast}",
                    k + 1
                );
            }
        }
    }

    proptest! {
        #[test]
        fn psi_is_odd(x in -1e6f64..1e6) {
            prop_assert!((catoni_psi(-x) + catoni_psi(x)).abs() <= 1e-12);
        }

        #[test]
        fn psi_is_below_identity_on_positives(x in 0f64..1e6) {
            prop_assert!(catoni_psi(x) <= x + 1e-12);
            prop_assert!(catoni_psi(-x) >= -x - 1e-12);
        }

        #[test]
        fn psi_is_increasing(x in -1e3f64..1e3, dx in 1e-6f64..10.0) {
            prop_assert!(catoni_psi(x + dx) > catoni_psi(x));
        }

        #[test]
        fn accumulator_matches_direct(
            xs in proptest::collection::vec(-50f64..50.0, 1..400),
            c in 0.1f64..5.0,
        ) {
            let mut acc = CatoniAccumulator::new(c);
            for (i, &x) in xs.iter().enumerate() {
                acc.push(x);
                let direct = catoni_estimate(&xs[..=i], c);
                let fast = acc.estimate().unwrap();
                prop_assert!((direct - fast).abs() <= 1e-12 * (1.0 + direct.abs()));
            }
        }
    }
}
