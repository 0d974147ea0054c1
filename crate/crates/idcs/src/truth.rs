//! Consensus estimation: combine several providers' views of the same
//! quantity into a single estimate with a quantified confidence.
//!
//! The core identity is the weighted mean
//!
//! ```text
//! v* = Σ wᵢ·vᵢ / Σ wᵢ
//! ```
//!
//! together with its error model. If provider `i`'s reporting error is
//! distributed `G(μᵢ, σᵢ²)` — fitted from calibration history — then the
//! consensus error is again Gaussian:
//!
//! ```text
//! e* ~ G( Σ wᵢμᵢ / Σ wᵢ ,  Σ wᵢ²σᵢ² / (Σ wᵢ)² )
//! ```
//!
//! and the *confidence level* of the estimate is the probability that `e*`
//! stays inside the buyer's tolerance. Everything a weighting strategy does
//! is choose the `wᵢ`; the composition and confidence math is shared.
//!
//! Strategies come in two families. Profile-blind ones (mean, median,
//! k-voting) only look at the submitted values and survive without any
//! calibration history. Profile-aware ones (the reliability weighting
//! [`WeightStrategy::Idcsw`], k-sources) weight providers by how likely
//! their individual error is to stay inside tolerance, which is where the
//! scheme earns its keep against noisy or hostile providers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::stats::{Gaussian, OnlineMoments};
use crate::{Error, Result, MIN_CALIBRATION_TRADES};

/// Opaque provider identifier.
///
/// A newtype rather than a bare `String` so that provider ids, commodity
/// tags, and free-form notes cannot be swapped at a call site without the
/// compiler noticing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProviderId(pub String);

impl ProviderId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ProviderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

impl From<&str> for ProviderId {
    fn from(s: &str) -> Self {
        ProviderId(s.to_owned())
    }
}

impl From<String> for ProviderId {
    fn from(s: String) -> Self {
        ProviderId(s)
    }
}

/// One provider's submitted value for the commodity under trade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub provider: ProviderId,
    pub value: f64,
}

impl View {
    pub fn new(provider: impl Into<ProviderId>, value: f64) -> Self {
        View {
            provider: provider.into(),
            value,
        }
    }
}

/// A provider's fitted error model: running moments of `view − truth` over
/// settled trades.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderProfile {
    pub id: ProviderId,
    pub moments: OnlineMoments,
}

impl ProviderProfile {
    pub fn new(id: impl Into<ProviderId>) -> Self {
        ProviderProfile {
            id: id.into(),
            moments: OnlineMoments::new(),
        }
    }

    /// Build a profile directly from persisted summary statistics.
    pub fn from_stats(id: impl Into<ProviderId>, count: u64, mean: f64, variance: f64) -> Self {
        ProviderProfile {
            id: id.into(),
            moments: OnlineMoments::from_parts(count, mean, variance),
        }
    }

    /// Record one observed signed error (`view − truth`).
    pub fn record_error(&mut self, error: f64) {
        self.moments.push(error);
    }

    /// The Gaussian error model implied by the history so far.
    pub fn error_distribution(&self) -> Gaussian {
        self.moments.to_gaussian()
    }

    /// Probability that this provider's next error stays inside `tolerance`.
    pub fn interval_prob(&self, tolerance: f64) -> f64 {
        self.error_distribution().interval_prob(tolerance)
    }

    /// A profile is trusted for trading once enough history has accumulated
    /// ([`MIN_CALIBRATION_TRADES`] observations).
    pub fn is_calibrated(&self) -> bool {
        self.moments.count() as usize >= MIN_CALIBRATION_TRADES
    }
}

/// Deterministically ordered profile store, keyed by provider id.
///
/// A `BTreeMap` on purpose: profile exports, settlement listings, and
/// replay verification all iterate the store, and hash-order iteration
/// would leak nondeterminism into files that must be byte-stable.
pub type ProfileStore = BTreeMap<ProviderId, ProviderProfile>;

/// How to weight views when forming the consensus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightStrategy {
    /// Reliability weighting: `wᵢ ∝ P(|eᵢ| < tolerance)` under provider
    /// `i`'s fitted error model. Providers likely to be close get more say.
    Idcsw,
    /// Uniform weights — the plain arithmetic mean.
    Mean,
    /// All weight on the middle view (split across the two middle views
    /// when the count is even).
    Median,
    /// Keep the `k` views with the smallest total absolute distance to the
    /// other views, uniformly weighted; drop the rest.
    KVoting(usize),
    /// Keep the `k` providers with the best reliability scores, uniformly
    /// weighted; drop the rest.
    KSources(usize),
}

impl WeightStrategy {
    /// The five standard strategies, in the order results are reported.
    pub fn all_standard() -> [WeightStrategy; 5] {
        [
            WeightStrategy::Idcsw,
            WeightStrategy::Mean,
            WeightStrategy::Median,
            WeightStrategy::KVoting(3),
            WeightStrategy::KSources(3),
        ]
    }

    /// Whether the strategy needs calibrated profiles to compute weights.
    pub fn needs_profiles(&self) -> bool {
        matches!(self, WeightStrategy::Idcsw | WeightStrategy::KSources(_))
    }
}

impl fmt::Display for WeightStrategy {
    /// Canonical name, honoring width/alignment flags so strategies line
    /// up in report tables.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightStrategy::Idcsw => f.pad("idcsw"),
            WeightStrategy::Mean => f.pad("mean"),
            WeightStrategy::Median => f.pad("median"),
            WeightStrategy::KVoting(k) => f.pad(&format!("{k}-voting")),
            WeightStrategy::KSources(k) => f.pad(&format!("{k}-sources")),
        }
    }
}

impl FromStr for WeightStrategy {
    type Err = Error;

    /// Parses `idcsw`, `mean`, `median`, `{k}-voting`, and `{k}-sources`
    /// (e.g. `3-voting`).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "idcsw" => return Ok(WeightStrategy::Idcsw),
            "mean" => return Ok(WeightStrategy::Mean),
            "median" => return Ok(WeightStrategy::Median),
            _ => {}
        }
        let parse_k = |prefix: &str| -> Option<usize> {
            s.strip_suffix(prefix)
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
        };
        if let Some(k) = parse_k("-voting") {
            return Ok(WeightStrategy::KVoting(k));
        }
        if let Some(k) = parse_k("-sources") {
            return Ok(WeightStrategy::KSources(k));
        }
        Err(Error::invalid(format!(
            "unknown weighting strategy {s:?} (expected idcsw, mean, median, \
             <k>-voting, or <k>-sources)"
        )))
    }
}

/// A consensus estimate: the value, its Gaussian error model, and the
/// confidence that the error stays inside the tolerance used to build it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// The consensus value `v*`.
    pub value: f64,
    /// Composed error distribution of `v*`.
    pub error: Gaussian,
    /// `P(|e*| < tolerance)` under [`Estimate::error`].
    pub confidence: f64,
    /// Tolerance the confidence refers to.
    pub tolerance: f64,
    /// Normalized weight per view, in view submission order.
    pub weights: Vec<f64>,
}

// Serde for the stats types lives here rather than in `stats` to keep that
// module free of serialization concerns. Moments persist as
// `(count, mean, variance)` — the stable summary form — not the internal
// accumulator state.
impl Serialize for OnlineMoments {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("OnlineMoments", 3)?;
        st.serialize_field("count", &self.count())?;
        st.serialize_field("mean", &self.mean())?;
        st.serialize_field("variance", &self.variance())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for OnlineMoments {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            count: u64,
            mean: f64,
            variance: f64,
        }
        let raw = Raw::deserialize(d)?;
        Ok(OnlineMoments::from_parts(raw.count, raw.mean, raw.variance))
    }
}

impl Serialize for Gaussian {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Gaussian", 2)?;
        st.serialize_field("mean", &self.mean)?;
        st.serialize_field("variance", &self.variance)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Gaussian {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            mean: f64,
            variance: f64,
        }
        let raw = Raw::deserialize(d)?;
        Ok(Gaussian::new(raw.mean, raw.variance))
    }
}

/// Weighted mean `Σ wᵢvᵢ / Σ wᵢ`.
///
/// Accepts unnormalized weights; panics in debug builds if the total weight
/// is not positive (strategies never produce that).
pub fn weighted_truth(views: &[View], weights: &[f64]) -> f64 {
    debug_assert_eq!(views.len(), weights.len());
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0, "total weight must be positive");
    views
        .iter()
        .zip(weights)
        .map(|(v, w)| w * v.value)
        .sum::<f64>()
        / total
}

/// Compose per-provider error models under the given weights.
///
/// With normalized weights this is `G(Σwᵢμᵢ, Σwᵢ²σᵢ²)`; unnormalized
/// weights are handled by dividing through by `Σw` (mean) and `(Σw)²`
/// (variance).
pub fn composed_error(errors: &[Gaussian], weights: &[f64]) -> Gaussian {
    debug_assert_eq!(errors.len(), weights.len());
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0, "total weight must be positive");
    let mean = errors
        .iter()
        .zip(weights)
        .map(|(g, w)| w * g.mean)
        .sum::<f64>()
        / total;
    let variance = errors
        .iter()
        .zip(weights)
        .map(|(g, w)| w * w * g.variance)
        .sum::<f64>()
        / (total * total);
    Gaussian::new(mean, variance)
}

/// Compute normalized weights for `views` under `strategy`.
///
/// Profile-aware strategies require every submitting provider to be present
/// in `profiles`; profile-blind ones ignore the store entirely. The
/// returned weights align with `views` by index and sum to 1.
pub fn compute_weights(
    views: &[View],
    profiles: &ProfileStore,
    strategy: WeightStrategy,
    tolerance: f64,
) -> Result<Vec<f64>> {
    if views.is_empty() {
        return Err(Error::invalid("cannot weight an empty set of views"));
    }
    if tolerance <= 0.0 {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let m = views.len();
    let raw = match strategy {
        WeightStrategy::Mean => vec![1.0; m],
        WeightStrategy::Median => median_weights(views),
        WeightStrategy::KVoting(k) => k_voting_weights(views, k.min(m)),
        WeightStrategy::Idcsw => {
            let probs = reliability_scores(views, profiles, tolerance)?;
            // A panel where every provider is hopeless (all scores
            // numerically zero) degrades gracefully to uniform weights
            // instead of dividing by zero.
            if probs.iter().sum::<f64>() <= 0.0 {
                vec![1.0; m]
            } else {
                probs
            }
        }
        WeightStrategy::KSources(k) => {
            let probs = reliability_scores(views, profiles, tolerance)?;
            top_k_uniform(&probs, k.min(m))
        }
    };
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Per-view reliability scores `P(|eᵢ| < tolerance)` from the profiles.
fn reliability_scores(
    views: &[View],
    profiles: &ProfileStore,
    tolerance: f64,
) -> Result<Vec<f64>> {
    views
        .iter()
        .map(|v| {
            profiles
                .get(&v.provider)
                .map(|p| p.interval_prob(tolerance))
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "no calibration profile for provider {}",
                        v.provider
                    ))
                })
        })
        .collect()
}

/// Median as a weight vector: all weight on the middle view by value, split
/// evenly across the two middles when the count is even. Ties in value are
/// broken by submission order, which keeps the result independent of sort
/// internals.
fn median_weights(views: &[View]) -> Vec<f64> {
    let m = views.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        views[a]
            .value
            .partial_cmp(&views[b].value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut w = vec![0.0; m];
    if m % 2 == 1 {
        w[order[m / 2]] = 1.0;
    } else {
        w[order[m / 2 - 1]] = 0.5;
        w[order[m / 2]] = 0.5;
    }
    w
}

/// k-voting: score each view by its total absolute distance to all views
/// and keep the `k` most central ones.
fn k_voting_weights(views: &[View], k: usize) -> Vec<f64> {
    let distances: Vec<f64> = views
        .iter()
        .map(|a| {
            views
                .iter()
                .map(|b| (a.value - b.value).abs())
                .sum::<f64>()
        })
        .collect();
    // Smaller distance = more central = better.
    let scores: Vec<f64> = distances.iter().map(|d| -d).collect();
    top_k_uniform(&scores, k)
}

/// Uniform weight on the `k` highest-scoring indices; ties broken by index
/// so equal scores favor earlier submissions.
fn top_k_uniform(scores: &[f64], k: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut w = vec![0.0; scores.len()];
    for &i in order.iter().take(k) {
        w[i] = 1.0;
    }
    w
}

/// Full evaluation: weights, consensus value, composed error, confidence.
///
/// This is the one entry point the ledger and simulator use; the individual
/// pieces are public for tests and for callers that want to mix their own
/// weights.
pub fn evaluate_views(
    views: &[View],
    profiles: &ProfileStore,
    strategy: WeightStrategy,
    tolerance: f64,
) -> Result<Estimate> {
    let weights = compute_weights(views, profiles, strategy, tolerance)?;
    let errors: Vec<Gaussian> = views
        .iter()
        .map(|v| {
            profiles
                .get(&v.provider)
                .map(|p| p.error_distribution())
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "no calibration profile for provider {}",
                        v.provider
                    ))
                })
        })
        .collect::<Result<_>>()?;
    let error = composed_error(&errors, &weights);
    Ok(Estimate {
        value: weighted_truth(views, &weights),
        confidence: error.interval_prob(tolerance),
        error,
        tolerance,
        weights,
    })
}

/// Exhaustive search for the weight vector maximizing the confidence level,
/// over the simplex grid with the given step (e.g. 0.01 enumerates all
/// weight vectors whose entries are multiples of 0.01 summing to 1).
///
/// Exponential in the number of providers — meant as a ground-truth oracle
/// for small panels (the benchmarking suite uses it with 3 providers),
/// not as a production weighting strategy. Returns the best weights and
/// the confidence they achieve.
pub fn grid_optimal_weights(
    errors: &[Gaussian],
    step: f64,
    tolerance: f64,
) -> (Vec<f64>, f64) {
    assert!(!errors.is_empty(), "need at least one error model");
    assert!(step > 0.0 && step <= 1.0, "step must be in (0, 1]");
    let ticks = (1.0 / step).round() as u32;
    let m = errors.len();

    // Enumerate all compositions of `ticks` into m non-negative parts.
    struct Search<'a> {
        errors: &'a [Gaussian],
        ticks_total: u32,
        tolerance: f64,
        current: Vec<u32>,
        best_confidence: f64,
        best_weights: Vec<f64>,
    }

    impl Search<'_> {
        fn recurse(&mut self, ticks_left: u32, idx: usize) {
            if idx == self.errors.len() - 1 {
                self.current[idx] = ticks_left;
                let weights: Vec<f64> = self
                    .current
                    .iter()
                    .map(|&t| t as f64 / self.ticks_total as f64)
                    .collect();
                // All-zero rows cannot occur: the last index absorbs the
                // rest, and ticks_total >= 1.
                let confidence =
                    composed_error(self.errors, &weights).interval_prob(self.tolerance);
                if confidence > self.best_confidence {
                    self.best_confidence = confidence;
                    self.best_weights.clone_from(&weights);
                }
                return;
            }
            for t in 0..=ticks_left {
                self.current[idx] = t;
                self.recurse(ticks_left - t, idx + 1);
            }
        }
    }

    let mut search = Search {
        errors,
        ticks_total: ticks,
        tolerance,
        current: vec![0u32; m],
        best_confidence: f64::NEG_INFINITY,
        best_weights: vec![0.0; m],
    };
    search.recurse(ticks, 0);
    (search.best_weights, search.best_confidence)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(entries: &[(&str, f64, f64)]) -> ProfileStore {
        entries
            .iter()
            .map(|&(id, mean, var)| {
                (
                    ProviderId::from(id),
                    ProviderProfile::from_stats(id, 20, mean, var),
                )
            })
            .collect()
    }

    #[test]
    fn strategy_tokens_round_trip() {
        for s in WeightStrategy::all_standard() {
            let token = s.to_string();
            assert_eq!(token.parse::<WeightStrategy>().unwrap(), s);
        }
        assert_eq!(
            "5-voting".parse::<WeightStrategy>().unwrap(),
            WeightStrategy::KVoting(5)
        );
        assert!("0-voting".parse::<WeightStrategy>().is_err());
        assert!("bogus".parse::<WeightStrategy>().is_err());
    }

    #[test]
    fn reliability_weights_favor_tight_providers() {
        // Two zero-mean providers, variances 1 and 4. Within-tolerance
        // probabilities are 0.682689 and 0.382925, so the normalized
        // weights are 0.640653 and 0.359347 (reference: mpmath).
        let profiles = store(&[("a", 0.0, 1.0), ("b", 0.0, 4.0)]);
        let views = [View::new("a", 10.0), View::new("b", 11.0)];
        let w = compute_weights(&views, &profiles, WeightStrategy::Idcsw, 1.0).unwrap();
        assert!((w[0] - 0.640653394632).abs() < 1e-10, "w0 = {}", w[0]);
        assert!((w[1] - 0.359346605368).abs() < 1e-10, "w1 = {}", w[1]);

        let est = evaluate_views(&views, &profiles, WeightStrategy::Idcsw, 1.0).unwrap();
        assert!((est.error.variance - 0.926956703211).abs() < 1e-9);
        assert!((est.confidence - 0.701033625285).abs() < 1e-9);
        let expected_value = w[0] * 10.0 + w[1] * 11.0;
        assert!((est.value - expected_value).abs() < 1e-12);
    }

    #[test]
    fn hopeless_panel_falls_back_to_uniform() {
        // Both providers essentially always miss by ~100: their interval
        // probabilities underflow to zero and the weights degrade to 1/m.
        let profiles = store(&[("a", 100.0, 1e-6), ("b", -100.0, 1e-6)]);
        let views = [View::new("a", 1.0), View::new("b", 2.0)];
        let w = compute_weights(&views, &profiles, WeightStrategy::Idcsw, 1.0).unwrap();
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn median_odd_and_even() {
        let profiles = store(&[("a", 0.0, 1.0), ("b", 0.0, 1.0), ("c", 0.0, 1.0), ("d", 0.0, 1.0)]);
        let odd = [View::new("a", 5.0), View::new("b", 1.0), View::new("c", 3.0)];
        let est = evaluate_views(&odd, &profiles, WeightStrategy::Median, 1.0).unwrap();
        assert_eq!(est.value, 3.0);
        assert_eq!(est.weights, vec![0.0, 0.0, 1.0]);

        let even = [
            View::new("a", 4.0),
            View::new("b", 1.0),
            View::new("c", 3.0),
            View::new("d", 10.0),
        ];
        let est = evaluate_views(&even, &profiles, WeightStrategy::Median, 1.0).unwrap();
        assert_eq!(est.value, 3.5);
        assert_eq!(est.weights, vec![0.5, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn k_voting_prefers_central_views() {
        // Distance sums for (1.0, 1.1, 5.0) are (4.1, 4.0, 7.9): the middle
        // view is the most central, the outlier the least.
        let views = [View::new("a", 1.0), View::new("b", 1.1), View::new("c", 5.0)];
        let profiles = ProfileStore::new();
        let w = compute_weights(&views, &profiles, WeightStrategy::KVoting(1), 1.0).unwrap();
        assert_eq!(w, vec![0.0, 1.0, 0.0]);

        // k = 2 drops only the outlier.
        let w = compute_weights(&views, &profiles, WeightStrategy::KVoting(2), 1.0).unwrap();
        assert_eq!(w, vec![0.5, 0.5, 0.0]);

        // k >= m keeps everything and matches the mean.
        let w = compute_weights(&views, &profiles, WeightStrategy::KVoting(3), 1.0).unwrap();
        assert_eq!(w, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn k_sources_selects_by_reliability() {
        let profiles = store(&[("a", 0.0, 9.0), ("b", 0.0, 0.25), ("c", 0.0, 1.0)]);
        let views = [View::new("a", 1.0), View::new("b", 2.0), View::new("c", 3.0)];
        let w = compute_weights(&views, &profiles, WeightStrategy::KSources(2), 1.0).unwrap();
        // b (σ² = 0.25) and c (σ² = 1) beat a (σ² = 9).
        assert_eq!(w, vec![0.0, 0.5, 0.5]);
    }

    #[test]
    fn missing_profile_is_rejected_for_profile_aware_strategies() {
        let profiles = store(&[("a", 0.0, 1.0)]);
        let views = [View::new("a", 1.0), View::new("ghost", 2.0)];
        assert!(evaluate_views(&views, &profiles, WeightStrategy::Idcsw, 1.0).is_err());
        assert!(matches!(
            compute_weights(&views, &profiles, WeightStrategy::KSources(1), 1.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn weights_always_normalized() {
        let profiles = store(&[("a", 0.1, 0.5), ("b", -0.4, 2.0), ("c", 0.9, 1.5)]);
        let views = [View::new("a", 1.0), View::new("b", 2.0), View::new("c", 3.0)];
        for strategy in WeightStrategy::all_standard() {
            let w = compute_weights(&views, &profiles, strategy, 1.0).unwrap();
            let sum: f64 = w.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "{strategy}: Σw = {sum}");
            assert!(w.iter().all(|&x| x >= 0.0), "{strategy}: negative weight");
        }
    }

    #[test]
    fn grid_search_recovers_inverse_variance_optimum() {
        // For zero-mean providers, maximizing the confidence is minimizing
        // the composed variance, and the analytic optimum is
        // inverse-variance weighting: variances (1, 4) → weights (0.8, 0.2).
        let errors = [Gaussian::new(0.0, 1.0), Gaussian::new(0.0, 4.0)];
        let (w, confidence) = grid_optimal_weights(&errors, 0.01, 1.0);
        assert!((w[0] - 0.8).abs() < 1e-9, "on-grid optimum is exact: {w:?}");
        assert!((w[1] - 0.2).abs() < 1e-9);
        let analytic = composed_error(&errors, &[0.8, 0.2]).interval_prob(1.0);
        assert!((confidence - analytic).abs() < 1e-12);
    }

    #[test]
    fn grid_search_dominates_reliability_weighting() {
        // The grid oracle optimizes the objective directly, so it can never
        // do worse than the reliability heuristic on the same inputs.
        let profiles = store(&[("a", 0.5, 1.2), ("b", -0.3, 0.8), ("c", 0.1, 2.5)]);
        let views = [View::new("a", 1.0), View::new("b", 2.0), View::new("c", 3.0)];
        let est = evaluate_views(&views, &profiles, WeightStrategy::Idcsw, 1.0).unwrap();
        let errors: Vec<Gaussian> = profiles.values().map(|p| p.error_distribution()).collect();
        let (_, best) = grid_optimal_weights(&errors, 0.05, 1.0);
        assert!(best >= est.confidence - 1e-12);
    }

    #[test]
    fn empty_views_rejected() {
        let profiles = ProfileStore::new();
        assert!(compute_weights(&[], &profiles, WeightStrategy::Mean, 1.0).is_err());
    }

    #[test]
    fn calibration_threshold() {
        let mut p = ProviderProfile::new("x");
        for i in 0..MIN_CALIBRATION_TRADES - 1 {
            p.record_error(i as f64 * 0.01);
            assert!(!p.is_calibrated());
        }
        p.record_error(0.0);
        assert!(p.is_calibrated());
    }
}
