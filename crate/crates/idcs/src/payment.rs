//! Budget distribution: who gets paid how much once a trade settles.
//!
//! Payments are proximity rewards. After the consensus value `v*` is fixed,
//! each provider's *distance* is `dᵢ = |vᵢ − v*|`, and a payment function
//! maps the distance vector plus the declared budget to per-provider
//! amounts. Three standard functions are provided, spanning the
//! winner-take-all / spread-the-wealth axis:
//!
//! * [`PaymentFunction::TopOne`] — the closest view takes the whole budget.
//! * [`PaymentFunction::TopThreeInverseDistance`] — the three closest split
//!   it in proportion to `1/d`.
//! * [`PaymentFunction::AllInverseSquare`] — everyone splits it in
//!   proportion to `1/d²`.
//!
//! The choice is not cosmetic: concentrating payments raises the stakes of
//! manipulating the consensus, and the simulation harness exists largely to
//! measure how much budget each function leaks to adversaries (see
//! [`error_payment`]).
//!
//! A buyer's full offer is a [`PaymentMode`]: a ladder of confidence bands,
//! each pairing a budget with a payment function, so that better consensus
//! confidence can unlock a bigger spend.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::truth::{ProviderId, View};
use crate::{Error, Result};

/// How to split the budget among providers by proximity to the consensus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaymentFunction {
    /// Entire budget to the single closest view; ties resolve to the
    /// earliest submission.
    TopOne,
    /// The three closest views share the budget proportionally to the
    /// inverse of their distances. With fewer than three views, all of
    /// them participate.
    TopThreeInverseDistance,
    /// Every view shares the budget proportionally to the inverse square
    /// of its distance — steeper than `1/d`, but nobody is shut out.
    AllInverseSquare,
}

impl PaymentFunction {
    /// The standard functions, in the order results are reported.
    pub fn all_standard() -> [PaymentFunction; 3] {
        [
            PaymentFunction::TopOne,
            PaymentFunction::TopThreeInverseDistance,
            PaymentFunction::AllInverseSquare,
        ]
    }
}

impl fmt::Display for PaymentFunction {
    /// Canonical name, honoring width/alignment flags so functions line
    /// up in report tables.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PaymentFunction::TopOne => f.pad("top-one"),
            PaymentFunction::TopThreeInverseDistance => f.pad("top-three"),
            PaymentFunction::AllInverseSquare => f.pad("all-inverse-square"),
        }
    }
}

impl FromStr for PaymentFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top-one" => Ok(PaymentFunction::TopOne),
            "top-three" => Ok(PaymentFunction::TopThreeInverseDistance),
            "all-inverse-square" => Ok(PaymentFunction::AllInverseSquare),
            _ => Err(Error::invalid(format!(
                "unknown payment function {s:?} (expected top-one, top-three, \
                 or all-inverse-square)"
            ))),
        }
    }
}

/// One provider's settlement line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Payment {
    pub provider: ProviderId,
    /// Distance `|v − v*|` that earned the amount.
    pub distance: f64,
    pub amount: f64,
}

/// Split `budget` among the views by proximity to `consensus`.
///
/// Invariants, regardless of function:
///
/// * amounts are non-negative and sum to exactly the budget (one final
///   rescale absorbs rounding),
/// * the result is in view submission order,
/// * views at distance exactly 0 are handled specially where the function
///   would otherwise divide by zero: the budget splits evenly among the
///   zero-distance views within the paid set, everyone else gets nothing.
///   Distances merely *near* zero need no special case — the inverse-law
///   shares already concentrate the budget there smoothly.
pub fn distribute(
    views: &[View],
    consensus: f64,
    budget: f64,
    function: PaymentFunction,
) -> Result<Vec<Payment>> {
    if views.is_empty() {
        return Err(Error::invalid("cannot distribute a budget over no views"));
    }
    if budget < 0.0 || budget.is_nan() {
        return Err(Error::invalid(format!(
            "budget must be non-negative, got {budget}"
        )));
    }
    let m = views.len();
    let distances: Vec<f64> = views.iter().map(|v| (v.value - consensus).abs()).collect();

    // Indices of the paid set, most deserving first.
    let paid: Vec<usize> = match function {
        PaymentFunction::TopOne => vec![closest(&distances, 1)[0]],
        PaymentFunction::TopThreeInverseDistance => closest(&distances, 3.min(m)),
        PaymentFunction::AllInverseSquare => (0..m).collect(),
    };

    let mut shares = vec![0.0; m];
    match function {
        PaymentFunction::TopOne => shares[paid[0]] = 1.0,
        PaymentFunction::TopThreeInverseDistance => {
            inverse_law_shares(&mut shares, &paid, &distances, |d| 1.0 / d)
        }
        PaymentFunction::AllInverseSquare => {
            inverse_law_shares(&mut shares, &paid, &distances, |d| 1.0 / (d * d))
        }
    }

    let total_share: f64 = shares.iter().sum();
    Ok(views
        .iter()
        .zip(&distances)
        .zip(&shares)
        .map(|((v, &d), &s)| Payment {
            provider: v.provider.clone(),
            distance: d,
            amount: budget * s / total_share,
        })
        .collect())
}

/// Indices of the `k` smallest distances, ties resolved to earlier indices.
fn closest(distances: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| {
        distances[a]
            .partial_cmp(&distances[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(k);
    order
}

/// Fill `shares` for the `paid` indices from an inverse-distance law,
/// falling back to an even split among exact-zero distances if any exist.
fn inverse_law_shares(
    shares: &mut [f64],
    paid: &[usize],
    distances: &[f64],
    law: impl Fn(f64) -> f64,
) {
    let zeros: Vec<usize> = paid.iter().copied().filter(|&i| distances[i] == 0.0).collect();
    if !zeros.is_empty() {
        for &i in &zeros {
            shares[i] = 1.0 / zeros.len() as f64;
        }
        return;
    }
    for &i in paid {
        shares[i] = law(distances[i]);
    }
}

/// Error payment: how much of the realized settlement went to the wrong
/// hands, compared against the settlement that the *genuine* (unmanipulated)
/// views would have produced.
///
/// Computed per provider as `Σᵢ |cᵢ − cᵢᵍ|`, aligning the two settlements by
/// provider id (a provider absent from one side counts as amount 0). This
/// is the simulation harness's headline metric: 0 means manipulation moved
/// no money at all; twice the budget is the worst case, the entire spend
/// redirected.
pub fn error_payment(actual: &[Payment], genuine: &[Payment]) -> f64 {
    let mut by_provider: BTreeMap<&ProviderId, (f64, f64)> = BTreeMap::new();
    for p in actual {
        by_provider.entry(&p.provider).or_default().0 += p.amount;
    }
    for p in genuine {
        by_provider.entry(&p.provider).or_default().1 += p.amount;
    }
    by_provider.values().map(|(a, g)| (a - g).abs()).sum()
}

/// One rung of a payment ladder: up to confidence `threshold`, offer
/// `budget` distributed by `function`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    /// Upper confidence bound of this band (inclusive).
    pub threshold: f64,
    pub budget: f64,
    pub function: PaymentFunction,
}

/// A buyer's declared offer: consecutive confidence bands covering [0, 1].
///
/// Band `i` applies when the evaluated confidence lands in
/// `(thresholdᵢ₋₁, thresholdᵢ]`, with the first band reaching down to 0.
/// The final threshold must be at least 1 so that every confidence level
/// selects a band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaymentMode {
    pub bands: Vec<Band>,
}

impl PaymentMode {
    /// A single band covering all confidence levels.
    pub fn flat(budget: f64, function: PaymentFunction) -> Self {
        PaymentMode {
            bands: vec![Band {
                threshold: 1.0,
                budget,
                function,
            }],
        }
    }

    pub fn new(bands: Vec<Band>) -> Result<Self> {
        let mode = PaymentMode { bands };
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() {
            return Err(Error::invalid("payment mode needs at least one band"));
        }
        let mut prev = 0.0;
        for (i, band) in self.bands.iter().enumerate() {
            if band.threshold <= prev || band.threshold.is_nan() {
                return Err(Error::invalid(format!(
                    "band {i}: threshold {} does not increase past {prev}",
                    band.threshold
                )));
            }
            if band.budget < 0.0 || band.budget.is_nan() {
                return Err(Error::invalid(format!(
                    "band {i}: budget {} is negative",
                    band.budget
                )));
            }
            prev = band.threshold;
        }
        if prev < 1.0 {
            return Err(Error::invalid(format!(
                "last threshold {prev} leaves confidence levels above it uncovered \
                 (must be >= 1)"
            )));
        }
        Ok(())
    }

    /// The band whose confidence interval contains `confidence`.
    pub fn select(&self, confidence: f64) -> &Band {
        debug_assert!(self.validate().is_ok());
        self.bands
            .iter()
            .find(|b| confidence <= b.threshold)
            .unwrap_or_else(|| self.bands.last().expect("validated mode is non-empty"))
    }

    /// Largest budget anywhere in the ladder.
    pub fn max_budget(&self) -> f64 {
        self.bands.iter().map(|b| b.budget).fold(0.0, f64::max)
    }
}

/// Check that `new` is a legal re-declaration of `old`.
///
/// A re-declaration may only sweeten the offer: the band structure
/// (thresholds) stays fixed, each band's budget may rise but never fall,
/// and the payment function may change freely. Anything else would let a
/// buyer fish for cheap views and then yank the offer.
pub fn validate_redeclaration(old: &PaymentMode, new: &PaymentMode) -> Result<()> {
    new.validate()?;
    if old.bands.len() != new.bands.len() {
        return Err(Error::invalid(format!(
            "re-declaration changes band count from {} to {}",
            old.bands.len(),
            new.bands.len()
        )));
    }
    for (i, (o, n)) in old.bands.iter().zip(&new.bands).enumerate() {
        if o.threshold != n.threshold {
            return Err(Error::invalid(format!(
                "band {i}: re-declaration moves threshold {} to {}",
                o.threshold, n.threshold
            )));
        }
        if n.budget < o.budget {
            return Err(Error::invalid(format!(
                "band {i}: re-declaration lowers budget {} to {}",
                o.budget, n.budget
            )));
        }
    }
    Ok(())
}
