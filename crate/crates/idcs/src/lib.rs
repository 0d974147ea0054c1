//! Trading infrastructure for *imprecise digital commodities* — data goods
//! such as statistical indicators whose true value is expensive to observe
//! and whose quoted values differ from source to source.
//!
//! A buyer declares what they want and how much they will pay, several
//! providers respond with their (noisy) views of the value, and the market
//! has to answer two questions before any money moves:
//!
//! 1. **What is the value, probably?** Each calibrated provider carries a
//!    Gaussian error model fitted from past trades. Combining the submitted
//!    views under a weighting strategy yields a consensus estimate together
//!    with a *confidence level*: the probability that the consensus error
//!    lies inside the buyer's tolerance. See [`truth`] and [`stats`].
//! 2. **Who gets paid what?** Once the buyer accepts, the declared budget is
//!    split among providers by a payment function that rewards proximity to
//!    the consensus. See [`payment`].
//!
//! The [`ledger`] module ties the two together in an append-only event log
//! with a small trade state machine: declare, collect views, evaluate, then
//! either confirm (settle and update provider calibration) or re-declare
//! with a sweeter offer. [`dataset`] loads the yearly indicator tables used
//! to calibrate realistic provider profiles, and [`sim`] runs seeded
//! adversarial experiments: inject manipulated views, vary the payment
//! mode, and measure how much of the budget leaks to bad actors.
//!
//! Everything downstream of a seed is deterministic; experiment and
//! trajectory runs reproduce byte-for-byte given the same inputs.
//!
//! The `examples/` directory is the guided tour: each file is a runnable
//! walk-through of one capability, from a single three-stage trade to the
//! full manipulation-sensitivity grid.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod ledger;
pub mod payment;
pub mod sim;
pub mod stats;
pub mod truth;

pub use error::Error;

/// Default error tolerance: a view is "good" when its error magnitude stays
/// below this bound, and the confidence level is the probability that the
/// consensus error does.
pub const DEFAULT_TOLERANCE: f64 = 1.0;

/// Trades needed before a provider's error profile counts as calibrated.
pub const MIN_CALIBRATION_TRADES: usize = 10;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
