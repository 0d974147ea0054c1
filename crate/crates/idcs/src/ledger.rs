//! The market ledger: trade lifecycle, provider calibration, and an
//! append-only event log that replays to an identical ledger.
//!
//! A trade moves through a small state machine:
//!
//! ```text
//! Declared ──submit_view──▶ Collecting ──evaluate──▶ Evaluated
//!     ▲                                                 │ │
//!     └────────────── redeclare (sweeter offer) ────────┘ └─confirm─▶ Settled
//! ```
//!
//! The three-stage shape is the protocol's trust boundary. After
//! `evaluate`, the buyer learns *only* the confidence level — not the
//! consensus value. They then either `confirm` (pay the band's budget,
//! receive the value) or `redeclare` (raise the offer and let providers
//! submit fresh views). Re-declaration can never shrink an offer, so
//! providers cannot be baited into revealing views against a budget that
//! later evaporates.
//!
//! Every mutation is an [`Event`]. Operations validate first and mutate
//! only through the same transition code that replay uses, so a saved log
//! is a complete, verifiable account: [`Ledger::load`] re-derives every
//! estimate and settlement from the logged inputs and rejects the log if
//! anything fails to reproduce. Event timestamps come from a [`Clock`];
//! the default logical clock makes whole-ledger runs reproducible
//! byte-for-byte.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::payment::{
    distribute, validate_redeclaration, Band, Payment, PaymentMode,
};
use crate::truth::{
    evaluate_views, Estimate, ProfileStore, ProviderId, ProviderProfile, View, WeightStrategy,
};
use crate::{Error, Result, DEFAULT_TOLERANCE, MIN_CALIBRATION_TRADES};

/// Render a currency amount with exactly nine fractional digits.
///
/// Settlement records store amounts as decimal strings, not floats: the
/// log is the authoritative account of who was paid what, and a fixed
/// textual form makes it diffable, greppable, and immune to float
/// re-serialization quirks.
pub fn format_amount(amount: f64) -> String {
    format!("{amount:.9}")
}

/// Timestamp source for events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    /// Monotonic counter starting at 0 — fully reproducible runs.
    #[default]
    Logical,
    /// Unix seconds. Wall-clock provenance for interactive use; replay
    /// never interprets timestamps, so mixed logs stay valid.
    System,
}

impl Clock {
    fn next(&mut self, previous: u64) -> u64 {
        match self {
            Clock::Logical => previous + 1,
            Clock::System => std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Lifecycle state of a trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TradeState {
    /// Offer is public; no views yet.
    Declared,
    /// At least one view submitted; more may arrive.
    Collecting,
    /// Confidence computed and reported to the buyer; views are frozen.
    Evaluated,
    /// Buyer confirmed; budget distributed; terminal.
    Settled,
}

impl TradeState {
    fn name(&self) -> &'static str {
        match self {
            TradeState::Declared => "Declared",
            TradeState::Collecting => "Collecting",
            TradeState::Evaluated => "Evaluated",
            TradeState::Settled => "Settled",
        }
    }
}

impl fmt::Display for TradeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

/// A single trade and everything accumulated about it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trade {
    pub id: u64,
    /// Free-form label of what is being bought ("GDP_EA_2023", …).
    pub commodity_tag: String,
    pub mode: PaymentMode,
    pub tolerance: f64,
    pub state: TradeState,
    /// Views for the current round, in submission order.
    pub views: Vec<View>,
    /// Present from `evaluate` until settlement or re-declaration.
    pub estimate: Option<Estimate>,
    pub strategy: Option<WeightStrategy>,
    /// 1 for the initial declaration, +1 per re-declaration.
    pub round: u32,
    /// Set between the Confirmed and Settled events of a confirm.
    confirmed: bool,
}

/// Outcome of a settled trade, as returned to the buyer.
#[derive(Debug, Clone, PartialEq)]
pub struct Settlement {
    pub trade_id: u64,
    /// The consensus value `v*`, revealed on settlement.
    pub value: f64,
    pub confidence: f64,
    /// The confidence band whose budget and function applied.
    pub band: Band,
    pub payments: Vec<Payment>,
}

impl Settlement {
    pub fn total_paid(&self) -> f64 {
        self.payments.iter().map(|p| p.amount).sum()
    }
}

/// One settlement line as persisted in the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettledPayment {
    pub provider: ProviderId,
    /// Decimal string with nine fractional digits; see [`format_amount`].
    pub amount: String,
}

/// Event payloads. Together with the envelope's sequence number these are
/// the complete, replayable history of a ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "body")]
pub enum EventBody {
    Declared {
        trade_id: u64,
        commodity_tag: String,
        tolerance: f64,
        mode: PaymentMode,
    },
    ViewSubmitted {
        trade_id: u64,
        provider: ProviderId,
        value: f64,
    },
    /// Evaluation results are logged so that replay can verify them; the
    /// consensus value never travels back to the buyer at this stage, but
    /// the log itself is the operator's private record.
    Evaluated {
        trade_id: u64,
        strategy: WeightStrategy,
        value: f64,
        confidence: f64,
    },
    Confirmed {
        trade_id: u64,
    },
    Redeclared {
        trade_id: u64,
        mode: PaymentMode,
    },
    Settled {
        trade_id: u64,
        value: f64,
        confidence: f64,
        budget: f64,
        payments: Vec<SettledPayment>,
    },
    /// One historical (truth, view) observation for a provider, used to fit
    /// its error profile. Ten of these make a provider tradeable.
    CalibrationTrade {
        provider: ProviderId,
        truth: f64,
        view: f64,
    },
}

/// Envelope: contiguous sequence number, timestamp, payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub ts: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

/// The market ledger. See the module docs for the big picture.
#[derive(Debug)]
pub struct Ledger {
    clock: Clock,
    last_ts: u64,
    events: Vec<Event>,
    trades: std::collections::BTreeMap<u64, Trade>,
    profiles: ProfileStore,
}

impl Default for Ledger {
    fn default() -> Self {
        Self::new()
    }
}

impl Ledger {
    pub fn new() -> Self {
        Self::with_clock(Clock::Logical)
    }

    pub fn with_clock(clock: Clock) -> Self {
        Ledger {
            clock,
            last_ts: 0,
            events: Vec::new(),
            trades: std::collections::BTreeMap::new(),
            profiles: ProfileStore::new(),
        }
    }

    // -- accessors ---------------------------------------------------------

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn trade(&self, trade_id: u64) -> Option<&Trade> {
        self.trades.get(&trade_id)
    }

    pub fn trades(&self) -> impl Iterator<Item = &Trade> {
        self.trades.values()
    }

    pub fn profiles(&self) -> &ProfileStore {
        &self.profiles
    }

    pub fn profile(&self, provider: &ProviderId) -> Option<&ProviderProfile> {
        self.profiles.get(provider)
    }

    /// The confidence reported for an evaluated trade, if any.
    pub fn confidence(&self, trade_id: u64) -> Option<f64> {
        self.trades
            .get(&trade_id)?
            .estimate
            .as_ref()
            .map(|e| e.confidence)
    }

    // -- operations --------------------------------------------------------

    /// Stage one: publish an offer. Returns the new trade's id.
    pub fn declare(&mut self, commodity_tag: impl Into<String>, mode: PaymentMode) -> Result<u64> {
        self.declare_with_tolerance(commodity_tag, mode, DEFAULT_TOLERANCE)
    }

    pub fn declare_with_tolerance(
        &mut self,
        commodity_tag: impl Into<String>,
        mode: PaymentMode,
        tolerance: f64,
    ) -> Result<u64> {
        let trade_id = self.trades.keys().next_back().map_or(1, |last| last + 1);
        self.commit(EventBody::Declared {
            trade_id,
            commodity_tag: commodity_tag.into(),
            tolerance,
            mode,
        })?;
        Ok(trade_id)
    }

    /// Stage two: a calibrated provider submits its view. One view per
    /// provider per round.
    pub fn submit_view(
        &mut self,
        trade_id: u64,
        provider: impl Into<ProviderId>,
        value: f64,
    ) -> Result<()> {
        self.commit(EventBody::ViewSubmitted {
            trade_id,
            provider: provider.into(),
            value,
        })
    }

    /// Close the round and compute the consensus. Returns the confidence
    /// level — and deliberately nothing else: the buyer decides whether to
    /// pay knowing only how *reliable* the answer is, not what it says.
    pub fn evaluate(&mut self, trade_id: u64, strategy: WeightStrategy) -> Result<f64> {
        let trade = self.require_trade(trade_id)?;
        if trade.state != TradeState::Collecting {
            return Err(Error::InvalidState {
                trade_id,
                operation: "evaluate",
                state: trade.state.name(),
            });
        }
        let estimate = evaluate_views(&trade.views, &self.profiles, strategy, trade.tolerance)?;
        let confidence = estimate.confidence;
        self.commit(EventBody::Evaluated {
            trade_id,
            strategy,
            value: estimate.value,
            confidence,
        })?;
        Ok(confidence)
    }

    /// Stage three, acceptance path: pay the band's budget, reveal the
    /// consensus value, and fold each submitted view's signed error into
    /// its provider's calibration profile.
    pub fn confirm(&mut self, trade_id: u64) -> Result<(f64, Settlement)> {
        let settlement = {
            let trade = self.require_trade(trade_id)?;
            if trade.state != TradeState::Evaluated {
                return Err(Error::InvalidState {
                    trade_id,
                    operation: "confirm",
                    state: trade.state.name(),
                });
            }
            self.settlement_for(trade)?
        };
        self.commit(EventBody::Confirmed { trade_id })?;
        self.commit(EventBody::Settled {
            trade_id,
            value: settlement.value,
            confidence: settlement.confidence,
            budget: settlement.band.budget,
            payments: settlement
                .payments
                .iter()
                .map(|p| SettledPayment {
                    provider: p.provider.clone(),
                    amount: format_amount(p.amount),
                })
                .collect(),
        })?;
        Ok((settlement.value, settlement))
    }

    /// Stage three, haggling path: decline to pay and publish a sweeter
    /// offer instead. Views are discarded — providers resubmit against the
    /// new offer — and the trade returns to `Declared` for another round.
    pub fn redeclare(&mut self, trade_id: u64, mode: PaymentMode) -> Result<()> {
        self.commit(EventBody::Redeclared { trade_id, mode })
    }

    /// Record historical (truth, view) pairs for a provider. Each pair is
    /// one calibration trade; providers become eligible to submit views
    /// once they have [`MIN_CALIBRATION_TRADES`] of them.
    pub fn calibrate(
        &mut self,
        provider: impl Into<ProviderId>,
        pairs: &[(f64, f64)],
    ) -> Result<()> {
        let provider = provider.into();
        for &(truth, view) in pairs {
            self.commit(EventBody::CalibrationTrade {
                provider: provider.clone(),
                truth,
                view,
            })?;
        }
        Ok(())
    }

    /// Install a provider whose error profile has (approximately) the given
    /// mean and variance, by synthesizing `count` calibration trades.
    ///
    /// The synthetic history alternates errors `mean ± d` with `d` chosen
    /// so the population moments come out right; for even counts `d` is
    /// exactly the standard deviation. This keeps "a profile exists" and
    /// "the log shows its calibration trades" as one fact — there is no
    /// side channel that installs profiles without leaving a record.
    pub fn seed_profile(
        &mut self,
        provider: impl Into<ProviderId>,
        mean: f64,
        variance: f64,
        count: usize,
    ) -> Result<()> {
        if count < MIN_CALIBRATION_TRADES {
            return Err(Error::invalid(format!(
                "seeding fewer than {MIN_CALIBRATION_TRADES} trades leaves the provider \
                 uncalibrated (got {count})"
            )));
        }
        // n/2 pairs of mean ± d give population variance d²; an odd count
        // adds one error exactly at the mean, so d must stretch by
        // sqrt(n/(n-1)) to compensate.
        let d = if count.is_multiple_of(2) {
            variance.sqrt()
        } else {
            (variance * count as f64 / (count as f64 - 1.0)).sqrt()
        };
        let mut pairs = Vec::with_capacity(count);
        if count % 2 == 1 {
            pairs.push((0.0, mean));
        }
        while pairs.len() < count {
            pairs.push((0.0, mean + d));
            pairs.push((0.0, mean - d));
        }
        self.calibrate(provider, &pairs)
    }

    // -- persistence -------------------------------------------------------

    /// Write the full event log as JSON lines.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        for event in &self.events {
            serde_json::to_writer(&mut file, event)?;
            file.write_all(b"\n")?;
        }
        file.flush()?;
        Ok(())
    }

    /// Load and verify a JSON-lines event log. See [`Ledger::replay`].
    pub fn load(path: impl AsRef<Path>) -> Result<Ledger> {
        let file = BufReader::new(std::fs::File::open(path)?);
        let mut events = Vec::new();
        for (lineno, line) in file.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event: Event = serde_json::from_str(&line).map_err(|e| {
                Error::CorruptLog(format!("line {}: {e}", lineno + 1))
            })?;
            events.push(event);
        }
        Self::replay(events)
    }

    /// Rebuild a ledger from raw events, verifying as it goes:
    ///
    /// * sequence numbers must run 1, 2, 3, … with no gaps,
    /// * every event must be a legal operation in its context,
    /// * logged evaluation results and settlement amounts must match what
    ///   recomputation from the logged inputs produces.
    ///
    /// Any violation is a [`Error::CorruptLog`]. A replayed ledger
    /// continues exactly where the original left off.
    pub fn replay(events: Vec<Event>) -> Result<Ledger> {
        let mut ledger = Ledger::new();
        for event in events {
            if event.seq != ledger.events.len() as u64 + 1 {
                return Err(Error::CorruptLog(format!(
                    "sequence gap: expected {}, found {}",
                    ledger.events.len() + 1,
                    event.seq
                )));
            }
            ledger
                .transition(&event.body, true)
                .map_err(|e| match e {
                    Error::CorruptLog(_) => e,
                    other => Error::CorruptLog(format!("event {}: {other}", event.seq)),
                })?;
            ledger.last_ts = event.ts;
            ledger.events.push(event);
        }
        Ok(ledger)
    }

    // -- internals ---------------------------------------------------------

    fn require_trade(&self, trade_id: u64) -> Result<&Trade> {
        self.trades
            .get(&trade_id)
            .ok_or_else(|| Error::invalid(format!("no such trade: {trade_id}")))
    }

    /// Compute the settlement a confirm of this trade would produce.
    fn settlement_for(&self, trade: &Trade) -> Result<Settlement> {
        let estimate = trade
            .estimate
            .as_ref()
            .expect("Evaluated trade always carries an estimate");
        let band = trade.mode.select(estimate.confidence).clone();
        let payments = distribute(&trade.views, estimate.value, band.budget, band.function)?;
        Ok(Settlement {
            trade_id: trade.id,
            value: estimate.value,
            confidence: estimate.confidence,
            band,
            payments,
        })
    }

    /// Validate and apply an operation, then append its event. All public
    /// operations go through here so that live execution and replay share
    /// one transition path.
    fn commit(&mut self, body: EventBody) -> Result<()> {
        self.transition(&body, false)?;
        let ts = self.clock.next(self.last_ts);
        self.last_ts = ts;
        self.events.push(Event {
            seq: self.events.len() as u64 + 1,
            ts,
            body,
        });
        Ok(())
    }

    /// The single state-transition function. `replaying` only controls
    /// whether logged results are *verified against* recomputation (replay)
    /// or trusted to have just been computed (live path — where the caller
    /// built the body from the same state a moment ago).
    ///
    /// Validation precedes every mutation: a failed transition leaves the
    /// ledger untouched.
    fn transition(&mut self, body: &EventBody, replaying: bool) -> Result<()> {
        match body {
            EventBody::Declared {
                trade_id,
                commodity_tag,
                tolerance,
                mode,
            } => {
                mode.validate()?;
                if *tolerance <= 0.0 || tolerance.is_nan() {
                    return Err(Error::invalid(format!(
                        "tolerance must be positive, got {tolerance}"
                    )));
                }
                if self.trades.contains_key(trade_id) {
                    return Err(Error::invalid(format!("trade {trade_id} already exists")));
                }
                self.trades.insert(
                    *trade_id,
                    Trade {
                        id: *trade_id,
                        commodity_tag: commodity_tag.clone(),
                        mode: mode.clone(),
                        tolerance: *tolerance,
                        state: TradeState::Declared,
                        views: Vec::new(),
                        estimate: None,
                        strategy: None,
                        round: 1,
                        confirmed: false,
                    },
                );
            }

            EventBody::ViewSubmitted {
                trade_id,
                provider,
                value,
            } => {
                let calibrated = self
                    .profiles
                    .get(provider)
                    .is_some_and(|p| p.is_calibrated());
                if !calibrated {
                    return Err(Error::invalid(format!(
                        "provider {provider} is not calibrated \
                         (needs {MIN_CALIBRATION_TRADES} calibration trades)"
                    )));
                }
                let trade = self.require_trade(*trade_id)?;
                match trade.state {
                    TradeState::Declared | TradeState::Collecting => {}
                    state => {
                        return Err(Error::InvalidState {
                            trade_id: *trade_id,
                            operation: "submit a view",
                            state: state.name(),
                        })
                    }
                }
                if trade.views.iter().any(|v| &v.provider == provider) {
                    return Err(Error::invalid(format!(
                        "provider {provider} already submitted a view in this round"
                    )));
                }
                let trade = self.trades.get_mut(trade_id).expect("checked above");
                trade.views.push(View {
                    provider: provider.clone(),
                    value: *value,
                });
                trade.state = TradeState::Collecting;
            }

            EventBody::Evaluated {
                trade_id,
                strategy,
                value,
                confidence,
            } => {
                let trade = self.require_trade(*trade_id)?;
                if trade.state != TradeState::Collecting {
                    return Err(Error::InvalidState {
                        trade_id: *trade_id,
                        operation: "evaluate",
                        state: trade.state.name(),
                    });
                }
                let estimate =
                    evaluate_views(&trade.views, &self.profiles, *strategy, trade.tolerance)?;
                if replaying && (estimate.value != *value || estimate.confidence != *confidence) {
                    return Err(Error::CorruptLog(format!(
                        "trade {trade_id}: logged evaluation ({value}, {confidence}) does not \
                         reproduce (got ({}, {}))",
                        estimate.value, estimate.confidence
                    )));
                }
                let trade = self.trades.get_mut(trade_id).expect("checked above");
                trade.estimate = Some(estimate);
                trade.strategy = Some(*strategy);
                trade.state = TradeState::Evaluated;
            }

            EventBody::Confirmed { trade_id } => {
                let trade = self.require_trade(*trade_id)?;
                if trade.state != TradeState::Evaluated {
                    return Err(Error::InvalidState {
                        trade_id: *trade_id,
                        operation: "confirm",
                        state: trade.state.name(),
                    });
                }
                self.trades.get_mut(trade_id).expect("checked above").confirmed = true;
            }

            EventBody::Settled {
                trade_id,
                value,
                confidence,
                budget,
                payments,
            } => {
                let trade = self.require_trade(*trade_id)?;
                if trade.state != TradeState::Evaluated || !trade.confirmed {
                    return Err(Error::CorruptLog(format!(
                        "trade {trade_id}: Settled without a preceding Confirmed"
                    )));
                }
                let settlement = self.settlement_for(trade)?;
                if replaying {
                    let reproduced: Vec<SettledPayment> = settlement
                        .payments
                        .iter()
                        .map(|p| SettledPayment {
                            provider: p.provider.clone(),
                            amount: format_amount(p.amount),
                        })
                        .collect();
                    if settlement.value != *value
                        || settlement.confidence != *confidence
                        || settlement.band.budget != *budget
                        || &reproduced != payments
                    {
                        return Err(Error::CorruptLog(format!(
                            "trade {trade_id}: logged settlement does not reproduce"
                        )));
                    }
                }
                // Settlement is when truth is revealed, so it is also when
                // every submitted view becomes a calibration observation.
                for view in settlement.payments.iter().map(|p| &p.provider).zip(
                    // payments are in view order by construction
                    self.trades[trade_id].views.iter(),
                ) {
                    debug_assert_eq!(view.0, &view.1.provider);
                }
                let views = self.trades[trade_id].views.clone();
                for v in &views {
                    self.profiles
                        .entry(v.provider.clone())
                        .or_insert_with(|| ProviderProfile::new(v.provider.clone()))
                        .record_error(v.value - settlement.value);
                }
                let trade = self.trades.get_mut(trade_id).expect("checked above");
                trade.state = TradeState::Settled;
                trade.confirmed = false;
            }

            EventBody::Redeclared { trade_id, mode } => {
                let trade = self.require_trade(*trade_id)?;
                if trade.state != TradeState::Evaluated {
                    return Err(Error::InvalidState {
                        trade_id: *trade_id,
                        operation: "redeclare",
                        state: trade.state.name(),
                    });
                }
                validate_redeclaration(&trade.mode, mode)?;
                let trade = self.trades.get_mut(trade_id).expect("checked above");
                trade.mode = mode.clone();
                trade.views.clear();
                trade.estimate = None;
                trade.strategy = None;
                trade.round += 1;
                trade.state = TradeState::Declared;
            }

            EventBody::CalibrationTrade {
                provider,
                truth,
                view,
            } => {
                self.profiles
                    .entry(provider.clone())
                    .or_insert_with(|| ProviderProfile::new(provider.clone()))
                    .record_error(view - truth);
            }
        }
        Ok(())
    }

    /// Export all provider profiles as CSV
    /// (`provider_id,count,mean_error,variance,calibrated`), sorted by id.
    pub fn write_profiles_csv(&self, writer: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["provider_id", "count", "mean_error", "variance", "calibrated"])?;
        for profile in self.profiles.values() {
            w.write_record([
                profile.id.to_string(),
                profile.moments.count().to_string(),
                format!("{}", profile.moments.mean()),
                format!("{}", profile.moments.variance()),
                profile.is_calibrated().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One row of a profile-store CSV, as written by
/// [`Ledger::write_profiles_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRecord {
    pub id: ProviderId,
    pub count: u64,
    pub mean_error: f64,
    pub variance: f64,
}

impl ProfileRecord {
    pub fn is_calibrated(&self) -> bool {
        self.count >= MIN_CALIBRATION_TRADES as u64
    }
}

/// Read a profile-store CSV back. The trailing `calibrated` column is
/// accepted but ignored — it is derived from `count`, and trusting a
/// possibly-edited copy would let a file disagree with itself.
pub fn read_profiles_csv(reader: impl std::io::Read) -> Result<Vec<ProfileRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = r.headers()?.clone();
    let expected = ["provider_id", "count", "mean_error", "variance"];
    let got: Vec<&str> = headers.iter().take(4).collect();
    if got != expected {
        return Err(Error::invalid(format!(
            "profile CSV must start with columns {expected:?}, found {got:?}"
        )));
    }
    let mut records = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let line = i + 2; // header is line 1
        let field = |idx: usize, name: &str| -> Result<&str> {
            row.get(idx)
                .ok_or_else(|| Error::invalid(format!("line {line}: missing {name}")))
        };
        let parse = |value: &str, name: &str| -> Result<f64> {
            value.parse().map_err(|_| {
                Error::invalid(format!("line {line}: {name} {value:?} is not a number"))
            })
        };
        let record = ProfileRecord {
            id: field(0, "provider_id")?.into(),
            count: field(1, "count")?.parse().map_err(|_| {
                Error::invalid(format!("line {line}: count is not a whole number"))
            })?,
            mean_error: parse(field(2, "mean_error")?, "mean_error")?,
            variance: parse(field(3, "variance")?, "variance")?,
        };
        if record.variance < 0.0 {
            return Err(Error::invalid(format!(
                "line {line}: negative variance {}",
                record.variance
            )));
        }
        if records.iter().any(|r: &ProfileRecord| r.id == record.id) {
            return Err(Error::invalid(format!(
                "line {line}: duplicate provider {}",
                record.id
            )));
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::invalid("profile CSV contains no providers"));
    }
    Ok(records)
}
