//! Seeded adversarial experiments: how much budget leaks when some
//! providers lie, and how fast confidence grows when honest providers are
//! paid to improve.
//!
//! Two harnesses live here.
//!
//! **The error-payment grid** ([`run_error_payment_grid`]) plays one
//! settled trade per repetition. Honest providers report the ground truth
//! plus a draw from their Gaussian error model; a chosen subset of
//! *malicious* providers multiply their would-be view by a corruption
//! factor. Each cell of the grid (weighting strategy × payment function ×
//! malicious count × corruption factor × improvement rate) settles the
//! trade twice — once as manipulated, once as the genuine counterfactual
//! with the same draws — and reports the [`crate::payment::error_payment`]
//! between the two settlements.
//!
//! **The confidence trajectory** ([`run_confidence_trajectory`]) plays many
//! consecutive trades through a real [`Ledger`], with the buyer raising the
//! budget every round. Settling a round pays providers and feeds their
//! errors back into calibration; paid honest providers additionally
//! *improve* — their true noise shrinks per [`improvement_step`] — while
//! malicious providers pocket the money and stay exactly as wrong as
//! before. The output is the confidence level as a function of cumulative
//! spend.
//!
//! Every run is a pure function of its config: draws come from a
//! counter-seeded ChaCha8 stream per repetition, so re-running a config
//! reproduces output byte-for-byte, and repetition `k` sees identical
//! draws no matter which grid cells are enabled (cells are *paired*, which
//! sharpens cross-cell comparisons).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ledger::Ledger;
use crate::payment::{distribute, error_payment, PaymentFunction, PaymentMode};
use crate::truth::{
    evaluate_views, ProfileStore, ProviderId, ProviderProfile, View, WeightStrategy,
};
use crate::{Error, Result, DEFAULT_TOLERANCE, MIN_CALIBRATION_TRADES};

/// Published error statistics of the twelve indicator series used as the
/// realistic provider panel: yearly growth of each indicator treated as a
/// noisy view of reference GDP growth. `mean_abs_error` and `std_dev` are
/// in percentage points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceStat {
    pub name: &'static str,
    pub mean_abs_error: f64,
    pub std_dev: f64,
}

/// The twelve-provider reference panel (national-accounts indicators,
/// yearly growth vs. reference GDP growth).
pub const GDP_REFERENCE_STATS: [ReferenceStat; 12] = [
    ReferenceStat { name: "FCE", mean_abs_error: 2.4069, std_dev: 1.5291 },
    ReferenceStat { name: "GCF", mean_abs_error: 3.8193, std_dev: 2.9389 },
    ReferenceStat { name: "NE", mean_abs_error: 33.6287, std_dev: 34.5794 },
    ReferenceStat { name: "GDP_EA", mean_abs_error: 1.2462, std_dev: 0.9685 },
    ReferenceStat { name: "NPT", mean_abs_error: 3.9390, std_dev: 3.4461 },
    ReferenceStat { name: "WC", mean_abs_error: 4.1153, std_dev: 5.3371 },
    ReferenceStat { name: "DFA", mean_abs_error: 3.6984, std_dev: 2.3672 },
    ReferenceStat { name: "BB", mean_abs_error: 10.7253, std_dev: 14.3010 },
    ReferenceStat { name: "GDP_IA", mean_abs_error: 3.0893, std_dev: 3.6595 },
    ReferenceStat { name: "FI", mean_abs_error: 4.8382, std_dev: 3.2961 },
    ReferenceStat { name: "SI", mean_abs_error: 1.6570, std_dev: 1.1663 },
    ReferenceStat { name: "TI", mean_abs_error: 2.6926, std_dev: 1.9201 },
];

/// A synthetic provider: its true error model for view generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderSpec {
    pub id: ProviderId,
    /// Systematic bias of the provider's views.
    pub mean_error: f64,
    /// Spread of the provider's views around truth + bias.
    pub std_dev: f64,
}

impl ProviderSpec {
    pub fn new(id: impl Into<ProviderId>, mean_error: f64, std_dev: f64) -> Self {
        ProviderSpec {
            id: id.into(),
            mean_error,
            std_dev,
        }
    }

    /// The reference panel taken at face value: each provider biased by its
    /// published mean absolute error and spread by its published deviation.
    pub fn reference_panel() -> Vec<ProviderSpec> {
        GDP_REFERENCE_STATS
            .iter()
            .map(|s| ProviderSpec::new(s.name, s.mean_abs_error, s.std_dev))
            .collect()
    }

    /// The reference panel as unbiased noise: published deviations, zero
    /// mean. This is the panel the trajectory harness uses — an unbiased
    /// baseline keeps one-sided manipulation *visible* against the truth,
    /// whereas a panel that is itself uniformly biased upward absorbs
    /// upward corruption into its own bias and inverts the cost signal.
    pub fn zero_mean_reference_panel() -> Vec<ProviderSpec> {
        GDP_REFERENCE_STATS
            .iter()
            .map(|s| ProviderSpec::new(s.name, 0.0, s.std_dev))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Error-payment grid
// ---------------------------------------------------------------------------

/// Configuration of a grid run. `malicious_counts`, `malicious_factors`,
/// and `improvement_rates` are axes; every combination with every strategy
/// and function becomes one cell, played `repetitions` times.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub seed: u64,
    pub ground_truth: f64,
    pub tolerance: f64,
    pub budget: f64,
    pub repetitions: usize,
    pub providers: Vec<ProviderSpec>,
    pub malicious_counts: Vec<usize>,
    pub malicious_factors: Vec<f64>,
    /// Recorded in every row for provenance. A grid cell is a single
    /// settled round, and improvement only acts *between* paid rounds, so
    /// this axis cannot change grid outcomes — it exists so grid and
    /// trajectory runs share one config vocabulary and one CSV schema.
    pub improvement_rates: Vec<f64>,
    pub strategies: Vec<WeightStrategy>,
    pub functions: Vec<PaymentFunction>,
}

impl Default for GridConfig {
    /// The standard benchmark: reference panel, truth 9.5, tolerance 1,
    /// unit budget, all strategies and functions.
    fn default() -> Self {
        GridConfig {
            seed: 0,
            ground_truth: 9.5,
            tolerance: DEFAULT_TOLERANCE,
            budget: 1.0,
            repetitions: 10,
            providers: ProviderSpec::reference_panel(),
            malicious_counts: vec![3],
            malicious_factors: vec![1.2],
            improvement_rates: vec![0.1],
            strategies: WeightStrategy::all_standard().to_vec(),
            functions: PaymentFunction::all_standard().to_vec(),
        }
    }
}

/// One repetition of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub strategy: WeightStrategy,
    pub function: PaymentFunction,
    pub malicious_count: usize,
    pub malicious_factor: f64,
    pub improvement_rate: f64,
    pub repetition: usize,
    pub error_payment: f64,
}

/// Aggregate of a grid cell over its repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSummary {
    pub strategy: WeightStrategy,
    pub function: PaymentFunction,
    pub malicious_count: usize,
    pub malicious_factor: f64,
    pub improvement_rate: f64,
    pub repetitions: usize,
    pub mean_error_payment: f64,
}

/// Corrupt the views at the given indices by the multiplicative factor.
///
/// Manipulation scales the view a malicious provider *would* have sent:
/// the lie stays correlated with the truth, which is what makes it hard to
/// spot from the submitted values alone.
pub fn inject_malicious(views: &mut [View], malicious: &[usize], factor: f64) {
    for &i in malicious {
        views[i].value *= factor;
    }
}

/// Per-repetition draws shared by every cell of the grid.
struct RepetitionDraws {
    honest_views: Vec<View>,
    /// A full shuffle of provider indices; a cell with `mp` malicious
    /// providers takes the first `mp`, so smaller panels nest inside
    /// larger ones within a repetition.
    corruption_order: Vec<usize>,
}

fn draw_repetition(config: &GridConfig, repetition: usize) -> Result<RepetitionDraws> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(repetition as u64));
    let honest_views = config
        .providers
        .iter()
        .map(|spec| {
            let noise = Normal::new(spec.mean_error, spec.std_dev)
                .map_err(|e| Error::invalid(format!("provider {}: {e}", spec.id)))?
                .sample(&mut rng);
            Ok(View {
                provider: spec.id.clone(),
                value: config.ground_truth + noise,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut corruption_order: Vec<usize> = (0..config.providers.len()).collect();
    corruption_order.shuffle(&mut rng);
    Ok(RepetitionDraws {
        honest_views,
        corruption_order,
    })
}

/// Exact profiles for the configured panel: what a long, faithful
/// calibration history would converge to.
fn panel_profiles(providers: &[ProviderSpec]) -> ProfileStore {
    providers
        .iter()
        .map(|spec| {
            (
                spec.id.clone(),
                ProviderProfile::from_stats(
                    spec.id.clone(),
                    MIN_CALIBRATION_TRADES as u64,
                    spec.mean_error,
                    spec.std_dev * spec.std_dev,
                ),
            )
        })
        .collect()
}

/// Run the full grid. Row order is strategy-major
/// (strategy → function → malicious count → factor → rate → repetition);
/// see the module docs for the pairing guarantees across cells.
pub fn run_error_payment_grid(config: &GridConfig) -> Result<Vec<GridRow>> {
    validate_grid(config)?;
    let profiles = panel_profiles(&config.providers);
    let draws: Vec<RepetitionDraws> = (0..config.repetitions)
        .map(|rep| draw_repetition(config, rep))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for &strategy in &config.strategies {
        // The genuine settlement depends only on (repetition, strategy,
        // function): compute each once and reuse across all cells.
        let genuine_estimates: Vec<_> = draws
            .iter()
            .map(|d| evaluate_views(&d.honest_views, &profiles, strategy, config.tolerance))
            .collect::<Result<_>>()?;
        for &function in &config.functions {
            let genuine_payments: Vec<_> = draws
                .iter()
                .zip(&genuine_estimates)
                .map(|(d, est)| {
                    distribute(&d.honest_views, est.value, config.budget, function)
                })
                .collect::<Result<_>>()?;
            for &malicious_count in &config.malicious_counts {
                for &malicious_factor in &config.malicious_factors {
                    for &improvement_rate in &config.improvement_rates {
                        for (repetition, draw) in draws.iter().enumerate() {
                            let mut views = draw.honest_views.clone();
                            inject_malicious(
                                &mut views,
                                &draw.corruption_order[..malicious_count],
                                malicious_factor,
                            );
                            let est =
                                evaluate_views(&views, &profiles, strategy, config.tolerance)?;
                            let payments =
                                distribute(&views, est.value, config.budget, function)?;
                            rows.push(GridRow {
                                strategy,
                                function,
                                malicious_count,
                                malicious_factor,
                                improvement_rate,
                                repetition,
                                error_payment: error_payment(
                                    &payments,
                                    &genuine_payments[repetition],
                                ),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn validate_grid(config: &GridConfig) -> Result<()> {
    if config.providers.is_empty() {
        return Err(Error::invalid("grid needs at least one provider"));
    }
    if config.repetitions == 0 {
        return Err(Error::invalid("grid needs at least one repetition"));
    }
    for &mp in &config.malicious_counts {
        if mp > config.providers.len() {
            return Err(Error::invalid(format!(
                "cannot corrupt {mp} of {} providers",
                config.providers.len()
            )));
        }
    }
    for &mf in &config.malicious_factors {
        if mf <= 0.0 || mf.is_nan() {
            return Err(Error::invalid(format!(
                "manipulation factor must be positive, got {mf}"
            )));
        }
    }
    if config.strategies.is_empty() || config.functions.is_empty() {
        return Err(Error::invalid("grid needs at least one strategy and function"));
    }
    Ok(())
}

/// Collapse grid rows into per-cell means, preserving row order.
pub fn summarize_grid(rows: &[GridRow]) -> Vec<GridSummary> {
    let mut summaries: Vec<GridSummary> = Vec::new();
    for row in rows {
        let matches = |s: &GridSummary| {
            s.strategy == row.strategy
                && s.function == row.function
                && s.malicious_count == row.malicious_count
                && s.malicious_factor == row.malicious_factor
                && s.improvement_rate == row.improvement_rate
        };
        match summaries.iter_mut().find(|s| matches(s)) {
            Some(s) => {
                s.mean_error_payment += row.error_payment;
                s.repetitions += 1;
            }
            None => summaries.push(GridSummary {
                strategy: row.strategy,
                function: row.function,
                malicious_count: row.malicious_count,
                malicious_factor: row.malicious_factor,
                improvement_rate: row.improvement_rate,
                repetitions: 1,
                mean_error_payment: row.error_payment,
            }),
        }
    }
    for s in &mut summaries {
        s.mean_error_payment /= s.repetitions as f64;
    }
    summaries
}

/// Write grid rows as CSV:
/// `method,function,mp,mf,if,repetition,error_payment`.
pub fn write_grid_csv(rows: &[GridRow], mut writer: impl std::io::Write) -> Result<()> {
    writeln!(writer, "method,function,mp,mf,if,repetition,error_payment")?;
    for r in rows {
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            r.strategy,
            r.function,
            r.malicious_count,
            r.malicious_factor,
            r.improvement_rate,
            r.repetition,
            r.error_payment
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Improvement
// ---------------------------------------------------------------------------

/// One improvement step for a provider that has just been paid.
///
/// `paid_rounds` counts the provider's *previous* paid rounds; the step
/// multiplies the current deviation by
///
/// ```text
/// ratio = clamp(1 − gain · e^(rate · (paid_rounds + 1)), 0, 1)
/// ```
///
/// so each successive payment shrinks the deviation more aggressively.
/// The clamp keeps the model sane once the exponential overtakes 1/gain:
/// a deviation can reach zero, but never turns negative or grows.
pub fn improvement_step(deviation: f64, paid_rounds: u32, gain: f64, rate: f64) -> f64 {
    let ratio = (1.0 - gain * f64::exp(rate * (paid_rounds as f64 + 1.0))).clamp(0.0, 1.0);
    deviation * ratio
}

// ---------------------------------------------------------------------------
// Confidence trajectory
// ---------------------------------------------------------------------------

/// Configuration of a confidence-trajectory run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub seed: u64,
    pub ground_truth: f64,
    pub tolerance: f64,
    /// Stop once the (averaged) confidence reaches this level.
    pub target_confidence: f64,
    /// Hard cap on cumulative spend; a cap of 0 yields exactly the initial
    /// evaluation point. Use `f64::INFINITY` for no cap.
    pub max_budget: f64,
    pub max_rounds: u32,
    /// Independent replicates averaged per round; the published trajectory
    /// is the mean confidence across them.
    pub replicates: usize,
    pub providers: Vec<ProviderSpec>,
    pub malicious_count: usize,
    pub malicious_factor: f64,
    pub improvement_rate: f64,
    pub improvement_gain: f64,
    pub strategy: WeightStrategy,
    pub function: PaymentFunction,
}

impl Default for TrajectoryConfig {
    /// The standard trajectory: unbiased reference panel, three malicious
    /// providers at factor 1.2, reliability weighting, spread payments.
    fn default() -> Self {
        TrajectoryConfig {
            seed: 0,
            ground_truth: 9.5,
            tolerance: DEFAULT_TOLERANCE,
            target_confidence: 0.9,
            max_budget: f64::INFINITY,
            max_rounds: 1000,
            replicates: 10,
            providers: ProviderSpec::zero_mean_reference_panel(),
            malicious_count: 3,
            malicious_factor: 1.2,
            improvement_rate: 0.1,
            improvement_gain: 0.1,
            strategy: WeightStrategy::Idcsw,
            function: PaymentFunction::AllInverseSquare,
        }
    }
}

/// One point of a trajectory: the confidence the buyer's evaluation
/// reported in `round`, having already spent `cumulative_budget` in the
/// rounds before it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub round: u32,
    pub cumulative_budget: f64,
    pub confidence: f64,
}

/// Result of a trajectory run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Whether the run stopped because the target confidence was reached
    /// (as opposed to running out of rounds or budget).
    pub reached_target: bool,
}

impl Trajectory {
    /// Cumulative budget at which the target was reached, if it was.
    pub fn budget_to_target(&self) -> Option<f64> {
        self.reached_target
            .then(|| self.points.last().map(|p| p.cumulative_budget))
            .flatten()
    }
}

/// One replicate's market: a ledger plus the evolving true state of its
/// providers.
struct ReplicateState {
    rng: ChaCha8Rng,
    ledger: Ledger,
    /// Current true deviation per provider (shrinks with improvement).
    deviations: Vec<f64>,
    /// Paid-round count per provider, for the improvement schedule.
    paid_rounds: Vec<u32>,
    /// Indices of the malicious providers in this replicate.
    malicious: Vec<usize>,
}

/// Run a confidence trajectory: rounds of declare → collect → evaluate,
/// paying and improving until the averaged confidence reaches the target
/// (or rounds / budget run out).
///
/// Round `r` declares a budget of `r` currency units, so cumulative spend
/// grows quadratically while per-round stakes rise linearly — the buyer
/// leans in as the panel proves itself. Views are drawn fresh every round
/// from each provider's *current* noise; malicious providers corrupt
/// theirs by the configured factor and never improve (an adversary banks
/// the payment and keeps lying), while honest providers that were paid
/// shrink their deviation per [`improvement_step`].
///
/// The published curve averages `replicates` independent markets run in
/// lockstep, all of them stopping together when the averaged confidence
/// crosses the target. Final trades are left in the evaluated state: the
/// round that proves the target needs no further payment.
///
/// Every replicate's full history lives in its own ledger; the trajectory
/// is deterministic in the seed, and each replicate's event log replays.
pub fn run_confidence_trajectory(config: &TrajectoryConfig) -> Result<Trajectory> {
    validate_trajectory(config)?;
    let mut replicates: Vec<ReplicateState> = (0..config.replicates)
        .map(|k| init_replicate(config, k as u64))
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    let mut cumulative_budget = 0.0;
    let mut reached_target = false;

    for round in 1..=config.max_rounds {
        let round_budget = round as f64;
        let mut confidence_sum = 0.0;
        let mut trade_ids = Vec::with_capacity(replicates.len());

        for state in &mut replicates {
            let trade_id = state.ledger.declare_with_tolerance(
                format!("round-{round}"),
                PaymentMode::flat(round_budget, config.function),
                config.tolerance,
            )?;
            for (i, spec) in config.providers.iter().enumerate() {
                let noise = sample_normal(&mut state.rng, 0.0, state.deviations[i])?;
                let mut value = config.ground_truth + noise;
                if state.malicious.contains(&i) {
                    value *= config.malicious_factor;
                }
                state.ledger.submit_view(trade_id, spec.id.clone(), value)?;
            }
            confidence_sum += state.ledger.evaluate(trade_id, config.strategy)?;
            trade_ids.push(trade_id);
        }

        let confidence = confidence_sum / replicates.len() as f64;
        points.push(TrajectoryPoint {
            round,
            cumulative_budget,
            confidence,
        });

        if confidence >= config.target_confidence {
            // Target proven: stop without paying for this round. The final
            // trades stay Evaluated in their ledgers.
            reached_target = true;
            break;
        }
        if cumulative_budget + round_budget > config.max_budget {
            break;
        }

        // Pay the round and let paid honest providers improve.
        for (state, trade_id) in replicates.iter_mut().zip(trade_ids) {
            let (_, settlement) = state.ledger.confirm(trade_id)?;
            for (i, payment) in settlement.payments.iter().enumerate() {
                debug_assert_eq!(payment.provider, config.providers[i].id);
                if payment.amount > 0.0 && !state.malicious.contains(&i) {
                    state.deviations[i] = improvement_step(
                        state.deviations[i],
                        state.paid_rounds[i],
                        config.improvement_gain,
                        config.improvement_rate,
                    );
                    state.paid_rounds[i] += 1;
                }
            }
        }
        cumulative_budget += round_budget;
    }

    Ok(Trajectory {
        points,
        reached_target,
    })
}

fn validate_trajectory(config: &TrajectoryConfig) -> Result<()> {
    if config.providers.is_empty() {
        return Err(Error::invalid("trajectory needs at least one provider"));
    }
    if config.malicious_count > config.providers.len() {
        return Err(Error::invalid(format!(
            "cannot corrupt {} of {} providers",
            config.malicious_count,
            config.providers.len()
        )));
    }
    if config.replicates == 0 {
        return Err(Error::invalid("trajectory needs at least one replicate"));
    }
    if !(0.0..=1.0).contains(&config.target_confidence) {
        return Err(Error::invalid(format!(
            "target confidence must be within [0, 1], got {}",
            config.target_confidence
        )));
    }
    if config.max_rounds == 0 {
        return Err(Error::invalid("trajectory needs at least one round"));
    }
    Ok(())
}

fn sample_normal(rng: &mut ChaCha8Rng, mean: f64, std_dev: f64) -> Result<f64> {
    Ok(Normal::new(mean, std_dev)
        .map_err(|e| Error::invalid(format!("bad noise model: {e}")))?
        .sample(rng))
}

/// Set up one replicate: draw its calibration history through the ledger
/// and pick its malicious subset.
fn init_replicate(config: &TrajectoryConfig, replicate: u64) -> Result<ReplicateState> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(replicate));
    let mut ledger = Ledger::new();

    // Calibration history: each provider's profile is fitted from real
    // draws of its own noise, exactly as a live market would have fitted
    // it — including the sampling error a finite history carries.
    for spec in &config.providers {
        let pairs: Vec<(f64, f64)> = (0..MIN_CALIBRATION_TRADES)
            .map(|_| {
                sample_normal(&mut rng, spec.mean_error, spec.std_dev)
                    .map(|e| (config.ground_truth, config.ground_truth + e))
            })
            .collect::<Result<_>>()?;
        ledger.calibrate(spec.id.clone(), &pairs)?;
    }

    let mut order: Vec<usize> = (0..config.providers.len()).collect();
    order.shuffle(&mut rng);
    order.truncate(config.malicious_count);

    Ok(ReplicateState {
        rng,
        ledger,
        deviations: config.providers.iter().map(|s| s.std_dev).collect(),
        paid_rounds: vec![0; config.providers.len()],
        malicious: order,
    })
}

/// Write one or more trajectories as CSV:
/// `if,round,cumulative_budget,cl`, one block per improvement rate.
pub fn write_trajectory_csv(
    runs: &[(f64, Trajectory)],
    mut writer: impl std::io::Write,
) -> Result<()> {
    writeln!(writer, "if,round,cumulative_budget,cl")?;
    for (rate, trajectory) in runs {
        for p in &trajectory.points {
            writeln!(
                writer,
                "{},{},{},{}",
                rate, p.round, p.cumulative_budget, p.confidence
            )?;
        }
    }
    Ok(())
}
