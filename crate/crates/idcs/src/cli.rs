//! Command-line front end: calibration from datasets, single
//! non-interactive trades, batch adversarial experiments, and trajectory
//! emission.
//!
//! The binary never renders plots or waits for input — it emits CSVs for
//! external tooling and prints summaries to standard output. Every command
//! is deterministic: identical flags and inputs produce byte-identical
//! output files. Seeds default from the `IDCS_SEED` environment variable.
//!
//! Exit codes follow the usual split: `0` success, `2` for data or
//! configuration problems (malformed files, impossible parameter
//! combinations), `64` for usage errors (unknown flags, unparseable
//! values).

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::dataset::IndicatorTable;
use crate::ledger::{read_profiles_csv, Ledger, ProfileRecord};
use crate::payment::{Band, PaymentFunction, PaymentMode};
use crate::sim::{
    run_confidence_trajectory, run_error_payment_grid, summarize_grid, write_grid_csv,
    write_trajectory_csv, GridConfig, ProviderSpec, TrajectoryConfig,
};
use crate::truth::{ProviderId, WeightStrategy};
use crate::{Error, Result, DEFAULT_TOLERANCE};

/// Exit code for malformed data or impossible configurations.
const EXIT_DATA: i32 = 2;
/// Exit code for command-line usage errors.
const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "idcs",
    version,
    about = "Trade imprecisely measurable commodities: calibrate providers, run trades, simulate adversaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit provider error profiles from a dataset with a known-truth column
    Calibrate(CalibrateArgs),
    /// Run one three-stage trade non-interactively against stored profiles
    Trade(TradeArgs),
    /// Batch error-payment grid over malicious-provider configurations
    Experiment(ExperimentArgs),
    /// Emit confidence-level trajectories under paid improvement
    Trajectory(TrajectoryArgs),
    /// Check an indicator CSV for structural problems and sum identities
    ValidateDataset(ValidateDatasetArgs),
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Indicator CSV (year column first)
    #[arg(long)]
    dataset: PathBuf,
    /// Column holding the ground truth the others are measured against
    #[arg(long)]
    ground_truth: String,
    /// Calibration trades per provider (earliest complete years first)
    #[arg(long, default_value_t = 10)]
    trades: usize,
    /// Where to write the profile-store CSV
    #[arg(long)]
    profiles: PathBuf,
}

#[derive(Debug, Args)]
struct TradeArgs {
    /// Profile-store CSV from `calibrate`
    #[arg(long)]
    profiles: PathBuf,
    /// Payment band as THRESHOLD:BUDGET:FUNCTION (repeat for tiers,
    /// thresholds ascending, e.g. --band 0.6:2:top-one --band 1:1:top-one)
    #[arg(long, required = true)]
    band: Vec<String>,
    /// A provider's view as ID=VALUE (repeat per provider)
    #[arg(long, required = true)]
    view: Vec<String>,
    /// Weighting strategy for the evaluation
    #[arg(long, default_value = "idcsw")]
    strategy: WeightStrategy,
    /// Error tolerance defining an acceptable consensus
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Commodity tag recorded on the trade
    #[arg(long, default_value = "commodity")]
    commodity: String,
    /// Confirm and settle instead of stopping after evaluation
    #[arg(long)]
    confirm: bool,
    /// Persist the full event log to this path
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Profile-store CSV describing the provider panel
    #[arg(long)]
    profiles: PathBuf,
    /// Malicious provider counts, comma separated
    #[arg(long, value_delimiter = ',', default_value = "3")]
    mp: Vec<usize>,
    /// Manipulation factors, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1.2")]
    mf: Vec<f64>,
    /// Experiment seed
    #[arg(long, env = "IDCS_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the full per-repetition grid CSV here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Weighting strategies to compare, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = WeightStrategy::all_standard())]
    methods: Vec<WeightStrategy>,
    /// Payment functions to compare, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = PaymentFunction::all_standard())]
    functions: Vec<PaymentFunction>,
}

#[derive(Debug, Args)]
struct TrajectoryArgs {
    /// Improvement exponents, comma separated (one trajectory each)
    #[arg(long = "if", value_delimiter = ',', default_value = "0.1")]
    improvement: Vec<f64>,
    /// Malicious provider count
    #[arg(long, default_value_t = 3)]
    mp: usize,
    /// Cumulative budget cap; 0 stops after the initial evaluation
    #[arg(long, default_value_t = f64::INFINITY)]
    budget: f64,
    /// Trajectory seed
    #[arg(long, env = "IDCS_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the trajectory CSV here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateDatasetArgs {
    /// Indicator CSV (year column first)
    #[arg(long)]
    dataset: PathBuf,
    /// Also verify the national-accounts sum identities
    #[arg(long)]
    check_identities: bool,
    /// Absolute tolerance for identity checks
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

/// Parse arguments from the process environment and run. Returns the
/// process exit code; the binary is a one-line wrapper around this.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are requests, not mistakes.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Trade(args) => cmd_trade(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Trajectory(args) => cmd_trajectory(args),
        Command::ValidateDataset(args) => cmd_validate_dataset(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_DATA
        }
    }
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<i32> {
    if args.trades == 0 {
        eprintln!("error: --trades must be at least 1");
        return Ok(EXIT_USAGE);
    }
    let table = IndicatorTable::load_csv(&args.dataset)?;
    // Fail on the truth column by name before touching the others.
    if table.column(&args.ground_truth).is_none() {
        return Err(Error::Dataset(format!(
            "ground-truth column {:?} not in dataset",
            args.ground_truth
        )));
    }

    let mut ledger = Ledger::new();
    let mut names: Vec<&str> = Vec::new();
    for (name, _) in &table.columns {
        if name == &args.ground_truth {
            continue;
        }
        let pairs = table.calibration_pairs(name, &args.ground_truth)?;
        if pairs.is_empty() {
            return Err(Error::Dataset(format!(
                "column {name:?} shares no complete years with {:?}",
                args.ground_truth
            )));
        }
        let take = pairs.len().min(args.trades);
        ledger.calibrate(name.as_str(), &pairs[..take])?;
        names.push(name);
    }

    let file = std::fs::File::create(&args.profiles)?;
    ledger.write_profiles_csv(std::io::BufWriter::new(file))?;

    println!(
        "calibrated {} providers against {:?} ({} trades each where available)",
        names.len(),
        args.ground_truth,
        args.trades
    );
    for name in names {
        let profile = &ledger.profiles()[&ProviderId::from(name)];
        println!(
            "  {:<10} n={:<3} mean={:+.4} sd={:.4}{}",
            name,
            profile.moments.count(),
            profile.moments.mean(),
            profile.moments.variance().sqrt(),
            if profile.is_calibrated() { "" } else { "  (uncalibrated)" },
        );
    }
    println!("profiles written to {}", args.profiles.display());
    Ok(0)
}

fn parse_band(text: &str) -> Result<Band> {
    let parts: Vec<&str> = text.split(':').collect();
    let [threshold, budget, function] = parts[..] else {
        return Err(Error::invalid(format!(
            "band {text:?} must be THRESHOLD:BUDGET:FUNCTION"
        )));
    };
    Ok(Band {
        threshold: threshold
            .parse()
            .map_err(|_| Error::invalid(format!("band threshold {threshold:?} is not a number")))?,
        budget: budget
            .parse()
            .map_err(|_| Error::invalid(format!("band budget {budget:?} is not a number")))?,
        function: function.parse()?,
    })
}

fn parse_view(text: &str) -> Result<(ProviderId, f64)> {
    let (id, value) = text
        .split_once('=')
        .ok_or_else(|| Error::invalid(format!("view {text:?} must be ID=VALUE")))?;
    if id.is_empty() {
        return Err(Error::invalid(format!("view {text:?} has an empty provider id")));
    }
    let value = value
        .parse()
        .map_err(|_| Error::invalid(format!("view value {value:?} is not a number")))?;
    Ok((id.into(), value))
}

fn load_profiles(path: &PathBuf) -> Result<Vec<ProfileRecord>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
    read_profiles_csv(std::io::BufReader::new(file))
}

fn cmd_trade(args: TradeArgs) -> Result<i32> {
    let bands = args
        .band
        .iter()
        .map(|b| parse_band(b))
        .collect::<Result<Vec<_>>>()?;
    let mode = PaymentMode::new(bands)?;

    let mut ledger = Ledger::new();
    for record in load_profiles(&args.profiles)? {
        ledger.seed_profile(
            record.id,
            record.mean_error,
            record.variance,
            record.count as usize,
        )?;
    }

    let trade_id =
        ledger.declare_with_tolerance(args.commodity.clone(), mode, args.tolerance)?;
    for view in &args.view {
        let (provider, value) = parse_view(view)?;
        ledger.submit_view(trade_id, provider, value)?;
    }
    let confidence = ledger.evaluate(trade_id, args.strategy)?;
    println!("trade {trade_id} ({}): confidence {confidence}", args.commodity);

    if args.confirm {
        let (value, settlement) = ledger.confirm(trade_id)?;
        println!("consensus value {value}");
        println!(
            "settled {} across {} providers:",
            crate::ledger::format_amount(settlement.total_paid()),
            settlement.payments.len()
        );
        for payment in &settlement.payments {
            println!(
                "  {:<10} distance={:.6} amount={:.9}",
                payment.provider,
                payment.distance,
                payment.amount
            );
        }
    } else {
        println!("left evaluated: confirm to settle, or redeclare with a larger budget");
    }

    if let Some(path) = &args.ledger {
        ledger.save(path)?;
        println!("event log written to {}", path.display());
    }
    Ok(0)
}

fn panel_from_profiles(records: &[ProfileRecord]) -> Vec<ProviderSpec> {
    records
        .iter()
        .map(|r| ProviderSpec::new(r.id.clone(), r.mean_error, r.variance.sqrt()))
        .collect()
}

fn cmd_experiment(args: ExperimentArgs) -> Result<i32> {
    let records = load_profiles(&args.profiles)?;
    if let Some(record) = records.iter().find(|r| !r.is_calibrated()) {
        return Err(Error::invalid(format!(
            "provider {} is uncalibrated ({} trades); experiments need a calibrated panel",
            record.id, record.count
        )));
    }
    let config = GridConfig {
        seed: args.seed,
        providers: panel_from_profiles(&records),
        malicious_counts: args.mp.clone(),
        malicious_factors: args.mf.clone(),
        strategies: args.methods.clone(),
        functions: args.functions.clone(),
        ..GridConfig::default()
    };
    let rows = run_error_payment_grid(&config)?;

    if let Some(path) = &args.out {
        let mut buf = Vec::new();
        write_grid_csv(&rows, &mut buf)?;
        std::fs::write(path, buf)?;
    }

    // Summary: one line per (method, function), cells across the
    // malicious-configuration axes.
    println!(
        "error payment over {} repetitions, seed {} ({} providers)",
        config.repetitions,
        config.seed,
        config.providers.len()
    );
    let summaries = summarize_grid(&rows);
    let mut header = format!("{:<12} {:<22}", "method", "function");
    for &mp in &config.malicious_counts {
        for &mf in &config.malicious_factors {
            let _ = write!(header, " {:<12}", format!("mp={mp},mf={mf}"));
        }
    }
    println!("{}", header.trim_end());
    for &strategy in &config.strategies {
        for &function in &config.functions {
            let mut line = format!("{strategy:<12} {function:<22}");
            for summary in summaries
                .iter()
                .filter(|s| s.strategy == strategy && s.function == function)
            {
                let _ = write!(line, " {:<12.4}", summary.mean_error_payment);
            }
            println!("{}", line.trim_end());
        }
    }
    if let Some(path) = &args.out {
        println!("grid written to {}", path.display());
    }
    Ok(0)
}

fn cmd_trajectory(args: TrajectoryArgs) -> Result<i32> {
    let mut rates = Vec::new();
    for &rate in &args.improvement {
        if rates.contains(&rate) {
            eprintln!("warning: duplicate improvement exponent {rate} ignored");
        } else {
            rates.push(rate);
        }
    }

    let mut runs = Vec::new();
    for &rate in &rates {
        let config = TrajectoryConfig {
            seed: args.seed,
            malicious_count: args.mp,
            max_budget: args.budget,
            improvement_rate: rate,
            ..TrajectoryConfig::default()
        };
        let trajectory = run_confidence_trajectory(&config)?;
        match trajectory.budget_to_target() {
            Some(budget) => println!(
                "if={rate}: confidence {} reached at cumulative budget {budget} \
                 ({} rounds)",
                config.target_confidence,
                trajectory.points.len()
            ),
            None => println!(
                "if={rate}: stopped after {} rounds below target (last confidence {})",
                trajectory.points.len(),
                trajectory.points.last().map_or(0.0, |p| p.confidence)
            ),
        }
        runs.push((rate, trajectory));
    }

    if let Some(path) = &args.out {
        let mut buf = Vec::new();
        write_trajectory_csv(&runs, &mut buf)?;
        std::fs::write(path, buf)?;
        println!("trajectories written to {}", path.display());
    }
    Ok(0)
}

fn cmd_validate_dataset(args: ValidateDatasetArgs) -> Result<i32> {
    let table = IndicatorTable::load_csv(&args.dataset)?;
    println!(
        "{}: {} years x {} indicators, {} missing cells",
        args.dataset.display(),
        table.years.len(),
        table.columns.len(),
        table.missing_cells()
    );
    for (name, values) in &table.columns {
        for (year, value) in table.years.iter().zip(values) {
            if value.is_none() {
                println!("  missing: {name} in {year}");
            }
        }
    }

    if args.check_identities {
        let violations =
            table.check_identities(&crate::dataset::default_gdp_identities(), args.tolerance)?;
        if violations.is_empty() {
            println!("sum identities hold within {}", args.tolerance);
        } else {
            for v in &violations {
                println!(
                    "  identity broken: {} {} is {} but components sum to {}",
                    v.target, v.year, v.target_value, v.component_sum
                );
            }
            eprintln!("error: {} identity violations", violations.len());
            return Ok(EXIT_DATA);
        }
    }
    Ok(0)
}
