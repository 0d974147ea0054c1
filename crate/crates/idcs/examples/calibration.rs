//! Calibrate provider error profiles from a historical dataset.
//!
//! Before anyone trades, every provider answers a run of trades whose true
//! value the buyer already knows. The gap between each answer and the
//! truth feeds the provider's error profile — the Gaussian the market will
//! later use to weight that provider's views and price its reliability.
//!
//! Here the known-truth series is the `GDP_PA` column of the bundled
//! growth fixture, and every other indicator column plays the role of one
//! provider guessing it.

use idcs::dataset::IndicatorTable;
use idcs::ledger::Ledger;

fn main() -> idcs::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/growth_fixture.csv");
    let table = IndicatorTable::load_csv(path)?;
    println!(
        "dataset: {} years, {} indicators, {} missing cells",
        table.years.len(),
        table.columns.len(),
        table.missing_cells()
    );

    // Summarize how each indicator has historically missed the reference —
    // this is the raw material calibration distills.
    println!("\nempirical error of each indicator against GDP_PA:");
    for stats in table.derive_error_stats("GDP_PA")? {
        println!(
            "  {:<8} {:>2} usable years, mean {:+.3}, mean |error| {:.3}, sd {:.3}",
            stats.indicator, stats.count, stats.mean, stats.mean_abs, stats.std_dev
        );
    }

    // Calibrate through the ledger: ten known-truth trades per provider.
    // Each pair lands in the event log, so the profile's history is
    // auditable later.
    let mut ledger = Ledger::new();
    for (name, _) in &table.columns {
        if name == "GDP_PA" {
            continue;
        }
        let pairs = table.calibration_pairs(name, "GDP_PA")?;
        ledger.calibrate(name.as_str(), &pairs[..10.min(pairs.len())])?;
    }

    println!("\ncalibrated profiles (what the market now believes):");
    for profile in ledger.profiles().values() {
        let g = profile.error_distribution();
        println!(
            "  {:<8} bias {:+.3}, sd {:.3} -> P(|error| < 1) = {:.3}{}",
            profile.id,
            g.mean,
            g.std_dev(),
            profile.interval_prob(1.0),
            if profile.is_calibrated() { "" } else { "  (still uncalibrated)" }
        );
    }

    // The profile store round-trips through CSV for the command-line tools.
    let mut csv = Vec::new();
    ledger.write_profiles_csv(&mut csv)?;
    println!("\nprofile CSV, first lines:");
    for line in String::from_utf8_lossy(&csv).lines().take(4) {
        println!("  {line}");
    }

    let calibrated = ledger
        .profiles()
        .values()
        .filter(|p| p.is_calibrated())
        .count();
    assert_eq!(calibrated, 12, "every indicator column became a provider");
    Ok(())
}
