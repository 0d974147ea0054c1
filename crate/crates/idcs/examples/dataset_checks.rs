//! Loading, repairing, and sanity-checking indicator datasets.
//!
//! Real statistical series arrive with holes and internal accounting
//! rules. The dataset module loads year-by-indicator CSVs, reports what's
//! missing, carries the last observation forward where that's defensible,
//! and checks sum identities — the bookkeeping constraints that hold for
//! absolute levels (components summing to their aggregate) but, tellingly,
//! *not* for growth rates derived from them.

use idcs::dataset::{default_gdp_identities, IndicatorTable};

fn main() -> idcs::Result<()> {
    let growth = concat!(env!("CARGO_MANIFEST_DIR"), "/data/growth_fixture.csv");
    let levels = concat!(env!("CARGO_MANIFEST_DIR"), "/data/levels_fixture.csv");

    let mut table = IndicatorTable::load_csv(growth)?;
    println!(
        "growth fixture: {} years, {} indicators, {} missing cells",
        table.years.len(),
        table.columns.len(),
        table.missing_cells()
    );

    // Fill gaps by carrying the last observation forward. The table
    // refuses if any column starts with a hole — there would be nothing
    // to carry.
    let filled = table.fill_forward()?;
    println!("fill-forward repaired {filled} cells; {} remain missing", table.missing_cells());

    // Growth rates do not satisfy the accounting identities (a sum of
    // growth rates is not the growth rate of a sum), and the checker
    // says so.
    let violations = table.check_identities(&default_gdp_identities(), 1e-6)?;
    println!("identity violations in growth data: {} (expected: growth does not add up)",
        violations.len());
    if let Some(v) = violations.first() {
        println!(
            "  e.g. {} {} is {:.2}, but its components sum to {:.2}",
            v.target, v.year, v.target_value, v.component_sum
        );
    }

    // Absolute levels are a different story: the fixture's aggregates are
    // exact sums of their components.
    let levels = IndicatorTable::load_csv(levels)?;
    let violations = levels.check_identities(&default_gdp_identities(), 1e-6)?;
    println!(
        "\nlevels fixture: {} years, identity violations: {}",
        levels.years.len(),
        violations.len()
    );
    assert!(violations.is_empty());

    // The same module distills calibration material: per-indicator error
    // statistics against a designated reference column.
    let stats = IndicatorTable::load_csv(growth)?.derive_error_stats("GDP_PA")?;
    let worst = stats
        .iter()
        .max_by(|a, b| a.std_dev.total_cmp(&b.std_dev))
        .expect("twelve indicators");
    println!(
        "\nnoisiest indicator vs GDP_PA: {} (sd {:.2} over {} years)",
        worst.indicator, worst.std_dev, worst.count
    );
    Ok(())
}
