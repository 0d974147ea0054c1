//! Golden checks against the real growth-rate dataset, when one is
//! available.
//!
//! The dataset itself is not redistributable, so these tests are gated on
//! `IDCS_NBS_DATASET` pointing at a CSV shaped like
//! `data/growth_fixture.csv` (a `year` column, the twelve indicator
//! columns, and a `GDP_PA` reference column) holding the real series.
//! Without the variable the tests print a note and pass vacuously; with
//! it they pin the derived error statistics to the published reference
//! values, which the synthetic fixture deliberately does not track.

use idcs::dataset::IndicatorTable;
use idcs::payment::{distribute, error_payment, PaymentFunction};
use idcs::sim::GDP_REFERENCE_STATS;
use idcs::truth::{evaluate_views, ProfileStore, ProviderProfile, View, WeightStrategy};

fn dataset() -> Option<IndicatorTable> {
    let path = std::env::var_os("IDCS_NBS_DATASET")?;
    let mut table =
        IndicatorTable::load_csv(&path).expect("IDCS_NBS_DATASET loads as an indicator table");
    // The published statistics fill the handful of unreported years from
    // the previous year, so the golden comparison does the same.
    table.fill_forward().expect("dataset fills forward");
    Some(table)
}

/// The averaged-series trade behind the published case study: every
/// indicator's view is its mean over the series, the reference column's
/// mean is the ground truth, and profiles come from the empirical signed
/// error series.
fn averaged_case(table: &IndicatorTable) -> (Vec<View>, ProfileStore, f64) {
    let stats = table
        .derive_error_stats("GDP_PA")
        .expect("reference column present");
    let mut profiles = ProfileStore::new();
    let mut views = Vec::new();
    for s in &stats {
        profiles.insert(
            s.indicator.as_str().into(),
            ProviderProfile::from_stats(
                s.indicator.as_str(),
                s.count,
                s.mean,
                s.std_dev * s.std_dev,
            ),
        );
        let column = table.column(&s.indicator).expect("column present");
        let values: Vec<f64> = column.iter().flatten().copied().collect();
        views.push(View::new(
            s.indicator.as_str(),
            values.iter().sum::<f64>() / values.len() as f64,
        ));
    }
    let truth_column = table.column("GDP_PA").expect("reference present");
    let truths: Vec<f64> = truth_column.iter().flatten().copied().collect();
    let truth = truths.iter().sum::<f64>() / truths.len() as f64;
    (views, profiles, truth)
}

#[test]
fn derived_error_stats_match_the_published_reference() {
    let Some(table) = dataset() else {
        println!("IDCS_NBS_DATASET not set; skipping the golden dataset check");
        return;
    };
    let stats = table
        .derive_error_stats("GDP_PA")
        .expect("reference column present");
    let mut problems = Vec::new();
    for reference in &GDP_REFERENCE_STATS {
        let Some(derived) = stats.iter().find(|s| s.indicator == reference.name) else {
            problems.push(format!("  {} missing from the dataset", reference.name));
            continue;
        };
        if (derived.mean_abs - reference.mean_abs_error).abs() > 0.05 {
            problems.push(format!(
                "  {}: mean absolute error {:.4} vs published {:.4}",
                reference.name, derived.mean_abs, reference.mean_abs_error
            ));
        }
        if (derived.std_dev - reference.std_dev).abs() > 0.05 {
            problems.push(format!(
                "  {}: deviation {:.4} vs published {:.4}",
                reference.name, derived.std_dev, reference.std_dev
            ));
        }
    }
    assert!(
        problems.is_empty(),
        "derived error statistics drifted from the published table:\n{}",
        problems.join("\n")
    );
}

/// On the real series the averaged-case confidence lands between 0.20 and
/// 0.25 — the bracket that `tests/acceptance.rs` criterion 6 shows cannot
/// be reached from the two published summary columns alone.
#[test]
fn averaged_case_confidence_sits_in_the_published_bracket() {
    let Some(table) = dataset() else {
        println!("IDCS_NBS_DATASET not set; skipping the golden dataset check");
        return;
    };
    let (views, profiles, _) = averaged_case(&table);
    let estimate = evaluate_views(&views, &profiles, WeightStrategy::Idcsw, 1.0)
        .expect("panel evaluates");
    assert!(
        (0.20..=0.25).contains(&estimate.confidence),
        "averaged-case confidence {} outside [0.20, 0.25]",
        estimate.confidence
    );
}

/// Reliability weighting leaks the least across every payment function on
/// the real averaged case.
///
/// Only the ordering is pinned: the published absolute cells average over
/// ten undisclosed random calibration draws (a winner-take-all settlement
/// is 0-or-2-valued, so its quoted 1.5 is unreachable by any single
/// deterministic run), while the full-series calibration here is
/// deterministic.
#[test]
fn reliability_weighting_leaks_least_on_the_averaged_case() {
    let Some(table) = dataset() else {
        println!("IDCS_NBS_DATASET not set; skipping the golden dataset check");
        return;
    };
    let (views, profiles, truth) = averaged_case(&table);
    let leak = |strategy: WeightStrategy, function: PaymentFunction| -> f64 {
        let estimate =
            evaluate_views(&views, &profiles, strategy, 1.0).expect("panel evaluates");
        let actual = distribute(&views, estimate.value, 1.0, function).expect("settles");
        let genuine = distribute(&views, truth, 1.0, function).expect("settles");
        error_payment(&actual, &genuine)
    };
    for function in PaymentFunction::all_standard() {
        let ours = leak(WeightStrategy::Idcsw, function);
        for baseline in [
            WeightStrategy::Mean,
            WeightStrategy::Median,
            WeightStrategy::KVoting(3),
            WeightStrategy::KSources(3),
        ] {
            let theirs = leak(baseline, function);
            assert!(
                ours <= theirs + 1e-12,
                "{function}: idcsw leaked {ours:.4} vs {baseline} {theirs:.4}"
            );
        }
    }
}
