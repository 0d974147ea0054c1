//! When the panel isn't convincing yet: redeclare with more money.
//!
//! Evaluation hands the buyer a confidence level *before* any value is
//! revealed. If it's too low, the buyer doesn't have to walk away — they
//! can redeclare: keep the same confidence thresholds, raise the budgets
//! (never lower them, so providers can't be baited into cheap reruns),
//! and collect a fresh round of views.

use idcs::ledger::{format_amount, Ledger};
use idcs::payment::{Band, PaymentFunction, PaymentMode};
use idcs::truth::WeightStrategy;

fn bands(budget: f64) -> idcs::Result<PaymentMode> {
    PaymentMode::new(vec![Band {
        threshold: 1.0,
        budget,
        function: PaymentFunction::AllInverseSquare,
    }])
}

fn main() -> idcs::Result<()> {
    let mut ledger = Ledger::new();
    // A panel of widely scattered estimators: honest, but noisy.
    ledger.seed_profile("a", 0.0, 2.25, 10)?;
    ledger.seed_profile("b", 0.5, 4.0, 10)?;
    ledger.seed_profile("c", -0.8, 2.89, 10)?;
    ledger.seed_profile("d", 0.2, 5.76, 10)?;

    let trade = ledger.declare("index-estimate", bands(1.0)?)?;
    for (id, view) in [("a", 10.9), ("b", 12.3), ("c", 9.1), ("d", 13.0)] {
        ledger.submit_view(trade, id, view)?;
    }
    let confidence = ledger.evaluate(trade, WeightStrategy::Idcsw)?;
    println!("round 1 confidence: {confidence:.4} — not convincing");

    // The buyer raises the pot instead of settling. Same thresholds,
    // bigger budget; the trade forgets round 1's views and collects anew.
    ledger.redeclare(trade, bands(3.0)?)?;
    let round = ledger.trade(trade).expect("trade exists").round;
    println!("redeclared at budget 3.0 — round {round} begins");

    // Providers, knowing more is at stake, respond again (here: a little
    // more carefully clustered).
    for (id, view) in [("a", 11.1), ("b", 11.6), ("c", 10.8), ("d", 11.9)] {
        ledger.submit_view(trade, id, view)?;
    }
    let confidence = ledger.evaluate(trade, WeightStrategy::Idcsw)?;
    println!("round 2 confidence: {confidence:.4}");

    let (value, settlement) = ledger.confirm(trade)?;
    println!("settled at consensus {value:.4}:");
    for payment in &settlement.payments {
        println!(
            "  {} -> {}",
            payment.provider,
            format_amount(payment.amount)
        );
    }

    // Trying to shrink a budget is refused outright, and the failed
    // attempt changes nothing about the trade.
    let mut shrunk = Ledger::new();
    shrunk.seed_profile("a", 0.0, 1.0, 10)?;
    let t = shrunk.declare("cheapskate", bands(2.0)?)?;
    shrunk.submit_view(t, "a", 5.0)?;
    shrunk.evaluate(t, WeightStrategy::Idcsw)?;
    let err = shrunk.redeclare(t, bands(1.0)?).unwrap_err();
    println!("\nlowering the budget is rejected: {err}");
    Ok(())
}
