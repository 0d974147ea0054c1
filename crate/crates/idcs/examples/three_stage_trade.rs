//! One complete trade, stage by stage.
//!
//! A buyer wants this quarter's value of some imprecisely measurable
//! commodity — say, a growth figure no one can observe directly. The trade
//! moves through three stages:
//!
//! 1. **Declare**: the buyer posts a payment mode — confidence thresholds
//!    and the budget each one unlocks — without revealing anything else.
//! 2. **Collect**: calibrated providers each submit one view.
//! 3. **Evaluate, then confirm**: the buyer sees only the confidence level
//!    first. Satisfied, they confirm: the consensus value is revealed, the
//!    band's budget is distributed by closeness, and every submitted view
//!    updates its provider's error profile for next time.

use idcs::ledger::{format_amount, Ledger};
use idcs::payment::{Band, PaymentFunction, PaymentMode};
use idcs::truth::WeightStrategy;

fn main() -> idcs::Result<()> {
    let mut ledger = Ledger::new();

    // Three providers with track records of different quality: the tighter
    // the history, the more the market will trust (and pay) them.
    ledger.seed_profile("surveyor", 0.1, 0.09, 10)?;
    ledger.seed_profile("panel", -0.2, 0.25, 12)?;
    ledger.seed_profile("nowcast", 0.4, 1.0, 10)?;

    // Stage 1: declare. Two bands: a weak consensus (confidence <= 0.6)
    // pays half a unit spread across everyone; anything stronger pays two
    // units winner-take-most.
    let mode = PaymentMode::new(vec![
        Band { threshold: 0.6, budget: 0.5, function: PaymentFunction::AllInverseSquare },
        Band { threshold: 1.0, budget: 2.0, function: PaymentFunction::TopThreeInverseDistance },
    ])?;
    let trade = ledger.declare("q3-growth", mode)?;
    println!("declared trade {trade} for q3-growth");

    // Stage 2: collect views.
    ledger.submit_view(trade, "surveyor", 7.31)?;
    ledger.submit_view(trade, "panel", 7.02)?;
    ledger.submit_view(trade, "nowcast", 8.05)?;
    println!("collected 3 views");

    // Stage 3a: evaluate. The buyer learns how much the weighted panel can
    // be trusted — and deliberately *not* what the value is. The decision
    // to pay is made on reliability alone.
    let confidence = ledger.evaluate(trade, WeightStrategy::Idcsw)?;
    println!("confidence that the consensus is within tolerance: {confidence:.4}");

    // Stage 3b: confirm. Value revealed, band selected, budget settled.
    let (value, settlement) = ledger.confirm(trade)?;
    println!("\nconsensus value (revealed on confirmation): {value:.4}");
    println!(
        "band selected: threshold {} pays {} via {}",
        settlement.band.threshold, settlement.band.budget, settlement.band.function
    );
    for payment in &settlement.payments {
        println!(
            "  {:<9} was {:.3} away -> {}",
            payment.provider,
            payment.distance,
            format_amount(payment.amount)
        );
    }

    let paid = settlement.total_paid();
    assert!((paid - settlement.band.budget).abs() < 1e-9, "the budget is conserved");

    // Every view fed back into its provider's profile: the market learned.
    println!("\nprofiles after settlement:");
    for profile in ledger.profiles().values() {
        println!(
            "  {:<9} {} observed errors, current sd {:.3}",
            profile.id,
            profile.moments.count(),
            profile.error_distribution().std_dev()
        );
    }
    Ok(())
}
