//! The ledger is its event log: persistence, replay, and tamper evidence.
//!
//! Every state change — declarations, views, evaluations, settlements,
//! calibration trades — is an appended event. Saving a ledger writes those
//! events as JSON lines; loading replays them through the same transition
//! code that produced them, recomputing every derived number and refusing
//! the file if anything disagrees. A ledger you can load is a ledger whose
//! history checks out.

use idcs::ledger::Ledger;
use idcs::payment::{PaymentFunction, PaymentMode};
use idcs::truth::WeightStrategy;

fn main() -> idcs::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("market.jsonl");

    // A short but eventful session: calibration, one settled trade, one
    // trade left mid-flight.
    let mut ledger = Ledger::new();
    ledger.seed_profile("alpha", 0.1, 0.25, 10)?;
    ledger.seed_profile("beta", -0.2, 0.49, 10)?;

    let first = ledger.declare(
        "spot-price",
        PaymentMode::flat(2.0, PaymentFunction::TopOne),
    )?;
    ledger.submit_view(first, "alpha", 41.3)?;
    ledger.submit_view(first, "beta", 40.8)?;
    ledger.evaluate(first, WeightStrategy::Idcsw)?;
    ledger.confirm(first)?;

    let second = ledger.declare(
        "spot-price",
        PaymentMode::flat(1.0, PaymentFunction::AllInverseSquare),
    )?;
    ledger.submit_view(second, "alpha", 42.0)?;

    ledger.save(&path)?;
    println!("saved {} events to {}", ledger.events().len(), path.display());

    // Replay: the loaded ledger is the same market, ready to continue.
    let mut replayed = Ledger::load(&path)?;
    assert_eq!(replayed.events(), ledger.events());
    assert_eq!(replayed.profiles(), ledger.profiles());
    println!("replayed cleanly: {} events, {} profiles", replayed.events().len(),
        replayed.profiles().len());

    replayed.submit_view(second, "beta", 41.1)?;
    replayed.evaluate(second, WeightStrategy::Idcsw)?;
    let (value, _) = replayed.confirm(second)?;
    println!("continued after reload: second trade settled at {value:.4}");

    // Tampering is caught. The first trade paid its winner the full 2.0;
    // nudge that settled amount by one in the last digit and the replay's
    // recomputation no longer matches the record.
    let text = std::fs::read_to_string(&path)?;
    let tampered = text.replacen("\"2.000000000\"", "\"2.000000001\"", 1);
    assert_ne!(text, tampered, "the edit really changed the amount");
    let tampered_path = dir.path().join("tampered.jsonl");
    std::fs::write(&tampered_path, tampered)?;

    match Ledger::load(&tampered_path) {
        Err(err) => println!("tampered log rejected: {err}"),
        Ok(_) => unreachable!("a corrupted log must not load"),
    }
    Ok(())
}
