//! How a band's budget lands on providers, under each payment function.
//!
//! Once the consensus value is known, each view sits some distance from
//! it, and the band's budget is split by a payment function:
//!
//! * `top-one` — the closest view takes everything;
//! * `top-three` — the three closest split in proportion to 1/distance;
//! * `all-inverse-square` — everyone is paid in proportion to 1/distance²,
//!   which rewards precision steeply but leaves no one at zero.
//!
//! The choice shapes incentives: a narrow function concentrates reward on
//! whoever lands nearest (and pays careless providers nothing), a broad
//! one keeps weaker providers in the market so their histories — and the
//! panel — can improve.

use idcs::payment::{distribute, PaymentFunction};
use idcs::truth::View;

fn main() -> idcs::Result<()> {
    let views = vec![
        View::new("p1", 101.0), // distance 1
        View::new("p2", 102.0), // distance 2
        View::new("p3", 103.0), // distance 3
        View::new("p4", 106.0), // distance 6
    ];
    let consensus = 100.0;
    let budget = 1.0;

    for function in PaymentFunction::all_standard() {
        println!("{function}:");
        for payment in distribute(&views, consensus, budget, function)? {
            println!(
                "  {} (distance {}) -> {:.6}",
                payment.provider,
                payment.distance,
                payment.amount
            );
        }
    }

    // The inverse-distance shares for distances (1, 2, 3) are 6/11, 3/11,
    // 2/11 — the fourth view is outside the top three and gets nothing.
    let payments = distribute(&views, consensus, budget, PaymentFunction::TopThreeInverseDistance)?;
    assert!((payments[0].amount - 6.0 / 11.0).abs() < 1e-12);
    assert!((payments[3].amount).abs() == 0.0);

    // A view that hits the consensus exactly would make 1/distance blow
    // up; exact hits split the whole budget instead.
    let exact = vec![
        View::new("sniper", 100.0),
        View::new("sniper2", 100.0),
        View::new("close", 100.5),
    ];
    println!("\ntwo exact hits under all-inverse-square:");
    for payment in distribute(&exact, consensus, budget, PaymentFunction::AllInverseSquare)? {
        println!(
            "  {} -> {:.6}",
            payment.provider,
            payment.amount
        );
    }
    Ok(())
}
