//! Buying confidence: what sustained spending does to the panel.
//!
//! A buyer runs round after round on the same commodity, raising the
//! round budget by one unit each time. Every settlement pays providers by
//! closeness; paid honest providers invest in better instruments and
//! their noise shrinks, while the three malicious providers pocket the
//! money and keep lying. The trajectory records the confidence level the
//! buyer sees as cumulative spend grows — averaged over ten independent
//! replicate markets so the curve's shape isn't one market's luck.
//!
//! Two improvement regimes are compared: providers that convert payment
//! into accuracy slowly (exponent 0.1) and quickly (0.4). Faster
//! improvement reaches the buyer's target confidence on a smaller total
//! spend.

use idcs::sim::{run_confidence_trajectory, write_trajectory_csv, TrajectoryConfig};

fn main() -> idcs::Result<()> {
    let mut runs = Vec::new();
    for rate in [0.1, 0.4] {
        let config = TrajectoryConfig {
            seed: 0,
            improvement_rate: rate,
            target_confidence: 0.9,
            max_rounds: 200,
            ..TrajectoryConfig::default()
        };
        let trajectory = run_confidence_trajectory(&config)?;

        println!("improvement exponent {rate}:");
        for point in trajectory.points.iter().take(4) {
            println!(
                "  round {:>2}  spent {:>5.0}  confidence {:.4}",
                point.round, point.cumulative_budget, point.confidence
            );
        }
        if trajectory.points.len() > 4 {
            let last = trajectory.points.last().expect("nonempty");
            println!(
                "  ... round {:>2}  spent {:>5.0}  confidence {:.4}",
                last.round, last.cumulative_budget, last.confidence
            );
        }
        match trajectory.budget_to_target() {
            Some(budget) => println!("  target 0.9 reached after spending {budget}\n"),
            None => println!("  target 0.9 not reached\n"),
        }
        runs.push((rate, trajectory));
    }

    let fast = runs[1].1.budget_to_target().expect("fast regime converges");
    let slow = runs[0].1.budget_to_target().expect("slow regime converges");
    assert!(fast <= slow, "faster improvement is never dearer");
    println!("spend to reach 0.9: {slow} at exponent 0.1 vs {fast} at 0.4");

    // The `trajectory` subcommand writes the same curves as CSV.
    let mut csv = Vec::new();
    write_trajectory_csv(&runs, &mut csv)?;
    println!("\ntrajectory CSV head:");
    for line in String::from_utf8_lossy(&csv).lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
