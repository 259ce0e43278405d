//! Closed-form regime classification of the threshold policy, checked
//! against the simulated structure.

use sir_dynamics::filippov::{classify_regime, simulate_threshold, StructureSummary, ThresholdPolicy};
use sir_dynamics::sir::SimOptions;

fn main() -> sir_dynamics::Result<()> {
    let eps = 0.01;
    for (beta_bar, k) in [(0.38, 0.35), (1.0, 0.35), (1.0, 0.30), (1.0, 0.6)] {
        let policy = ThresholdPolicy::new(2.0, beta_bar, k, 0.4)?;
        let r = classify_regime(eps, &policy)?;
        let traj = simulate_threshold(&policy, eps, 100.0, &SimOptions::default())?;
        let seen = StructureSummary::from_trajectory(&traj);
        println!(
            "beta_bar {beta_bar:<5} k {k:<5} regime {:?} (observed {:?})  M {:.5}  m {:.5}  peak {:.6} vs {:.6}",
            r.regime,
            seen.observed_regime(),
            r.uncontrolled_peak,
            r.entry_level,
            r.predicted_peak,
            seen.max_infected,
        );
        if let Some(x) = r.crossing_x {
            println!("    first reaches k at x = {x:.6}, t = {:.4}", r.t_star.unwrap());
        }
    }
    Ok(())
}
