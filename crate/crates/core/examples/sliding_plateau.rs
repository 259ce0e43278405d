//! Sliding motion on y = k: the infected fraction is held at the threshold
//! while x drains at rate gamma k.

use sir_dynamics::filippov::{labels, simulate_threshold, sliding_duration, ThresholdPolicy};
use sir_dynamics::sir::SimOptions;

fn main() -> sir_dynamics::Result<()> {
    let policy = ThresholdPolicy::new(2.0, 0.38, 0.35, 0.4)?;
    let traj = simulate_threshold(&policy, 0.01, 100.0, &SimOptions::default())?;
    let entry = traj
        .events_labelled(labels::SLIDING_ENTRY)
        .next()
        .expect("regime B slides");
    let exit = traj
        .events_labelled(labels::SLIDING_EXIT)
        .next()
        .expect("sliding ends at x = rho");

    println!(
        "sliding on [{:.5}, {:.5}], duration {:.5}",
        entry.time,
        exit.time,
        exit.time - entry.time
    );
    println!("predicted duration {:.5}", sliding_duration(0.01, &policy)?);
    println!(
        "x: {:.5} -> {:.5}, slope {:.5} (gamma k = {})",
        entry.state[0],
        exit.state[0],
        (exit.state[0] - entry.state[0]) / (exit.time - entry.time),
        policy.gamma * policy.threshold
    );
    for (t, s) in traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= entry.time && **t <= exit.time)
        .step_by(3)
    {
        println!("  t {t:8.4}  x {:.6}  y {:.9}", s[0], s[1]);
    }
    Ok(())
}
