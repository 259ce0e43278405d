//! Classical SIR: simulated peak against the closed form.

use sir_dynamics::shape::{classify_trajectory, ShapeTolerances};
use sir_dynamics::sir::{classical_peak, simulate_scalar, ScalarModel, SimOptions, SirState};

fn main() -> sir_dynamics::Result<()> {
    let (beta, gamma, eps) = (2.0, 0.4, 0.01);
    let model = ScalarModel::classical(beta, gamma)?;
    let traj = simulate_scalar(&model, SirState::outbreak(eps)?, 100.0, &SimOptions::default())?;

    let predicted = classical_peak(eps, gamma / beta)?;
    let simulated = traj.max_component(1);
    let peak = traj.events_labelled("peak").next().expect("supercritical run peaks");
    println!("predicted peak  {:.8}", predicted.max_infected);
    println!(
        "simulated peak  {simulated:.8}  (|diff| = {:.1e})",
        (simulated - predicted.max_infected).abs()
    );
    println!(
        "peak at t = {:.4}, x = {:.6} (rho = {})",
        peak.time,
        peak.state[0],
        gamma / beta
    );
    println!(
        "shape: {}",
        classify_trajectory(&traj, 1, ShapeTolerances::default())?
            .shape
            .as_str()
    );
    println!(
        "{} stored points, stopped at t = {:.2}",
        traj.len(),
        traj.last_time().unwrap()
    );
    Ok(())
}
