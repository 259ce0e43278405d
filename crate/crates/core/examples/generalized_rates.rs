//! Contact rates that fall with prevalence, f = beta (1 - y)^p.
//!
//! Below R(0) = 1 every family decays; above it each has one peak, lower for
//! stronger feedback.

use sir_dynamics::shape::{classify_trajectory, ShapeTolerances};
use sir_dynamics::sir::{reproduction_function, simulate_scalar, RateFunction, ScalarModel, SimOptions, SirState};

fn main() -> sir_dynamics::Result<()> {
    let start = SirState::outbreak(0.01)?;
    for beta in [0.3, 2.0] {
        for p in [None, Some(1.0), Some(2.0)] {
            let rate = match p {
                Some(p) => RateFunction::power(beta, p)?,
                None => RateFunction::constant(beta)?,
            };
            let model = ScalarModel::new(rate, 0.4)?;
            let traj = simulate_scalar(&model, start, 100.0, &SimOptions::default())?;
            let r_max = traj
                .states
                .iter()
                .map(|s| reproduction_function(&SirState::from_slice(s), &model))
                .fold(0.0, f64::max);
            let shape = classify_trajectory(&traj, 1, ShapeTolerances::default())?;
            println!(
                "beta {beta:<4} p {:<8} R(0) {:.3}  max R {:.3}  max y {:.5}  {}",
                p.map_or("const".into(), |p| p.to_string()),
                reproduction_function(&start, &model),
                r_max,
                traj.max_component(1),
                shape.shape.as_str()
            );
        }
    }
    Ok(())
}
