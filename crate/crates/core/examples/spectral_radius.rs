//! Network reproduction number from the Perron root of diag(x) A, and its
//! decay along a simulated outbreak.

use sir_dynamics::network::{
    reproduction_series, simulate_network, spectral_report, ContactGraph, NetworkModel, NetworkState,
};
use sir_dynamics::sir::SimOptions;
use sir_dynamics::spectral::{closed_form_2x2, spectral_radius};

fn main() -> sir_dynamics::Result<()> {
    let root = spectral_radius(&[0.5, 1.0], &[1.0, 1.0, 1.0, 1.0])?;
    println!(
        "lambda(diag(0.5, 1) 11') = {} via {:?}, v = {:?}",
        root.lambda_max, root.method, root.eigenvector
    );
    println!("closed form               = {}", closed_form_2x2([0.5, 0.5, 1.0, 1.0]));

    // A directed ring with self-contacts.
    let graph = ContactGraph::new(&[vec![1.0, 0.5, 0.0], vec![0.0, 2.0, 0.8], vec![0.3, 0.0, 1.5]])?;
    println!("strongly connected: {}", graph.is_strongly_connected());
    let model = NetworkModel::new(graph, 1.2, 0.5)?;
    let start = NetworkState::from_susceptible_infected(vec![0.98, 1.0, 0.99], vec![0.02, 0.0, 0.01])?;
    let report = spectral_report(&start, &model)?;
    println!(
        "R(0) = {:.6} after {} iterations, v = {:.4?}",
        report.reproduction, report.iterations, report.eigenvector
    );

    let traj = simulate_network(&model, &start, 100.0, &SimOptions::default())?;
    let r = reproduction_series(&traj, &model)?;
    for i in (0..r.len()).step_by(r.len() / 8) {
        println!("  t {:8.3}  R {:.6}", traj.times[i], r[i]);
    }
    Ok(())
}
