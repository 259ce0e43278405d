//! CSV tables for trajectories and events.

use crate::Trajectory;

use super::{CliError, Run};

/// `x, y, z` for one node; `x1.., y1.., z1..` otherwise.
pub fn state_columns(nodes: usize) -> Vec<String> {
    ["x", "y", "z"]
        .iter()
        .flat_map(|c| (1..=nodes).map(move |i| if nodes == 1 { c.to_string() } else { format!("{c}{i}") }))
        .collect()
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(csv_err)
}

/// Columns `t`, state components, `R`.
pub fn trajectory_csv(run: &Run) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(state_columns(run.nodes()));
    header.push("R".into());
    w.write_record(&header).map_err(csv_err)?;
    for ((t, s), r) in run
        .trajectory
        .times
        .iter()
        .zip(&run.trajectory.states)
        .zip(&run.reproduction)
    {
        let row = std::iter::once(*t).chain(s.iter().copied()).chain(std::iter::once(*r));
        w.write_record(row.map(|v| v.to_string())).map_err(csv_err)?;
    }
    finish(w)
}

/// Columns `label`, `t`, state components.
pub fn events_csv(traj: &Trajectory, nodes: usize) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["label".to_string(), "t".to_string()];
    header.extend(state_columns(nodes));
    w.write_record(&header).map_err(csv_err)?;
    for e in &traj.events {
        let mut row = vec![e.label.clone(), e.time.to_string()];
        row.extend(e.state.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}
