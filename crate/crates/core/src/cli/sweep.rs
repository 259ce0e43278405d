//! Cartesian parameter sweeps over a scenario template.
//!
//! ```toml
//! [[axis]]
//! name = "model.beta_bar"
//! values = [0.6, 1.0]
//!
//! [[axis]]
//! name = "model.threshold"
//! values = [0.2, 0.35]
//! ```
//!
//! Axis names are dotted paths into the scenario. The first axis varies
//! slowest. A table value is merged into the table it names, so one axis
//! can move several parameters together:
//!
//! ```toml
//! [[axis]]
//! name = "model"
//! values = [{ beta = 1.5, beta_bar = 0.45 }, { beta = 3.0, beta_bar = 0.9 }]
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::RunReport;
use super::{run_scenario, CliError, Scenario, SimulateOutputs};

pub const DEFAULT_MAX_CELLS: usize = 10_000;

fn default_max_cells() -> usize {
    DEFAULT_MAX_CELLS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub axis: Vec<Axis>,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

impl Grid {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("grid: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Zero axes, or any axis without values, gives no cells.
    pub fn cell_count(&self) -> usize {
        if self.axis.is_empty() {
            0
        } else {
            self.axis.iter().map(|a| a.values.len()).product()
        }
    }

    /// Value tuples in row order.
    pub fn cells(&self) -> Vec<Vec<toml::Value>> {
        if self.cell_count() == 0 {
            return Vec::new();
        }
        let mut cells = vec![Vec::new()];
        for axis in &self.axis {
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v.clone());
                        next
                    })
                })
                .collect();
        }
        cells
    }
}

/// Sets `path` (dotted) in a TOML table, creating intermediate tables.
/// Table values merge into an existing table.
fn set_path(root: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CliError::Validation(format!("axis `{path}`: empty name")))?;
    let mut table = root;
    for part in parts {
        table = table
            .entry(part)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Validation(format!("axis `{path}`: `{part}` is not a table")))?;
    }
    match (table.get_mut(last), value) {
        (Some(toml::Value::Table(existing)), toml::Value::Table(update)) => existing.extend(update),
        (_, value) => {
            table.insert(last.to_string(), value);
        }
    }
    Ok(())
}

/// The template with one cell's values substituted, validated.
pub fn instantiate(template: &Scenario, grid: &Grid, cell: &[toml::Value]) -> Result<Scenario, CliError> {
    let mut table: toml::Table = toml::from_str(&template.to_toml()).expect("scenario re-parses");
    for (axis, value) in grid.axis.iter().zip(cell) {
        set_path(&mut table, &axis.name, value.clone())?;
    }
    let text = toml::to_string(&table).expect("table serializes");
    Scenario::from_toml(&text)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<String>,
    pub kind: String,
    pub status: String,
    pub regime: String,
    pub observed_regime: String,
    /// Shape of `y`, or of node 1's infected series on a network.
    pub shape: String,
    pub predicted_peak: Option<f64>,
    pub simulated_peak: Option<f64>,
    pub discrepancy: Option<f64>,
    pub peak_count: Option<usize>,
    /// Number of infected series with two or more maxima.
    pub multimodal_series: Option<usize>,
    pub error: String,
}

fn cell_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn evaluate(index: usize, template: &Scenario, grid: &Grid, cell: &[toml::Value]) -> SweepRow {
    let mut row = SweepRow {
        index,
        values: cell.iter().map(cell_text).collect(),
        kind: template.model.kind().into(),
        ..SweepRow::default()
    };
    let scenario = match instantiate(template, grid, cell) {
        Ok(s) => s,
        Err(e) => {
            row.status = "invalid".into();
            row.error = e.to_string();
            return row;
        }
    };
    let run = match run_scenario(&scenario) {
        Ok(run) => run,
        Err(e) => {
            row.status = "invalid".into();
            row.error = e.to_string();
            return row;
        }
    };
    let outputs = SimulateOutputs {
        trajectory: None,
        events: None,
        report: Default::default(),
    };
    let report = RunReport::build(&scenario, &run, &outputs);
    row.status = report.status.clone();
    row.error = report.failure.clone().unwrap_or_default();
    let a = &report.analytics;
    let name = |r: &crate::filippov::Regime| format!("{r:?}");
    row.regime = a.regime.as_ref().map(name).unwrap_or_default();
    row.observed_regime = a.observed_regime.as_ref().map(name).unwrap_or_default();
    if row.error.is_empty() {
        if let Some(note) = &a.regime_note {
            row.error = note.clone();
        }
    }
    if let Some(first) = report.shape.first() {
        row.shape = first.shape.clone();
        row.peak_count = Some(first.peak_count);
    }
    row.multimodal_series = Some(report.shape.iter().filter(|s| s.multimodal).count());
    row.predicted_peak = a.predicted_peak;
    row.simulated_peak = a.simulated_peak.is_finite().then_some(a.simulated_peak);
    row.discrepancy = a.peak_discrepancy;
    row
}

/// Runs every grid cell, in parallel on at most `workers` threads (0 means
/// one per core). Rows come back in grid order; a failing cell is recorded
/// in its row and does not stop the sweep.
pub fn run_sweep(template: &Scenario, grid: &Grid, workers: usize) -> Result<Vec<SweepRow>, CliError> {
    let count = grid.cell_count();
    if count > grid.max_cells {
        return Err(CliError::Validation(format!(
            "grid has {count} cells, more than max_cells = {}",
            grid.max_cells
        )));
    }
    let cells = grid.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, cell)| evaluate(i, template, grid, cell))
            .collect()
    }))
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|v| v.to_string()).unwrap_or_default()
}

pub fn sweep_csv(grid: &Grid, rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let err = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string()];
    header.extend(grid.axis.iter().map(|a| a.name.clone()));
    header.extend(
        [
            "kind",
            "status",
            "regime",
            "observed_regime",
            "shape",
            "predicted_peak",
            "simulated_peak",
            "discrepancy",
            "peak_count",
            "multimodal_series",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header).map_err(err)?;
    for r in rows {
        let mut rec = vec![r.index.to_string()];
        rec.extend(r.values.iter().cloned());
        rec.extend([
            r.kind.clone(),
            r.status.clone(),
            r.regime.clone(),
            r.observed_regime.clone(),
            r.shape.clone(),
            opt(&r.predicted_peak),
            opt(&r.simulated_peak),
            opt(&r.discrepancy),
            opt(&r.peak_count),
            opt(&r.multimodal_series),
            r.error.clone(),
        ]);
        w.write_record(&rec).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
}

/// `sirdyn sweep`: writes the table to `out/sweep.csv` and returns the rows.
pub fn sweep(
    template: &Scenario,
    grid: &Grid,
    workers: usize,
    out: &std::path::Path,
) -> Result<Vec<SweepRow>, CliError> {
    let rows = run_sweep(template, grid, workers)?;
    super::write_atomic(&out.join(super::SWEEP_FILE), &sweep_csv(grid, &rows)?)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(text: &str) -> Grid {
        Grid::from_toml(text).unwrap()
    }

    #[test]
    fn cartesian_order_first_axis_outermost() {
        let g = grid("[[axis]]\nname = \"a\"\nvalues = [1, 2]\n[[axis]]\nname = \"b\"\nvalues = [10, 20, 30]\n");
        let cells: Vec<Vec<i64>> = g
            .cells()
            .iter()
            .map(|c| c.iter().map(|v| v.as_integer().unwrap()).collect())
            .collect();
        assert_eq!(cells[0], [1, 10]);
        assert_eq!(cells[2], [1, 30]);
        assert_eq!(cells[3], [2, 10]);
        assert_eq!(cells.len(), 6);
    }

    #[test]
    fn empty_grids() {
        assert_eq!(grid("").cell_count(), 0);
        assert_eq!(grid("[[axis]]\nname = \"a\"\nvalues = []\n").cells().len(), 0);
        assert!(Grid::from_toml("[[axis]]\nname = \"a\"\nvalue = [1]\n").is_err());
    }

    #[test]
    fn dotted_paths() {
        let mut t = toml::Table::new();
        set_path(&mut t, "control.abs_tol", toml::Value::Float(1e-6)).unwrap();
        assert_eq!(t["control"]["abs_tol"].as_float(), Some(1e-6));
        set_path(&mut t, "x", toml::Value::Integer(1)).unwrap();
        assert!(set_path(&mut t, "x.y", toml::Value::Integer(1)).is_err());
        let update: toml::Table = toml::from_str("rel_tol = 1e-7").unwrap();
        set_path(&mut t, "control", toml::Value::Table(update)).unwrap();
        assert_eq!(t["control"]["abs_tol"].as_float(), Some(1e-6));
        assert_eq!(t["control"]["rel_tol"].as_float(), Some(1e-7));
    }
}
