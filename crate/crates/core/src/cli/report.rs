//! Self-describing run reports.

use serde::{Deserialize, Serialize};

use crate::filippov::{classify_regime, Regime, RegimeReport, StructureSummary, DEFAULT_MAX_MODE_SWITCHES};
use crate::network::{aggregate_invariants, epsilon_bar, network_r, simplex_drift};
use crate::shape::{classify_shape, ShapeTolerances, DEFAULT_PLATEAU_TOL, DEFAULT_VALUE_TOL};
use crate::sir::{classical_peak, motion_invariant, reproduction_function, RateFunction, SirState};

use super::{Prepared, Run, Scenario, SimulateOutputs};

/// Effective numerical settings of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defaults {
    pub horizon: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    pub event_tol: f64,
    pub extinction_threshold: f64,
    pub value_tol: f64,
    pub plateau_tol: f64,
    pub max_mode_switches: usize,
}

impl Defaults {
    pub fn of(scenario: &Scenario) -> Self {
        let opts = scenario.options();
        Self {
            horizon: scenario.horizon,
            initial_step: opts.control.initial_step,
            max_step: opts.control.max_step,
            abs_tol: opts.control.abs_tol,
            rel_tol: opts.control.rel_tol,
            max_steps: opts.control.max_steps,
            event_tol: opts.event_tol,
            extinction_threshold: opts.extinction_threshold,
            value_tol: DEFAULT_VALUE_TOL,
            plateau_tol: DEFAULT_PLATEAU_TOL,
            max_mode_switches: DEFAULT_MAX_MODE_SWITCHES,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Files {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<String>,
    /// True when the files hold an aborted run.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub points: usize,
    pub final_time: f64,
    pub events: usize,
}

/// Shape of one infected series (`y`, `y1`, `y2`, ... or `ybar`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesShape {
    pub series: String,
    pub shape: String,
    pub peak_count: usize,
    pub multimodal: bool,
    pub peak_times: Vec<f64>,
    pub peak_values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Analytics {
    pub r0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_formula: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossing_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_regime: Option<Regime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime_note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_peak: Option<f64>,
    pub simulated_peak: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_discrepancy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_sliding: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub simulated_sliding: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_bar: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub simplex: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_motion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub files: Files,
    pub defaults: Defaults,
    pub summary: Summary,
    pub analytics: Analytics,
    pub drift: Drift,
    #[serde(default)]
    pub shape: Vec<SeriesShape>,
    pub scenario: Scenario,
}

fn file_name(p: &Option<std::path::PathBuf>) -> Option<String> {
    p.as_ref()
        .and_then(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
}

fn series_shapes(run: &Run) -> Vec<SeriesShape> {
    let traj = &run.trajectory;
    let n = run.nodes();
    let tol = ShapeTolerances::default();
    let mut series: Vec<(String, Vec<f64>)> = (0..n)
        .map(|i| {
            let name = if n == 1 { "y".to_string() } else { format!("y{}", i + 1) };
            (name, traj.component(n + i))
        })
        .collect();
    if n > 1 {
        let total = traj.states.iter().map(|s| s[n..2 * n].iter().sum()).collect();
        series.push(("ybar".into(), total));
    }
    series
        .into_iter()
        .filter_map(|(name, values)| {
            let report = classify_shape(&traj.times, &values, tol).ok()?;
            Some(SeriesShape {
                series: name,
                shape: report.shape.as_str().into(),
                peak_count: report.peak_count(),
                multimodal: report.peak_count() >= 2,
                peak_times: report.peak_times,
                peak_values: report.peak_values,
            })
        })
        .collect()
}

fn scalar_simplex_drift(run: &Run) -> f64 {
    run.trajectory
        .states
        .iter()
        .map(|s| (s.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

impl RunReport {
    pub fn build(scenario: &Scenario, run: &Run, outputs: &SimulateOutputs) -> Self {
        let traj = &run.trajectory;
        let mut analytics = Analytics {
            simulated_peak: if traj.is_empty() {
                f64::NAN
            } else {
                traj.max_component(run.nodes())
            },
            ..Analytics::default()
        };
        let mut drift = Drift::default();
        match &run.prepared {
            Prepared::Scalar { model, initial } => {
                analytics.r0 = reproduction_function(initial, model);
                drift.simplex = scalar_simplex_drift(run);
                if let (RateFunction::Constant { .. }, Some(rho)) = (model.rate, model.rho()) {
                    // The closed form assumes a start of the form (1 - eps, eps, 0).
                    if initial.z == 0.0 && initial.x > 0.0 {
                        if let Ok(peak) = classical_peak(initial.y, rho) {
                            analytics.peak_formula = Some(peak.formula);
                            analytics.predicted_peak = Some(peak.max_infected);
                        }
                    }
                    if let Ok(g0) = motion_invariant(initial, rho) {
                        drift.gamma = Some(
                            traj.states
                                .iter()
                                .filter_map(|s| motion_invariant(&SirState::from_slice(s), rho).ok())
                                .map(|g| (g - g0).abs())
                                .fold(0.0, f64::max),
                        );
                    }
                }
            }
            Prepared::Threshold { policy, epsilon } => {
                analytics.r0 = (1.0 - epsilon) * policy.beta / policy.gamma;
                drift.simplex = scalar_simplex_drift(run);
                match classify_regime(*epsilon, policy) {
                    Ok(r) => {
                        analytics.peak_formula = Some(r.uncontrolled_peak);
                        analytics.entry_level = Some(r.entry_level);
                        analytics.crossing_x = r.crossing_x;
                        analytics.regime = Some(r.regime);
                        analytics.predicted_peak = Some(r.predicted_peak);
                        if let (Some(a), Some(b)) = (r.t_star, r.t_star_star) {
                            analytics.predicted_sliding = Some([a, b]);
                        }
                    }
                    Err(e) => analytics.regime_note = Some(e.to_string()),
                }
                let structure = StructureSummary::from_trajectory(traj);
                analytics.observed_regime = Some(structure.observed_regime());
                analytics.simulated_sliding = structure
                    .sliding
                    .iter()
                    .map(|&(a, b)| [a, b.unwrap_or_else(|| traj.last_time().unwrap_or(a))])
                    .collect();
            }
            Prepared::Network { model, initial } => {
                analytics.r0 = network_r(initial, model).unwrap_or(f64::NAN);
                drift.simplex = simplex_drift(traj, model.n());
                if let Ok(d) = aggregate_invariants(traj, model) {
                    drift.constant_motion = Some(d.constant_motion);
                    drift.ratio = Some(d.ratio);
                    analytics.epsilon_bar = Some(epsilon_bar());
                }
                analytics.simulated_peak = traj
                    .states
                    .iter()
                    .flat_map(|s| s[model.n()..2 * model.n()].iter().copied())
                    .fold(f64::NAN, f64::max);
            }
        }
        if let Some(p) = analytics.predicted_peak {
            analytics.peak_discrepancy = Some((p - analytics.simulated_peak).abs());
        }
        Self {
            status: if run.failure.is_some() {
                "simulation-failed"
            } else {
                "ok"
            }
            .into(),
            failure: run.failure.clone(),
            files: Files {
                trajectory: file_name(&outputs.trajectory),
                events: file_name(&outputs.events),
                partial: run.failure.is_some(),
            },
            defaults: Defaults::of(scenario),
            summary: Summary {
                points: traj.len(),
                final_time: traj.last_time().unwrap_or(0.0),
                events: traj.events.len(),
            },
            analytics,
            drift,
            shape: series_shapes(run),
            scenario: scenario.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

#[derive(Serialize)]
struct RegimeView {
    regime: Regime,
    predicted_peak: f64,
    uncontrolled_peak: f64,
    entry_level: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossing_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_star_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sliding_duration: Option<f64>,
}

/// TOML rendering of a regime classification.
pub fn regime_toml(r: &RegimeReport) -> String {
    toml::to_string(&RegimeView {
        regime: r.regime,
        predicted_peak: r.predicted_peak,
        uncontrolled_peak: r.uncontrolled_peak,
        entry_level: r.entry_level,
        crossing_x: r.crossing_x,
        t_star: r.t_star,
        t_star_star: r.t_star_star,
        sliding_duration: r.sliding_duration,
    })
    .expect("regime report serializes")
}
