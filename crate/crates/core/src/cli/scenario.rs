//! Versioned TOML scenario files.
//!
//! ```toml
//! schema = 1
//! horizon = 100.0
//!
//! [model]
//! kind = "threshold"
//! beta = 2.0
//! beta_bar = 0.38
//! threshold = 0.35
//! gamma = 0.4
//! epsilon = 0.01
//! ```

use serde::{Deserialize, Serialize};

use crate::filippov::ThresholdPolicy;
use crate::network::{ContactGraph, NetworkModel, NetworkState};
use crate::sir::{RateFunction, ScalarModel, SimOptions, SirState};

use super::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_HORIZON: f64 = 100.0;

fn default_horizon() -> f64 {
    DEFAULT_HORIZON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "ControlOverrides::is_empty")]
    pub control: ControlOverrides,
    #[serde(default)]
    pub output: OutputSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    /// Constant rate, or `beta (1 - y)^exponent` when `exponent` is given.
    /// The start is `(1 - epsilon, epsilon, 0)` or an explicit `initial = [x, y, z]`.
    Scalar {
        beta: f64,
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<[f64; 3]>,
    },
    Threshold {
        beta: f64,
        beta_bar: f64,
        threshold: f64,
        gamma: f64,
        epsilon: f64,
    },
    /// `contacts` is the row-major weight matrix. The start is either
    /// `epsilon` seeded in node 1 with the rest susceptible, or explicit
    /// `susceptible` and `infected` vectors.
    Network {
        beta: f64,
        gamma: f64,
        contacts: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        susceptible: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        infected: Option<Vec<f64>>,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Scalar { .. } => "scalar",
            Self::Threshold { .. } => "threshold",
            Self::Network { .. } => "network",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extinction_threshold: Option<f64>,
}

impl ControlOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn apply(&self, base: SimOptions) -> SimOptions {
        let mut opts = base;
        let c = &mut opts.control;
        c.initial_step = self.initial_step.unwrap_or(c.initial_step);
        c.max_step = self.max_step.unwrap_or(c.max_step);
        c.abs_tol = self.abs_tol.unwrap_or(c.abs_tol);
        c.rel_tol = self.rel_tol.unwrap_or(c.rel_tol);
        c.max_steps = self.max_steps.unwrap_or(c.max_steps);
        opts.event_tol = self.event_tol.unwrap_or(opts.event_tol);
        opts.extinction_threshold = self.extinction_threshold.unwrap_or(opts.extinction_threshold);
        opts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSelection {
    #[serde(default = "yes")]
    pub trajectory: bool,
    #[serde(default = "yes")]
    pub events: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSelection {
    fn default() -> Self {
        Self {
            trajectory: true,
            events: true,
        }
    }
}

/// A validated scenario, ready to simulate.
#[derive(Debug, Clone)]
pub enum Prepared {
    Scalar { model: ScalarModel, initial: SirState },
    Threshold { policy: ThresholdPolicy, epsilon: f64 },
    Network { model: NetworkModel, initial: NetworkState },
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let scenario: Self = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        scenario.prepare()?;
        Ok(scenario)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn options(&self) -> SimOptions {
        self.control.apply(SimOptions::default())
    }

    pub fn prepare(&self) -> Result<Prepared, CliError> {
        let invalid = |field: &str, e: crate::Error| CliError::Validation(format!("{field}: {e}"));
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "schema: unsupported version {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(CliError::Validation(format!(
                "horizon: must be positive, got {}",
                self.horizon
            )));
        }
        self.options()
            .control
            .validate()
            .map_err(|e| CliError::Validation(format!("control: {e}")))?;
        match &self.model {
            ModelSpec::Scalar {
                beta,
                gamma,
                exponent,
                epsilon,
                initial,
            } => {
                let rate = match exponent {
                    Some(p) => RateFunction::power(*beta, *p),
                    None => RateFunction::constant(*beta),
                }
                .map_err(|e| invalid("model", e))?;
                let model = ScalarModel::new(rate, *gamma).map_err(|e| invalid("model", e))?;
                let initial = match (epsilon, initial) {
                    (Some(eps), None) => SirState::outbreak(*eps).map_err(|e| invalid("model.epsilon", e))?,
                    (None, Some([x, y, z])) => SirState::new(*x, *y, *z).map_err(|e| invalid("model.initial", e))?,
                    _ => {
                        return Err(CliError::Validation(
                            "model: give exactly one of `epsilon` and `initial`".into(),
                        ))
                    }
                };
                Ok(Prepared::Scalar { model, initial })
            }
            ModelSpec::Threshold {
                beta,
                beta_bar,
                threshold,
                gamma,
                epsilon,
            } => {
                let policy =
                    ThresholdPolicy::new(*beta, *beta_bar, *threshold, *gamma).map_err(|e| invalid("model", e))?;
                SirState::outbreak(*epsilon).map_err(|e| invalid("model.epsilon", e))?;
                Ok(Prepared::Threshold {
                    policy,
                    epsilon: *epsilon,
                })
            }
            ModelSpec::Network {
                beta,
                gamma,
                contacts,
                epsilon,
                susceptible,
                infected,
            } => {
                let graph = ContactGraph::new(contacts).map_err(|e| invalid("model.contacts", e))?;
                let n = graph.n();
                let model = NetworkModel::new(graph, *beta, *gamma).map_err(|e| invalid("model", e))?;
                let initial = match (epsilon, susceptible, infected) {
                    (Some(eps), None, None) => {
                        let mut x = vec![1.0; n];
                        let mut y = vec![0.0; n];
                        x[0] = 1.0 - eps;
                        y[0] = *eps;
                        NetworkState::new(x, y, vec![0.0; n]).map_err(|e| invalid("model.epsilon", e))?
                    }
                    (None, Some(x), Some(y)) if x.len() == n && y.len() == n => {
                        NetworkState::from_susceptible_infected(x.clone(), y.clone())
                            .map_err(|e| invalid("model.susceptible", e))?
                    }
                    (None, Some(_), Some(_)) => {
                        return Err(CliError::Validation(format!(
                            "model: `susceptible` and `infected` need {n} entries"
                        )))
                    }
                    _ => {
                        return Err(CliError::Validation(
                            "model: give either `epsilon` or both `susceptible` and `infected`".into(),
                        ))
                    }
                };
                Ok(Prepared::Network { model, initial })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SLIDING: &str = r#"
schema = 1
[model]
kind = "threshold"
beta = 2.0
beta_bar = 0.38
threshold = 0.35
gamma = 0.4
epsilon = 0.01
"#;

    #[test]
    fn parses_and_defaults() {
        let s = Scenario::from_toml(SLIDING).unwrap();
        assert_eq!(s.horizon, 100.0);
        assert!(s.output.trajectory);
        assert!(matches!(s.prepare().unwrap(), Prepared::Threshold { .. }));
    }

    #[test]
    fn round_trip() {
        let s = Scenario::from_toml(SLIDING).unwrap();
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn unknown_fields_rejected() {
        let typo = SLIDING.replace("beta_bar", "betabar");
        assert!(matches!(Scenario::from_toml(&typo), Err(CliError::Validation(_))));
        let extra = format!("{SLIDING}\n[control]\nabstol = 1e-6\n");
        let err = Scenario::from_toml(&extra).unwrap_err().to_string();
        assert!(err.contains("abstol"), "{err}");
    }

    #[test]
    fn schema_and_parameters_checked() {
        assert!(Scenario::from_toml(&SLIDING.replace("schema = 1", "schema = 2")).is_err());
        assert!(Scenario::from_toml(&SLIDING.replace("gamma = 0.4", "gamma = -0.4")).is_err());
        let both = "schema = 1\n[model]\nkind = \"scalar\"\nbeta = 2.0\ngamma = 0.4\nepsilon = 0.01\ninitial = [0.99, 0.01, 0.0]\n";
        assert!(Scenario::from_toml(both).is_err());
    }

    #[test]
    fn network_seeding() {
        let text = "schema = 1\n[model]\nkind = \"network\"\nbeta = 1.0\ngamma = 1.0\ncontacts = [[1.0, 1.0], [1.0, 1.0]]\nepsilon = 0.01\n";
        match Scenario::from_toml(text).unwrap().prepare().unwrap() {
            Prepared::Network { initial, .. } => {
                assert_eq!(initial, NetworkState::seeded_first_node(0.01).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }
}
