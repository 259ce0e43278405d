//! Scalar SIR dynamics with a state-dependent contact rate.
//!
//! The state `(x, y, z)` holds the susceptible, infected and removed fractions
//! and evolves as
//!
//! ```text
//! x' = -x y f(x, y)
//! y' =  x y f(x, y) - gamma y
//! z' =  gamma y
//! ```
//!
//! For a constant rate `f = beta` the quantity `rho ln x + z` (with
//! `rho = gamma / beta`) is conserved, which gives closed forms for the orbit
//! and for the peak of the infected fraction.

use crate::error::{domain, Error, Result};
use crate::ode::{integrate_with_events, Direction, EventSpec, StepControl, Trajectory, DEFAULT_EVENT_TOL};

/// Tolerance on `x + y + z = 1` accepted at construction.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Components above `-NEGATIVE_CLAMP` are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;
pub const DEFAULT_EXTINCTION_THRESHOLD: f64 = 1e-8;

pub mod labels {
    pub const PEAK: &str = "peak";
    pub const EXTINCTION: &str = "extinction";
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SirState {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let mut parts = [x, y, z];
        for v in &mut parts {
            if !v.is_finite() || *v < -NEGATIVE_CLAMP {
                return Err(Error::InvalidState(format!("component {v} outside [0, 1]")));
            }
            *v = v.max(0.0);
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidState(format!("x + y + z = {sum}, expected 1")));
        }
        Ok(Self {
            x: parts[0],
            y: parts[1],
            z: parts[2],
        })
    }

    /// `(1 - epsilon, epsilon, 0)`.
    pub fn outbreak(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(domain(format!("initial infection {epsilon} outside [0, 1]")));
        }
        Self::new(1.0 - epsilon, epsilon, 0.0)
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self {
            x: s[0],
            y: s[1],
            z: s[2],
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Contact-rate family `f(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFunction {
    Constant {
        beta: f64,
    },
    /// `beta (1 - y)^exponent`.
    Power {
        beta: f64,
        exponent: f64,
    },
}

impl RateFunction {
    pub fn constant(beta: f64) -> Result<Self> {
        check_positive("beta", beta)?;
        Ok(Self::Constant { beta })
    }

    pub fn power(beta: f64, exponent: f64) -> Result<Self> {
        check_positive("beta", beta)?;
        if !(exponent >= 0.0 && exponent.is_finite()) {
            return Err(domain(format!("exponent must be non-negative, got {exponent}")));
        }
        Ok(Self::Power { beta, exponent })
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Self::Constant { beta } | Self::Power { beta, .. } => beta,
        }
    }

    pub fn eval(&self, _x: f64, y: f64) -> f64 {
        match *self {
            Self::Constant { beta } => beta,
            Self::Power { beta, exponent } => beta * (1.0 - y.clamp(0.0, 1.0)).powf(exponent),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarModel {
    pub rate: RateFunction,
    pub gamma: f64,
}

impl ScalarModel {
    pub fn new(rate: RateFunction, gamma: f64) -> Result<Self> {
        check_positive("gamma", gamma)?;
        Ok(Self { rate, gamma })
    }

    pub fn classical(beta: f64, gamma: f64) -> Result<Self> {
        Self::new(RateFunction::constant(beta)?, gamma)
    }

    /// `gamma / beta`, defined only for a constant contact rate.
    pub fn rho(&self) -> Option<f64> {
        match self.rate {
            RateFunction::Constant { beta } => Some(self.gamma / beta),
            RateFunction::Power { .. } => None,
        }
    }

    /// Vector field on raw `[x, y, z]` slices, as consumed by the integrator.
    pub(crate) fn field(self) -> impl Fn(f64, &[f64], &mut [f64]) + Copy {
        move |_, s: &[f64], ds: &mut [f64]| {
            let f = self.rate.eval(s[0].max(0.0), s[1].max(0.0));
            let infection = s[0] * s[1] * f;
            let recovery = self.gamma * s[1];
            ds[0] = -infection;
            ds[1] = infection - recovery;
            ds[2] = recovery;
        }
    }
}

pub fn scalar_rhs(state: &SirState, model: &ScalarModel) -> [f64; 3] {
    let mut out = [0.0; 3];
    model.field()(0.0, &state.to_array(), &mut out);
    out
}

/// `R = x f(x, y) / gamma`.
pub fn reproduction_function(state: &SirState, model: &ScalarModel) -> f64 {
    let x = state.x.max(0.0);
    x * model.rate.eval(x, state.y.max(0.0)) / model.gamma
}

/// Integration settings shared by every simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub control: StepControl,
    pub event_tol: f64,
    /// Runs stop once the infected fraction falls below this level.
    pub extinction_threshold: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            control: StepControl::default(),
            event_tol: DEFAULT_EVENT_TOL,
            extinction_threshold: DEFAULT_EXTINCTION_THRESHOLD,
        }
    }
}

pub(crate) fn peak_event(model: ScalarModel) -> EventSpec {
    let field = model.field();
    EventSpec::new(labels::PEAK, Direction::Falling, false, move |t, s| {
        let mut ds = [0.0; 3];
        field(t, s, &mut ds);
        ds[1]
    })
}

pub(crate) fn extinction_event(threshold: f64) -> EventSpec {
    EventSpec::new(labels::EXTINCTION, Direction::Falling, true, move |_, s| {
        s[1] - threshold
    })
}

/// Integrates the scalar model from `initial` over `[0, horizon]`.
///
/// Peaks (`y' = 0`, falling) are annotated; the run ends early once `y`
/// drops below the extinction threshold.
pub fn simulate_scalar(model: &ScalarModel, initial: SirState, horizon: f64, opts: &SimOptions) -> Result<Trajectory> {
    simulate_scalar_with(model, initial, (0.0, horizon), opts, &[])
}

pub(crate) fn simulate_scalar_with(
    model: &ScalarModel,
    initial: SirState,
    span: (f64, f64),
    opts: &SimOptions,
    extra: &[EventSpec],
) -> Result<Trajectory> {
    let mut events = vec![peak_event(*model), extinction_event(opts.extinction_threshold)];
    events.extend_from_slice(extra);
    let traj = integrate_with_events(
        model.field(),
        &initial.to_array(),
        span,
        &opts.control,
        &events,
        opts.event_tol,
    )?;
    Ok(traj)
}

/// `Gamma(x, y, z) = rho ln x + z`.
pub fn motion_invariant(state: &SirState, rho: f64) -> Result<f64> {
    if !(state.x > 0.0) {
        return Err(Error::InvariantUndefined);
    }
    Ok(rho * state.x.ln() + state.z)
}

/// Infected fraction on the constant-rate orbit through `(1 - epsilon, epsilon, 0)`.
pub fn orbit_infected(x: f64, epsilon: f64, rho: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain(format!("orbit needs x > 0, got {x}")));
    }
    check_epsilon(epsilon)?;
    Ok(1.0 - x + rho * x.ln() - rho * (1.0 - epsilon).ln())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(domain(format!("epsilon must lie in [0, 1), got {epsilon}")))
    }
}

/// Closed-form peak of the classical model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakEstimate {
    /// `M(epsilon, rho) = 1 - rho + rho ln rho - rho ln(1 - epsilon)`.
    pub formula: f64,
    /// True when `rho >= 1 - epsilon`: the infected fraction only decreases.
    pub at_start: bool,
    /// Maximum of `y` along the orbit: `formula`, or `epsilon` when `at_start`.
    pub max_infected: f64,
}

pub fn classical_peak(epsilon: f64, rho: f64) -> Result<PeakEstimate> {
    if !(rho > 0.0) {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    check_epsilon(epsilon)?;
    let formula = 1.0 - rho + rho * rho.ln() - rho * (1.0 - epsilon).ln();
    let at_start = rho >= 1.0 - epsilon;
    Ok(PeakEstimate {
        formula,
        at_start,
        max_infected: if at_start { epsilon } else { formula },
    })
}

/// Shorthand for `classical_peak(epsilon, rho)?.formula`.
pub fn peak_formula(epsilon: f64, rho: f64) -> Result<f64> {
    Ok(classical_peak(epsilon, rho)?.formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn classical() -> ScalarModel {
        ScalarModel::classical(2.0, 0.4).unwrap()
    }

    #[test]
    fn rhs_at_outbreak_start() {
        let s = SirState::outbreak(0.01).unwrap();
        let d = scalar_rhs(&s, &classical());
        assert_abs_diff_eq!(d[0], -0.0198, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.0158, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], 0.004, epsilon = 1e-15);
    }

    #[test]
    fn rhs_power_family() {
        let model = ScalarModel::new(RateFunction::power(2.0, 1.0).unwrap(), 0.4).unwrap();
        let d = scalar_rhs(&SirState::outbreak(0.01).unwrap(), &model);
        assert_abs_diff_eq!(d[0], -0.019602, epsilon = 1e-15);
    }

    #[test]
    fn disease_free_is_equilibrium() {
        let d = scalar_rhs(&SirState::new(0.7, 0.0, 0.3).unwrap(), &classical());
        assert_eq!(d, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn reproduction_values() {
        let s = SirState::outbreak(0.01).unwrap();
        assert_abs_diff_eq!(reproduction_function(&s, &classical()), 4.95, epsilon = 1e-12);
        let power = ScalarModel::new(RateFunction::power(2.0, 1.0).unwrap(), 0.4).unwrap();
        assert_abs_diff_eq!(reproduction_function(&s, &power), 4.9005, epsilon = 1e-12);
        let none = SirState::new(0.0, 0.2, 0.8).unwrap();
        assert_eq!(reproduction_function(&none, &classical()), 0.0);
    }

    #[test]
    fn power_zero_is_constant() {
        let p = RateFunction::power(1.7, 0.0).unwrap();
        assert_eq!(p.eval(0.3, 0.4), 1.7);
    }

    #[test]
    fn state_validation() {
        assert!(SirState::new(0.5, 0.6, 0.0).is_err());
        assert!(SirState::new(-0.1, 0.6, 0.5).is_err());
        let s = SirState::new(1.0, -1e-13, 1e-13).unwrap();
        assert_eq!(s.y, 0.0);
    }

    #[test]
    fn rho_only_for_constant_rate() {
        assert_abs_diff_eq!(classical().rho().unwrap(), 0.2, epsilon = 1e-15);
        let power = ScalarModel::new(RateFunction::power(2.0, 2.0).unwrap(), 0.4).unwrap();
        assert!(power.rho().is_none());
    }

    #[test]
    fn invariant_values() {
        let rho = 0.3;
        let s = SirState::outbreak(0.01).unwrap();
        assert_abs_diff_eq!(motion_invariant(&s, rho).unwrap(), rho * 0.99f64.ln(), epsilon = 1e-15);
        assert_eq!(
            motion_invariant(&SirState::new(1.0, 0.0, 0.0).unwrap(), rho).unwrap(),
            0.0
        );
        assert!(matches!(
            motion_invariant(&SirState::new(0.0, 0.5, 0.5).unwrap(), rho),
            Err(Error::InvariantUndefined)
        ));
    }

    #[test]
    fn orbit_values() {
        assert_abs_diff_eq!(orbit_infected(0.99, 0.01, 0.2).unwrap(), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(
            orbit_infected(0.2, 0.01, 0.2).unwrap(),
            0.4801224846838803,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(orbit_infected(0.52199, 0.01, 0.2).unwrap(), 0.35, epsilon = 1e-4);
        assert!(orbit_infected(0.0, 0.01, 0.2).is_err());
    }

    #[test]
    fn peak_values() {
        assert_abs_diff_eq!(peak_formula(0.01, 0.2).unwrap(), 0.4801225, epsilon = 1e-7);
        assert_abs_diff_eq!(peak_formula(0.01, 0.4).unwrap(), 0.2375038, epsilon = 1e-7);
        let at_start = classical_peak(0.01, 0.99).unwrap();
        assert!(at_start.at_start);
        assert_abs_diff_eq!(at_start.formula, 0.01, epsilon = 1e-15);
        assert_eq!(at_start.max_infected, 0.01);
        assert!(classical_peak(0.01, 0.0).is_err());
        assert!(classical_peak(1.0, 0.2).is_err());
    }

    #[test]
    fn disease_free_run_is_constant() {
        let traj = simulate_scalar(
            &classical(),
            SirState::new(0.9, 0.0, 0.1).unwrap(),
            10.0,
            &SimOptions::default(),
        )
        .unwrap();
        assert!(traj.states.iter().all(|s| s == &vec![0.9, 0.0, 0.1]));
    }
}
