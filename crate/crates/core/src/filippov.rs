//! Threshold (lockdown) feedback: the contact rate drops from `beta` to
//! `beta_bar` while the infected fraction is at or above `k`.
//!
//! The right-hand side is discontinuous across `y = k`. On the segment
//! `{(x, k) : rho <= x <= min(rho_bar, 1)}` both one-sided fields point towards
//! the line, and solutions in the sense of Filippov slide along it with the
//! convexified velocity `x' = -gamma k`, `y' = 0`. Elsewhere solutions cross
//! the line and follow the uncontrolled (`beta`) or controlled (`beta_bar`)
//! classical model.

use crate::error::{domain, Error, Result};
use crate::ode::Trajectory;
use crate::ode::{Direction, EventRecord, EventSpec};
use crate::roots::bisect;
use crate::sir::{self, peak_formula, ScalarModel, SimOptions, SirState};

pub const DEFAULT_MAX_MODE_SWITCHES: usize = 64;

/// Distance below which `k` is treated as equal to a regime boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

pub mod labels {
    /// Rising crossing of `y = k` under the uncontrolled rate.
    pub const THRESHOLD_UP: &str = "threshold-up";
    /// Falling crossing of `y = k` under the controlled rate.
    pub const THRESHOLD_DOWN: &str = "threshold-down";
    pub const SLIDING_ENTRY: &str = "sliding-entry";
    pub const SLIDING_EXIT: &str = "sliding-exit";
    /// Trajectory continues above the threshold with the controlled rate.
    pub const CONTROL_ON: &str = "control-on";
    /// Trajectory continues below the threshold with the uncontrolled rate.
    pub const CONTROL_OFF: &str = "control-off";
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy {
    pub beta: f64,
    pub beta_bar: f64,
    pub threshold: f64,
    pub gamma: f64,
}

impl ThresholdPolicy {
    pub fn new(beta: f64, beta_bar: f64, threshold: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("beta_bar", beta_bar), ("gamma", gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(beta_bar < beta) {
            return Err(domain(format!("controlled rate {beta_bar} must be below {beta}")));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(domain(format!("threshold must lie in (0, 1), got {threshold}")));
        }
        Ok(Self {
            beta,
            beta_bar,
            threshold,
            gamma,
        })
    }

    pub fn rho(&self) -> f64 {
        self.gamma / self.beta
    }

    pub fn rho_bar(&self) -> f64 {
        self.gamma / self.beta_bar
    }

    pub fn manifold(&self) -> SlidingManifold {
        SlidingManifold {
            x_low: self.rho(),
            x_high: self.rho_bar().min(1.0),
            level: self.threshold,
        }
    }

    fn uncontrolled(&self) -> ScalarModel {
        ScalarModel::classical(self.beta, self.gamma).expect("validated rates")
    }

    fn controlled(&self) -> ScalarModel {
        ScalarModel::classical(self.beta_bar, self.gamma).expect("validated rates")
    }
}

/// The segment `{(x, level) : x_low <= x <= x_high}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlidingManifold {
    pub x_low: f64,
    pub x_high: f64,
    pub level: f64,
}

impl SlidingManifold {
    pub fn contains(&self, x: f64) -> bool {
        self.x_low <= x && x <= self.x_high
    }
}

pub fn threshold_rate(y: f64, policy: &ThresholdPolicy) -> f64 {
    if y < policy.threshold {
        policy.beta
    } else {
        policy.beta_bar
    }
}

/// `y'` just below and just above the threshold at abscissa `x`.
pub fn one_sided_growth(policy: &ThresholdPolicy, x: f64) -> (f64, f64) {
    let k = policy.threshold;
    (
        k * (policy.beta * x - policy.gamma),
        k * (policy.beta_bar * x - policy.gamma),
    )
}

/// True when both one-sided fields at `(x, k)` point strictly towards the line.
pub fn is_attractive(policy: &ThresholdPolicy, x: f64) -> bool {
    let (below, above) = one_sided_growth(policy, x);
    below > 0.0 && above < 0.0
}

/// Filippov sliding velocity `(x', y', z')` at `(x, k)`: the convex
/// combination of the two one-sided fields with zero `y` component.
///
/// Returns `None` outside the closed sliding segment.
pub fn sliding_velocity(policy: &ThresholdPolicy, x: f64) -> Option<[f64; 3]> {
    let (below, above) = one_sided_growth(policy, x);
    if !(below >= 0.0 && above <= 0.0) || below == above {
        return None;
    }
    let k = policy.threshold;
    let weight = above / (above - below);
    let rate = weight * policy.beta + (1.0 - weight) * policy.beta_bar;
    let dx = -x * k * rate;
    Some([dx, 0.0, -dx])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryBranch {
    /// `rho_bar < 1 - epsilon`: value of the uncontrolled orbit at `x = rho_bar`.
    OrbitAtRhoBar,
    /// `rho_bar >= 1 - epsilon`: the initial infection level.
    Initial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryLevel {
    pub value: f64,
    pub branch: EntryBranch,
    /// `rho_bar == 1 - epsilon`, where the two branches meet.
    pub boundary: bool,
}

/// Largest threshold below which the trajectory still reaches `x = rho_bar`
/// above the threshold, `m(epsilon, rho, rho_bar)`.
pub fn entry_level(epsilon: f64, rho: f64, rho_bar: f64) -> Result<EntryLevel> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(rho > 0.0 && rho < rho_bar) {
        return Err(domain(format!("need 0 < rho < rho_bar, got {rho}, {rho_bar}")));
    }
    let s = 1.0 - epsilon;
    if rho_bar < s {
        Ok(EntryLevel {
            value: 1.0 - rho_bar + rho * (rho_bar / s).ln(),
            branch: EntryBranch::OrbitAtRhoBar,
            boundary: false,
        })
    } else {
        Ok(EntryLevel {
            value: epsilon,
            branch: EntryBranch::Initial,
            boundary: rho_bar == s,
        })
    }
}

/// Abscissa at which the uncontrolled orbit from `(1 - epsilon, epsilon)`
/// first reaches `y = k`: the root of `x - rho ln x + rho ln(1 - epsilon) + k - 1`
/// on `[rho, 1 - epsilon]`.
pub fn crossing_abscissa(epsilon: f64, rho: f64, k: f64) -> Result<f64> {
    let peak = peak_formula(epsilon, rho)?;
    if k < epsilon {
        return Err(Error::StartsAboveThreshold { k, epsilon });
    }
    if k >= peak {
        return Err(Error::NoCrossing { k, peak });
    }
    let s = 1.0 - epsilon;
    if k == epsilon {
        return Ok(s);
    }
    let residual = |x: f64| x - rho * x.ln() + rho * s.ln() + k - 1.0;
    bisect(residual, rho, s, 1e-15).ok_or(Error::NoCrossing { k, peak })
}

/// Peak of the infected fraction when the trajectory crosses `y = k` above
/// `rho_bar` (regime C): `M(epsilon, rho_bar) + (rho_bar - rho) ln((1 - epsilon)/x(k))`.
pub fn controlled_peak(epsilon: f64, policy: &ThresholdPolicy) -> Result<f64> {
    let rho = policy.rho();
    let rho_bar = policy.rho_bar();
    let xk = crossing_abscissa(epsilon, rho, policy.threshold)?;
    Ok(peak_formula(epsilon, rho_bar)? + (rho_bar - rho) * ((1.0 - epsilon) / xk).ln())
}

/// Time needed to slide from `x_entry` to `rho` at speed `gamma k`.
pub fn sliding_time(policy: &ThresholdPolicy, x_entry: f64) -> f64 {
    (x_entry - policy.rho()) / (policy.gamma * policy.threshold)
}

/// Length of the sliding interval `[t*, t**]` in regime B.
pub fn sliding_duration(epsilon: f64, policy: &ThresholdPolicy) -> Result<f64> {
    let report = classify_regime(epsilon, policy)?;
    report.sliding_duration.ok_or(Error::NoSlidingInterval)
}

/// Time for the uncontrolled orbit from `(1 - epsilon, epsilon)` to travel
/// from `x = 1 - epsilon` down to `x_to`, by quadrature of `dt = -dx / (beta x y(x))`.
pub fn orbit_travel_time(epsilon: f64, beta: f64, gamma: f64, x_to: f64) -> Result<f64> {
    let rho = gamma / beta;
    let s = 1.0 - epsilon;
    if !(x_to > 0.0 && x_to <= s) {
        return Err(domain(format!("x_to = {x_to} outside (0, 1 - epsilon]")));
    }
    if x_to == s {
        return Ok(0.0);
    }
    let integrand = |x: f64| 1.0 / (beta * x * (1.0 - x + rho * x.ln() - rho * s.ln()));
    // Composite Simpson; y(x) >= min(epsilon, y(x_to)) > 0 on the interval.
    let n = 4000;
    let h = (s - x_to) / n as f64;
    let mut sum = integrand(x_to) + integrand(s);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(x_to + i as f64 * h);
    }
    Ok(sum * h / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Regime {
    /// The threshold is never reached.
    A,
    /// Sliding plateau at `y = k`.
    B,
    /// Excursion above `k` under the controlled rate.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub predicted_peak: f64,
    /// First time `y = k` (regimes B and C).
    pub t_star: Option<f64>,
    /// End of the sliding interval (regime B).
    pub t_star_star: Option<f64>,
    pub crossing_x: Option<f64>,
    pub sliding_duration: Option<f64>,
    /// `M(epsilon, rho)`.
    pub uncontrolled_peak: f64,
    /// `m(epsilon, rho, rho_bar)`.
    pub entry_level: f64,
}

/// Regime of the threshold model from `(1 - epsilon, epsilon, 0)` without
/// simulating it.
pub fn classify_regime(epsilon: f64, policy: &ThresholdPolicy) -> Result<RegimeReport> {
    let rho = policy.rho();
    let rho_bar = policy.rho_bar();
    let k = policy.threshold;
    let r0 = (1.0 - epsilon) / rho;
    if !(r0 > 1.0) {
        return Err(Error::NoOutbreak(r0));
    }
    let big_m = peak_formula(epsilon, rho)?;
    let small_m = entry_level(epsilon, rho, rho_bar)?.value;
    for (which, value) in [("M", big_m), ("m", small_m)] {
        if (k - value).abs() <= BOUNDARY_TOL {
            return Err(Error::BoundaryRegime { k, which, value });
        }
    }
    if k < epsilon {
        return Err(Error::StartsAboveThreshold { k, epsilon });
    }

    let mut report = RegimeReport {
        regime: Regime::A,
        predicted_peak: big_m,
        t_star: None,
        t_star_star: None,
        crossing_x: None,
        sliding_duration: None,
        uncontrolled_peak: big_m,
        entry_level: small_m,
    };
    if big_m < k {
        return Ok(report);
    }
    let xk = crossing_abscissa(epsilon, rho, k)?;
    let t_star = orbit_travel_time(epsilon, policy.beta, policy.gamma, xk)?;
    report.crossing_x = Some(xk);
    report.t_star = Some(t_star);
    if small_m < k {
        let duration = sliding_time(policy, xk);
        report.regime = Regime::B;
        report.predicted_peak = k;
        report.sliding_duration = Some(duration);
        report.t_star_star = Some(t_star + duration);
    } else {
        report.regime = Regime::C;
        report.predicted_peak = controlled_peak(epsilon, policy)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Uncontrolled,
    Controlled,
    Sliding,
}

/// Simulates the threshold model from `(1 - epsilon, epsilon, 0)`.
pub fn simulate_threshold(
    policy: &ThresholdPolicy,
    epsilon: f64,
    horizon: f64,
    opts: &SimOptions,
) -> Result<Trajectory> {
    simulate_threshold_from(
        policy,
        SirState::outbreak(epsilon)?,
        horizon,
        opts,
        DEFAULT_MAX_MODE_SWITCHES,
    )
}

/// Mode-switching Filippov simulation from an arbitrary initial state.
///
/// Free segments are integrated with the uncontrolled or controlled classical
/// field; sliding segments use the exact reduced dynamics and are sampled at
/// `opts.control.max_step`. Every transition is annotated in the events list.
pub fn simulate_threshold_from(
    policy: &ThresholdPolicy,
    initial: SirState,
    horizon: f64,
    opts: &SimOptions,
    max_mode_switches: usize,
) -> Result<Trajectory> {
    if !(horizon > 0.0) {
        return Err(domain(format!("horizon must be positive, got {horizon}")));
    }
    let k = policy.threshold;
    let manifold = policy.manifold();
    let mut mode = if initial.y < k {
        Mode::Uncontrolled
    } else if initial.y > k {
        Mode::Controlled
    } else if is_attractive(policy, initial.x) {
        Mode::Sliding
    } else if initial.x >= manifold.x_high {
        Mode::Controlled
    } else {
        Mode::Uncontrolled
    };

    let mut traj = Trajectory::new(0.0, initial.to_array().to_vec());
    let mut t = 0.0;
    let mut state = initial;
    let mut switches = 0usize;

    loop {
        if t >= horizon {
            break;
        }
        match mode {
            Mode::Sliding => {
                let x_entry = state.x;
                let velocity = sliding_velocity(policy, x_entry)
                    .ok_or_else(|| domain(format!("x = {x_entry} is not on the sliding segment")))?;
                let speed = -velocity[0];
                let duration = (x_entry - manifold.x_low) / speed;
                let t_exit = t + duration;
                let t_end = t_exit.min(horizon);
                let steps = ((t_end - t) / opts.control.max_step).ceil().max(1.0) as usize;
                for i in 1..=steps {
                    let ti = if i == steps {
                        t_end
                    } else {
                        t + (t_end - t) * i as f64 / steps as f64
                    };
                    let x = if ti == t_exit {
                        manifold.x_low
                    } else {
                        x_entry - speed * (ti - t)
                    };
                    traj.push(ti, vec![x, k, 1.0 - x - k]);
                }
                if t_exit > horizon {
                    break;
                }
                state = SirState {
                    x: manifold.x_low,
                    y: k,
                    z: 1.0 - manifold.x_low - k,
                };
                t = t_exit;
                traj.events.push(record(labels::SLIDING_EXIT, t, state));
                mode = Mode::Uncontrolled;
            }
            Mode::Uncontrolled | Mode::Controlled => {
                let (model, switch) = if mode == Mode::Uncontrolled {
                    (
                        policy.uncontrolled(),
                        EventSpec::new(labels::THRESHOLD_UP, Direction::Rising, true, move |_, s| s[1] - k),
                    )
                } else {
                    (
                        policy.controlled(),
                        EventSpec::new(labels::THRESHOLD_DOWN, Direction::Falling, true, move |_, s| s[1] - k),
                    )
                };
                let segment = sir::simulate_scalar_with(&model, state, (t, horizon), opts, &[switch])?;
                let hit = segment
                    .events
                    .last()
                    .filter(|e| e.label == labels::THRESHOLD_UP || e.label == labels::THRESHOLD_DOWN)
                    .cloned();
                traj.extend_from(segment);
                let Some(hit) = hit else { break };

                t = hit.time;
                let x = hit.state[0];
                state = SirState {
                    x,
                    y: k,
                    z: 1.0 - x - k,
                };
                let next = if is_attractive(policy, x) {
                    Mode::Sliding
                } else if mode == Mode::Uncontrolled {
                    Mode::Controlled
                } else {
                    Mode::Uncontrolled
                };
                let label = match next {
                    Mode::Sliding => labels::SLIDING_ENTRY,
                    Mode::Controlled => labels::CONTROL_ON,
                    Mode::Uncontrolled => labels::CONTROL_OFF,
                };
                traj.events.push(record(label, t, state));
                mode = next;
            }
        }
        switches += 1;
        if switches > max_mode_switches {
            return Err(Error::ModeChatter(max_mode_switches));
        }
    }
    Ok(traj)
}

fn record(label: &str, time: f64, s: SirState) -> EventRecord {
    EventRecord {
        label: label.to_string(),
        time,
        state: s.to_array().to_vec(),
    }
}

/// Structural features of a simulated threshold trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureSummary {
    /// `(entry time, exit time)` of each sliding segment; the exit is absent
    /// when the horizon cut the segment.
    pub sliding: Vec<(f64, Option<f64>)>,
    /// Start times of excursions above the threshold.
    pub excursions: Vec<f64>,
    pub peak_times: Vec<f64>,
    pub max_infected: f64,
}

impl StructureSummary {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let mut sliding: Vec<(f64, Option<f64>)> = Vec::new();
        let mut excursions = Vec::new();
        let mut peak_times = Vec::new();
        for e in &traj.events {
            match e.label.as_str() {
                labels::SLIDING_ENTRY => sliding.push((e.time, None)),
                labels::SLIDING_EXIT => match sliding.last_mut() {
                    Some(last) if last.1.is_none() => last.1 = Some(e.time),
                    // Started on the segment.
                    _ => sliding.push((0.0, Some(e.time))),
                },
                labels::CONTROL_ON => excursions.push(e.time),
                sir::labels::PEAK => peak_times.push(e.time),
                _ => {}
            }
        }
        Self {
            sliding,
            excursions,
            peak_times,
            max_infected: traj.max_component(1),
        }
    }

    /// Regime suggested by the structure alone.
    pub fn observed_regime(&self) -> Regime {
        let first_slide = self.sliding.first().map(|s| s.0);
        let first_excursion = self.excursions.first().copied();
        match (first_slide, first_excursion) {
            (None, None) => Regime::A,
            (Some(_), None) => Regime::B,
            (None, Some(_)) => Regime::C,
            (Some(s), Some(e)) => {
                if s < e {
                    Regime::B
                } else {
                    Regime::C
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn policy(beta_bar: f64) -> ThresholdPolicy {
        ThresholdPolicy::new(2.0, beta_bar, 0.35, 0.4).unwrap()
    }

    #[test]
    fn rate_assignment() {
        let p = policy(0.38);
        assert_eq!(threshold_rate(0.1, &p), 2.0);
        assert_eq!(threshold_rate(0.35, &p), 0.38);
        assert_eq!(threshold_rate(0.5, &p), 0.38);
    }

    #[test]
    fn policy_validation() {
        assert!(ThresholdPolicy::new(1.0, 2.0, 0.3, 0.4).is_err());
        assert!(ThresholdPolicy::new(2.0, 1.0, 1.0, 0.4).is_err());
        assert!(ThresholdPolicy::new(2.0, 1.0, 0.3, 0.0).is_err());
    }

    #[test]
    fn manifold_bounds() {
        let m = policy(0.38).manifold();
        assert_abs_diff_eq!(m.x_low, 0.2, epsilon = 1e-15);
        assert_eq!(m.x_high, 1.0);
        let m = policy(1.0).manifold();
        assert_abs_diff_eq!(m.x_high, 0.4, epsilon = 1e-15);
    }

    #[test]
    fn entry_level_branches() {
        let e = entry_level(0.01, 0.2, 0.4 / 0.38).unwrap();
        assert_eq!(e.branch, EntryBranch::Initial);
        assert_eq!(e.value, 0.01);
        let e = entry_level(0.01, 0.2, 0.4).unwrap();
        assert_eq!(e.branch, EntryBranch::OrbitAtRhoBar);
        assert_abs_diff_eq!(e.value, 0.41876, epsilon = 1e-5);
        let below = entry_level(0.01, 0.2, 0.99 - 1e-12).unwrap().value;
        assert_abs_diff_eq!(below, 0.01, epsilon = 1e-11);
        assert!(entry_level(0.01, 0.99, 0.99).unwrap_err().to_string().contains("rho"));
        let edge = entry_level(0.25, 0.2, 0.75).unwrap();
        assert!(edge.boundary);
        assert_eq!(edge.value, 0.25);
    }

    #[test]
    fn crossing_values() {
        let xk = crossing_abscissa(0.01, 0.2, 0.35).unwrap();
        assert_abs_diff_eq!(xk, 0.52199, epsilon = 1e-4);
        assert_abs_diff_eq!(sir::orbit_infected(xk, 0.01, 0.2).unwrap(), 0.35, epsilon = 1e-10);
        assert_eq!(crossing_abscissa(0.01, 0.2, 0.01).unwrap(), 0.99);
        let near = crossing_abscissa(0.01, 0.2, 0.48).unwrap();
        assert!(near > 0.2);
        assert_abs_diff_eq!(sir::orbit_infected(near, 0.01, 0.2).unwrap(), 0.48, epsilon = 1e-10);
        assert!(matches!(
            crossing_abscissa(0.01, 0.2, 0.5),
            Err(Error::NoCrossing { .. })
        ));
        assert!(matches!(
            crossing_abscissa(0.01, 0.2, 0.005),
            Err(Error::StartsAboveThreshold { .. })
        ));
    }

    #[test]
    fn controlled_peak_values() {
        assert_abs_diff_eq!(controlled_peak(0.01, &policy(1.0)).unwrap(), 0.36552, epsilon = 1e-4);
        let from_start = ThresholdPolicy::new(2.0, 1.0, 0.01, 0.4).unwrap();
        assert_abs_diff_eq!(
            controlled_peak(0.01, &from_start).unwrap(),
            peak_formula(0.01, 0.4).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn sliding_duration_values() {
        assert_abs_diff_eq!(sliding_duration(0.01, &policy(0.38)).unwrap(), 2.300, epsilon = 1e-3);
        assert!(matches!(
            sliding_duration(0.01, &policy(1.0)),
            Err(Error::NoSlidingInterval)
        ));
        let p = policy(0.38);
        assert_eq!(sliding_time(&p, p.rho()), 0.0);
        let doubled = ThresholdPolicy { threshold: 0.7, ..p };
        assert_abs_diff_eq!(
            sliding_time(&doubled, 0.5),
            0.5 * sliding_time(&p, 0.5),
            epsilon = 1e-15
        );
    }

    #[test]
    fn regimes_of_reference_policies() {
        assert_eq!(classify_regime(0.01, &policy(0.38)).unwrap().regime, Regime::B);
        assert_eq!(classify_regime(0.01, &policy(1.0)).unwrap().regime, Regime::C);
        let high = ThresholdPolicy::new(2.0, 1.0, 0.6, 0.4).unwrap();
        let a = classify_regime(0.01, &high).unwrap();
        assert_eq!(a.regime, Regime::A);
        assert_abs_diff_eq!(a.predicted_peak, 0.4801225, epsilon = 1e-7);
        assert!(a.t_star.is_none() && a.sliding_duration.is_none());
    }

    #[test]
    fn boundary_regime_rejected() {
        let m = peak_formula(0.01, 0.2).unwrap();
        let p = ThresholdPolicy::new(2.0, 1.0, m, 0.4).unwrap();
        assert!(matches!(
            classify_regime(0.01, &p),
            Err(Error::BoundaryRegime { which: "M", .. })
        ));
        let m = entry_level(0.01, 0.2, 0.4).unwrap().value;
        let p = ThresholdPolicy::new(2.0, 1.0, m, 0.4).unwrap();
        assert!(matches!(
            classify_regime(0.01, &p),
            Err(Error::BoundaryRegime { which: "m", .. })
        ));
    }

    #[test]
    fn no_outbreak_rejected() {
        let p = ThresholdPolicy::new(0.3, 0.2, 0.1, 0.4).unwrap();
        assert!(matches!(classify_regime(0.01, &p), Err(Error::NoOutbreak(_))));
    }

    #[test]
    fn sliding_velocity_is_reduced_dynamics() {
        let p = policy(0.38);
        for x in [0.2, 0.3, 0.52, 0.9, 1.0] {
            let v = sliding_velocity(&p, x).unwrap();
            assert_abs_diff_eq!(v[0], -0.14, epsilon = 1e-14);
            assert_eq!(v[1], 0.0);
        }
        assert!(sliding_velocity(&p, 0.1).is_none());
        assert!(sliding_velocity(&policy(1.0), 0.5).is_none());
    }

    #[test]
    fn travel_time_zero_at_start() {
        assert_eq!(orbit_travel_time(0.01, 2.0, 0.4, 0.99).unwrap(), 0.0);
        assert!(orbit_travel_time(0.01, 2.0, 0.4, 0.995).is_err());
    }
}
