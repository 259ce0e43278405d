//! Explicit Runge–Kutta integration with event location.
//!
//! Two steppers are provided: a classic fixed-step RK4 ([`integrate_rk4`]) and
//! an adaptive Dormand–Prince 5(4) pair ([`integrate`], [`integrate_with_events`]).
//! Events are detected by a sign change of a scalar event function between two
//! accepted steps and refined by bisection, where every trial state is obtained
//! by a fresh Runge–Kutta step from the left end of the bracket.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Default tolerance for event location, in units of the event function.
pub const DEFAULT_EVENT_TOL: f64 = 1e-10;

const MAX_BISECTIONS: usize = 200;

/// Step-size control for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub initial_step: f64,
    pub max_step: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial_step: 1e-3,
            max_step: 0.25,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_steps: 1_000_000,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<(), IntegrationError> {
        let bad = |msg: &str| Err(IntegrationError::InvalidControl(msg.to_string()));
        if !(self.initial_step > 0.0) {
            return bad("initial_step must be positive");
        }
        if !(self.max_step >= self.initial_step) {
            return bad("max_step must be at least initial_step");
        }
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || !(self.abs_tol + self.rel_tol > 0.0) {
            return bad("tolerances must be non-negative with a positive sum");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }

    /// Both tolerances multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }
}

/// Which sign changes of an event function count as an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Negative to non-negative.
    Rising,
    /// Positive to non-positive.
    Falling,
    Any,
}

impl Direction {
    fn triggered(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Any => rising || falling,
        }
    }
}

pub type EventFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;

/// A scalar event function of `(t, state)` with detection settings.
#[derive(Clone)]
pub struct EventSpec {
    pub label: String,
    pub direction: Direction,
    pub terminal: bool,
    function: Arc<EventFn>,
}

impl EventSpec {
    pub fn new(
        label: impl Into<String>,
        direction: Direction,
        terminal: bool,
        function: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            direction,
            terminal,
            function: Arc::new(function),
        }
    }

    pub fn eval(&self, t: f64, state: &[f64]) -> f64 {
        (self.function)(t, state)
    }
}

impl fmt::Debug for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EventSpec")
            .field("label", &self.label)
            .field("direction", &self.direction)
            .field("terminal", &self.terminal)
            .finish_non_exhaustive()
    }
}

/// A located event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub label: String,
    pub time: f64,
    pub state: Vec<f64>,
}

/// Accepted steps of an integration, plus annotated events.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub events: Vec<EventRecord>,
}

impl Trajectory {
    pub fn new(t0: f64, y0: Vec<f64>) -> Self {
        Self {
            times: vec![t0],
            states: vec![y0],
            events: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn push(&mut self, t: f64, state: Vec<f64>) {
        self.times.push(t);
        self.states.push(state);
    }

    /// Time series of one state component.
    pub fn component(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[index]).collect()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    pub fn events_labelled<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a EventRecord> {
        self.events.iter().filter(move |e| e.label == label)
    }

    /// Appends `other`, dropping its first point when it repeats our last time.
    pub fn extend_from(&mut self, other: Trajectory) {
        let skip = match (self.last_time(), other.times.first()) {
            (Some(a), Some(&b)) => usize::from(a >= b),
            _ => 0,
        };
        for (t, s) in other.times.into_iter().zip(other.states).skip(skip) {
            self.push(t, s);
        }
        self.events.extend(other.events);
    }

    /// Largest value of one component over the stored states and event states.
    pub fn max_component(&self, index: usize) -> f64 {
        self.states
            .iter()
            .chain(self.events.iter().map(|e| &e.state))
            .map(|s| s[index])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Error)]
pub enum IntegrationError {
    #[error("invalid step control: {0}")]
    InvalidControl(String),
    #[error("invalid time span [{0}, {1}]")]
    InvalidSpan(f64, f64),
    #[error("step budget exceeded at t = {:.6}", partial.last_time().unwrap_or(f64::NAN))]
    BudgetExceeded { partial: Box<Trajectory> },
    #[error("divergence: non-finite state at t = {time}")]
    Divergence { time: f64, partial: Box<Trajectory> },
    #[error("no event: event function does not change sign on the bracket")]
    NoEvent,
    #[error("event tolerance unreachable: |g| = {residual:e} at t = {time}")]
    EventToleranceUnreachable { time: f64, residual: f64 },
}

impl IntegrationError {
    /// The partial trajectory carried by budget and divergence failures.
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            Self::BudgetExceeded { partial } | Self::Divergence { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step. Returns the fifth-order solution and the
/// componentwise error estimate.
fn dopri_step<F>(rhs: &F, t: f64, y: &[f64], h: f64) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];

    rhs(t, y, &mut k[0]);
    for i in 0..n {
        tmp[i] = y[i] + h * A21 * k[0][i];
    }
    rhs(t + C2 * h, &tmp, &mut k[1]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
    }
    rhs(t + C3 * h, &tmp, &mut k[2]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
    }
    rhs(t + C4 * h, &tmp, &mut k[3]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
    }
    rhs(t + C5 * h, &tmp, &mut k[4]);
    for i in 0..n {
        tmp[i] = y[i] + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
    }
    rhs(t + h, &tmp, &mut k[5]);
    let mut y_new = vec![0.0; n];
    for i in 0..n {
        y_new[i] = y[i] + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
    }
    rhs(t + h, &y_new, &mut k[6]);
    let err = (0..n)
        .map(|i| h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]))
        .collect();
    (y_new, err)
}

fn error_norm(y: &[f64], y_new: &[f64], err: &[f64], control: &StepControl) -> f64 {
    let sum: f64 = y
        .iter()
        .zip(y_new)
        .zip(err)
        .map(|((a, b), e)| {
            let scale = control.abs_tol + control.rel_tol * a.abs().max(b.abs());
            (e / scale).powi(2)
        })
        .sum();
    (sum / y.len().max(1) as f64).sqrt()
}

/// State at `t` obtained by a single Runge–Kutta step from `(t_a, y_a)`.
fn advance<F>(rhs: &F, t_a: f64, y_a: &[f64], t: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if t == t_a {
        return y_a.to_vec();
    }
    dopri_step(rhs, t_a, y_a, t - t_a).0
}

/// Adaptive integration over `t_span` without events.
pub fn integrate<F>(
    rhs: F,
    y0: &[f64],
    t_span: (f64, f64),
    control: &StepControl,
) -> Result<Trajectory, IntegrationError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    integrate_with_events(rhs, y0, t_span, control, &[], DEFAULT_EVENT_TOL)
}

/// Adaptive integration with event detection.
///
/// Non-terminal events are recorded without touching the step sequence, so a
/// run with extra non-terminal events stores exactly the same grid as one
/// without. The first terminal event ends the run; its located state becomes
/// the last stored point.
pub fn integrate_with_events<F>(
    rhs: F,
    y0: &[f64],
    t_span: (f64, f64),
    control: &StepControl,
    events: &[EventSpec],
    event_tol: f64,
) -> Result<Trajectory, IntegrationError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    control.validate()?;
    let (t0, t1) = t_span;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(IntegrationError::InvalidSpan(t0, t1));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(IntegrationError::Divergence {
            time: t0,
            partial: Box::new(Trajectory::default()),
        });
    }

    let mut traj = Trajectory::new(t0, y0.to_vec());
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut g_prev: Vec<f64> = events.iter().map(|e| e.eval(t, &y)).collect();
    let mut h = control.initial_step.min(t1 - t0);
    let mut attempts = 0usize;

    while t < t1 {
        if attempts >= control.max_steps {
            return Err(IntegrationError::BudgetExceeded {
                partial: Box::new(traj),
            });
        }
        attempts += 1;

        let remaining = t1 - t;
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let (y_new, err) = dopri_step(&rhs, t, &y, step);
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(IntegrationError::Divergence {
                time: t + step,
                partial: Box::new(traj),
            });
        }
        let norm = error_norm(&y, &y_new, &err, control);
        if norm > 1.0 {
            let factor = (0.9 * norm.powf(-0.2)).max(0.2);
            h = step * factor;
            if t + h == t {
                return Err(IntegrationError::Divergence {
                    time: t,
                    partial: Box::new(traj),
                });
            }
            continue;
        }

        let t_new = if last { t1 } else { t + step };
        let g_new: Vec<f64> = events.iter().map(|e| e.eval(t_new, &y_new)).collect();

        let mut hits = Vec::new();
        for (i, spec) in events.iter().enumerate() {
            if spec.direction.triggered(g_prev[i], g_new[i]) {
                let (te, ye) = bisect_event(&rhs, (t, &y), (t_new, g_prev[i], g_new[i]), spec, event_tol)?;
                hits.push((te, ye, i));
            }
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut stop = None;
        for (te, ye, i) in hits {
            traj.events.push(EventRecord {
                label: events[i].label.clone(),
                time: te,
                state: ye.clone(),
            });
            if events[i].terminal {
                stop = Some((te, ye));
                break;
            }
        }
        if let Some((te, ye)) = stop {
            if te > t {
                traj.push(te, ye);
            }
            return Ok(traj);
        }

        t = t_new;
        y = y_new;
        g_prev = g_new;
        traj.push(t, y.clone());

        let factor = if norm == 0.0 {
            5.0
        } else {
            (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (step * factor).min(control.max_step);
    }
    Ok(traj)
}

fn bisect_event<F>(
    rhs: &F,
    left: (f64, &[f64]),
    right: (f64, f64, f64),
    spec: &EventSpec,
    event_tol: f64,
) -> Result<(f64, Vec<f64>), IntegrationError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let (t_a, y_a) = left;
    let (t_b, g_a, g_b) = right;
    let mut lo = t_a;
    let mut hi = t_b;
    let mut g_lo = g_a;
    let mut best = (t_b, g_b);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let y_mid = advance(rhs, t_a, y_a, mid);
        let g_mid = spec.eval(mid, &y_mid);
        if g_mid.abs() <= event_tol {
            return Ok((mid, y_mid));
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            best = (hi, g_mid);
        }
    }
    let (t_best, g_best) = best;
    if g_best.abs() <= event_tol {
        Ok((t_best, advance(rhs, t_a, y_a, t_best)))
    } else {
        Err(IntegrationError::EventToleranceUnreachable {
            time: t_best,
            residual: g_best.abs(),
        })
    }
}

/// Locates an event of `event` between two states of a run.
///
/// The state at the returned time comes from a Runge–Kutta step started at
/// `t_a`, so the bracket should be no wider than an accepted step.
pub fn locate_event<F>(
    rhs: F,
    (t_a, y_a): (f64, &[f64]),
    (t_b, y_b): (f64, &[f64]),
    event: &EventSpec,
    event_tol: f64,
) -> Result<(f64, Vec<f64>), IntegrationError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let g_a = event.eval(t_a, y_a);
    let g_b = event.eval(t_b, y_b);
    if !event.direction.triggered(g_a, g_b) {
        return Err(IntegrationError::NoEvent);
    }
    bisect_event(&rhs, (t_a, y_a), (t_b, g_a, g_b), event, event_tol)
}

/// Classic fixed-step RK4 over `t_span`. The last step is shortened to land
/// on `t1`.
pub fn integrate_rk4<F>(rhs: F, y0: &[f64], t_span: (f64, f64), step: f64) -> Result<Trajectory, IntegrationError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(IntegrationError::InvalidSpan(t0, t1));
    }
    if !(step > 0.0) {
        return Err(IntegrationError::InvalidControl("step must be positive".into()));
    }
    let n = y0.len();
    let steps = ((t1 - t0) / step).ceil() as usize;
    let mut traj = Trajectory::new(t0, y0.to_vec());
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for i in 0..steps {
        let t = t0 + i as f64 * step;
        let h = if i + 1 == steps { t1 - t } else { step };
        rhs(t, &y, &mut k1);
        for j in 0..n {
            tmp[j] = y[j] + 0.5 * h * k1[j];
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for j in 0..n {
            tmp[j] = y[j] + 0.5 * h * k2[j];
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for j in 0..n {
            tmp[j] = y[j] + h * k3[j];
        }
        rhs(t + h, &tmp, &mut k4);
        for j in 0..n {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(IntegrationError::Divergence {
                time: t + h,
                partial: Box::new(traj),
            });
        }
        let t_next = if i + 1 == steps { t1 } else { t + h };
        traj.push(t_next, y.clone());
    }
    Ok(traj)
}
