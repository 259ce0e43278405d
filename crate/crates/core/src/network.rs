//! SIR dynamics on a weighted contact digraph of subpopulations.
//!
//! For node `i`,
//!
//! ```text
//! x_i' = -beta x_i sum_j A_ij y_j
//! y_i' =  beta x_i sum_j A_ij y_j - gamma y_i
//! z_i' =  gamma y_i
//! ```
//!
//! The network reproduction number is `R = (beta / gamma) lambda_max(diag(x) A)`.
//! Trajectories store the state as `[x_1..x_n, y_1..y_n, z_1..z_n]`.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::ode::{integrate_with_events, Direction, EventSpec, Trajectory};
use crate::roots::bisect;
use crate::shape::{classify_shape, ShapeTolerances};
use crate::sir::{SimOptions, NEGATIVE_CLAMP, SIMPLEX_TOL};
use crate::spectral::{spectral_radius, PerronRoot};

pub mod labels {
    /// Peak of the total infected fraction `sum_i y_i`.
    pub const AGGREGATE_PEAK: &str = "aggregate-peak";
    pub const EXTINCTION: &str = "extinction";

    pub fn node_peak(node: usize) -> String {
        format!("peak-node-{node}")
    }
}

/// Nonnegative contact weights with a positive diagonal, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactGraph {
    n: usize,
    weights: Vec<f64>,
}

impl ContactGraph {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(domain("contact graph needs at least one node"));
        }
        let mut weights = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(domain(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, &w) in row.iter().enumerate() {
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(domain(format!("weight A[{i}][{j}] = {w} must be nonnegative")));
                }
                if i == j && !(w > 0.0) {
                    return Err(domain(format!("diagonal weight A[{i}][{i}] must be positive")));
                }
            }
            weights.extend_from_slice(row);
        }
        Ok(Self { n, weights })
    }

    /// Complete graph with unit weights, `A = 1 1'`.
    pub fn all_ones(n: usize) -> Result<Self> {
        Self::new(&vec![vec![1.0; n]; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn is_strongly_connected(&self) -> bool {
        let reach = |forward: bool| {
            let mut seen = vec![false; self.n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for (j, visited) in seen.iter_mut().enumerate() {
                    let w = if forward { self.weight(i, j) } else { self.weight(j, i) };
                    if w > 0.0 && !*visited {
                        *visited = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub graph: ContactGraph,
    pub beta: f64,
    pub gamma: f64,
}

impl NetworkModel {
    pub fn new(graph: ContactGraph, beta: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("gamma", gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { graph, beta, gamma })
    }

    /// Two populations, `A = 1 1'`, `beta = gamma = 1`.
    pub fn two_population() -> Self {
        Self::new(ContactGraph::all_ones(2).expect("valid"), 1.0, 1.0).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.graph.n
    }

    pub(crate) fn field(&self) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
        let n = self.n();
        move |_, s: &[f64], ds: &mut [f64]| {
            let (x, rest) = s.split_at(n);
            let y = &rest[..n];
            for i in 0..n {
                let pressure: f64 = (0..n).map(|j| self.graph.weight(i, j) * y[j]).sum();
                let infection = self.beta * x[i] * pressure;
                let recovery = self.gamma * y[i];
                ds[i] = -infection;
                ds[n + i] = infection - recovery;
                ds[2 * n + i] = recovery;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl NetworkState {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if y.len() != n || z.len() != n || n == 0 {
            return Err(Error::InvalidState("x, y, z must have equal nonzero length".into()));
        }
        let mut state = Self { x, y, z };
        for i in 0..n {
            for v in [&mut state.x[i], &mut state.y[i], &mut state.z[i]] {
                if !v.is_finite() || *v < -NEGATIVE_CLAMP || *v > 1.0 + SIMPLEX_TOL {
                    return Err(Error::InvalidState(format!("node {i}: component {v} outside [0, 1]")));
                }
                *v = v.max(0.0);
            }
            let sum = state.x[i] + state.y[i] + state.z[i];
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::InvalidState(format!("node {i}: x + y + z = {sum}, expected 1")));
            }
        }
        Ok(state)
    }

    /// Susceptible and infected fractions, removed fraction `1 - x - y`.
    pub fn from_susceptible_infected(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let z = x.iter().zip(&y).map(|(a, b)| 1.0 - a - b).collect();
        Self::new(x, y, z)
    }

    /// `x = (1 - epsilon, 1)`, `y = (epsilon, 0)`, `z = 0`.
    pub fn seeded_first_node(epsilon: f64) -> Result<Self> {
        Self::new(vec![1.0 - epsilon, 1.0], vec![epsilon, 0.0], vec![0.0, 0.0])
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        [self.x.as_slice(), &self.y, &self.z].concat()
    }

    pub fn from_slice(n: usize, s: &[f64]) -> Self {
        Self {
            x: s[..n].to_vec(),
            y: s[n..2 * n].to_vec(),
            z: s[2 * n..3 * n].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDerivative {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub dz: Vec<f64>,
}

pub fn network_rhs(state: &NetworkState, model: &NetworkModel) -> NetworkDerivative {
    let n = model.n();
    let mut ds = vec![0.0; 3 * n];
    model.field()(0.0, &state.to_vec(), &mut ds);
    NetworkDerivative {
        dx: ds[..n].to_vec(),
        dy: ds[n..2 * n].to_vec(),
        dz: ds[2 * n..].to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub lambda_max: f64,
    pub eigenvector: Vec<f64>,
    pub reproduction: f64,
    pub iterations: usize,
}

pub fn spectral_report(state: &NetworkState, model: &NetworkModel) -> Result<SpectralReport> {
    let PerronRoot {
        lambda_max,
        eigenvector,
        iterations,
        ..
    } = spectral_radius(&state.x, model.graph.weights())?;
    Ok(SpectralReport {
        lambda_max,
        eigenvector,
        reproduction: model.beta / model.gamma * lambda_max,
        iterations,
    })
}

/// `R = (beta / gamma) lambda_max(diag(x) A)`.
pub fn network_r(state: &NetworkState, model: &NetworkModel) -> Result<f64> {
    Ok(spectral_report(state, model)?.reproduction)
}

/// Integrates the network model over `[0, horizon]`.
///
/// Annotates the aggregate peak and each node's peaks; stops once every
/// node's infected fraction is below the extinction threshold.
pub fn simulate_network(
    model: &NetworkModel,
    initial: &NetworkState,
    horizon: f64,
    opts: &SimOptions,
) -> Result<Trajectory> {
    simulate_network_with(model, initial, horizon, opts, &[])
}

/// As [`simulate_network`], with additional caller-supplied events.
pub fn simulate_network_with(
    model: &NetworkModel,
    initial: &NetworkState,
    horizon: f64,
    opts: &SimOptions,
    extra: &[EventSpec],
) -> Result<Trajectory> {
    let n = model.n();
    if initial.n() != n {
        return Err(domain(format!("state has {} nodes, model has {n}", initial.n())));
    }
    let mut events = Vec::with_capacity(n + 2 + extra.len());
    {
        let m = model.clone();
        events.push(EventSpec::new(
            labels::AGGREGATE_PEAK,
            Direction::Falling,
            false,
            move |t, s| {
                let mut ds = vec![0.0; 3 * n];
                m.field()(t, s, &mut ds);
                ds[n..2 * n].iter().sum()
            },
        ));
    }
    for i in 0..n {
        let m = model.clone();
        events.push(EventSpec::new(
            labels::node_peak(i),
            Direction::Falling,
            false,
            move |t, s| {
                let mut ds = vec![0.0; 3 * n];
                m.field()(t, s, &mut ds);
                ds[n + i]
            },
        ));
    }
    let threshold = opts.extinction_threshold;
    events.push(EventSpec::new(
        labels::EXTINCTION,
        Direction::Falling,
        true,
        move |_, s| s[n..2 * n].iter().copied().fold(f64::NEG_INFINITY, f64::max) - threshold,
    ));
    events.extend_from_slice(extra);
    let traj = integrate_with_events(
        model.field(),
        &initial.to_vec(),
        (0.0, horizon),
        &opts.control,
        &events,
        opts.event_tol,
    )?;
    Ok(traj)
}

/// `R(t)` at every stored time.
pub fn reproduction_series(traj: &Trajectory, model: &NetworkModel) -> Result<Vec<f64>> {
    let n = model.n();
    traj.states
        .iter()
        .map(|s| network_r(&NetworkState::from_slice(n, s), model))
        .collect()
}

/// Largest per-node `|x_i + y_i + z_i - 1|` over stored states.
pub fn simplex_drift(traj: &Trajectory, n: usize) -> f64 {
    traj.states
        .iter()
        .flat_map(|s| (0..n).map(move |i| (s[i] + s[n + i] + s[2 * n + i] - 1.0).abs()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateDrift {
    /// Drift of `xbar + ybar - ln xbar`.
    pub constant_motion: f64,
    /// Drift of `x_i(t) xbar(0) - x_i(0) xbar(t)`.
    pub ratio: f64,
}

/// Conservation checks for the two-population, `A = 1 1'`, `beta = gamma = 1` model.
pub fn aggregate_invariants(traj: &Trajectory, model: &NetworkModel) -> Result<AggregateDrift> {
    let ones = model.graph.weights().iter().all(|&w| w == 1.0);
    if model.n() != 2 || !ones || model.beta != 1.0 || model.gamma != 1.0 {
        return Err(Error::InvariantSetupMismatch);
    }
    let first = traj.states.first().ok_or(Error::InsufficientData(0))?;
    let aggregate = |s: &[f64]| (s[0] + s[1], s[2] + s[3]);
    let (xbar0, ybar0) = aggregate(first);
    let c0 = xbar0 + ybar0 - xbar0.ln();
    let mut drift = AggregateDrift {
        constant_motion: 0.0,
        ratio: 0.0,
    };
    for s in &traj.states {
        let (xbar, ybar) = aggregate(s);
        drift.constant_motion = drift.constant_motion.max((xbar + ybar - xbar.ln() - c0).abs());
        for i in 0..2 {
            drift.ratio = drift.ratio.max((s[i] * xbar0 - first[i] * xbar).abs());
        }
    }
    Ok(drift)
}

/// `h(eps) = (1 - eps)(1 - ln(2 - eps)) / (2 - eps)`.
pub fn bimodality_map(epsilon: f64) -> f64 {
    (1.0 - epsilon) * (1.0 - (2.0 - epsilon).ln()) / (2.0 - epsilon)
}

/// Least positive fixed point of [`bimodality_map`]: initial infections
/// below it make node 1 of the two-population model change monotonicity at
/// least twice.
pub fn epsilon_bar() -> f64 {
    bisect(|e| e - bimodality_map(e), 0.0, 1.0, 1e-15).expect("g(0) < 0 < g(1)")
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultimodalityReport {
    pub node: usize,
    pub peak_times: Vec<f64>,
    pub peak_values: Vec<f64>,
    pub multimodal: bool,
}

impl MultimodalityReport {
    pub fn peak_count(&self) -> usize {
        self.peak_times.len()
    }
}

/// Counts the local maxima of node `node`'s infected fraction.
pub fn detect_multimodality(traj: &Trajectory, n: usize, node: usize, value_tol: f64) -> Result<MultimodalityReport> {
    if node >= n {
        return Err(domain(format!("node {node} out of range for {n} nodes")));
    }
    let report = classify_shape(
        &traj.times,
        &traj.component(n + node),
        ShapeTolerances {
            value_tol,
            ..ShapeTolerances::default()
        },
    )?;
    Ok(MultimodalityReport {
        node,
        multimodal: report.peak_count() >= 2,
        peak_times: report.peak_times,
        peak_values: report.peak_values,
    })
}

/// Sampling plan around the two-population model.
///
/// Each axis takes `points_per_axis` evenly spaced values in
/// `[1 - radius, 1 + radius]`: `beta`, `gamma`, and a matrix offset `delta`
/// applied as `A = 1 1' + delta [[1, -1], [-1, 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationPlan {
    pub beta_radius: f64,
    pub gamma_radius: f64,
    pub matrix_radius: f64,
    pub points_per_axis: usize,
    pub epsilons: Vec<f64>,
    pub horizon: f64,
    pub value_tol: f64,
}

impl Default for PerturbationPlan {
    fn default() -> Self {
        Self {
            beta_radius: 0.02,
            gamma_radius: 0.02,
            matrix_radius: 0.02,
            points_per_axis: 3,
            epsilons: vec![0.01],
            horizon: 100.0,
            value_tol: crate::shape::DEFAULT_VALUE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationRow {
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub peak_count: usize,
    pub multimodal: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSummary {
    pub rows: Vec<PerturbationRow>,
    /// Fraction of successful rows with a multimodal node-1 curve.
    pub multimodal_fraction: f64,
}

fn axis(radius: f64, points: usize) -> Vec<f64> {
    if points <= 1 || radius == 0.0 {
        return vec![0.0];
    }
    (0..points)
        .map(|i| -radius + 2.0 * radius * i as f64 / (points - 1) as f64)
        .collect()
}

/// Node-1 multimodality across perturbed two-population models.
pub fn perturbation_sweep(plan: &PerturbationPlan, opts: &SimOptions) -> PerturbationSummary {
    let mut cells = Vec::new();
    for &epsilon in &plan.epsilons {
        for db in axis(plan.beta_radius, plan.points_per_axis) {
            for dg in axis(plan.gamma_radius, plan.points_per_axis) {
                for delta in axis(plan.matrix_radius, plan.points_per_axis) {
                    cells.push((1.0 + db, 1.0 + dg, delta, epsilon));
                }
            }
        }
    }
    let rows: Vec<PerturbationRow> = cells
        .into_par_iter()
        .map(|(beta, gamma, delta, epsilon)| {
            let outcome = (|| -> Result<MultimodalityReport> {
                let graph = ContactGraph::new(&[vec![1.0 + delta, 1.0 - delta], vec![1.0 - delta, 1.0 + delta]])?;
                let model = NetworkModel::new(graph, beta, gamma)?;
                let traj = simulate_network(&model, &NetworkState::seeded_first_node(epsilon)?, plan.horizon, opts)?;
                detect_multimodality(&traj, 2, 0, plan.value_tol)
            })();
            match outcome {
                Ok(r) => PerturbationRow {
                    beta,
                    gamma,
                    delta,
                    epsilon,
                    peak_count: r.peak_count(),
                    multimodal: r.multimodal,
                    error: None,
                },
                Err(e) => PerturbationRow {
                    beta,
                    gamma,
                    delta,
                    epsilon,
                    peak_count: 0,
                    multimodal: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let ok: Vec<_> = rows.iter().filter(|r| r.error.is_none()).collect();
    let multimodal_fraction = if ok.is_empty() {
        0.0
    } else {
        ok.iter().filter(|r| r.multimodal).count() as f64 / ok.len() as f64
    };
    PerturbationSummary {
        rows,
        multimodal_fraction,
    }
}
