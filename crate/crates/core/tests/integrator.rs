use approx::assert_abs_diff_eq;
use sir_dynamics::ode::{
    integrate, integrate_rk4, integrate_with_events, locate_event, Direction, EventSpec, StepControl,
};

fn classical(beta: f64, gamma: f64) -> impl Fn(f64, &[f64], &mut [f64]) + Copy {
    move |_, s: &[f64], ds: &mut [f64]| {
        let inf = beta * s[0] * s[1];
        ds[0] = -inf;
        ds[1] = inf - gamma * s[1];
        ds[2] = gamma * s[1];
    }
}

const Y0: [f64; 3] = [0.99, 0.01, 0.0];

/// Fixed-step RK4 with a small step, used as a reference solution.
fn fine_grid_reference(t1: f64) -> sir_dynamics::Trajectory {
    integrate_rk4(classical(2.0, 0.4), &Y0, (0.0, t1), 1e-3).unwrap()
}

#[test]
fn classical_run_peak_and_decay() {
    let oracle = fine_grid_reference(50.0);
    let oracle_max = oracle.component(1).into_iter().fold(0.0, f64::max);
    assert_abs_diff_eq!(oracle_max, 0.48012, epsilon = 1e-5);

    let traj = integrate(classical(2.0, 0.4), &Y0, (0.0, 50.0), &StepControl::default()).unwrap();
    assert!(traj.last_state().unwrap()[1] < 1e-3);
    let max_y = traj.component(1).into_iter().fold(0.0, f64::max);
    assert_abs_diff_eq!(max_y, 0.48012, epsilon = 1e-3);
    assert_abs_diff_eq!(
        traj.last_state().unwrap()[1],
        oracle.last_state().unwrap()[1],
        epsilon = 1e-9
    );
}

#[test]
fn linear_fields_relative_error() {
    let control = StepControl {
        abs_tol: 1e-8,
        rel_tol: 1e-8,
        ..StepControl::default()
    };
    for lambda in [-1.0, 0.0, 1.0] {
        let traj = integrate(
            move |_, y: &[f64], dy: &mut [f64]| dy[0] = lambda * y[0],
            &[1.0],
            (0.0, 1.0),
            &control,
        )
        .unwrap();
        let exact = f64::exp(lambda);
        let rel = (traj.last_state().unwrap()[0] - exact).abs() / exact;
        assert!(
            rel < 10.0 * (control.abs_tol + control.rel_tol),
            "lambda {lambda}: {rel:e}"
        );
    }
}

#[test]
fn threshold_crossing_event() {
    let ev = EventSpec::new("y=0.35", Direction::Rising, false, |_, s| s[1] - 0.35);
    let traj = integrate_with_events(
        classical(2.0, 0.4),
        &Y0,
        (0.0, 50.0),
        &StepControl::default(),
        &[ev],
        1e-10,
    )
    .unwrap();
    assert_eq!(traj.events.len(), 1);
    let e = &traj.events[0];
    assert!((e.state[1] - 0.35).abs() <= 1e-10);
    assert_abs_diff_eq!(e.state[0], 0.52199, epsilon = 1e-4);
}

#[test]
fn peak_event_sits_at_rho() {
    let field = classical(2.0, 0.4);
    let ev = EventSpec::new("peak", Direction::Falling, false, move |t, s| {
        let mut ds = [0.0; 3];
        field(t, s, &mut ds);
        ds[1]
    });
    let traj = integrate_with_events(field, &Y0, (0.0, 50.0), &StepControl::default(), &[ev], 1e-10).unwrap();
    assert_eq!(traj.events.len(), 1);
    assert_abs_diff_eq!(traj.events[0].state[0], 0.2, epsilon = 1e-4);
}

#[test]
fn time_event_is_exact() {
    let ev = EventSpec::new("t=5", Direction::Rising, false, |t, _| t - 5.0);
    let traj = integrate_with_events(
        classical(2.0, 0.4),
        &Y0,
        (0.0, 50.0),
        &StepControl::default(),
        &[ev],
        1e-10,
    )
    .unwrap();
    assert!((traj.events[0].time - 5.0).abs() <= 1e-10);
}

#[test]
fn relocation_is_idempotent() {
    let field = classical(2.0, 0.4);
    let ev = EventSpec::new("y=0.35", Direction::Rising, false, |_, s| s[1] - 0.35);
    let traj = integrate(field, &Y0, (0.0, 50.0), &StepControl::default()).unwrap();
    let i = traj.states.iter().position(|s| s[1] >= 0.35).unwrap();
    let (ta, ya) = (traj.times[i - 1], traj.states[i - 1].clone());
    let (tb, yb) = (traj.times[i], traj.states[i].clone());
    let (te, _) = locate_event(field, (ta, &ya), (tb, &yb), &ev, 1e-10).unwrap();

    // Shrink the bracket around the located time and locate again.
    let tb2 = te + 0.25 * (tb - te);
    let yb2 = integrate(
        field,
        &ya,
        (ta, tb2),
        &StepControl {
            initial_step: tb2 - ta,
            max_step: tb2 - ta,
            ..StepControl::default()
        },
    )
    .unwrap()
    .last_state()
    .unwrap()
    .to_vec();
    let (te2, ye2) = locate_event(field, (ta, &ya), (tb2, &yb2), &ev, 1e-10).unwrap();
    assert!((ye2[1] - 0.35).abs() <= 1e-10);
    // |dy/dt| ~ 0.26 here, so 1e-10 in y is about 4e-10 in t.
    assert!((te - te2).abs() < 1e-8, "{te} vs {te2}");
}

/// Cubic Hermite interpolation of the reference grid at time `t`.
fn reference_at(reference: &sir_dynamics::Trajectory, t: f64) -> [f64; 3] {
    let field = classical(2.0, 0.4);
    let i = reference
        .times
        .partition_point(|&s| s <= t)
        .clamp(1, reference.len() - 1);
    let (t0, t1) = (reference.times[i - 1], reference.times[i]);
    let (y0, y1) = (&reference.states[i - 1], &reference.states[i]);
    let (mut d0, mut d1) = ([0.0; 3], [0.0; 3]);
    field(t0, y0, &mut d0);
    field(t1, y1, &mut d1);
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (h00, h10, h01, h11) = (
        2.0 * s.powi(3) - 3.0 * s * s + 1.0,
        s.powi(3) - 2.0 * s * s + s,
        -2.0 * s.powi(3) + 3.0 * s * s,
        s.powi(3) - s * s,
    );
    std::array::from_fn(|k| h00 * y0[k] + h10 * h * d0[k] + h01 * y1[k] + h11 * h * d1[k])
}

#[test]
fn halving_tolerances_never_hurts() {
    let reference = fine_grid_reference(20.0);
    let mut previous = f64::INFINITY;
    for tol in (0..24).map(|i| 1e-4 / 2f64.powi(i)) {
        let control = StepControl {
            abs_tol: tol,
            rel_tol: tol,
            ..StepControl::default()
        };
        let traj = integrate(classical(2.0, 0.4), &Y0, (0.0, 20.0), &control).unwrap();
        let err = traj
            .times
            .iter()
            .zip(&traj.states)
            .flat_map(|(&t, s)| {
                let r = reference_at(&reference, t);
                (0..3).map(move |k| (s[k] - r[k]).abs())
            })
            .fold(0.0, f64::max);
        assert!(err <= previous, "tol {tol:e}: error {err:e} > {previous:e}");
        previous = err;
    }
}
