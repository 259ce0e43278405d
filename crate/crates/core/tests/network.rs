use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sir_dynamics::network::{
    aggregate_invariants, bimodality_map, detect_multimodality, epsilon_bar, labels, network_r, network_rhs,
    perturbation_sweep, reproduction_series, simplex_drift, simulate_network, simulate_network_with, ContactGraph,
    NetworkModel, NetworkState, PerturbationPlan,
};
use sir_dynamics::ode::{Direction, EventSpec};
use sir_dynamics::shape::DEFAULT_VALUE_TOL;
use sir_dynamics::sir::{simulate_scalar, ScalarModel, SimOptions, SirState};
use sir_dynamics::spectral::{closed_form_2x2, spectral_radius};

fn two_population_run(epsilon: f64, extra: &[EventSpec]) -> sir_dynamics::Trajectory {
    simulate_network_with(
        &NetworkModel::two_population(),
        &NetworkState::seeded_first_node(epsilon).unwrap(),
        100.0,
        &SimOptions::default(),
        extra,
    )
    .unwrap()
}

#[test]
fn two_population_initial_derivatives() {
    let d = network_rhs(
        &NetworkState::seeded_first_node(0.01).unwrap(),
        &NetworkModel::two_population(),
    );
    assert_abs_diff_eq!(d.dy[0], -1e-4, epsilon = 1e-12);
    assert_abs_diff_eq!(d.dy[1], 0.01, epsilon = 1e-12);
    assert_abs_diff_eq!(d.dy[0] + d.dy[1], 0.0099, epsilon = 1e-12);
    for i in 0..2 {
        assert_abs_diff_eq!(d.dx[i] + d.dy[i] + d.dz[i], 0.0, epsilon = 1e-15);
    }
}

#[test]
fn two_population_bimodal_node_one() {
    let crossing = EventSpec::new("xbar=1", Direction::Falling, false, |_, s| s[0] + s[1] - 1.0);
    let traj = two_population_run(0.01, &[crossing]);
    let node1 = detect_multimodality(&traj, 2, 0, DEFAULT_VALUE_TOL).unwrap();
    let node2 = detect_multimodality(&traj, 2, 1, DEFAULT_VALUE_TOL).unwrap();
    assert!(node1.multimodal && node1.peak_count() >= 2, "{node1:?}");
    assert_eq!(node2.peak_count(), 1);

    let at = traj.events_labelled("xbar=1").next().unwrap();
    assert_abs_diff_eq!(at.state[2] + at.state[3], 1.0 - 1.99f64.ln(), epsilon = 1e-3);
    assert_abs_diff_eq!(at.state[2] + at.state[3], 0.311865, epsilon = 1e-3);
    assert_abs_diff_eq!(at.state[1], 0.502513, epsilon = 1e-3);

    // The aggregate peak is the same moment.
    let agg = traj.events_labelled(labels::AGGREGATE_PEAK).next().unwrap();
    assert_abs_diff_eq!(agg.time, at.time, epsilon = 1e-6);
    let ybar: Vec<f64> = traj.states.iter().map(|s| s[2] + s[3]).collect();
    let shape = sir_dynamics::shape::classify_shape(&traj.times, &ybar, Default::default()).unwrap();
    assert_eq!(shape.shape, sir_dynamics::shape::Shape::SinglePeak);
}

#[test]
fn multimodality_below_epsilon_bar() {
    for eps in [0.005, 0.01, 0.05, 0.1, 0.17] {
        let traj = two_population_run(eps, &[]);
        let node1 = detect_multimodality(&traj, 2, 0, DEFAULT_VALUE_TOL).unwrap();
        assert!(node1.peak_count() >= 2, "eps {eps}: {node1:?}");
        let d = network_rhs(
            &NetworkState::seeded_first_node(eps).unwrap(),
            &NetworkModel::two_population(),
        );
        assert_abs_diff_eq!(d.dy[0], -eps * eps, epsilon = 1e-12);
        assert_abs_diff_eq!(d.dy[0] + d.dy[1], (1.0 - eps) * eps, epsilon = 1e-12);
    }
}

#[test]
fn aggregate_invariants_hold() {
    for eps in [0.01, 0.1] {
        let traj = two_population_run(eps, &[]);
        let drift = aggregate_invariants(&traj, &NetworkModel::two_population()).unwrap();
        assert!(drift.constant_motion < 1e-6 && drift.ratio < 1e-6, "{drift:?}");
        assert!(simplex_drift(&traj, 2) <= 1e-9);
        let ends = traj.last_state().unwrap();
        assert!(ends[2].max(ends[3]) <= 1.01e-8);
    }
    let mut short = two_population_run(0.01, &[]);
    short.times.truncate(1);
    short.states.truncate(1);
    let drift = aggregate_invariants(&short, &NetworkModel::two_population()).unwrap();
    assert_eq!((drift.constant_motion, drift.ratio), (0.0, 0.0));
}

#[test]
fn aggregate_invariants_reject_other_setups() {
    let model = NetworkModel::new(ContactGraph::all_ones(2).unwrap(), 2.0, 1.0).unwrap();
    let traj = simulate_network(
        &model,
        &NetworkState::seeded_first_node(0.01).unwrap(),
        10.0,
        &SimOptions::default(),
    )
    .unwrap();
    assert!(aggregate_invariants(&traj, &model).is_err());
}

#[test]
fn single_node_matches_scalar() {
    let model = NetworkModel::new(ContactGraph::new(&[vec![1.0]]).unwrap(), 2.0, 0.4).unwrap();
    let start = NetworkState::new(vec![0.99], vec![0.01], vec![0.0]).unwrap();
    let net = simulate_network(&model, &start, 100.0, &SimOptions::default()).unwrap();
    let scalar = simulate_scalar(
        &ScalarModel::classical(2.0, 0.4).unwrap(),
        SirState::outbreak(0.01).unwrap(),
        100.0,
        &SimOptions::default(),
    )
    .unwrap();
    assert_eq!(net.times, scalar.times);
    for (a, b) in net.states.iter().zip(&scalar.states) {
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() <= 1e-9);
        }
    }
    let report = detect_multimodality(&net, 1, 0, DEFAULT_VALUE_TOL).unwrap();
    assert_eq!(report.peak_count(), 1);
}

#[test]
fn reproduction_number_examples() {
    let model = NetworkModel::new(ContactGraph::new(&[vec![2.0]]).unwrap(), 1.0, 0.4).unwrap();
    let state = NetworkState::new(vec![0.99], vec![0.01], vec![0.0]).unwrap();
    assert_abs_diff_eq!(network_r(&state, &model).unwrap(), 4.95, epsilon = 1e-12);
    let coupled = NetworkState::seeded_first_node(0.01).unwrap();
    assert_abs_diff_eq!(
        network_r(&coupled, &NetworkModel::two_population()).unwrap(),
        1.99,
        epsilon = 1e-12
    );
    let empty = NetworkState::new(vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    assert_eq!(network_r(&empty, &NetworkModel::two_population()).unwrap(), 0.0);
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        rng.random_range(0.1..2.0)
                    } else {
                        rng.random_range(0.0..2.0)
                    }
                })
                .collect()
        })
        .collect()
}

#[test]
fn power_iteration_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let a = random_matrix(&mut rng, 2);
        let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
        let flat: Vec<f64> = a.concat();
        let root = spectral_radius(&x, &flat).unwrap();
        let exact = closed_form_2x2([x[0] * a[0][0], x[0] * a[0][1], x[1] * a[1][0], x[1] * a[1][1]]);
        assert!(
            (root.lambda_max - exact).abs() <= 1e-10,
            "{a:?} {x:?}: {} vs {exact}",
            root.lambda_max
        );
        assert!(root.eigenvector.iter().all(|&v| v >= 0.0));
        assert_abs_diff_eq!(root.eigenvector.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn rank_one_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=6 {
        let ones = vec![1.0; n * n];
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let root = spectral_radius(&x, &ones).unwrap();
            assert!((root.lambda_max - x.iter().sum::<f64>()).abs() <= 1e-12);
        }
    }
}

#[test]
fn reproduction_nonincreasing_on_strongly_connected_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut runs = 0;
    while runs < 12 {
        let n = rng.random_range(2..=4);
        let graph = ContactGraph::new(&random_matrix(&mut rng, n)).unwrap();
        if !graph.is_strongly_connected() {
            continue;
        }
        runs += 1;
        let model = NetworkModel::new(graph, rng.random_range(0.5..3.0), rng.random_range(0.2..1.0)).unwrap();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.05)).collect();
        let x = y.iter().map(|v| 1.0 - v).collect();
        let traj = simulate_network(
            &model,
            &NetworkState::from_susceptible_infected(x, y).unwrap(),
            100.0,
            &SimOptions::default(),
        )
        .unwrap();
        let r = reproduction_series(&traj, &model).unwrap();
        assert!(r.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        assert!(simplex_drift(&traj, n) <= 1e-9);
        for w in traj.states.windows(2) {
            assert!((0..n).all(|i| w[1][i] <= w[0][i]));
        }
    }
}

#[test]
fn epsilon_bar_by_two_methods() {
    let bisected = epsilon_bar();
    let mut e = 0.1;
    for _ in 0..200 {
        e = bimodality_map(e);
    }
    assert_abs_diff_eq!(e, bisected, epsilon = 1e-12);
    assert_abs_diff_eq!(bisected, 0.1809, epsilon = 1e-3);
    assert!((bimodality_map(bisected) - bisected).abs() <= 1e-12);
    assert!(-bimodality_map(0.0) < 0.0);
    assert_eq!(1.0 - bimodality_map(1.0), 1.0);
}

#[test]
fn zero_radius_perturbation_reproduces_two_population() {
    let plan = PerturbationPlan {
        beta_radius: 0.0,
        gamma_radius: 0.0,
        matrix_radius: 0.0,
        ..PerturbationPlan::default()
    };
    let summary = perturbation_sweep(&plan, &SimOptions::default());
    assert_eq!(summary.rows.len(), 1);
    let direct = detect_multimodality(&two_population_run(0.01, &[]), 2, 0, DEFAULT_VALUE_TOL).unwrap();
    assert_eq!(summary.rows[0].peak_count, direct.peak_count());
    assert!(summary.rows[0].multimodal);
    assert_eq!(summary.multimodal_fraction, 1.0);
}

#[test]
fn perturbation_sweep_reports_fraction() {
    let plan = PerturbationPlan {
        epsilons: vec![0.01, 0.5],
        ..PerturbationPlan::default()
    };
    let summary = perturbation_sweep(&plan, &SimOptions::default());
    assert_eq!(summary.rows.len(), 54);
    assert!(summary.rows.iter().all(|r| r.error.is_none()));
    let center = summary
        .rows
        .iter()
        .find(|r| r.epsilon == 0.01 && r.beta == 1.0 && r.gamma == 1.0 && r.delta == 0.0)
        .unwrap();
    assert!(center.multimodal);
    assert!((0.0..=1.0).contains(&summary.multimodal_fraction));
    let again = perturbation_sweep(&plan, &SimOptions::default());
    assert_eq!(summary, again);
}
