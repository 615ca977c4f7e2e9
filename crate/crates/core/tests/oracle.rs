use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roqec::oracle::{single_qubit_monte_carlo, tensor_quadrature, BlockPropagator, DEFAULT_NODES, QUADRATURE_TOL};
use roqec::{
    average_fidelity, fidelity_fixed_noise, logical_two_design, monte_carlo_fidelity, quadrature_fidelity,
    single_qubit_fidelity, ExperimentParams, MonteCarloSpec, NoiseParams, NoiseSample, QuadratureSpec,
};

fn quad() -> QuadratureSpec {
    QuadratureSpec::new(DEFAULT_NODES).unwrap()
}

#[test]
fn noiseless_fixed_noise_cases() {
    let zero = NoiseSample::new([0.0; 3]);
    for s in &logical_two_design() {
        for n in [1, 4] {
            for f in [0.0, 0.3, 1.0] {
                let p = ExperimentParams::new(n, f, 0.0, 1.5).unwrap();
                assert!((fidelity_fixed_noise(&p, &zero, s).unwrap() - 1.0).abs() <= 1e-12);
            }
        }
        for m in [0.1, 0.6] {
            let p = ExperimentParams::new(1, 1.0, m, 2.0).unwrap();
            assert!((fidelity_fixed_noise(&p, &zero, s).unwrap() - (1.0 - m)).abs() <= 1e-12);
        }
    }
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (i, n) in [1, 2, 4].into_iter().enumerate() {
        let p = ExperimentParams::new(n, rng.random(), rng.random(), rng.random_range(0.2..3.0)).unwrap();
        let q = quadrature_fidelity(&p, &quad()).unwrap().value;
        let mc = monte_carlo_fidelity(&p, &MonteCarloSpec { samples: 100_000, seed: i as u64 }).unwrap();
        assert!((mc.mean - q).abs() <= 4.0 * mc.std_error, "{p:?}: MC {mc:?}, quadrature {q}");
    }
}

#[test]
fn monte_carlo_error_scales_as_inverse_root_samples() {
    let p = ExperimentParams::new(1, 0.7, 0.2, 1.5).unwrap();
    let small = monte_carlo_fidelity(&p, &MonteCarloSpec { samples: 10_000, seed: 1 }).unwrap();
    let large = monte_carlo_fidelity(&p, &MonteCarloSpec { samples: 1_000_000, seed: 2 }).unwrap();
    let ratio = small.std_error / large.std_error;
    assert!((ratio / 10.0 - 1.0).abs() <= 0.2, "ratio {ratio}");
}

#[test]
fn monte_carlo_is_reproducible_per_seed() {
    let p = ExperimentParams::new(2, 0.5, 0.1, 1.0).unwrap();
    let spec = MonteCarloSpec { samples: 2_000, seed: 42 };
    assert_eq!(monte_carlo_fidelity(&p, &spec).unwrap(), monte_carlo_fidelity(&p, &spec).unwrap());
    let other = MonteCarloSpec { seed: 43, ..spec };
    assert_ne!(monte_carlo_fidelity(&p, &spec).unwrap(), monte_carlo_fidelity(&p, &other).unwrap());
}

#[test]
fn doubling_the_rule_changes_little_at_convergence() {
    let p = ExperimentParams::new(3, 0.4, 0.3, 2.5).unwrap();
    let r = quadrature_fidelity(&p, &quad()).unwrap();
    assert!(r.converged);
    assert!(r.achieved_tol < QUADRATURE_TOL);
    let prop = BlockPropagator::new(&p).unwrap();
    let noise = NoiseParams::default();
    let half = QuadratureSpec::new(r.nodes_per_dim / 2).unwrap();
    let coarse = tensor_quadrature(&prop, &half, &noise, true);
    assert!((coarse - r.value).abs() < QUADRATURE_TOL);
    let full_grid = tensor_quadrature(&prop, &half, &noise, false);
    assert!((full_grid - coarse).abs() < 1e-13);
    assert!((r.value - average_fidelity(&p).unwrap()).abs() < 1e-9);
}

#[test]
fn zeno_trend_without_feedback() {
    let values: Vec<f64> = [1, 2, 5, 10, 20]
        .iter()
        .map(|&n| quadrature_fidelity(&ExperimentParams::new(n, 0.0, 0.35, 1.0).unwrap(), &quad()).unwrap().value)
        .collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
}

#[test]
fn single_qubit_curve_matches_monte_carlo() {
    assert_eq!(single_qubit_fidelity(0.0), 1.0);
    assert!((single_qubit_fidelity(2.0) - 0.672_771_879_6).abs() < 1e-10);
    for (i, x) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let mc = single_qubit_monte_carlo(x, &MonteCarloSpec { samples: 100_000, seed: 100 + i as u64 });
        let exact = single_qubit_fidelity(x);
        assert!((mc.mean - exact).abs() <= 4.0 * mc.std_error, "x = {x}: {mc:?} vs {exact}");
    }
}
