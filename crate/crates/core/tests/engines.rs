use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roqec::code::{expectation, Mat8};
use roqec::exact::{average_fidelity_with, logical_response};
use roqec::noise::sample_noise_with;
use roqec::oracle::DEFAULT_NODES;
use roqec::symbolic::propagate;
use roqec::{
    average_fidelity, build_code, fidelity_fixed_noise, fidelity_vs_pfb_polynomial, gaussian_damping,
    logical_two_design, quadrature_fidelity, segment_unitary, ExperimentParams, NoiseParams, NoiseSample,
    PhaseFlipCode, QuadratureSpec,
};

fn closed_form_f1(p_fb: f64, p_meas: f64, x: f64) -> f64 {
    let e = |m: f64| (-m * x * x).exp();
    (1.0 + p_fb * (3.0 - 4.0 * p_meas)) / 6.0
        + 0.5 * e(2.0) * (1.0 - p_fb)
        + 0.25 * e(1.0) * (1.0 + p_fb * (1.0 - 2.0 * p_meas))
        + e(3.0) / 12.0 * (1.0 + p_fb * (2.0 * p_meas - 3.0))
}

fn random_params(rng: &mut ChaCha8Rng, n: usize) -> ExperimentParams {
    ExperimentParams::new(n, rng.random(), rng.random(), rng.random_range(0.0..3.0)).unwrap()
}

#[test]
fn closed_form_single_round() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..30 {
        let p = random_params(&mut rng, 1);
        let f = average_fidelity(&p).unwrap();
        assert!((f - closed_form_f1(p.p_fb, p.p_meas, p.x)).abs() <= 1e-9, "{p:?}");
    }
}

#[test]
fn reference_point_value() {
    let f = average_fidelity(&ExperimentParams::new(10, 0.488, 0.22, 2.0).unwrap()).unwrap();
    assert!((f - 0.674).abs() <= 0.002, "{f}");
}

#[test]
fn lattice_engine_matches_symbolic_density_matrix() {
    let code = build_code();
    let noise = NoiseParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 1..=4 {
        let p = random_params(&mut rng, n);
        let ch = p.channel().unwrap();
        let response = logical_response(&ch, n).unwrap();
        let mut avg = 0.0;
        for s in &logical_two_design() {
            let psi = s.vector(&code);
            let sdm = propagate(&(psi * psi.adjoint()), &ch, n);
            let symbolic = sdm.expectation(&psi);
            let lattice = response.state_polynomial(s);
            assert!(symbolic.max_abs_diff(&lattice) <= 1e-12, "n = {n}");
            avg += symbolic.average_with(|k| gaussian_damping(k, p.tau(), &noise)).re / 6.0;
        }
        assert!((avg - average_fidelity(&p).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn symbolic_state_evaluates_to_direct_simulation() {
    let code = build_code();
    let params = NoiseParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = random_params(&mut rng, 3);
    let ch = p.channel().unwrap();
    let psi = logical_two_design()[4].vector(&code);
    let rho0 = psi * psi.adjoint();
    let sdm = propagate(&rho0, &ch, p.n);
    for _ in 0..20 {
        let noise = sample_noise_with(&params, &mut rng);
        let v = segment_unitary(&noise, p.tau());
        let mut rho = rho0;
        for _ in 0..p.n {
            rho = ch.apply(&v.conjugate(&rho));
        }
        let diff: f64 = (sdm.evaluate(&noise.omega, p.tau()) - rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-12);
    }
}

#[test]
fn fixed_noise_simulation_matches_polynomial_evaluation() {
    let params = NoiseParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [1, 2, 5, 8] {
        let p = random_params(&mut rng, n);
        let response = logical_response(&p.channel().unwrap(), n).unwrap();
        for s in &logical_two_design() {
            let poly = response.state_polynomial(s);
            for _ in 0..5 {
                let noise = sample_noise_with(&params, &mut rng);
                let direct = fidelity_fixed_noise(&p, &noise, s).unwrap();
                let via_poly = poly.evaluate(&noise.omega, p.tau());
                assert!((direct - via_poly.re).abs() <= 1e-12);
                assert!(via_poly.im.abs() <= 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_is_even_in_noise(
        n in 1usize..=6,
        f in 0.0f64..=1.0,
        m in 0.0f64..=1.0,
        x in 0.0f64..3.0,
        w in prop::array::uniform3(-4.0f64..4.0),
        which in 0usize..6,
    ) {
        let p = ExperimentParams::new(n, f, m, x).unwrap();
        let s = &logical_two_design()[which];
        let noise = NoiseSample::new(w);
        let a = fidelity_fixed_noise(&p, &noise, s).unwrap();
        let b = fidelity_fixed_noise(&p, &noise.negated(), s).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn average_fidelity_is_a_probability(n in 1usize..=6, f in 0.0f64..=1.0, m in 0.0f64..=1.0, x in 0.0f64..5.0) {
        let v = average_fidelity(&ExperimentParams::new(n, f, m, x).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn noiseless_faultless_rounds_are_perfect(n in 1usize..=8, f in 0.0f64..=1.0, x in 0.0f64..3.0) {
        let p = ExperimentParams::new(n, f, 0.0, x).unwrap();
        let v = average_fidelity_with(&p, |_, _, _| 1.0).unwrap();
        prop_assert!((v - 1.0).abs() <= 1e-12);
    }
}

/// Literal design-averaged simulation for an arbitrary code labeling,
/// averaged over a small tensor Gauss–Hermite grid.
fn literal_average(code: &PhaseFlipCode, p: &ExperimentParams) -> f64 {
    let ch = code.opt_recovery(p.p_fb, p.p_meas).unwrap();
    let quad = QuadratureSpec::new(6).unwrap();
    let nodes = quad.scaled_nodes(NoiseParams::default().sigma());
    let mut total = 0.0;
    for (i, wi) in nodes.iter().enumerate() {
        for (j, wj) in nodes.iter().enumerate() {
            for (l, wl) in nodes.iter().enumerate() {
                let v = segment_unitary(&NoiseSample::new([*wi, *wj, *wl]), p.tau());
                let mut f = 0.0;
                for s in &logical_two_design() {
                    let psi = s.vector(code);
                    let mut rho: Mat8 = psi * psi.adjoint();
                    for _ in 0..p.n {
                        rho = ch.apply(&v.conjugate(&rho));
                    }
                    f += expectation(&rho, &psi) / 6.0;
                }
                total += quad.weights[i] * quad.weights[j] * quad.weights[l] * f;
            }
        }
    }
    total
}

#[test]
fn qubit_relabeling_leaves_average_fidelity_unchanged() {
    let p = ExperimentParams::new(3, 0.45, 0.2, 1.7).unwrap();
    let reference = literal_average(&build_code(), &p);
    for order in [[1, 0, 2], [2, 0, 1], [0, 2, 1]] {
        let permuted = literal_average(&PhaseFlipCode::with_qubit_order(order).unwrap(), &p);
        assert!((permuted - reference).abs() <= 1e-12, "{order:?}");
    }
}

#[test]
fn symbolic_term_count_stays_bounded() {
    let code = build_code();
    let psi = logical_two_design()[2].vector(&code);
    let ch = roqec::build_opt_recovery(0.6, 0.3).unwrap();
    for n in 1..=4 {
        let sdm = propagate(&(psi * psi.adjoint()), &ch, n);
        assert!(sdm.max_terms() <= (2 * n + 1).pow(3));
        for a in 0..8 {
            for b in 0..8 {
                assert!(sdm.entry(a, b).max_index() <= n as i32);
            }
        }
        let tr = sdm.trace();
        assert_eq!(tr.len(), 1);
        assert!((tr.coefficient(roqec::PhaseVector::ZERO).re - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn pfb_polynomial_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in [1, 3, 7, 10] {
        let (m, x) = (rng.random::<f64>(), rng.random_range(0.0..3.0));
        let poly = fidelity_vs_pfb_polynomial(n, m, x).unwrap();
        assert!(poly.degree() <= n);
        for f in [0.0, 0.5, 1.0] {
            let direct = average_fidelity(&ExperimentParams::new(n, f, m, x).unwrap()).unwrap();
            assert!((poly.eval(f) - direct).abs() <= 1e-9, "n = {n}, pfb = {f}");
        }
    }
    for m in [0.1, 0.4, 0.9] {
        let poly = fidelity_vs_pfb_polynomial(1, m, 0.0).unwrap();
        assert_eq!(poly.degree(), 1);
        assert!((poly.coeffs()[1] + m).abs() <= 1e-12);
        assert!((poly.coeffs()[0] - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn exact_and_quadrature_agree() {
    let quad = QuadratureSpec::new(DEFAULT_NODES).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..6 {
        let p = random_params(&mut rng, 1 + i % 5);
        let q = quadrature_fidelity(&p, &quad).unwrap();
        assert!(q.converged);
        assert!((q.value - average_fidelity(&p).unwrap()).abs() <= 1e-6, "{p:?}");
    }
}

#[test]
fn rejects_out_of_domain_parameters() {
    assert!(ExperimentParams::new(0, 0.5, 0.5, 1.0).is_err());
    assert!(ExperimentParams::new(1, 1.5, 0.5, 1.0).is_err());
    assert!(ExperimentParams::new(1, 0.5, -0.1, 1.0).is_err());
    assert!(ExperimentParams::new(1, 0.5, 0.5, -1.0).is_err());
    assert!(average_fidelity(&ExperimentParams { n: 13, p_fb: 0.5, p_meas: 0.1, x: 1.0 }).is_err());
}
