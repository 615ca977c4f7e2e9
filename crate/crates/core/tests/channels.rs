use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use roqec::code::{expectation, Mat8, Vec8};
use roqec::{build_code, build_faulty_recovery, build_ideal_recovery, build_measure_only, build_opt_recovery};
use roqec::{logical_two_design, ChannelLabel, KrausChannel, LogicalState, PhaseFlipCode};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_norm<'a>(it: impl Iterator<Item = &'a Complex64>) -> f64 {
    it.map(|z| z.norm()).fold(0.0, f64::max)
}

fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

#[test]
fn every_channel_on_the_reference_grid_is_cptp() {
    let levels = [0.0, 0.22, 0.5, 1.0];
    let mut channels = vec![build_ideal_recovery(), build_measure_only()];
    for &m in &levels {
        channels.push(build_faulty_recovery(m).unwrap());
        for &f in &levels {
            channels.push(build_opt_recovery(f, m).unwrap());
        }
    }
    for ch in &channels {
        assert!(ch.trace_preservation_error() <= 1e-12, "{:?}", ch.label);
        assert!(ch.choi_min_eigenvalue() >= -1e-10, "{:?}", ch.label);
        assert!(ch.max_imaginary_part() <= 1e-15);
        ch.validate().unwrap();
    }
}

#[test]
fn opt_superoperator_is_affine_in_each_probability() {
    let t = |f: f64, m: f64| build_opt_recovery(f, m).unwrap().superoperator().0;
    for &m in &[0.0, 0.3, 0.9] {
        let (a, b, mid) = (t(0.1, m), t(0.7, m), t(0.4, m));
        let interp = (&a + &b) * c(0.5);
        assert!(max_norm((mid - interp).iter()) <= 1e-12);
    }
    for &f in &[0.0, 0.6, 1.0] {
        let (a, b, third) = (t(f, 0.0), t(f, 0.9), t(f, 0.3));
        let interp = &a * c(2.0 / 3.0) + &b * c(1.0 / 3.0);
        assert!(max_norm((third - interp).iter()) <= 1e-12);
    }
}

fn random_density(rng: &mut ChaCha8Rng) -> Mat8 {
    let g = Mat8::from_fn(|_, _| gaussian_complex(rng));
    let rho = g * g.adjoint();
    rho / rho.trace()
}

proptest! {
    #[test]
    fn opt_output_is_supported_on_syndrome_blocks(f in 0.0f64..=1.0, m in 0.0f64..=1.0, seed in any::<u64>()) {
        let code = build_code();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng);
        let out = build_opt_recovery(f, m).unwrap().apply(&rho);
        let total: f64 = (0..4).map(|j| (code.projector(j) * out * code.projector(j)).trace().re).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(max_norm((code.dephase_syndromes(&out) - out).iter()) <= 1e-12);
    }

    #[test]
    fn random_parameters_stay_cptp(f in 0.0f64..=1.0, m in 0.0f64..=1.0) {
        let ch = build_opt_recovery(f, m).unwrap();
        prop_assert!(ch.trace_preservation_error() <= 1e-12);
        prop_assert!(ch.choi_min_eigenvalue() >= -1e-10);
    }
}

#[test]
fn qubit_relabeling_leaves_channels_unchanged() {
    for order in [[1, 0, 2], [2, 1, 0], [1, 2, 0], [2, 0, 1]] {
        let code = PhaseFlipCode::with_qubit_order(order).unwrap();
        let permuted = code.opt_recovery(0.37, 0.21).unwrap().superoperator();
        let standard = build_opt_recovery(0.37, 0.21).unwrap().superoperator();
        assert!(permuted.max_abs_diff(&standard) <= 1e-12, "{order:?}");
    }
}

/// Kraus operators of a random channel from a random isometry `C^8 → C^8 ⊗ C^r`.
fn random_channel(rng: &mut ChaCha8Rng, rank: usize) -> KrausChannel {
    let g = DMatrix::from_fn(8 * rank, 8, |_, _| gaussian_complex(rng));
    let q = g.qr().q();
    let ops = (0..rank)
        .map(|k| Mat8::from_fn(|a, b| q[(8 * k + a, b)]))
        .collect();
    KrausChannel::new(ChannelLabel::Faulty, ops)
}

fn fidelity(ch: &KrausChannel, psi: &Vec8) -> f64 {
    expectation(&ch.apply(&(psi * psi.adjoint())), psi)
}

#[test]
fn design_average_equals_haar_average() {
    let code = build_code();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ch = random_channel(&mut rng, 3);
    assert!(ch.trace_preservation_error() <= 1e-12);

    let design = logical_two_design();
    let design_avg = design.iter().map(|s| fidelity(&ch, &s.vector(&code))).sum::<f64>() / 6.0;

    let samples = 10_000;
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let (a, b) = (gaussian_complex(&mut rng), gaussian_complex(&mut rng));
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let s = LogicalState::new(a / norm, b / norm).unwrap();
            fidelity(&ch, &s.vector(&code))
        })
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    let se = (var / samples as f64).sqrt();
    assert!((mean - design_avg).abs() <= 3.0 * se, "design {design_avg}, Haar {mean} ± {se}");
}
