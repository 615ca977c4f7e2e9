//! Quasi-static Gaussian dephasing.
//!
//! Each qubit sees a frequency offset `ω_j` that is constant over one run and
//! normally distributed across runs with variance `2/T2*²`. Times are measured
//! in units of `T2*` unless a `NoiseParams` with another `t2_star` is used.

use nalgebra::SVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::code::{z_eigenvalue, Mat8, DIM, QUBITS};
use crate::error::{Error, Result};
use crate::phase::PhaseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    t2_star: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { t2_star: 1.0 }
    }
}

impl NoiseParams {
    pub fn new(t2_star: f64) -> Result<Self> {
        if !(t2_star > 0.0 && t2_star.is_finite()) {
            return Err(Error::Invalid {
                name: "t2_star",
                reason: format!("must be positive and finite, got {t2_star}"),
            });
        }
        Ok(Self { t2_star })
    }

    pub fn t2_star(&self) -> f64 {
        self.t2_star
    }

    /// Variance of each `ω_j`.
    pub fn sigma_sq(&self) -> f64 {
        2.0 / (self.t2_star * self.t2_star)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_sq().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSample {
    pub omega: [f64; 3],
}

impl NoiseSample {
    pub fn new(omega: [f64; 3]) -> Self {
        Self { omega }
    }

    pub fn negated(&self) -> Self {
        Self {
            omega: self.omega.map(|w| -w),
        }
    }
}

pub fn sample_noise(params: &NoiseParams, seed: u64) -> NoiseSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_noise_with(params, &mut rng)
}

pub fn sample_noise_with<R: Rng + ?Sized>(params: &NoiseParams, rng: &mut R) -> NoiseSample {
    let normal = Normal::new(0.0, params.sigma()).expect("sigma is finite and positive");
    NoiseSample {
        omega: std::array::from_fn(|_| normal.sample(rng)),
    }
}

/// `exp(−iτH)` for `H = ½ Σ_j ω_j Z_j`; diagonal in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentUnitary {
    pub diagonal: SVector<Complex64, DIM>,
    pub tau: f64,
}

pub fn segment_unitary(noise: &NoiseSample, tau: f64) -> SegmentUnitary {
    let diagonal = SVector::from_fn(|a, _| {
        let energy: f64 = (0..QUBITS)
            .map(|q| noise.omega[q] * z_eigenvalue(a, q) as f64)
            .sum();
        Complex64::from_polar(1.0, -0.5 * tau * energy)
    });
    SegmentUnitary { diagonal, tau }
}

impl SegmentUnitary {
    pub fn matrix(&self) -> Mat8 {
        Mat8::from_diagonal(&self.diagonal)
    }

    /// `V ρ V†`.
    pub fn conjugate(&self, rho: &Mat8) -> Mat8 {
        Mat8::from_fn(|a, b| self.diagonal[a] * rho[(a, b)] * self.diagonal[b].conj())
    }
}

/// `⟨exp(−iτ Σ_j ω_j k_j)⟩ = Π_j exp(−(k_j τ / T2*)²)`.
pub fn gaussian_damping(k: PhaseVector, tau: f64, params: &NoiseParams) -> f64 {
    let r = tau / params.t2_star;
    (-(k.norm_sq() as f64) * r * r).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_noise_is_identity() {
        let v = segment_unitary(&NoiseSample::new([0.0; 3]), 1.7);
        assert_eq!(v.matrix(), Mat8::identity());
    }

    #[test]
    fn conjugation_keeps_populations() {
        let v = segment_unitary(&NoiseSample::new([0.3, -1.2, 2.0]), 0.9);
        let rho = Mat8::from_fn(|a, b| Complex64::new((a + b) as f64, a as f64 - b as f64));
        let out = v.conjugate(&rho);
        for a in 0..DIM {
            assert!((out[(a, a)] - rho[(a, a)]).norm() < 1e-14);
            assert_abs_diff_eq!(v.diagonal[a].norm(), 1.0, epsilon = 1e-15);
        }
        let direct = v.matrix() * rho * v.matrix().adjoint();
        assert!((direct - out).iter().all(|c| c.norm() < 1e-13));
    }

    #[test]
    fn single_qubit_coherence_phase() {
        // H = ½ωZ on qubit 1 only; |0⟩⟨1| picks up exp(−iωτ).
        let (w, tau) = (0.83, 1.3);
        let v = segment_unitary(&NoiseSample::new([w, 0.0, 0.0]), tau);
        let mut rho = Mat8::zeros();
        rho[(0, 4)] = Complex64::new(1.0, 0.0);
        let out = v.conjugate(&rho);
        assert!((out[(0, 4)] - Complex64::from_polar(1.0, -w * tau)).norm() < 1e-15);
    }

    #[test]
    fn damping_values() {
        let p = NoiseParams::default();
        assert_eq!(gaussian_damping(PhaseVector::ZERO, 2.0, &p), 1.0);
        assert_abs_diff_eq!(
            gaussian_damping(PhaseVector([1, 0, 0]), 2.0, &p),
            (-4.0f64).exp(),
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            gaussian_damping(PhaseVector([1, 1, 1]), 0.7, &p),
            (-3.0 * 0.49f64).exp(),
            epsilon = 1e-16
        );
        let p2 = NoiseParams::new(2.0).unwrap();
        assert_abs_diff_eq!(
            gaussian_damping(PhaseVector([1, 0, 0]), 2.0, &p2),
            (-1.0f64).exp(),
            epsilon = 1e-16
        );
        assert_eq!(p2.sigma_sq() * 4.0, 2.0);
        assert!(NoiseParams::new(0.0).is_err());
        assert!(NoiseParams::new(f64::NAN).is_err());
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let p = NoiseParams::default();
        assert_eq!(sample_noise(&p, 42), sample_noise(&p, 42));
        assert_ne!(sample_noise(&p, 42), sample_noise(&p, 43));
    }
}
