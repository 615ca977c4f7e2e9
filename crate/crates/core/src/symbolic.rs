//! Density matrices whose entries are phase polynomials.
//!
//! This is the direct representation: an 8×8 array of sparse polynomials
//! propagated through dephasing segments and recovery superoperators. The
//! production engine in [`crate::exact`] uses a reduced lattice form and is
//! checked against this one.

use num_complex::Complex64;

use crate::channel::{KrausChannel, Superoperator, SUPER_DIM};
use crate::code::{Mat8, Vec8, DIM};
use crate::phase::{PhasePolynomial, PhaseVector};

/// Coefficients below this modulus are dropped after each channel application.
pub const PRUNE_THRESHOLD: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicDensityMatrix {
    entries: Vec<PhasePolynomial>,
}

impl SymbolicDensityMatrix {
    /// Constant polynomials taken from a numeric matrix.
    pub fn from_matrix(rho: &Mat8) -> Self {
        let entries = (0..SUPER_DIM)
            .map(|i| PhasePolynomial::constant(rho[(i / DIM, i % DIM)]))
            .collect();
        Self { entries }
    }

    pub fn entry(&self, a: usize, b: usize) -> &PhasePolynomial {
        &self.entries[a * DIM + b]
    }

    /// One dephasing segment: entry `(a, b)` has every key shifted by
    /// `(z(a) − z(b)) / 2`.
    pub fn dephase(&self) -> Self {
        let entries = (0..SUPER_DIM)
            .map(|i| {
                let shift = PhaseVector::segment_shift(i / DIM, i % DIM);
                self.entries[i].shifted(shift)
            })
            .collect();
        Self { entries }
    }

    pub fn apply_superoperator(&self, t: &Superoperator) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let entries = (0..SUPER_DIM)
            .map(|row| {
                let mut out = PhasePolynomial::zero();
                for col in 0..SUPER_DIM {
                    let w = t.0[(row, col)];
                    if w != zero {
                        out.add_scaled(&self.entries[col], w);
                    }
                }
                out.prune(PRUNE_THRESHOLD);
                out
            })
            .collect();
        Self { entries }
    }

    pub fn trace(&self) -> PhasePolynomial {
        let mut tr = PhasePolynomial::zero();
        for a in 0..DIM {
            tr.add_scaled(self.entry(a, a), Complex64::new(1.0, 0.0));
        }
        tr.prune(PRUNE_THRESHOLD);
        tr
    }

    /// `⟨ψ|ρ|ψ⟩` as a phase polynomial.
    pub fn expectation(&self, psi: &Vec8) -> PhasePolynomial {
        let mut out = PhasePolynomial::zero();
        for a in 0..DIM {
            for b in 0..DIM {
                out.add_scaled(self.entry(a, b), psi[a].conj() * psi[b]);
            }
        }
        out.prune(PRUNE_THRESHOLD);
        out
    }

    /// Numeric matrix for one noise realization.
    pub fn evaluate(&self, omega: &[f64; 3], tau: f64) -> Mat8 {
        Mat8::from_fn(|a, b| self.entry(a, b).evaluate(omega, tau))
    }

    /// Largest deviation from `entry(a,b) = conj(entry(b,a))`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..DIM {
            for b in a..DIM {
                worst = worst.max(self.entry(a, b).max_abs_diff(&self.entry(b, a).conjugate()));
            }
        }
        worst
    }

    pub fn max_terms(&self) -> usize {
        self.entries.iter().map(PhasePolynomial::len).max().unwrap_or(0)
    }
}

pub fn symbolic_dephase(sdm: &SymbolicDensityMatrix) -> SymbolicDensityMatrix {
    sdm.dephase()
}

pub fn symbolic_apply_channel(
    sdm: &SymbolicDensityMatrix,
    channel: &KrausChannel,
) -> SymbolicDensityMatrix {
    sdm.apply_superoperator(&channel.superoperator())
}

/// `n` rounds of (dephase, channel) starting from `ρ`.
pub fn propagate(rho: &Mat8, channel: &KrausChannel, rounds: usize) -> SymbolicDensityMatrix {
    let t = channel.superoperator();
    let mut sdm = SymbolicDensityMatrix::from_matrix(rho);
    for _ in 0..rounds {
        sdm = sdm.dephase().apply_superoperator(&t);
    }
    sdm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_ideal_recovery, build_opt_recovery};
    use crate::code::{build_code, logical_two_design};

    #[test]
    fn dephase_shifts_by_z_differences() {
        let rho = Mat8::from_fn(|_, _| Complex64::new(0.125, 0.0));
        let sdm = SymbolicDensityMatrix::from_matrix(&rho);
        let once = sdm.dephase();
        for a in 0..DIM {
            assert_eq!(once.entry(a, a), sdm.entry(a, a));
        }
        let corner = once.entry(0, 7);
        assert_eq!(corner.coefficient(PhaseVector([1, 1, 1])), Complex64::new(0.125, 0.0));
        let twice = once.dephase();
        for a in 0..DIM {
            for b in 0..DIM {
                let s = PhaseVector::segment_shift(a, b);
                assert_eq!(twice.entry(a, b), &sdm.entry(a, b).shifted(s + s));
            }
        }
    }

    #[test]
    fn code_states_are_fixed_by_ideal_recovery() {
        let code = build_code();
        let psi = logical_two_design()[4].vector(&code);
        let sdm = SymbolicDensityMatrix::from_matrix(&(psi * psi.adjoint()));
        let out = symbolic_apply_channel(&sdm, &build_ideal_recovery());
        for a in 0..DIM {
            for b in 0..DIM {
                assert!(out.entry(a, b).max_abs_diff(sdm.entry(a, b)) < 1e-14);
            }
        }
    }

    #[test]
    fn trace_stays_constant_one() {
        let code = build_code();
        let psi = logical_two_design()[2].vector(&code);
        let ch = build_opt_recovery(0.37, 0.21).unwrap();
        let sdm = propagate(&(psi * psi.adjoint()), &ch, 3);
        let tr = sdm.trace();
        assert!((tr.coefficient(PhaseVector::ZERO) - 1.0).norm() < 1e-13);
        let off: f64 = tr
            .terms()
            .filter(|(k, _)| **k != PhaseVector::ZERO)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-13);
        assert!(sdm.hermiticity_error() < 1e-14);
        assert!(sdm.max_terms() <= 7usize.pow(3));
    }
}
