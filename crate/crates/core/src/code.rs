//! The three-qubit phase-flip code.
//!
//! Basis convention: computational basis index `a` in `0..8`, with qubit 1 as
//! the most significant bit. `Z_j` has eigenvalue `+1` on a basis state whose
//! bit for qubit `j` is clear.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DIM: usize = 8;
pub const QUBITS: usize = 3;

pub type Mat8 = SMatrix<Complex64, DIM, DIM>;
pub type Vec8 = SVector<Complex64, DIM>;

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;
pub(crate) const TRACE_TOL: f64 = 1e-12;
pub(crate) const EIGEN_TOL: f64 = 1e-10;

/// Bit position of qubit `q` (0-based) inside a basis index.
#[inline]
pub fn qubit_bit(q: usize) -> usize {
    1 << (QUBITS - 1 - q)
}

/// Eigenvalue of `Z` on qubit `q` for basis state `a`.
#[inline]
pub fn z_eigenvalue(a: usize, q: usize) -> i32 {
    if a & qubit_bit(q) == 0 {
        1
    } else {
        -1
    }
}

pub fn pauli_z(q: usize) -> Mat8 {
    Mat8::from_fn(|a, b| {
        if a == b {
            Complex64::new(z_eigenvalue(a, q) as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// A logical basis vector of the code.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword(Vec8);

impl Codeword {
    pub fn vector(&self) -> &Vec8 {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeProjector {
    pub index: usize,
    pub matrix: Mat8,
}

/// Codewords, syndrome projectors `P_0..P_3` and correction unitaries
/// `U_0 = I`, `U_j = Z_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFlipCode {
    pub zero: Codeword,
    pub one: Codeword,
    pub projectors: [SyndromeProjector; 4],
    pub corrections: [Mat8; 4],
}

pub fn build_code() -> PhaseFlipCode {
    PhaseFlipCode::new()
}

impl Default for PhaseFlipCode {
    fn default() -> Self {
        Self::new()
    }
}

impl PhaseFlipCode {
    pub fn new() -> Self {
        let amp = 1.0 / (DIM as f64).sqrt();
        // |+++> has uniform amplitudes; |---> picks up (-1)^popcount(a).
        let zero = Vec8::from_fn(|_, _| Complex64::new(amp, 0.0));
        let one = Vec8::from_fn(|a, _| {
            let sign = if (a as u32).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(sign * amp, 0.0)
        });
        let p0 = zero * zero.adjoint() + one * one.adjoint();
        let corrections = [Mat8::identity(), pauli_z(0), pauli_z(1), pauli_z(2)];
        let projectors = std::array::from_fn(|j| SyndromeProjector {
            index: j,
            matrix: corrections[j] * p0 * corrections[j],
        });
        Self {
            zero: Codeword(zero),
            one: Codeword(one),
            projectors,
            corrections,
        }
    }

    /// Relabels the physical qubits: physical qubit `q` is stored at the bit
    /// position normally used by qubit `order[q]`. Syndrome `j >= 1` keeps
    /// pointing at physical qubit `j`.
    pub fn with_qubit_order(order: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &o in &order {
            if o >= 3 || seen[o] {
                return Err(Error::Invalid {
                    name: "order",
                    reason: format!("{order:?} is not a permutation of 0..3"),
                });
            }
            seen[o] = true;
        }
        let std = Self::new();
        let perm = basis_permutation(order);
        let pv = |v: &Vec8| Vec8::from_fn(|a, _| v[perm_inverse(&perm, a)]);
        let pm = |m: &Mat8| Mat8::from_fn(|a, b| m[(perm_inverse(&perm, a), perm_inverse(&perm, b))]);
        Ok(Self {
            zero: Codeword(pv(std.zero.vector())),
            one: Codeword(pv(std.one.vector())),
            projectors: std::array::from_fn(|j| SyndromeProjector {
                index: j,
                matrix: pm(&std.projectors[j].matrix),
            }),
            corrections: std::array::from_fn(|j| pm(&std.corrections[j])),
        })
    }

    pub fn projector(&self, j: usize) -> &Mat8 {
        &self.projectors[j].matrix
    }

    pub fn logical_vector(&self, alpha: Complex64, beta: Complex64) -> Vec8 {
        self.zero.vector() * alpha + self.one.vector() * beta
    }

    /// `Σ_j P_j ρ P_j`.
    pub fn dephase_syndromes(&self, rho: &Mat8) -> Mat8 {
        self.projectors
            .iter()
            .map(|p| p.matrix * rho * p.matrix)
            .sum()
    }
}

/// Maps a standard basis index to its index under `order`.
fn basis_permutation(order: [usize; 3]) -> [usize; DIM] {
    std::array::from_fn(|a| {
        (0..QUBITS).fold(0, |acc, q| {
            if a & qubit_bit(q) != 0 {
                acc | qubit_bit(order[q])
            } else {
                acc
            }
        })
    })
}

fn perm_inverse(perm: &[usize; DIM], target: usize) -> usize {
    perm.iter().position(|&p| p == target).expect("bijection")
}

/// `α|0_L⟩ + β|1_L⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl LogicalState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::State(format!("logical amplitudes have norm² {norm}")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.alpha, self.beta]
    }

    pub fn vector(&self, code: &PhaseFlipCode) -> Vec8 {
        code.logical_vector(self.alpha, self.beta)
    }
}

/// The six eigenstates of logical X, Y and Z. Averages of quadratic state
/// functionals over this set equal the uniform average over all logical states.
pub fn logical_two_design() -> [LogicalState; 6] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = Complex64::new(h, 0.0);
    let i = Complex64::new(0.0, h);
    [
        LogicalState { alpha: one, beta: zero },
        LogicalState { alpha: zero, beta: one },
        LogicalState { alpha: r, beta: r },
        LogicalState { alpha: r, beta: -r },
        LogicalState { alpha: r, beta: i },
        LogicalState { alpha: r, beta: -i },
    ]
}

/// A validated three-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Mat8);

impl DensityMatrix {
    pub fn new(entries: Mat8) -> Result<Self> {
        let herm = max_abs(&(entries - entries.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::State(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::State(format!("trace {tr} != 1")));
        }
        let sym = (entries + entries.adjoint()).scale(0.5);
        let min_eig = sym
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -EIGEN_TOL {
            return Err(Error::State(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self(entries))
    }

    pub fn pure(psi: &Vec8) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self(Mat8::identity().scale(1.0 / DIM as f64))
    }

    pub fn entries(&self) -> &Mat8 {
        &self.0
    }

    pub fn into_inner(self) -> Mat8 {
        self.0
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity(&self, psi: &Vec8) -> f64 {
        expectation(&self.0, psi)
    }
}

pub(crate) fn max_abs(m: &Mat8) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn expectation(rho: &Mat8, psi: &Vec8) -> f64 {
    (psi.adjoint() * rho * psi)[(0, 0)].re
}
