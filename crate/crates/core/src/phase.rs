//! Sparse trigonometric polynomials in the three noise frequencies.
//!
//! A term with key `k` and coefficient `c` stands for `c·exp(−iτ Σ_j ω_j k_j)`.

use std::collections::HashMap;
use std::ops::{Add, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::code::{z_eigenvalue, QUBITS};

/// Per-qubit accumulated phase indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct PhaseVector(pub [i32; 3]);

impl PhaseVector {
    pub const ZERO: PhaseVector = PhaseVector([0, 0, 0]);

    /// Phase index picked up by density-matrix entry `(a, b)` over one
    /// dephasing segment: `(z_j(a) − z_j(b)) / 2` per qubit.
    pub fn segment_shift(a: usize, b: usize) -> Self {
        PhaseVector(std::array::from_fn(|q| {
            (z_eigenvalue(a, q) - z_eigenvalue(b, q)) / 2
        }))
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&k| (k as i64) * (k as i64)).sum()
    }

    pub fn max_abs(&self) -> i32 {
        self.0.iter().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn dot(&self, omega: &[f64; 3]) -> f64 {
        (0..QUBITS).map(|q| self.0[q] as f64 * omega[q]).sum()
    }
}

impl Add for PhaseVector {
    type Output = PhaseVector;
    fn add(self, rhs: Self) -> Self {
        PhaseVector(std::array::from_fn(|q| self.0[q] + rhs.0[q]))
    }
}

impl Neg for PhaseVector {
    type Output = PhaseVector;
    fn neg(self) -> Self {
        PhaseVector(self.0.map(|k| -k))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhasePolynomial {
    terms: HashMap<PhaseVector, Complex64>,
}

impl PhasePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term(PhaseVector::ZERO, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (PhaseVector, Complex64)>) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PhaseVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, k: PhaseVector) -> Complex64 {
        self.terms.get(&k).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, k: PhaseVector, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        *self.terms.entry(k).or_default() += c;
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &PhasePolynomial, scale: Complex64) {
        if scale == Complex64::new(0.0, 0.0) {
            return;
        }
        for (k, c) in &other.terms {
            *self.terms.entry(*k).or_default() += c * scale;
        }
    }

    /// Every key shifted by `s`; coefficients unchanged.
    pub fn shifted(&self, s: PhaseVector) -> Self {
        if s == PhaseVector::ZERO {
            return self.clone();
        }
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k + s, *c)).collect(),
        }
    }

    /// Drops coefficients with modulus below `threshold`.
    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.norm() >= threshold);
    }

    /// Complex conjugate as a function of ω: conjugated coefficients on
    /// negated keys.
    pub fn conjugate(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, c)| (-*k, c.conj())).collect(),
        }
    }

    /// Value at fixed frequencies `omega` and segment duration `tau`.
    pub fn evaluate(&self, omega: &[f64; 3], tau: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| c * Complex64::from_polar(1.0, -tau * k.dot(omega)))
            .sum()
    }

    /// Replaces every phase monomial by `weight(k)` and sums.
    pub fn average_with(&self, weight: impl Fn(PhaseVector) -> f64) -> Complex64 {
        self.terms.iter().map(|(k, c)| c * weight(*k)).sum()
    }

    pub fn max_index(&self) -> i32 {
        self.terms.keys().map(PhaseVector::max_abs).max().unwrap_or(0)
    }

    /// Largest coefficient distance between two polynomials.
    pub fn max_abs_diff(&self, other: &PhasePolynomial) -> f64 {
        let keys = self.terms.keys().chain(other.terms.keys());
        keys.map(|k| (self.coefficient(*k) - other.coefficient(*k)).norm())
            .fold(0.0, f64::max)
    }
}
