//! Recovery channels in Kraus form.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::code::{build_code, max_abs, Mat8, PhaseFlipCode, DIM, EIGEN_TOL, TRACE_TOL};
use crate::error::{check_unit_interval, Error, Result};

/// Dimension of the vectorized operator space.
pub const SUPER_DIM: usize = DIM * DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelLabel {
    Ideal,
    Faulty,
    MeasureOnly,
    Opt,
}

/// A CPTP map `ρ ↦ Σ_k K_k ρ K_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub label: ChannelLabel,
    kraus_ops: Vec<Mat8>,
}

/// Row-major vectorization: `vec(ρ)[a·8 + b] = ρ[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator(pub DMatrix<Complex64>);

impl KrausChannel {
    pub fn new(label: ChannelLabel, kraus_ops: Vec<Mat8>) -> Self {
        Self { label, kraus_ops }
    }

    pub fn kraus_ops(&self) -> &[Mat8] {
        &self.kraus_ops
    }

    pub fn apply(&self, rho: &Mat8) -> Mat8 {
        self.kraus_ops
            .iter()
            .map(|k| k * rho * k.adjoint())
            .sum()
    }

    pub fn superoperator(&self) -> Superoperator {
        let mut t = DMatrix::<Complex64>::zeros(SUPER_DIM, SUPER_DIM);
        for k in &self.kraus_ops {
            for a in 0..DIM {
                for b in 0..DIM {
                    for c in 0..DIM {
                        let kac = k[(a, c)];
                        if kac == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for d in 0..DIM {
                            t[(a * DIM + b, c * DIM + d)] += kac * k[(b, d)].conj();
                        }
                    }
                }
            }
        }
        Superoperator(t)
    }

    /// `J = Σ_{c,d} |c⟩⟨d| ⊗ Φ(|c⟩⟨d|)`.
    pub fn choi(&self) -> DMatrix<Complex64> {
        let t = self.superoperator().0;
        DMatrix::from_fn(SUPER_DIM, SUPER_DIM, |row, col| {
            let (c, a) = (row / DIM, row % DIM);
            let (d, b) = (col / DIM, col % DIM);
            t[(a * DIM + b, c * DIM + d)]
        })
    }

    /// `max |Σ K†K − I|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let sum: Mat8 = self.kraus_ops.iter().map(|k| k.adjoint() * k).sum();
        max_abs(&(sum - Mat8::identity()))
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        let j = self.choi();
        let herm = (&j + j.adjoint()).scale(0.5);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_imaginary_part(&self) -> f64 {
        self.kraus_ops
            .iter()
            .flat_map(|k| k.iter())
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let tp = self.trace_preservation_error();
        if tp > TRACE_TOL {
            return Err(Error::Channel(format!(
                "{:?}: trace preservation error {tp:e}",
                self.label
            )));
        }
        let min_eig = self.choi_min_eigenvalue();
        if min_eig < -EIGEN_TOL {
            return Err(Error::Channel(format!(
                "{:?}: Choi eigenvalue {min_eig:e}",
                self.label
            )));
        }
        Ok(())
    }
}

impl Superoperator {
    pub fn apply(&self, rho: &Mat8) -> Mat8 {
        let v = nalgebra::DVector::from_fn(SUPER_DIM, |i, _| rho[(i / DIM, i % DIM)]);
        let out = &self.0 * v;
        Mat8::from_fn(|a, b| out[a * DIM + b])
    }

    /// Real part, provided every imaginary part is below `tol`.
    pub fn real(&self, tol: f64) -> Result<DMatrix<f64>> {
        let im = self.0.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if im > tol {
            return Err(Error::Channel(format!(
                "superoperator has imaginary part {im:e}"
            )));
        }
        Ok(self.0.map(|c| c.re))
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

fn scaled(weight: f64, m: Mat8) -> Mat8 {
    m.scale(weight.sqrt())
}

impl PhaseFlipCode {
    /// `Σ_j U_j† P_j ρ P_j U_j`.
    pub fn ideal_recovery(&self) -> KrausChannel {
        let ops = (0..4)
            .map(|j| self.corrections[j].adjoint() * self.projector(j))
            .collect();
        KrausChannel::new(ChannelLabel::Ideal, ops)
    }

    /// Ideal recovery with probability `1 − p_meas`; otherwise the syndrome is
    /// reported as one of the three wrong outcomes, uniformly.
    pub fn faulty_recovery(&self, p_meas: f64) -> Result<KrausChannel> {
        check_unit_interval("p_meas", p_meas)?;
        Ok(KrausChannel::new(
            ChannelLabel::Faulty,
            self.faulty_ops(p_meas, 1.0),
        ))
    }

    /// `Σ_j P_j ρ P_j`: syndrome measurement without feedback.
    pub fn measure_only(&self) -> KrausChannel {
        KrausChannel::new(
            ChannelLabel::MeasureOnly,
            self.projectors.iter().map(|p| p.matrix).collect(),
        )
    }

    /// Faulty recovery with probability `p_fb`, bare syndrome measurement
    /// otherwise.
    pub fn opt_recovery(&self, p_fb: f64, p_meas: f64) -> Result<KrausChannel> {
        check_unit_interval("p_fb", p_fb)?;
        check_unit_interval("p_meas", p_meas)?;
        let mut ops = self.faulty_ops(p_meas, p_fb);
        if p_fb < 1.0 {
            ops.extend(self.projectors.iter().map(|p| scaled(1.0 - p_fb, p.matrix)));
        }
        Ok(KrausChannel::new(ChannelLabel::Opt, ops))
    }

    fn faulty_ops(&self, p_meas: f64, weight: f64) -> Vec<Mat8> {
        let mut ops = Vec::with_capacity(16);
        if weight == 0.0 {
            return ops;
        }
        for j in 0..4 {
            let w = weight * (1.0 - p_meas);
            if w > 0.0 {
                ops.push(scaled(w, self.corrections[j].adjoint() * self.projector(j)));
            }
        }
        let w = weight * p_meas / 3.0;
        if w > 0.0 {
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        ops.push(scaled(w, self.corrections[j].adjoint() * self.projector(i)));
                    }
                }
            }
        }
        ops
    }
}

pub fn build_ideal_recovery() -> KrausChannel {
    build_code().ideal_recovery()
}

pub fn build_faulty_recovery(p_meas: f64) -> Result<KrausChannel> {
    build_code().faulty_recovery(p_meas)
}

pub fn build_measure_only() -> KrausChannel {
    build_code().measure_only()
}

pub fn build_opt_recovery(p_fb: f64, p_meas: f64) -> Result<KrausChannel> {
    build_code().opt_recovery(p_fb, p_meas)
}
