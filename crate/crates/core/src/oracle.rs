//! Numerical evaluation of `F̄_n` by averaging fixed-noise simulations, either
//! on a tensor Gauss–Hermite grid or by Monte Carlo sampling.
//!
//! This shares no code with [`crate::exact`] beyond the channel construction:
//! states live in the computational basis and the noise average is taken
//! numerically.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::SUPER_DIM;
use crate::code::{build_code, expectation, logical_two_design, LogicalState, DIM};
use crate::error::{Error, Result};
use crate::exact::ExperimentParams;
use crate::noise::{sample_noise_with, segment_unitary, NoiseParams, NoiseSample};
use crate::phase::PhaseVector;
use crate::quadrature::QuadratureSpec;

pub const DEFAULT_NODES: usize = 16;
pub const MAX_NODES: usize = 96;
pub const QUADRATURE_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 100_000;

const BLOCK: usize = 16;
const DESIGN: usize = 6;

type BlockMat = SMatrix<Complex64, BLOCK, BLOCK>;
type BlockStates = SMatrix<Complex64, BLOCK, DESIGN>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloSpec {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Nodes per dimension of the final rule.
    pub nodes_per_dim: usize,
    /// Difference between the last two rules.
    pub achieved_tol: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub mean: f64,
    pub std_error: f64,
}

/// One noise realization, simulated step by step on 8×8 matrices.
pub fn fidelity_fixed_noise(
    params: &ExperimentParams,
    noise: &NoiseSample,
    psi: &LogicalState,
) -> Result<f64> {
    params.validate()?;
    let code = build_code();
    let channel = code.opt_recovery(params.p_fb, params.p_meas)?;
    let v = segment_unitary(noise, params.tau());
    let psi = psi.vector(&code);
    let mut rho = psi * psi.adjoint();
    for _ in 0..params.n {
        rho = channel.apply(&v.conjugate(&rho));
    }
    Ok(expectation(&rho, &psi))
}

/// Round map restricted to the span of the syndrome blocks, for fast
/// repeated evaluation at many noise values.
///
/// With `B` an orthonormal basis of block-diagonal operators and `T` the
/// recovery superoperator, one round is `A(ω) = Bᵀ T D(ω) B`; grouping the
/// diagonal `D` by phase index gives `A(ω) = Σ_s exp(−iτ s·ω) M_s`.
#[derive(Debug, Clone)]
pub struct BlockPropagator {
    rounds: usize,
    tau: f64,
    terms: Vec<([f64; 3], SMatrix<f64, BLOCK, BLOCK>)>,
    initial: BlockStates,
    readout: BlockStates,
}

impl BlockPropagator {
    pub fn new(params: &ExperimentParams) -> Result<Self> {
        params.validate()?;
        let code = build_code();
        let t = code
            .opt_recovery(params.p_fb, params.p_meas)?
            .superoperator()
            .real(1e-14)?;

        let logical = [code.zero.vector(), code.one.vector()];
        let mut basis = SMatrix::<f64, SUPER_DIM, BLOCK>::zeros();
        for j in 0..4 {
            let u = &code.corrections[j];
            for a in 0..2 {
                for b in 0..2 {
                    let (ea, eb) = (u * logical[a], u * logical[b]);
                    let col = 4 * j + 2 * a + b;
                    for r in 0..DIM {
                        for c in 0..DIM {
                            basis[(r * DIM + c, col)] = (ea[r] * eb[c].conj()).re;
                        }
                    }
                }
            }
        }
        let gt = basis.transpose() * SMatrix::<f64, SUPER_DIM, SUPER_DIM>::from_fn(|r, c| t[(r, c)]);

        let mut terms: Vec<([f64; 3], SMatrix<f64, BLOCK, BLOCK>)> = Vec::new();
        for idx in 0..SUPER_DIM {
            let s = PhaseVector::segment_shift(idx / DIM, idx % DIM);
            let contrib = gt.column(idx) * basis.row(idx);
            let key = s.0.map(|k| k as f64);
            match terms.iter_mut().find(|(k, _)| *k == key) {
                Some((_, m)) => *m += contrib,
                None => terms.push((key, contrib)),
            }
        }
        terms.retain(|(_, m)| m.iter().any(|v| v.abs() > 1e-15));

        let design = logical_two_design();
        let mut initial = BlockStates::zeros();
        let mut readout = BlockStates::zeros();
        for (i, s) in design.iter().enumerate() {
            let psi = s.vector(&code);
            let rho = psi * psi.adjoint();
            for nu in 0..BLOCK {
                let mut coord = Complex64::new(0.0, 0.0);
                let mut read = Complex64::new(0.0, 0.0);
                for r in 0..DIM {
                    for c in 0..DIM {
                        let b = basis[(r * DIM + c, nu)];
                        coord += b * rho[(r, c)];
                        read += psi[r].conj() * b * psi[c];
                    }
                }
                initial[(nu, i)] = coord;
                readout[(nu, i)] = read;
            }
        }
        Ok(Self {
            rounds: params.n,
            tau: params.tau(),
            terms,
            initial,
            readout,
        })
    }

    fn round_matrix(&self, omega: &[f64; 3]) -> BlockMat {
        let mut a = BlockMat::zeros();
        for (s, m) in &self.terms {
            let phase = -self.tau * (s[0] * omega[0] + s[1] * omega[1] + s[2] * omega[2]);
            let z = Complex64::from_polar(1.0, phase);
            a.zip_apply(m, |acc, v| *acc += z * v);
        }
        a
    }

    /// Fidelity of each design state for one noise realization.
    pub fn design_fidelities(&self, noise: &NoiseSample) -> [f64; DESIGN] {
        let a = self.round_matrix(&noise.omega);
        let mut states = self.initial;
        for _ in 0..self.rounds {
            states = a * states;
        }
        std::array::from_fn(|i| {
            states
                .column(i)
                .iter()
                .zip(self.readout.column(i).iter())
                .map(|(v, r)| v * r)
                .sum::<Complex64>()
                .re
        })
    }

    pub fn average_fidelity(&self, noise: &NoiseSample) -> f64 {
        self.design_fidelities(noise).iter().sum::<f64>() / DESIGN as f64
    }
}

/// One tensor-grid evaluation. With `symmetric`, only sorted node triples are
/// visited and weighted by their number of distinct permutations; the
/// integrand is invariant under relabeling the qubits.
pub fn tensor_quadrature(
    prop: &BlockPropagator,
    quad: &QuadratureSpec,
    noise: &NoiseParams,
    symmetric: bool,
) -> f64 {
    let k = quad.nodes_per_dim;
    let w = quad.scaled_nodes(noise.sigma());
    let p = &quad.weights;
    (0..k)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            let j0 = if symmetric { i } else { 0 };
            for j in j0..k {
                let l0 = if symmetric { j } else { 0 };
                for l in l0..k {
                    let mult = if !symmetric {
                        1.0
                    } else if i == j && j == l {
                        1.0
                    } else if i == j || j == l {
                        3.0
                    } else {
                        6.0
                    };
                    let f = prop.average_fidelity(&NoiseSample::new([w[i], w[j], w[l]]));
                    acc += mult * p[i] * p[j] * p[l] * f;
                }
            }
            acc
        })
        .sum()
}

/// Tensor Gauss–Hermite average, doubling the rule from `quad` until two
/// successive values agree to [`QUADRATURE_TOL`] or [`MAX_NODES`] is reached.
pub fn quadrature_fidelity(params: &ExperimentParams, quad: &QuadratureSpec) -> Result<QuadratureResult> {
    if quad.nodes_per_dim < 2 {
        return Err(Error::Invalid {
            name: "nodes_per_dim",
            reason: "need at least 2 nodes".into(),
        });
    }
    let prop = BlockPropagator::new(params)?;
    let noise = NoiseParams::default();
    let mut k = quad.nodes_per_dim.min(MAX_NODES);
    let mut prev = tensor_quadrature(&prop, quad, &noise, true);
    loop {
        if k >= MAX_NODES {
            return Ok(QuadratureResult {
                value: prev,
                nodes_per_dim: k,
                achieved_tol: f64::INFINITY,
                converged: false,
            });
        }
        let next_k = (2 * k).min(MAX_NODES);
        let next = tensor_quadrature(&prop, &QuadratureSpec::new(next_k)?, &noise, true);
        let diff = (next - prev).abs();
        if diff < QUADRATURE_TOL {
            return Ok(QuadratureResult {
                value: next,
                nodes_per_dim: next_k,
                achieved_tol: diff,
                converged: true,
            });
        }
        if next_k == MAX_NODES {
            return Ok(QuadratureResult {
                value: next,
                nodes_per_dim: next_k,
                achieved_tol: diff,
                converged: false,
            });
        }
        k = next_k;
        prev = next;
    }
}

/// Sample `i` draws its noise from ChaCha stream `i` of `seed`, so results do
/// not depend on scheduling.
pub fn monte_carlo_fidelity(params: &ExperimentParams, mc: &MonteCarloSpec) -> Result<MonteCarloResult> {
    if mc.samples == 0 {
        return Err(Error::Invalid {
            name: "samples",
            reason: "need at least one sample".into(),
        });
    }
    let prop = BlockPropagator::new(params)?;
    let noise = NoiseParams::default();
    let values: Vec<f64> = (0..mc.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(mc.seed, i);
            prop.average_fidelity(&sample_noise_with(&noise, &mut rng))
        })
        .collect();
    Ok(mean_and_error(&values))
}

fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub(crate) fn mean_and_error(values: &[f64]) -> MonteCarloResult {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return MonteCarloResult { mean, std_error: f64::INFINITY };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    MonteCarloResult {
        mean,
        std_error: (var / n).sqrt(),
    }
}

/// Uniform average over the Bloch sphere of the fidelity of one unprotected
/// qubit after time `x·T2*`.
pub fn single_qubit_fidelity(x: f64) -> f64 {
    (2.0 + (-x * x).exp()) / 3.0
}

/// Monte Carlo estimate of [`single_qubit_fidelity`] with Haar-random input
/// states and sampled noise.
pub fn single_qubit_monte_carlo(x: f64, mc: &MonteCarloSpec) -> MonteCarloResult {
    let noise = NoiseParams::default();
    let values: Vec<f64> = (0..mc.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(mc.seed, i);
            let omega = sample_noise_with(&noise, &mut rng).omega[0];
            let cos_theta: f64 = rng.random_range(-1.0..=1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let half = ((1.0 + cos_theta) / 2.0).sqrt();
            let psi = SVector::<Complex64, 2>::new(
                Complex64::new(half, 0.0),
                Complex64::from_polar(((1.0 - cos_theta) / 2.0).sqrt(), phi),
            );
            let phase = 0.5 * omega * x;
            let evolved = SVector::<Complex64, 2>::new(
                psi[0] * Complex64::from_polar(1.0, -phase),
                psi[1] * Complex64::from_polar(1.0, phase),
            );
            psi.dotc(&evolved).norm_sqr()
        })
        .collect();
    mean_and_error(&values)
}
