//! Simulation and optimization of robustness-optimized recovery for the
//! three-qubit phase-flip code under quasi-static Gaussian dephasing.
//!
//! The exact engine ([`exact`]) propagates phase polynomials and applies the
//! Gaussian average at readout; [`oracle`] averages fixed-noise simulations
//! numerically and serves as its cross-check.

pub mod channel;
pub mod code;
pub mod error;
pub mod exact;
pub mod noise;
pub mod optimize;
pub mod oracle;
pub mod phase;
pub mod poly;
pub mod quadrature;
pub mod record;
pub mod symbolic;
pub mod validate;

pub use channel::{
    build_faulty_recovery, build_ideal_recovery, build_measure_only, build_opt_recovery, ChannelLabel,
    KrausChannel, Superoperator,
};
pub use code::{
    build_code, logical_two_design, Codeword, DensityMatrix, LogicalState, PhaseFlipCode, SyndromeProjector,
};
pub use error::{Error, Result};
pub use exact::{
    average_fidelity, fidelity_profile, fidelity_vs_pfb_polynomial, ExperimentParams, FidelityProfile,
    PfbExpansion, N_MAX_SYMBOLIC,
};
pub use noise::{gaussian_damping, sample_noise, segment_unitary, NoiseParams, NoiseSample, SegmentUnitary};
pub use optimize::{
    optimize_cell, optimize_pfb, sweep_grid, CellOutcome, GridSpec, OptimizationResult, PfbOptimum,
};
pub use oracle::{
    fidelity_fixed_noise, monte_carlo_fidelity, quadrature_fidelity, single_qubit_fidelity, MonteCarloResult,
    MonteCarloSpec, QuadratureResult,
};
pub use phase::{PhasePolynomial, PhaseVector};
pub use quadrature::QuadratureSpec;
pub use record::{format_sig, Engine, ResultRecord};
pub use symbolic::{symbolic_apply_channel, symbolic_dephase, SymbolicDensityMatrix};
pub use validate::{run_validation, ValidationOptions, ValidationReport};
