//! Exact average fidelity after `n` rounds of (dephasing segment, recovery).
//!
//! The noise is constant over a run, so every matrix element of the final
//! state is a finite trigonometric sum `Σ_k c_k exp(−iτ k·ω)` with
//! `|k_j| ≤ n`. The Gaussian average is applied once, at readout, by replacing
//! each monomial with its damping factor.
//!
//! Propagation runs in the product X basis `|x⟩ = |±±±⟩`. Recovery output is
//! block diagonal over the four syndrome subspaces, so only the sixteen
//! operator units `|x⟩⟨y|` with `x ⊕ y ∈ {000, 111}` carry weight between
//! rounds. In this basis a dephasing segment acts on each qubit independently
//! and with real coefficients:
//!
//! ```text
//! |x⟩⟨y| ↦ Σ_{u,w} κ_uw(θ) |x⊕u⟩⟨y⊕w|,
//! κ_00 = cos²(θ/2), κ_11 = sin²(θ/2), κ_01 = −κ_10 = ½ i sin θ,
//! ```
//!
//! so each unit carries a dense real lattice of coefficients indexed by `k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::code::{build_code, logical_two_design, LogicalState, Mat8, Vec8, DIM, QUBITS};
use crate::error::{check_unit_interval, Error, Result};
use crate::noise::{gaussian_damping, NoiseParams};
use crate::phase::{PhasePolynomial, PhaseVector};
use crate::poly::{chebyshev_nodes, Polynomial};

/// Largest `n` handled by the exact engine.
pub const N_MAX_SYMBOLIC: usize = 12;

/// One protocol configuration; `x = Δt / T2*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub n: usize,
    pub p_fb: f64,
    pub p_meas: f64,
    pub x: f64,
}

impl ExperimentParams {
    pub fn new(n: usize, p_fb: f64, p_meas: f64, x: f64) -> Result<Self> {
        let p = Self { n, p_fb, p_meas, x };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Invalid {
                name: "n",
                reason: "at least one recovery round is required".into(),
            });
        }
        check_unit_interval("p_fb", self.p_fb)?;
        check_unit_interval("p_meas", self.p_meas)?;
        if !(self.x >= 0.0 && self.x.is_finite()) {
            return Err(Error::Invalid {
                name: "x",
                reason: format!("Δt/T2* must be finite and non-negative, got {}", self.x),
            });
        }
        Ok(())
    }

    /// Segment duration `Δt/n` in units of `T2*`.
    pub fn tau(&self) -> f64 {
        self.x / self.n as f64
    }

    pub fn channel(&self) -> Result<KrausChannel> {
        build_code().opt_recovery(self.p_fb, self.p_meas)
    }
}

const UNITS: usize = 16;

#[inline]
fn unit_of(x: usize, y: usize) -> Option<usize> {
    match x ^ y {
        0 => Some(2 * x),
        0b111 => Some(2 * x + 1),
        _ => None,
    }
}

#[inline]
fn unit_pair(unit: usize) -> (usize, usize) {
    let x = unit / 2;
    (x, if unit % 2 == 0 { x } else { x ^ 0b111 })
}

/// `|x⟩` in the computational basis.
fn x_basis_vector(x: usize) -> Vec8 {
    let amp = 1.0 / (DIM as f64).sqrt();
    Vec8::from_fn(|a, _| {
        let sign = if (a & x).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(sign * amp, 0.0)
    })
}

/// Per-qubit dephasing kernel `κ_uw` as `(shift, coefficient)` terms.
fn kernel(u: usize, w: usize) -> &'static [(i32, f64)] {
    match (u, w) {
        (0, 0) => &[(0, 0.5), (1, 0.25), (-1, 0.25)],
        (1, 1) => &[(0, 0.5), (1, -0.25), (-1, -0.25)],
        (0, 1) => &[(1, -0.25), (-1, 0.25)],
        _ => &[(1, 0.25), (-1, -0.25)],
    }
}

/// Recovery restricted to the block-diagonal operator units, as a real
/// 16×16 matrix stored column-wise: `columns[src] = [(dst, weight)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecovery {
    columns: Vec<Vec<(usize, f64)>>,
}

impl BlockRecovery {
    /// Reads the block action off a Kraus channel. Fails if the channel leaks
    /// weight outside the syndrome blocks or is not real in the X basis.
    pub fn from_channel(channel: &KrausChannel) -> Result<Self> {
        let basis: Vec<Vec8> = (0..DIM).map(x_basis_vector).collect();
        let mut columns = Vec::with_capacity(UNITS);
        for src in 0..UNITS {
            let (x, y) = unit_pair(src);
            let unit: Mat8 = basis[x] * basis[y].adjoint();
            let out = channel.apply(&unit);
            let mut col = Vec::new();
            for xo in 0..DIM {
                for yo in 0..DIM {
                    let c = (basis[xo].adjoint() * out * basis[yo])[(0, 0)];
                    if c.im.abs() > 1e-12 {
                        return Err(Error::Channel(format!(
                            "complex X-basis coefficient {c} for unit ({x},{y})"
                        )));
                    }
                    match unit_of(xo, yo) {
                        Some(dst) if c.re.abs() > 1e-15 => col.push((dst, c.re)),
                        Some(_) => {}
                        None if c.re.abs() > 1e-12 => {
                            return Err(Error::Channel(
                                "recovery output is not block diagonal over the syndromes".into(),
                            ))
                        }
                        None => {}
                    }
                }
            }
            columns.push(col);
        }
        Ok(Self { columns })
    }
}

#[derive(Debug, Clone, Copy)]
struct Geometry {
    radius: i32,
    width: usize,
}

impl Geometry {
    fn new(radius: usize) -> Self {
        Self {
            radius: radius as i32,
            width: 2 * radius + 1,
        }
    }

    fn len(&self) -> usize {
        self.width.pow(3)
    }

    #[inline]
    fn index(&self, k: [i32; 3]) -> usize {
        let r = self.radius;
        let w = self.width;
        (((k[0] + r) as usize * w) + (k[1] + r) as usize) * w + (k[2] + r) as usize
    }

    fn key(&self, idx: usize) -> PhaseVector {
        let w = self.width;
        let r = self.radius;
        PhaseVector([
            (idx / (w * w)) as i32 - r,
            ((idx / w) % w) as i32 - r,
            (idx % w) as i32 - r,
        ])
    }

    /// `dst[k + s·e_axis] += c · src[k]` for `k` in the box `|k_j| ≤ ext_j`.
    fn axpy_shift(&self, dst: &mut [f64], src: &[f64], c: f64, axis: usize, s: i32, ext: [i32; 3]) {
        let mut shift = [0i32; 3];
        shift[axis] = s;
        let len = (2 * ext[2] + 1) as usize;
        for i in -ext[0]..=ext[0] {
            for j in -ext[1]..=ext[1] {
                let from = self.index([i, j, -ext[2]]);
                let to = self.index([i + shift[0], j + shift[1], -ext[2] + shift[2]]);
                let (d, s) = (&mut dst[to..to + len], &src[from..from + len]);
                for (dv, sv) in d.iter_mut().zip(s) {
                    *dv += c * sv;
                }
            }
        }
    }
}

/// Recycled lattice buffers; fresh zeroed allocations of this size are
/// dominated by page faults.
struct Pool {
    free: Vec<Vec<f64>>,
    len: usize,
}

impl Pool {
    fn new(len: usize) -> Self {
        Self { free: Vec::new(), len }
    }

    fn take(&mut self) -> Vec<f64> {
        match self.free.pop() {
            Some(mut v) => {
                v.fill(0.0);
                v
            }
            None => vec![0.0; self.len],
        }
    }

    fn give_all(&mut self, state: Vec<Option<Vec<f64>>>) {
        self.free.extend(state.into_iter().flatten());
    }
}

fn dephase_round(
    geo: &Geometry,
    state: Vec<Option<Vec<f64>>>,
    ext: &mut [i32; 3],
    pool: &mut Pool,
) -> Vec<Option<Vec<f64>>> {
    // Full operator space indexed by x·8 + y during the per-qubit passes.
    let mut full: Vec<Option<Vec<f64>>> = vec![None; DIM * DIM];
    for (unit, lat) in state.into_iter().enumerate() {
        if let Some(lat) = lat {
            let (x, y) = unit_pair(unit);
            full[x * DIM + y] = Some(lat);
        }
    }
    for q in 0..QUBITS {
        let bit = 1 << (QUBITS - 1 - q);
        let last = q == QUBITS - 1;
        let mut next: Vec<Option<Vec<f64>>> = vec![None; DIM * DIM];
        for (idx, src) in full.iter().enumerate() {
            let Some(src) = src else { continue };
            let (x, y) = (idx / DIM, idx % DIM);
            for u in 0..2 {
                for w in 0..2 {
                    let (xo, yo) = (x ^ (u * bit), y ^ (w * bit));
                    if last && unit_of(xo, yo).is_none() {
                        continue;
                    }
                    let dst = next[xo * DIM + yo].get_or_insert_with(|| pool.take());
                    for &(s, c) in kernel(u, w) {
                        geo.axpy_shift(dst, src, c, q, s, *ext);
                    }
                }
            }
        }
        ext[q] += 1;
        pool.give_all(std::mem::replace(&mut full, next));
    }
    let mut out = vec![None; UNITS];
    for (idx, lat) in full.into_iter().enumerate() {
        if let Some(lat) = lat {
            let unit = unit_of(idx / DIM, idx % DIM).expect("projected in last pass");
            out[unit] = Some(lat);
        }
    }
    out
}

fn recover(
    geo: &Geometry,
    recovery: &BlockRecovery,
    state: Vec<Option<Vec<f64>>>,
    ext: [i32; 3],
    pool: &mut Pool,
) -> Vec<Option<Vec<f64>>> {
    let mut out: Vec<Option<Vec<f64>>> = vec![None; UNITS];
    for (src, lat) in state.iter().enumerate() {
        let Some(lat) = lat else { continue };
        for &(dst, w) in &recovery.columns[src] {
            let d = out[dst].get_or_insert_with(|| pool.take());
            geo.axpy_shift(d, lat, w, 0, 0, ext);
        }
    }
    pool.give_all(state);
    out
}

/// Block-0 output coefficients for each logical input unit:
/// `blocks[2α+β][2γ+δ]` is the lattice of `⟨γ_L| Φ(|α_L⟩⟨β_L|) |δ_L⟩`.
#[derive(Debug, Clone)]
pub struct LogicalResponse {
    rounds: usize,
    geo: Geometry,
    blocks: [[Option<Vec<f64>>; 4]; 4],
}

/// Runs `rounds` rounds of (dephasing segment, `channel`) on the four logical
/// operator units.
pub fn logical_response(channel: &KrausChannel, rounds: usize) -> Result<LogicalResponse> {
    if rounds == 0 || rounds > N_MAX_SYMBOLIC {
        return Err(Error::TooManyRounds {
            n: rounds,
            max: N_MAX_SYMBOLIC,
        });
    }
    let recovery = BlockRecovery::from_channel(channel)?;
    Ok(LogicalResponse::propagate(&recovery, rounds))
}

impl LogicalResponse {
    fn propagate(recovery: &BlockRecovery, rounds: usize) -> Self {
        let geo = Geometry::new(rounds);
        let mut pool = Pool::new(geo.len());
        let logical_x = [0usize, 0b111];
        let blocks = std::array::from_fn(|input| {
            let (alpha, beta) = (input / 2, input % 2);
            let mut state: Vec<Option<Vec<f64>>> = vec![None; UNITS];
            let mut init = pool.take();
            init[geo.index([0, 0, 0])] = 1.0;
            state[unit_of(logical_x[alpha], logical_x[beta]).unwrap()] = Some(init);
            let mut ext = [0i32; 3];
            for _ in 0..rounds {
                state = dephase_round(&geo, state, &mut ext, &mut pool);
                state = recover(&geo, recovery, state, ext, &mut pool);
            }
            let block = std::array::from_fn(|out| {
                let (gamma, delta) = (out / 2, out % 2);
                state[unit_of(logical_x[gamma], logical_x[delta]).unwrap()].take()
            });
            pool.give_all(state);
            block
        });
        Self {
            rounds,
            geo,
            blocks,
        }
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Fidelity lattice for `ψ` (complex coefficients).
    fn state_lattice(&self, psi: &LogicalState) -> Vec<Complex64> {
        let a = psi.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); self.geo.len()];
        for input in 0..4 {
            for output in 0..4 {
                let Some(lat) = &self.blocks[input][output] else { continue };
                let (al, be) = (input / 2, input % 2);
                let (ga, de) = (output / 2, output % 2);
                let w = a[al] * a[be].conj() * a[ga].conj() * a[de];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &v) in out.iter_mut().zip(lat) {
                    *o += w * v;
                }
            }
        }
        out
    }

    /// `⟨ψ_L|ρ_f(ω)|ψ_L⟩` as a phase polynomial in the segment phases.
    pub fn state_polynomial(&self, psi: &LogicalState) -> PhasePolynomial {
        let lat = self.state_lattice(psi);
        PhasePolynomial::from_terms(
            lat.iter()
                .enumerate()
                .filter(|(_, c)| c.norm() > 0.0)
                .map(|(i, c)| (self.geo.key(i), *c)),
        )
    }

    /// Design-averaged fidelity lattice; real by construction.
    fn average_lattice(&self) -> Vec<f64> {
        let design = logical_two_design();
        let mut acc = vec![Complex64::new(0.0, 0.0); self.geo.len()];
        for s in &design {
            for (a, v) in acc.iter_mut().zip(self.state_lattice(s)) {
                *a += v;
            }
        }
        acc.iter().map(|c| c.re / design.len() as f64).collect()
    }

    pub fn average_polynomial(&self) -> PhasePolynomial {
        PhasePolynomial::from_terms(
            self.average_lattice()
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| (self.geo.key(i), Complex64::new(*c, 0.0))),
        )
    }

    /// Groups the averaged coefficients by `|k|²`, which is all the Gaussian
    /// readout depends on.
    pub fn profile(&self) -> FidelityProfile {
        let r = self.rounds;
        let mut weights = vec![0.0; 3 * r * r + 1];
        for (i, c) in self.average_lattice().into_iter().enumerate() {
            if c != 0.0 {
                weights[self.geo.key(i).norm_sq() as usize] += c;
            }
        }
        FidelityProfile { rounds: r, weights }
    }
}

/// `F̄_n(x) = Σ_K w_K exp(−K (x/n)²)` at fixed `(p_fb, p_meas)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityProfile {
    pub rounds: usize,
    pub weights: Vec<f64>,
}

impl FidelityProfile {
    pub fn evaluate(&self, x: f64) -> f64 {
        let tau = x / self.rounds as f64;
        let q = (-tau * tau).exp();
        // Horner in q = exp(−τ²).
        self.weights.iter().rev().fold(0.0, |acc, &w| acc * q + w)
    }
}

/// Design-averaged fidelity polynomial for `params` (independent of `x`).
pub fn average_fidelity_polynomial(params: &ExperimentParams) -> Result<PhasePolynomial> {
    params.validate()?;
    Ok(logical_response(&params.channel()?, params.n)?.average_polynomial())
}

pub fn fidelity_profile(n: usize, p_fb: f64, p_meas: f64) -> Result<FidelityProfile> {
    let params = ExperimentParams::new(n, p_fb, p_meas, 0.0)?;
    Ok(logical_response(&params.channel()?, n)?.profile())
}

/// `F̄_n` averaged over the six logical design states.
pub fn average_fidelity(params: &ExperimentParams) -> Result<f64> {
    params.validate()?;
    let f = fidelity_profile(params.n, params.p_fb, params.p_meas)?.evaluate(params.x);
    Ok(f.clamp(0.0, 1.0))
}

/// Same as [`average_fidelity`] but with an arbitrary replacement for the
/// damping factor of each phase monomial.
pub fn average_fidelity_with(
    params: &ExperimentParams,
    damping: impl Fn(PhaseVector, f64, &NoiseParams) -> f64,
) -> Result<f64> {
    let poly = average_fidelity_polynomial(params)?;
    let noise = NoiseParams::default();
    let tau = params.tau();
    Ok(poly.average_with(|k| damping(k, tau, &noise)).re)
}

/// `F̄_n` as a polynomial in `p_fb` at fixed `(p_meas, x)`, sampled on
/// `n + 1` profiles so it can be re-evaluated at any `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfbExpansion {
    pub n: usize,
    pub p_meas: f64,
    pub nodes: Vec<f64>,
    pub profiles: Vec<FidelityProfile>,
}

impl PfbExpansion {
    pub fn compute(n: usize, p_meas: f64) -> Result<Self> {
        check_unit_interval("p_meas", p_meas)?;
        let nodes = chebyshev_nodes(n + 1, 0.0, 1.0);
        let profiles = nodes
            .iter()
            .map(|&p_fb| fidelity_profile(n, p_fb, p_meas))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            p_meas,
            nodes,
            profiles,
        })
    }

    pub fn polynomial_at(&self, x: f64) -> Result<Polynomial> {
        let values: Vec<f64> = self.profiles.iter().map(|p| p.evaluate(x)).collect();
        Polynomial::interpolate(&self.nodes, &values)
    }
}

/// Coefficients `c_0..c_n` with `F̄_n(p_fb) = Σ c_m p_fb^m`.
pub fn fidelity_vs_pfb_polynomial(n: usize, p_meas: f64, x: f64) -> Result<Polynomial> {
    ExperimentParams::new(n, 0.0, p_meas, x)?;
    PfbExpansion::compute(n, p_meas)?.polynomial_at(x)
}

/// Default damping, exposed for injection in validation checks.
pub fn default_damping(k: PhaseVector, tau: f64, noise: &NoiseParams) -> f64 {
    gaussian_damping(k, tau, noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn closed_form_f1(p_fb: f64, p_meas: f64, x: f64) -> f64 {
        let e = |m: f64| (-m * x * x).exp();
        (1.0 + p_fb * (3.0 - 4.0 * p_meas)) / 6.0
            + 0.5 * e(2.0) * (1.0 - p_fb)
            + 0.25 * e(1.0) * (1.0 + p_fb * (1.0 - 2.0 * p_meas))
            + e(3.0) / 12.0 * (1.0 + p_fb * (2.0 * p_meas - 3.0))
    }

    #[test]
    fn unit_indexing_roundtrips() {
        for u in 0..UNITS {
            let (x, y) = unit_pair(u);
            assert_eq!(unit_of(x, y), Some(u));
        }
        assert_eq!(unit_of(0, 1), None);
    }

    #[test]
    fn geometry_key_inverts_index() {
        let g = Geometry::new(3);
        for k in [[-3, 0, 2], [3, 3, 3], [0, -1, -3]] {
            assert_eq!(g.key(g.index(k)), PhaseVector(k));
        }
    }

    #[test]
    fn single_round_matches_closed_form() {
        for &(p_fb, p_meas, x) in &[(0.3, 0.1, 0.8), (1.0, 0.0, 1.5), (0.0, 0.7, 0.4), (0.6, 0.22, 2.0)] {
            let f = average_fidelity(&ExperimentParams::new(1, p_fb, p_meas, x).unwrap()).unwrap();
            assert_abs_diff_eq!(f, closed_form_f1(p_fb, p_meas, x), epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_time_limit() {
        let f = average_fidelity(&ExperimentParams::new(1, 0.5, 0.5, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(f, 0.75, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(average_fidelity(&ExperimentParams { n: 13, p_fb: 0.5, p_meas: 0.1, x: 1.0 }).is_err());
        assert!(ExperimentParams::new(0, 0.5, 0.1, 1.0).is_err());
        assert!(ExperimentParams::new(1, 0.5, 0.1, -1.0).is_err());
        assert!(ExperimentParams::new(1, 1.5, 0.1, 1.0).is_err());
    }

    #[test]
    fn profile_matches_polynomial_readout() {
        let params = ExperimentParams::new(3, 0.4, 0.15, 1.3).unwrap();
        let resp = logical_response(&params.channel().unwrap(), 3).unwrap();
        let via_poly = resp
            .average_polynomial()
            .average_with(|k| gaussian_damping(k, params.tau(), &NoiseParams::default()));
        assert!(via_poly.im.abs() < 1e-15);
        assert_abs_diff_eq!(via_poly.re, resp.profile().evaluate(params.x), epsilon = 1e-13);
    }

    #[test]
    fn pfb_polynomial_is_affine_for_one_round() {
        let p = fidelity_vs_pfb_polynomial(1, 0.3, 0.0).unwrap();
        assert!(p.coeffs()[0] - 1.0 < 1e-12);
        assert_abs_diff_eq!(p.coeffs()[1], -0.3, epsilon = 1e-12);
    }
}
