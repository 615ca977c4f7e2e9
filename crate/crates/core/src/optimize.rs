//! Maximization of `F̄_n` over `p_fb` and `n`, and sweeps over `(x, p_meas)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::exact::{fidelity_profile, FidelityProfile, PfbExpansion, N_MAX_SYMBOLIC};
use crate::oracle::single_qubit_fidelity;
use crate::poly::{chebyshev_nodes, Polynomial, TIE_TOL};

/// Best feedback probability for a fixed number of rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfbOptimum {
    pub n: usize,
    pub p_fb_star: f64,
    pub f_star: f64,
}

/// Optimal strategy for one `(x, p_meas)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub x: f64,
    pub p_meas: f64,
    pub per_n: Vec<PfbOptimum>,
    pub best: PfbOptimum,
    /// Single-qubit fidelity at the same `x`.
    pub baseline: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub x_steps: usize,
    pub pmeas_min: f64,
    pub pmeas_max: f64,
    pub pmeas_steps: usize,
    pub n_max: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: 0.1,
            x_max: 3.0,
            x_steps: 59,
            pmeas_min: 0.0,
            pmeas_max: 0.5,
            pmeas_steps: 51,
            n_max: 10,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, steps) in [("x_steps", self.x_steps), ("pmeas_steps", self.pmeas_steps)] {
            if steps < 2 {
                return Err(Error::Invalid {
                    name,
                    reason: format!("need at least 2 steps, got {steps}"),
                });
            }
        }
        if !(self.x_min >= 0.0 && self.x_min.is_finite()) {
            return Err(Error::Invalid {
                name: "x_min",
                reason: format!("must be finite and non-negative, got {}", self.x_min),
            });
        }
        if !(self.x_max > self.x_min && self.x_max.is_finite()) {
            return Err(Error::Invalid {
                name: "x_max",
                reason: format!("must be finite and exceed x_min = {}, got {}", self.x_min, self.x_max),
            });
        }
        check_unit_interval("pmeas_min", self.pmeas_min)?;
        check_unit_interval("pmeas_max", self.pmeas_max)?;
        if self.pmeas_max <= self.pmeas_min {
            return Err(Error::Invalid {
                name: "pmeas_max",
                reason: format!("must exceed pmeas_min = {}, got {}", self.pmeas_min, self.pmeas_max),
            });
        }
        check_rounds(self.n_max)
    }

    pub fn x_values(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.x_steps)
    }

    pub fn pmeas_values(&self) -> Vec<f64> {
        linspace(self.pmeas_min, self.pmeas_max, self.pmeas_steps)
    }

    pub fn cells(&self) -> usize {
        self.x_steps * self.pmeas_steps
    }
}

/// Evenly spaced points written as weighted endpoints, so that grid values
/// such as 2.0 and 0.22 come out exactly.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let m = (steps - 1) as f64;
    (0..steps)
        .map(|i| (lo * (m - i as f64) + hi * i as f64) / m)
        .collect()
}

fn check_rounds(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid {
            name: "n",
            reason: "at least one recovery round is required".into(),
        });
    }
    if n > N_MAX_SYMBOLIC {
        return Err(Error::TooManyRounds {
            n,
            max: N_MAX_SYMBOLIC,
        });
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid {
            name: "x",
            reason: format!("Δt/T2* must be finite and non-negative, got {x}"),
        })
    }
}

fn optimum_of(n: usize, poly: &Polynomial) -> PfbOptimum {
    let (p_fb_star, f) = poly.maximize(0.0, 1.0);
    PfbOptimum {
        n,
        p_fb_star,
        f_star: f.clamp(0.0, 1.0),
    }
}

pub fn optimize_pfb(n: usize, p_meas: f64, x: f64) -> Result<PfbOptimum> {
    check_rounds(n)?;
    check_x(x)?;
    let poly = PfbExpansion::compute(n, p_meas)?.polynomial_at(x)?;
    Ok(optimum_of(n, &poly))
}

/// Largest `f_star`; ties within [`TIE_TOL`] go to the larger `n`.
pub fn select_best(per_n: &[PfbOptimum]) -> Option<PfbOptimum> {
    let top = per_n.iter().map(|o| o.f_star).fold(f64::NEG_INFINITY, f64::max);
    per_n
        .iter()
        .filter(|o| o.f_star >= top - TIE_TOL)
        .max_by_key(|o| o.n)
        .copied()
}

fn assemble(x: f64, p_meas: f64, per_n: Vec<PfbOptimum>) -> OptimizationResult {
    let best = select_best(&per_n).expect("n_max ≥ 1");
    OptimizationResult {
        x,
        p_meas,
        per_n,
        best,
        baseline: single_qubit_fidelity(x),
    }
}

pub fn optimize_cell(p_meas: f64, x: f64, n_max: usize) -> Result<OptimizationResult> {
    check_rounds(n_max)?;
    check_unit_interval("p_meas", p_meas)?;
    check_x(x)?;
    let per_n = (1..=n_max)
        .into_par_iter()
        .map(|n| optimize_pfb(n, p_meas, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(x, p_meas, per_n))
}

/// One grid cell of a sweep; failures are recorded rather than aborting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub x: f64,
    pub p_meas: f64,
    pub result: std::result::Result<OptimizationResult, String>,
}

/// Profiles of `F̄_n` on a tensor grid of Chebyshev nodes in
/// `(p_fb, p_meas)`.
///
/// At fixed `p_fb` each round is affine in `p_meas`, so every profile weight
/// is a polynomial of degree `n` in `p_meas` and is recovered exactly from
/// `n + 1` nodes.
#[derive(Debug, Clone)]
pub struct PmeasInterpolant {
    n: usize,
    pfb_nodes: Vec<f64>,
    pmeas_nodes: Vec<f64>,
    bary: Vec<f64>,
    /// `profiles[i][j]` at `(pfb_nodes[i], pmeas_nodes[j])`.
    profiles: Vec<Vec<FidelityProfile>>,
}

impl PmeasInterpolant {
    pub fn compute(n: usize) -> Result<Self> {
        check_rounds(n)?;
        let pfb_nodes = chebyshev_nodes(n + 1, 0.0, 1.0);
        let pmeas_nodes = chebyshev_nodes(n + 1, 0.0, 1.0);
        let pairs: Vec<(f64, f64)> = pfb_nodes
            .iter()
            .flat_map(|&f| pmeas_nodes.iter().map(move |&m| (f, m)))
            .collect();
        let flat = pairs
            .par_iter()
            .map(|&(f, m)| fidelity_profile(n, f, m))
            .collect::<Result<Vec<_>>>()?;
        let profiles = flat.chunks(n + 1).map(<[_]>::to_vec).collect();
        let bary = (0..=n)
            .map(|j| {
                let prod: f64 = (0..=n)
                    .filter(|&k| k != j)
                    .map(|k| pmeas_nodes[j] - pmeas_nodes[k])
                    .product();
                1.0 / prod
            })
            .collect();
        Ok(Self {
            n,
            pfb_nodes,
            pmeas_nodes,
            bary,
            profiles,
        })
    }

    /// Lagrange weights for evaluation at `p_meas` (barycentric form).
    fn lagrange(&self, p_meas: f64) -> Vec<f64> {
        if let Some(j) = self.pmeas_nodes.iter().position(|&m| m == p_meas) {
            let mut l = vec![0.0; self.n + 1];
            l[j] = 1.0;
            return l;
        }
        let terms: Vec<f64> = self
            .pmeas_nodes
            .iter()
            .zip(&self.bary)
            .map(|(&m, &b)| b / (p_meas - m))
            .collect();
        let total: f64 = terms.iter().sum();
        terms.iter().map(|t| t / total).collect()
    }

    pub fn expansion(&self, p_meas: f64) -> Result<PfbExpansion> {
        check_unit_interval("p_meas", p_meas)?;
        let l = self.lagrange(p_meas);
        let len = self.profiles[0][0].weights.len();
        let profiles = self
            .profiles
            .iter()
            .map(|row| {
                let mut weights = vec![0.0; len];
                for (p, &lj) in row.iter().zip(&l) {
                    for (w, &v) in weights.iter_mut().zip(&p.weights) {
                        *w += lj * v;
                    }
                }
                FidelityProfile {
                    rounds: self.n,
                    weights,
                }
            })
            .collect();
        Ok(PfbExpansion {
            n: self.n,
            p_meas,
            nodes: self.pfb_nodes.clone(),
            profiles,
        })
    }
}

/// Optimizes every cell of `grid`, row-major over `(x, p_meas)`.
pub fn sweep_grid(grid: &GridSpec) -> Result<Vec<CellOutcome>> {
    grid.validate()?;
    let interpolants = (1..=grid.n_max)
        .map(PmeasInterpolant::compute)
        .collect::<Result<Vec<_>>>()?;
    let pmeas = grid.pmeas_values();
    let expansions: Vec<std::result::Result<Vec<PfbExpansion>, String>> = pmeas
        .par_iter()
        .map(|&m| {
            interpolants
                .iter()
                .map(|ip| ip.expansion(m))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.to_string())
        })
        .collect();
    let cells: Vec<(f64, usize)> = grid
        .x_values()
        .into_iter()
        .flat_map(|x| (0..pmeas.len()).map(move |j| (x, j)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(x, j)| {
            let result = expansions[j].clone().and_then(|exps| {
                let per_n = exps
                    .iter()
                    .map(|e| e.polynomial_at(x).map(|p| optimum_of(e.n, &p)))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| e.to_string())?;
                Ok(assemble(x, pmeas[j], per_n))
            });
            CellOutcome {
                x,
                p_meas: pmeas[j],
                result,
            }
        })
        .collect())
}
