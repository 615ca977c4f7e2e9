//! Reduced-scale self-checks: closed forms, cross-engine agreement, channel
//! admissibility and the qualitative optimizer regimes.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::build_opt_recovery;
use crate::code::logical_two_design;
use crate::error::Result;
use crate::exact::{average_fidelity, average_fidelity_with, default_damping, ExperimentParams};
use crate::noise::{NoiseParams, NoiseSample};
use crate::optimize::optimize_cell;
use crate::oracle::{
    fidelity_fixed_noise, monte_carlo_fidelity, quadrature_fidelity, single_qubit_fidelity,
    single_qubit_monte_carlo, MonteCarloSpec, DEFAULT_NODES,
};
use crate::phase::PhaseVector;
use crate::quadrature::QuadratureSpec;

pub type DampingFn = fn(PhaseVector, f64, &NoiseParams) -> f64;

/// `F̄_1` in closed form.
pub fn closed_form_f1(p_fb: f64, p_meas: f64, x: f64) -> f64 {
    let e = |m: f64| (-m * x * x).exp();
    (1.0 + p_fb * (3.0 - 4.0 * p_meas)) / 6.0
        + 0.5 * e(2.0) * (1.0 - p_fb)
        + 0.25 * e(1.0) * (1.0 + p_fb * (1.0 - 2.0 * p_meas))
        + e(3.0) / 12.0 * (1.0 + p_fb * (2.0 * p_meas - 3.0))
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    /// Damping used by the exact engine in the closed-form check.
    pub damping: DampingFn,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            damping: default_damping,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn check(name: &'static str, run: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match run() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn random_params(rng: &mut ChaCha8Rng, n: usize) -> Result<ExperimentParams> {
    ExperimentParams::new(n, rng.random(), rng.random(), rng.random_range(0.0..3.0))
}

fn closed_form_exact(triples: &[(f64, f64, f64)], damping: DampingFn) -> Check {
    check("closed-form F1, exact engine", || {
        let mut worst: f64 = 0.0;
        for &(f, m, x) in triples {
            let v = average_fidelity_with(&ExperimentParams::new(1, f, m, x)?, damping)?;
            worst = worst.max((v - closed_form_f1(f, m, x)).abs());
        }
        Ok((worst <= 1e-9, format!("max deviation {worst:.2e} over {} triples", triples.len())))
    })
}

pub fn run_validation(opts: &ValidationOptions) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let quad = QuadratureSpec::new(DEFAULT_NODES).expect("valid node count");
    let mut checks = Vec::new();

    checks.push(check("reference point (x=2, pmeas=0.22)", || {
        let r = optimize_cell(0.22, 2.0, 10)?;
        let b = r.best;
        let params = ExperimentParams::new(b.n, b.p_fb_star, 0.22, 2.0)?;
        let q = quadrature_fidelity(&params, &quad)?.value;
        let ok = b.n == 10
            && (b.p_fb_star - 0.488).abs() <= 0.01
            && (b.f_star - 0.674).abs() <= 0.002
            && (q - 0.674).abs() <= 0.002;
        Ok((
            ok,
            format!("n = {}, pfb = {:.4}, exact = {:.6}, quadrature = {:.6}", b.n, b.p_fb_star, b.f_star, q),
        ))
    }));

    let triples: Vec<(f64, f64, f64)> = (0..20)
        .map(|_| (rng.random(), rng.random(), rng.random_range(0.0..3.0)))
        .collect();
    checks.push(closed_form_exact(&triples, opts.damping));
    checks.push(check("closed-form F1, quadrature", || {
        let mut worst: f64 = 0.0;
        for &(f, m, x) in triples.iter().take(4) {
            let v = quadrature_fidelity(&ExperimentParams::new(1, f, m, x)?, &quad)?.value;
            worst = worst.max((v - closed_form_f1(f, m, x)).abs());
        }
        Ok((worst <= 1e-7, format!("max deviation {worst:.2e} over 4 triples")))
    }));

    checks.push(check("exact vs quadrature", || {
        let mut worst: f64 = 0.0;
        for i in 0..5 {
            let p = random_params(&mut rng, 1 + i % 5)?;
            let q = quadrature_fidelity(&p, &quad)?.value;
            worst = worst.max((average_fidelity(&p)? - q).abs());
        }
        Ok((worst <= 1e-6, format!("max deviation {worst:.2e} over 5 parameter sets")))
    }));
    checks.push(check("exact vs Monte Carlo", || {
        let p = ExperimentParams::new(3, 0.6, 0.15, 1.2)?;
        let mc = monte_carlo_fidelity(&p, &MonteCarloSpec { samples: 10_000, seed: opts.seed })?;
        let exact = average_fidelity(&p)?;
        let z = (mc.mean - exact).abs() / mc.std_error;
        Ok((z <= 4.0, format!("exact {exact:.6}, MC {:.6} ± {:.1e} ({z:.2} SE)", mc.mean, mc.std_error)))
    }));

    checks.push(check("CPTP channels", || {
        let grid = [0.0, 0.22, 0.5, 1.0];
        let (mut tp, mut choi) = (0.0f64, f64::INFINITY);
        for &f in &grid {
            for &m in &grid {
                let ch = build_opt_recovery(f, m)?;
                tp = tp.max(ch.trace_preservation_error());
                choi = choi.min(ch.choi_min_eigenvalue());
            }
        }
        Ok((tp <= 1e-12 && choi >= -1e-10, format!("trace error {tp:.1e}, min Choi eigenvalue {choi:.1e}")))
    }));

    checks.push(check("zero-duration limit", || {
        let design = logical_two_design();
        let levels = [0.0, 0.25, 0.5, 0.75, 1.0];
        let mut worst: f64 = 0.0;
        for &f in &levels {
            for &m in &levels {
                let p = ExperimentParams::new(1, f, m, 0.0)?;
                let brute = design
                    .iter()
                    .map(|s| fidelity_fixed_noise(&p, &NoiseSample::new([0.0; 3]), s))
                    .sum::<Result<f64>>()?
                    / design.len() as f64;
                let want = 1.0 - f * m;
                worst = worst.max((average_fidelity(&p)? - want).abs()).max((brute - want).abs());
            }
        }
        Ok((worst <= 1e-12, format!("max deviation from 1 - pfb*pmeas {worst:.1e}")))
    }));

    checks.push(check("Zeno trend", || {
        let ns = [1, 2, 5, 10, 20];
        let values = ns
            .iter()
            .map(|&n| Ok(quadrature_fidelity(&ExperimentParams::new(n, 0.0, 0.3, 1.0)?, &quad)?.value))
            .collect::<Result<Vec<f64>>>()?;
        let ok = values.windows(2).all(|w| w[1] > w[0]);
        let shown: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
        Ok((ok, format!("n = {ns:?}: {}", shown.join(", "))))
    }));

    checks.push(check("single-qubit baseline", || {
        let mut worst: f64 = 0.0;
        for (i, x) in [0.5, 1.0, 2.0].into_iter().enumerate() {
            let mc = single_qubit_monte_carlo(x, &MonteCarloSpec { samples: 10_000, seed: opts.seed + i as u64 });
            worst = worst.max((mc.mean - single_qubit_fidelity(x)).abs() / mc.std_error);
        }
        let at2 = single_qubit_fidelity(2.0);
        Ok((worst <= 4.0 && at2 < 0.674, format!("max {worst:.2} SE; F(x=2) = {at2:.6}")))
    }));

    checks.push(check("optimizer regimes", || {
        let conventional = optimize_cell(0.0, 2.0, 10)?.best;
        let zeno = optimize_cell(0.45, 0.3, 10)?.best;
        let ok = conventional.p_fb_star == 1.0 && zeno.p_fb_star == 0.0;
        Ok((
            ok,
            format!(
                "pmeas = 0: pfb = {}, (x = 0.3, pmeas = 0.45): pfb = {}",
                conventional.p_fb_star, zeno.p_fb_star
            ),
        ))
    }));

    ValidationReport { checks }
}
