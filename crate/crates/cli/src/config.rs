//! Command-line flags, the optional JSON config file, and their resolution
//! into fully specified run settings.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use roqec::oracle::DEFAULT_SAMPLES;
use roqec::{Engine, GridSpec, N_MAX_SYMBOLIC};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "roqec",
    version,
    about = "Robustness-optimized recovery for the three-qubit phase-flip code",
    long_about = "Robustness-optimized recovery for the three-qubit phase-flip code under \
                  quasi-static Gaussian dephasing.\n\nAll durations are dimensionless: \
                  --dt is Δt/T2*, the total storage time in units of the dephasing time."
)]
pub struct Cli {
    /// Worker threads for parallel evaluation.
    #[arg(long, global = true, env = "ROQEC_THREADS")]
    pub threads: Option<usize>,

    /// JSON file with default settings; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average fidelity of one protocol configuration.
    #[command(allow_negative_numbers = true)]
    Fidelity(FidelityArgs),
    /// Optimal p_fb for each n and the best strategy at one (dt, pmeas).
    #[command(allow_negative_numbers = true)]
    Optimize(OptimizeArgs),
    /// Optimal strategy over a (dt, pmeas) grid.
    #[command(allow_negative_numbers = true)]
    Map(MapArgs),
    /// Single-qubit fidelity over a range of dt.
    #[command(allow_negative_numbers = true)]
    Baseline(BaselineArgs),
    /// Cross-engine and closed-form self-checks at reduced scale.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output if omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    /// Number of recovery rounds.
    #[arg(long)]
    pub n: Option<usize>,
    /// Feedback probability.
    #[arg(long)]
    pub pfb: Option<f64>,
    /// Syndrome measurement error probability.
    #[arg(long)]
    pub pmeas: Option<f64>,
    /// Total time Δt in units of T2*.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Evaluation engine; exact for n ≤ 12, quadrature otherwise.
    #[arg(long, value_parser = parse_engine)]
    pub engine: Option<Engine>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Total time Δt in units of T2*.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Syndrome measurement error probability.
    #[arg(long)]
    pub pmeas: Option<f64>,
    /// Largest number of rounds considered.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Smallest Δt/T2*.
    #[arg(long)]
    pub x_min: Option<f64>,
    /// Largest Δt/T2*.
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Number of Δt/T2* values.
    #[arg(long)]
    pub x_steps: Option<usize>,
    #[arg(long)]
    pub pmeas_min: Option<f64>,
    #[arg(long)]
    pub pmeas_max: Option<f64>,
    #[arg(long)]
    pub pmeas_steps: Option<usize>,
    /// Largest number of rounds considered.
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also write the per-n optimum table (CSV) to this file.
    #[arg(long, value_name = "PATH")]
    pub per_n_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub x_steps: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Seed for the randomized checks.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse().map_err(|e: roqec::Error| e.to_string())
}

/// Settings read from `--config`. Every key is optional; unknown keys are
/// rejected.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<usize>,
    pub pfb: Option<f64>,
    pub pmeas: Option<f64>,
    pub dt: Option<f64>,
    pub engine: Option<Engine>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub per_n_out: Option<PathBuf>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub x_steps: Option<usize>,
    pub pmeas_min: Option<f64>,
    pub pmeas_max: Option<f64>,
    pub pmeas_steps: Option<usize>,
    pub n_max: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("config: cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config: {}: {e}", path.display())))
    }
}

/// Resolved settings as `key = value` pairs, in a fixed order.
#[derive(Debug, Default, Clone)]
pub struct Settings(Vec<(&'static str, String)>);

impl Settings {
    pub fn push(&mut self, key: &'static str, value: impl Display) {
        self.0.push((key, value.to_string()));
    }

    pub fn push_opt(&mut self, key: &'static str, value: Option<&impl Display>) {
        self.push(key, value.map_or_else(|| "none".to_string(), |v| v.to_string()));
    }

    pub fn comment_lines(&self, command: &str) -> String {
        let mut s = format!("# roqec {command}\n");
        for (k, v) in &self.0 {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s
    }
}

fn required<T>(name: &str, value: Option<T>) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("{name}: missing value (pass --{name} or set it in --config)")))
}

fn unit_interval(name: &str, v: f64) -> Result<f64, Failure> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("{name} = {v} is outside [0, 1]")))
    }
}

fn duration(name: &str, v: f64) -> Result<f64, Failure> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("{name} = {v} must be finite and non-negative")))
    }
}

fn rounds(name: &str, n: usize, max: Option<usize>) -> Result<usize, Failure> {
    if n == 0 {
        return Err(Failure::Usage(format!("{name} must be at least 1")));
    }
    match max {
        Some(max) if n > max => Err(Failure::Usage(format!("{name} = {n} exceeds the maximum {max}"))),
        _ => Ok(n),
    }
}

fn path_str(p: Option<&PathBuf>) -> Option<String> {
    p.map(|p| p.display().to_string())
}

#[derive(Debug, Clone)]
pub struct Output {
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Output {
    fn resolve(args: &OutputArgs, file: &ConfigFile, default: Format, settings: &mut Settings) -> Self {
        let format = args.format.or(file.format).unwrap_or(default);
        let out = args.out.clone().or_else(|| file.out.clone());
        settings.push("format", format.as_str());
        settings.push_opt("out", path_str(out.as_ref()).as_ref());
        Self { format, out }
    }
}

pub fn resolve_threads(cli: Option<usize>, file: &ConfigFile) -> Result<Option<usize>, Failure> {
    match cli.or(file.threads) {
        Some(0) => Err(Failure::Usage("threads must be at least 1".into())),
        t => Ok(t),
    }
}

#[derive(Debug, Clone)]
pub struct FidelityRun {
    pub n: usize,
    pub pfb: f64,
    pub pmeas: f64,
    pub dt: f64,
    pub engine: Engine,
    pub samples: usize,
    pub seed: u64,
    pub output: Output,
}

impl FidelityRun {
    pub fn resolve(a: &FidelityArgs, f: &ConfigFile, settings: &mut Settings) -> Result<Self, Failure> {
        let n = rounds("n", required("n", a.n.or(f.n))?, None)?;
        let pfb = unit_interval("pfb", required("pfb", a.pfb.or(f.pfb))?)?;
        let pmeas = unit_interval("pmeas", required("pmeas", a.pmeas.or(f.pmeas))?)?;
        let dt = duration("dt", required("dt", a.dt.or(f.dt))?)?;
        let default_engine = if n <= N_MAX_SYMBOLIC { Engine::Exact } else { Engine::Quadrature };
        let engine = a.engine.or(f.engine).unwrap_or(default_engine);
        if engine == Engine::Exact {
            rounds("n", n, Some(N_MAX_SYMBOLIC))?;
        }
        let samples = a.samples.or(f.samples).unwrap_or(DEFAULT_SAMPLES);
        if samples < 2 {
            return Err(Failure::Usage(format!("samples = {samples} must be at least 2")));
        }
        let seed = a.seed.or(f.seed).unwrap_or(0);
        for (k, v) in [("n", n.to_string()), ("pfb", pfb.to_string()), ("pmeas", pmeas.to_string())] {
            settings.push(k, v);
        }
        settings.push("dt", dt);
        settings.push("engine", engine);
        settings.push("samples", samples);
        settings.push("seed", seed);
        let output = Output::resolve(&a.output, f, Format::Csv, settings);
        Ok(Self {
            n,
            pfb,
            pmeas,
            dt,
            engine,
            samples,
            seed,
            output,
        })
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeRun {
    pub dt: f64,
    pub pmeas: f64,
    pub n_max: usize,
    pub output: Output,
}

impl OptimizeRun {
    pub fn resolve(a: &OptimizeArgs, f: &ConfigFile, settings: &mut Settings) -> Result<Self, Failure> {
        let dt = duration("dt", required("dt", a.dt.or(f.dt))?)?;
        let pmeas = unit_interval("pmeas", required("pmeas", a.pmeas.or(f.pmeas))?)?;
        let n_max = rounds("n-max", a.n_max.or(f.n_max).unwrap_or(10), Some(N_MAX_SYMBOLIC))?;
        settings.push("dt", dt);
        settings.push("pmeas", pmeas);
        settings.push("n_max", n_max);
        let output = Output::resolve(&a.output, f, Format::Json, settings);
        Ok(Self { dt, pmeas, n_max, output })
    }
}

#[derive(Debug, Clone)]
pub struct MapRun {
    pub grid: GridSpec,
    pub per_n_out: Option<PathBuf>,
    pub output: Output,
}

impl MapRun {
    pub fn resolve(a: &MapArgs, f: &ConfigFile, settings: &mut Settings) -> Result<Self, Failure> {
        let d = GridSpec::default();
        let g = &a.grid;
        let grid = GridSpec {
            x_min: g.x_min.or(f.x_min).unwrap_or(d.x_min),
            x_max: g.x_max.or(f.x_max).unwrap_or(d.x_max),
            x_steps: g.x_steps.or(f.x_steps).unwrap_or(d.x_steps),
            pmeas_min: g.pmeas_min.or(f.pmeas_min).unwrap_or(d.pmeas_min),
            pmeas_max: g.pmeas_max.or(f.pmeas_max).unwrap_or(d.pmeas_max),
            pmeas_steps: g.pmeas_steps.or(f.pmeas_steps).unwrap_or(d.pmeas_steps),
            n_max: g.n_max.or(f.n_max).unwrap_or(d.n_max),
        };
        grid.validate().map_err(|e| Failure::Usage(flag_names(&e.to_string())))?;
        settings.push("x_min", grid.x_min);
        settings.push("x_max", grid.x_max);
        settings.push("x_steps", grid.x_steps);
        settings.push("pmeas_min", grid.pmeas_min);
        settings.push("pmeas_max", grid.pmeas_max);
        settings.push("pmeas_steps", grid.pmeas_steps);
        settings.push("n_max", grid.n_max);
        let per_n_out = a.per_n_out.clone().or_else(|| f.per_n_out.clone());
        settings.push_opt("per_n_out", path_str(per_n_out.as_ref()).as_ref());
        let output = Output::resolve(&a.output, f, Format::Csv, settings);
        Ok(Self { grid, per_n_out, output })
    }
}

/// Rewrites library field names to their flag spelling.
fn flag_names(msg: &str) -> String {
    msg.replace("x_min", "x-min")
        .replace("x_max", "x-max")
        .replace("x_steps", "x-steps")
        .replace("pmeas_min", "pmeas-min")
        .replace("pmeas_max", "pmeas-max")
        .replace("pmeas_steps", "pmeas-steps")
}

#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub x_min: f64,
    pub x_max: f64,
    pub x_steps: usize,
    pub output: Output,
}

impl BaselineRun {
    pub fn resolve(a: &BaselineArgs, f: &ConfigFile, settings: &mut Settings) -> Result<Self, Failure> {
        let x_min = duration("x-min", a.x_min.or(f.x_min).unwrap_or(0.0))?;
        let x_max = duration("x-max", a.x_max.or(f.x_max).unwrap_or(3.0))?;
        let x_steps = a.x_steps.or(f.x_steps).unwrap_or(61);
        if x_steps < 2 {
            return Err(Failure::Usage(format!("x-steps = {x_steps} must be at least 2")));
        }
        if x_max <= x_min {
            return Err(Failure::Usage(format!("x-max = {x_max} must exceed x-min = {x_min}")));
        }
        settings.push("x_min", x_min);
        settings.push("x_max", x_max);
        settings.push("x_steps", x_steps);
        let output = Output::resolve(&a.output, f, Format::Csv, settings);
        Ok(Self {
            x_min,
            x_max,
            x_steps,
            output,
        })
    }
}
