mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use roqec::oracle::{single_qubit_fidelity, DEFAULT_NODES};
use roqec::optimize::linspace;
use roqec::{
    average_fidelity, monte_carlo_fidelity, optimize_cell, quadrature_fidelity, run_validation, sweep_grid,
    Engine, ExperimentParams, MonteCarloSpec, QuadratureSpec, ResultRecord, ValidationOptions,
};

use config::{
    resolve_threads, BaselineRun, Cli, Command, ConfigFile, FidelityRun, Format, MapRun, OptimizeRun, Settings,
};
use output::Sink;

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Usage(String),
    PartialSweep(String),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) | Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::PartialSweep(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Usage(m) | Failure::PartialSweep(m) | Failure::Io(m) => m,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn engine_error(e: roqec::Error) -> Failure {
    Failure::Validation(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let threads = resolve_threads(cli.threads, &file)?;
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Io(format!("thread pool: {e}")))?;
    }
    let mut settings = Settings::default();
    match &cli.command {
        Command::Fidelity(a) => {
            let run = FidelityRun::resolve(a, &file, &mut settings)?;
            settings.push_opt("threads", threads.as_ref());
            fidelity(&run, &settings)
        }
        Command::Optimize(a) => {
            let run = OptimizeRun::resolve(a, &file, &mut settings)?;
            settings.push_opt("threads", threads.as_ref());
            optimize(&run, &settings)
        }
        Command::Map(a) => {
            let run = MapRun::resolve(a, &file, &mut settings)?;
            settings.push_opt("threads", threads.as_ref());
            map(&run, &settings)
        }
        Command::Baseline(a) => {
            let run = BaselineRun::resolve(a, &file, &mut settings)?;
            settings.push_opt("threads", threads.as_ref());
            baseline(&run, &settings)
        }
        Command::Validate(a) => {
            let seed = a.seed.or(file.seed).unwrap_or(ValidationOptions::default().seed);
            settings.push("seed", seed);
            settings.push_opt("threads", threads.as_ref());
            validate(seed, &settings)
        }
    }
}

fn fidelity(run: &FidelityRun, settings: &Settings) -> Result<(), Failure> {
    let params = ExperimentParams::new(run.n, run.pfb, run.pmeas, run.dt).map_err(engine_error)?;
    let (value, flag) = match run.engine {
        Engine::Exact => (average_fidelity(&params).map_err(engine_error)?, None),
        Engine::Quadrature => {
            let quad = QuadratureSpec::new(DEFAULT_NODES).map_err(engine_error)?;
            let r = quadrature_fidelity(&params, &quad).map_err(engine_error)?;
            if !r.converged {
                eprintln!(
                    "warning: quadrature did not converge at {} nodes per dimension (last change {:e})",
                    r.nodes_per_dim, r.achieved_tol
                );
            }
            (r.value, Some(r.achieved_tol))
        }
        Engine::MonteCarlo => {
            let mc = MonteCarloSpec {
                samples: run.samples,
                seed: run.seed,
            };
            let r = monte_carlo_fidelity(&params, &mc).map_err(engine_error)?;
            (r.mean, Some(r.std_error))
        }
    };
    let record = ResultRecord {
        x: run.dt,
        p_meas: run.pmeas,
        n: run.n,
        p_fb: run.pfb,
        fidelity: value.clamp(0.0, 1.0),
        engine: run.engine,
        baseline: single_qubit_fidelity(run.dt),
        tolerance_flag: flag,
    };
    let mut sink = Sink::open(&run.output, "fidelity", settings)?;
    match run.output.format {
        Format::Csv => sink.csv(&ResultRecord::HEADER, std::iter::once(record.fields()))?,
        Format::Json => sink.json(&record)?,
    }
    sink.finish()
}

fn optimize(run: &OptimizeRun, settings: &Settings) -> Result<(), Failure> {
    let result = optimize_cell(run.pmeas, run.dt, run.n_max).map_err(engine_error)?;
    let mut sink = Sink::open(&run.output, "optimize", settings)?;
    match run.output.format {
        Format::Csv => {
            let b = result.best;
            sink.comment(&format!("best_n = {}", b.n))?;
            sink.comment(&format!("best_pfb = {}", roqec::format_sig(b.p_fb_star)))?;
            sink.comment(&format!("fmax = {}", roqec::format_sig(b.f_star)))?;
            sink.comment(&format!("baseline = {}", roqec::format_sig(result.baseline)))?;
            sink.csv(&roqec::record::PER_N_HEADER, roqec::record::per_n_rows_of(&result))?
        }
        Format::Json => sink.json(&result)?,
    }
    sink.finish()
}

fn map(run: &MapRun, settings: &Settings) -> Result<(), Failure> {
    let cells = sweep_grid(&run.grid).map_err(engine_error)?;
    let ok = cells.iter().filter(|c| c.result.is_ok()).count();

    let mut sink = Sink::open(&run.output, "map", settings)?;
    match run.output.format {
        Format::Csv => sink.csv(&roqec::record::MAP_HEADER, cells.iter().map(roqec::record::map_row))?,
        Format::Json => sink.json(&cells.iter().map(output::MapEntry::from).collect::<Vec<_>>())?,
    }
    sink.finish()?;

    if let Some(path) = &run.per_n_out {
        let target = config::Output {
            format: Format::Csv,
            out: Some(path.clone()),
        };
        let mut per_n = Sink::open(&target, "map", settings)?;
        per_n.csv(&roqec::record::PER_N_HEADER, cells.iter().flat_map(roqec::record::per_n_rows))?;
        per_n.finish()?;
    }

    for c in cells.iter().filter(|c| c.result.is_err()) {
        if let Err(msg) = &c.result {
            eprintln!("warning: cell (x = {}, pmeas = {}) failed: {msg}", c.x, c.p_meas);
        }
    }
    if (ok as f64) < 0.99 * cells.len() as f64 {
        return Err(Failure::PartialSweep(format!("only {ok} of {} cells succeeded", cells.len())));
    }
    Ok(())
}

fn baseline(run: &BaselineRun, settings: &Settings) -> Result<(), Failure> {
    let points: Vec<output::BaselinePoint> = linspace(run.x_min, run.x_max, run.x_steps)
        .into_iter()
        .map(|x| output::BaselinePoint {
            x,
            fidelity: single_qubit_fidelity(x),
        })
        .collect();
    let mut sink = Sink::open(&run.output, "baseline", settings)?;
    match run.output.format {
        Format::Csv => sink.csv(
            &["x", "fidelity"],
            points.iter().map(|p| vec![roqec::format_sig(p.x), roqec::format_sig(p.fidelity)]),
        )?,
        Format::Json => sink.json(&points)?,
    }
    sink.finish()
}

fn validate(seed: u64, settings: &Settings) -> Result<(), Failure> {
    print!("{}", settings.comment_lines("validate"));
    let report = run_validation(&ValidationOptions {
        seed,
        ..ValidationOptions::default()
    });
    print!("{report}");
    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    if failed.is_empty() {
        println!("all {} checks passed", report.checks.len());
        Ok(())
    } else {
        Err(Failure::Validation(format!("failed checks: {}", failed.join("; "))))
    }
}
