use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sqpe::estimator::ShotMode;
use sqpe::io::{write_file, DeltaBand, RunConfig, RuntimeMode, SampleMode, SolverKind};
use sqpe::pipeline::{self, uniform_grid};
use sqpe::runtime::tradeoff_csv;
use sqpe::{Error, Result};

#[derive(Parser)]
#[command(
    name = "sqpe",
    version,
    about = "Ground-state energy estimation by statistical phase estimation on a statevector emulator"
)]
struct Cli {
    /// Worker threads for sample collection (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the ground-state energy and write a JSON report.
    Gse {
        #[command(flatten)]
        run: RunArgs,
        /// Directory for report.json and the solver trace CSV.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Sweep the ACDF estimate over a grid of x.
    Acdf {
        #[command(flatten)]
        run: RunArgs,
        /// Number of uniformly spaced points over [-π/2, π/2].
        #[arg(long, default_value_t = 201, conflicts_with = "x")]
        points: usize,
        /// Explicit comma-separated x values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        /// Also save the sample set to this CSV file.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Sample count against gate budget for optimized runtime vectors.
    Tradeoff {
        #[command(flatten)]
        run: RunArgs,
        /// Explicit comma-separated gate budgets (ascending).
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10.0)]
        budget_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        budget_max: f64,
        /// Log-spaced points between the minimum and maximum budget.
        #[arg(long, default_value_t = 25)]
        budget_points: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Dump exact eigenvalues, trial-state overlaps and the exact CDF.
    Spectrum {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Config source plus overrides. Flags win over the config file.
#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Hamiltonian file; overrides the config entry.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use exact expectation values instead of single-shot outcomes.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    delta_precision: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    /// A positive number or "auto".
    #[arg(long)]
    delta_band: Option<DeltaBand>,
    #[arg(long)]
    epsilon_q: Option<f64>,
    #[arg(long)]
    epsilon_c: Option<f64>,
    #[arg(long, value_enum)]
    runtime_mode: Option<RuntimeMode>,
    #[arg(long)]
    gate_budget: Option<f64>,
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
    #[arg(long)]
    grid_resolution: Option<f64>,
    #[arg(long)]
    delta_c: Option<f64>,
    #[arg(long, value_enum)]
    sample_mode: Option<SampleMode>,
    #[arg(long)]
    n_samples: Option<u64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.hamiltonian) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(h)) => RunConfig::with_hamiltonian(h.clone()),
            (None, None) => {
                return Err(Error::Config(
                    "either --config or --hamiltonian is required".into(),
                ))
            }
        };
        if let Some(h) = &self.hamiltonian {
            cfg.hamiltonian = h.clone();
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { cfg.$f = v; } )* };
        }
        set!(
            seed,
            delta_precision,
            eta,
            epsilon,
            nu,
            delta_band,
            epsilon_q,
            epsilon_c,
            runtime_mode,
            solver,
            grid_resolution,
            delta_c,
            sample_mode
        );
        if self.gate_budget.is_some() {
            cfg.gate_budget = self.gate_budget;
        }
        if self.n_samples.is_some() {
            cfg.n_samples = self.n_samples;
        }
        if self.exact {
            cfg.shot_mode = ShotMode::Exact;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(Error::InvalidParameter {
            name: "budget range",
            reason: "need 0 < budget-min < budget-max and at least 2 points".into(),
        });
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Gse { run, out_dir } => {
            let cfg = run.resolve()?;
            let res = pipeline::run_gse(&cfg)?;
            let json = res.report_json();
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                        path: dir.clone(),
                        source: e,
                    })?;
                    write_file(&dir.join("report.json"), &json)?;
                    write_file(&dir.join(res.trace.file_name()), &res.trace.to_csv())?;
                }
                None => print!("{json}"),
            }
        }
        Command::Acdf {
            run,
            points,
            x,
            samples,
            output,
        } => {
            let cfg = run.resolve()?;
            let grid = x.unwrap_or_else(|| uniform_grid(points));
            let p = pipeline::prepare(&cfg)?;
            let set = p.collect(cfg.seed)?;
            if let Some(path) = samples {
                write_file(&path, &set.to_csv())?;
            }
            emit(
                output.as_deref(),
                &pipeline::acdf_sweep_csv(&p, &set, &grid)?,
            )?;
        }
        Command::Tradeoff {
            run,
            budgets,
            budget_min,
            budget_max,
            budget_points,
            output,
        } => {
            let cfg = run.resolve()?;
            let budgets = match budgets {
                Some(b) => b,
                None => log_grid(budget_min, budget_max, budget_points)?,
            };
            let res = pipeline::run_tradeoff(&cfg, &budgets)?;
            log::info!(
                "default runtime: N_g = {:.3}, scaled N_s = {:.3}",
                res.default_point.n_g,
                res.default_point.n_s_scaled
            );
            emit(output.as_deref(), &tradeoff_csv(&res.curve))?;
        }
        Command::Spectrum { run, output } => {
            let cfg = run.resolve()?;
            emit(output.as_deref(), &pipeline::spectrum_csv(&cfg)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
