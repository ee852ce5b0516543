use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ruinlab::aggregate::TailEstimator;
use ruinlab::arrivals::simulate;
use ruinlab::harness::{load_config, load_model, render_csv, run, validate, Experiment, ExperimentSpec, RngStreamPlan};
use ruinlab::ldp::RateFunction;
use ruinlab::ruin::Horizon;
use ruinlab::Error;

#[derive(Parser)]
#[command(name = "ruinlab", version = ruinlab::harness::run::VERSION, about = "Ruin and aggregate-claims experiments for risk processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the assumption table for an experiment.
    Validate {
        config: PathBuf,
        /// Exit with status 1 when any clause fails.
        #[arg(long)]
        strict: bool,
    },
    /// Ruin probabilities over a grid of initial reserves.
    Ruin {
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        u_grid: Option<Vec<f64>>,
        /// Fixed wall-clock horizon z.
        #[arg(long, conflicts_with_all = ["scaled_horizon", "infinite"])]
        horizon: Option<f64>,
        /// Horizon z = e(u)·T for each u.
        #[arg(long, conflicts_with = "infinite")]
        scaled_horizon: Option<f64>,
        #[arg(long)]
        infinite: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Centred aggregate-claims tail over a grid of levels.
    Aggregate {
        config: PathBuf,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x_grid: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        estimator: Option<EstimatorArg>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tabulate the rate function of an arrival model.
    RateFn {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        x_grid: Vec<f64>,
    },
    /// Emit one arrival path as CSV.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        path_index: u64,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Write CSV and a JSON sidecar here instead of printing CSV.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Plain,
    Conditional,
}

impl RunArgs {
    fn apply(self, spec: &mut ExperimentSpec) {
        if let Some(n) = self.paths {
            spec.n_paths = n;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(w) = self.workers {
            spec.workers = w;
        }
        if let Some(o) = self.output {
            spec.output_path = Some(o);
        }
    }
}

fn emit(spec: &ExperimentSpec) -> ruinlab::Result<()> {
    spec.validate()?;
    if spec.output_path.is_some() {
        let out = run(spec)?;
        eprintln!("wrote {} ({} rows) and {}", out.csv_path.display(), out.rows.len(), out.sidecar_path.display());
    } else {
        print!("{}", render_csv(spec)?);
    }
    Ok(())
}

fn wrong_kind(expected: &str) -> Error {
    Error::Config(format!("experiment.kind: this subcommand needs a `{expected}` experiment"))
}

fn dispatch(cli: Cli) -> ruinlab::Result<ExitCode> {
    match cli.command {
        Command::Validate { config, strict } => {
            let spec = load_config(config)?;
            let table = validate(&spec)?;
            println!("{table}");
            if strict && !table.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Ruin { config, u_grid, horizon, scaled_horizon, infinite, run } => {
            let mut spec = load_config(config)?;
            let Experiment::Ruin { risk, u_grid: grid, horizon: h } = &mut spec.experiment else {
                return Err(wrong_kind("ruin"));
            };
            if let Some(g) = u_grid {
                *grid = g;
            }
            if let Some(z) = horizon {
                *h = Horizon::Finite { z };
            }
            if let Some(t) = scaled_horizon {
                *h = Horizon::Scaled { t };
            }
            if infinite {
                *h = Horizon::Infinite;
            }
            if !risk.net_profit() {
                eprintln!("warning: rho = {} >= 1; asymptotic columns are disabled", risk.rho());
            }
            run.apply(&mut spec);
            emit(&spec)?;
        }
        Command::Aggregate { config, t, x_grid, estimator, run } => {
            let mut spec = load_config(config)?;
            let Experiment::Aggregate { t: tt, x_grid: grid, estimator: est, .. } = &mut spec.experiment else {
                return Err(wrong_kind("aggregate"));
            };
            if let Some(v) = t {
                *tt = v;
            }
            if let Some(g) = x_grid {
                *grid = g;
            }
            match estimator {
                Some(EstimatorArg::Plain) => *est = TailEstimator::Plain,
                Some(EstimatorArg::Conditional) => *est = TailEstimator::Conditional,
                None => {}
            }
            run.apply(&mut spec);
            emit(&spec)?;
        }
        Command::RateFn { config, x_grid } => {
            let rate = RateFunction::for_model(&load_model(config)?)?;
            let mut out = String::from("x,rate\n");
            for x in x_grid {
                out.push_str(&format!("{x},{}\n", rate.eval(x)?));
            }
            print!("{out}");
        }
        Command::Simulate { config, horizon, seed, path_index } => {
            let model = load_model(config)?;
            let path = simulate(&model, horizon, &mut RngStreamPlan::new(seed).stream_for(path_index))?;
            print!("{}", path.to_csv());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Refused(_) => 3,
                Error::Config(_) | Error::Domain(_) | Error::Class(_) | Error::Io(_) => 2,
                _ => 1,
            })
        }
    }
}
