//! Command-line front end for the chiplet placement engine.
//!
//! [`run`] parses arguments and dispatches; it is what `main` calls and what
//! the integration tests drive in-process.

pub mod bench;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use chiplet_place::agents::TrainConfig;
use chiplet_place::baselines::single::{THERMAL_WEIGHT, WIRE_WEIGHT};
use chiplet_place::baselines::SaConfig;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::commands::{bench_stem, execute_run, out_root, run_dir};
use crate::error::{CliError, CliResult, EXIT_CONFIG, EXIT_OK};
use crate::manifest::Job;

#[derive(Debug, Parser)]
#[command(name = "chiplet-place", version, about = "Thermal-aware 2.5D chiplet placement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the two-agent placer.
    Train(TrainArgs),
    /// Run a baseline placer.
    #[command(subcommand)]
    Baseline(Baseline),
    /// Pool run directories into per-method fronts and hypervolumes.
    Pareto {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a layout file and its thermal map.
    Render {
        layout: PathBuf,
        benchmark: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-execute a run from its manifest and compare the metric tables.
    Replay {
        run: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit thermal conductances to a target mean hotspot.
    #[command(hide = true)]
    CalibrateThermal {
        benchmark: String,
        /// Target mean hotspot in °C over random layouts.
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 32)]
        layouts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark file or preset name.
    pub benchmark: String,
    /// Override the grid resolution.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Run directory (default: a fresh directory under $CHIPLET_PLACE_OUT).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub bench: BenchArgs,
    /// Training config (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub updates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampled evaluation episodes per checkpoint.
    #[arg(long, default_value_t = 16)]
    pub eval_episodes: usize,
}

#[derive(Debug, Subcommand)]
pub enum Baseline {
    /// Simulated annealing, optionally swept over the thermal weight.
    Sa {
        #[command(flatten)]
        bench: BenchArgs,
        /// SA config (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Thermal weight, or an inclusive sweep `start:stop:step`.
        #[arg(long)]
        w_temp: Option<String>,
        /// Wirelength weight (default: 1 - w_temp).
        #[arg(long)]
        w_wl: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_moves: Option<usize>,
    },
    /// Uniform random legal layouts.
    Random {
        #[command(flatten)]
        bench: BenchArgs,
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// One PPO agent on a weighted-sum reward.
    SingleRl {
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long, default_value_t = WIRE_WEIGHT)]
        wire_weight: f64,
        #[arg(long, default_value_t = THERMAL_WEIGHT)]
        thermal_weight: f64,
    },
}

fn read_toml<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn train_config(a: &TrainArgs) -> CliResult<TrainConfig> {
    let mut tc: TrainConfig = match &a.config {
        Some(p) => read_toml(p)?,
        None => TrainConfig::default(),
    };
    if let Some(u) = a.updates {
        tc.total_updates = u;
    }
    if let Some(s) = a.seed {
        tc.seed = s;
    }
    tc.validate()?;
    if a.eval_episodes == 0 {
        return Err(CliError::Config("--eval-episodes must be at least 1".into()));
    }
    Ok(tc)
}

fn start_run(bench: &BenchArgs, job: Job) -> CliResult<PathBuf> {
    let resolved = bench::resolve(&bench.benchmark)?;
    let config = bench::with_grid(resolved.config, bench.grid_n)?;
    let dir = run_dir(bench.out.as_deref(), &job, &bench_stem(&config))?;
    execute_run(&dir, job, &config, &resolved.source)?;
    Ok(dir)
}

fn sa_sweep(
    config: &Option<PathBuf>,
    w_temp: &Option<String>,
    w_wl: Option<f64>,
    seed: Option<u64>,
    max_moves: Option<usize>,
) -> CliResult<Vec<SaConfig>> {
    let mut base: SaConfig = match config {
        Some(p) => read_toml(p)?,
        None => SaConfig::default(),
    };
    if let Some(s) = seed {
        base.seed = s;
    }
    if max_moves.is_some() {
        base.max_moves = max_moves;
    }
    let temps = match w_temp {
        Some(arg) => commands::search::parse_sweep(arg)?,
        None => vec![base.w_temp],
    };
    temps
        .into_iter()
        .map(|wt| {
            let mut c = base.clone();
            c.w_temp = wt;
            c.w_wl = match (w_wl, w_temp) {
                (Some(w), _) => w,
                (None, Some(_)) => 1.0 - wt,
                (None, None) => base.w_wl,
            };
            c.validate()?;
            Ok(c)
        })
        .collect()
}

pub fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train(a) => {
            let job = Job::Marl {
                train: train_config(&a)?,
                eval_episodes: a.eval_episodes,
            };
            println!("{}", start_run(&a.bench, job)?.display());
        }
        Command::Baseline(b) => {
            let (bench, job) = match b {
                Baseline::Sa {
                    bench,
                    config,
                    w_temp,
                    w_wl,
                    seed,
                    max_moves,
                } => {
                    let sweep = sa_sweep(&config, &w_temp, w_wl, seed, max_moves)?;
                    (bench, Job::Sa { sweep })
                }
                Baseline::Random { bench, budget, seed } => {
                    if budget == 0 {
                        return Err(CliError::Config("--budget must be at least 1".into()));
                    }
                    (bench, Job::Random { budget, seed })
                }
                Baseline::SingleRl {
                    train,
                    wire_weight,
                    thermal_weight,
                } => {
                    if !(wire_weight >= 0.0 && thermal_weight >= 0.0) {
                        return Err(CliError::Config("reward weights must be non-negative".into()));
                    }
                    let job = Job::SingleRl {
                        train: train_config(&train)?,
                        eval_episodes: train.eval_episodes,
                        wire_weight,
                        thermal_weight,
                    };
                    (train.bench, job)
                }
            };
            println!("{}", start_run(&bench, job)?.display());
        }
        Command::Pareto { runs, out } => {
            let out = out.unwrap_or_else(|| commands::fresh_dir(&out_root(), "pareto"));
            let result = commands::pareto::pareto(&runs, &out)?;
            for r in &result.rows {
                println!(
                    "{}: {} points, front {}, hypervolume {:.4}",
                    r.method, r.points, r.front_size, r.hypervolume
                );
            }
            println!("{}", out.display());
        }
        Command::Render { layout, benchmark, out } => {
            let config = bench::resolve(&benchmark)?.config;
            let out = out.unwrap_or_else(|| commands::fresh_dir(&out_root(), "render"));
            let r = commands::render::render(&layout, config, &out)?;
            println!("wirelength {:.3} mm, hotspot {:.3} C", r.wirelength, r.hotspot);
            println!("{}", out.display());
        }
        Command::Replay { run, out } => {
            let r = commands::replay::replay(&run, out.as_deref())?;
            if !r.identical() {
                return Err(CliError::Runtime(format!(
                    "replay differs from the recorded run in: {}",
                    r.mismatched.join(", ")
                )));
            }
            println!("{} metric files identical; replay in {}", r.compared.len(), r.out.display());
        }
        Command::CalibrateThermal {
            benchmark,
            target,
            layouts,
            seed,
            grid_n,
            out,
        } => {
            let config = bench::with_grid(bench::resolve(&benchmark)?.config, grid_n)?;
            let p = commands::calibrate::calibrate(config, target, layouts, seed, &out)?;
            println!(
                "lateral_conductance = {:.6}\nvertical_conductance = {:.7}",
                p.lateral_conductance, p.vertical_conductance
            );
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
