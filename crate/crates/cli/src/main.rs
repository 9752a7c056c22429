//! `bge`: run bandit regret experiments and print regret bounds.

mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bge_core::bounds::{thm5_lower, LogArgument};
use bge_core::experiment::scenario_grid;
use bge_core::sim::{OverrideBasis, ScenarioName, ScenarioOverrides};
use bge_core::{Cell, CellResult, ExperimentGrid, PolicyFamily, DEFAULT_C2_GRID};

use crate::config::CliOverrides;
use crate::output::{write_bounds, write_csv, write_summary, BoundParams};

#[derive(Parser)]
#[command(
    name = "bge",
    version,
    about = "Boltzmann and Boltzmann-Gumbel exploration experiments"
)]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "BGE_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a named scenario (fig1a, fig1b, thm2, thm5, prop1) with its defaults.
    Scenario {
        name: String,
        #[command(flatten)]
        params: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run chosen policy families over a C^2 grid on a named scenario.
    Sweep {
        name: String,
        /// Comma-separated families, e.g. bge,ucb,be-log.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "be-const,be-log,be-sqrt,bge,ucb"
        )]
        policy: Vec<String>,
        #[command(flatten)]
        params: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the closed-form regret bounds for an instance.
    Bounds(BoundArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long = "T")]
    horizon: Option<u64>,
    /// Comma-separated C^2 grid.
    #[arg(long, value_delimiter = ',')]
    c2: Option<Vec<f64>>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Add a `pull_counts` column with every arm's count.
    #[arg(long)]
    full_counts: bool,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long = "K")]
    arms: Option<usize>,
    #[arg(long)]
    gap: Option<f64>,
    /// Rounds (or optimal-arm pulls) whose reward is forced to zero in fig1b.
    #[arg(long)]
    t0: Option<u64>,
    /// Whether --t0 counts rounds or optimal-arm pulls.
    #[arg(long, value_parser = ["rounds", "pulls"])]
    basis: Option<String>,
    /// Constant learning rate of prop1.
    #[arg(long)]
    eta: Option<f64>,
    /// Coefficient c of eta_t = c log t in thm2.
    #[arg(long)]
    log_rate: Option<f64>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long = "K", default_value_t = 10)]
    arms: u64,
    #[arg(long = "T", default_value_t = 1_000_000)]
    horizon: u64,
    /// Gap of every suboptimal arm.
    #[arg(long, default_value_t = 0.01)]
    gap: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Second-moment bound; defaults to sigma^2.
    #[arg(long = "V")]
    v: Option<f64>,
    /// Perturbation scale C; defaults to sigma.
    #[arg(long = "C")]
    big_c: Option<f64>,
    /// Constant c inside the log term; defaults to sigma.
    #[arg(long = "c")]
    small_c: Option<f64>,
    /// Use T * gap instead of T * gap^2 inside the squared log.
    #[arg(long)]
    gap_linear: bool,
    #[arg(long)]
    csv: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot start worker pool")?;
    }
    match cli.command {
        Command::Run { config, output } => {
            let overrides = CliOverrides {
                horizon: output.horizon,
                seeds: output.seeds,
                master_seed: output.master_seed,
                c2: output.c2.clone(),
            };
            let grid = config::load(&config, &overrides)?;
            execute_grid(&grid, &output)
        }
        Command::Scenario {
            name,
            params,
            output,
        } => {
            let name: ScenarioName = name.parse()?;
            let overrides = scenario_overrides(&params, &output)?;
            let c2 = output
                .c2
                .clone()
                .unwrap_or_else(|| DEFAULT_C2_GRID.to_vec());
            let grid = scenario_grid(name, &overrides, &c2)?;
            execute_grid(&grid, &output)
        }
        Command::Sweep {
            name,
            policy,
            params,
            output,
        } => {
            let name: ScenarioName = name.parse()?;
            let families = policy
                .iter()
                .map(|p| p.parse::<PolicyFamily>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(anyhow::Error::msg)?;
            let overrides = scenario_overrides(&params, &output)?;
            let c2 = output
                .c2
                .clone()
                .unwrap_or_else(|| DEFAULT_C2_GRID.to_vec());
            let mut grid = scenario_grid(name, &overrides, &c2)?;
            grid.cells = families
                .iter()
                .flat_map(|&f| c2.iter().map(move |&c| Cell::family(f, c)))
                .collect();
            execute_grid(&grid, &output)
        }
        Command::Bounds(args) => {
            let params = BoundParams {
                k: args.arms,
                t: args.horizon,
                gap: args.gap,
                sigma: args.sigma,
                v: args.v.unwrap_or(args.sigma * args.sigma),
                big_c: args.big_c.unwrap_or(args.sigma),
                small_c: args.small_c.unwrap_or(args.sigma),
                log_argument: if args.gap_linear {
                    LogArgument::GapLinear
                } else {
                    LogArgument::GapSquared
                },
            };
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write_bounds(&mut out, &params, args.csv)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn scenario_overrides(params: &ScenarioArgs, output: &OutputArgs) -> Result<ScenarioOverrides> {
    Ok(ScenarioOverrides {
        arms: params.arms,
        horizon: output.horizon,
        gap: params.gap,
        malicious_t0: params.t0,
        override_basis: params
            .basis
            .as_deref()
            .map(str::parse::<OverrideBasis>)
            .transpose()?,
        eta: params.eta,
        log_rate: params.log_rate,
        seeds: output.seeds,
        master_seed: output.master_seed,
    })
}

fn execute_grid(grid: &ExperimentGrid, output: &OutputArgs) -> Result<()> {
    grid.validate()?;
    // Open the destination first so an unwritable path fails before the runs.
    let mut sink: Box<dyn Write> = match &output.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let results = grid.run()?;
    write_csv(&mut sink, grid, &results, output.full_counts)?;
    sink.flush()?;

    let stderr = io::stderr();
    let mut err = stderr.lock();
    write_summary(&mut err, &results)?;
    report_scenario_checks(&mut err, grid, &results)?;
    Ok(())
}

fn report_scenario_checks<W: Write>(
    err: &mut W,
    grid: &ExperimentGrid,
    results: &[CellResult],
) -> Result<()> {
    let base = &grid.base;
    match grid.scenario.parse::<ScenarioName>() {
        Ok(ScenarioName::Thm5Worstcase) => {
            let lower = thm5_lower(base.instance.len() as u64, base.horizon)?;
            for r in results {
                writeln!(
                    err,
                    "{}: mean final regret {:.3}, worst-case lower bound {:.3}",
                    r.cell.policy,
                    r.final_mean(),
                    lower
                )?;
            }
        }
        Ok(ScenarioName::Prop1Oracle) => {
            for r in results {
                let reps = &r.replication.traces;
                let suboptimal: u64 = reps
                    .iter()
                    .map(|t| base.horizon - t.last().pull_counts[0])
                    .sum();
                let rate = suboptimal as f64 / (base.horizon * reps.len() as u64) as f64;
                let gap = base.instance.gaps()[1];
                let expected = match r.cell.spec {
                    bge_core::PolicySpec::OracleBoltzmann(s) => {
                        let eta = s.eta(base.horizon)?;
                        Some(1.0 / (1.0 + (eta * gap).exp()))
                    }
                    _ => None,
                };
                write!(err, "{}: suboptimal pull rate {rate:.5}", r.cell.policy)?;
                if let Some(p) = expected {
                    write!(err, " (stationary probability {p:.5})")?;
                }
                writeln!(err)?;
            }
        }
        _ => {}
    }
    Ok(())
}
