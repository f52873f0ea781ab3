use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use drift_approx::commands;
use drift_approx::config::{parse_delta_list, ExperimentConfig, Overrides, ScenarioId};

#[derive(Parser)]
#[command(
    name = "drift-approx",
    version,
    about = "Deterministic drift approximation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nyström solutions of the penalised equation, one CSV per delta.
    SolvePenalized(Common),
    /// Legendre–Galerkin solution of the first-kind equation.
    SolveGalerkin(Common),
    /// Monte-Carlo costs of the penalised, Galerkin and expected-value drifts.
    EstimateCost(Common),
    /// Recompute a published table and compare against it.
    ReproduceTable {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        table: u8,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone)]
struct DeltaList(Vec<f64>);

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<ScenarioId>,
    /// Newton–Cotes panels (6N+1 nodes).
    #[arg(long = "N")]
    n: Option<usize>,
    /// Galerkin degree.
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_parser = |s: &str| parse_delta_list(s).map(DeltaList))]
    delta: Option<DeltaList>,
    #[arg(long = "n-traj")]
    n_traj: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let o = Overrides {
            scenario: self.scenario,
            n: self.n,
            m: self.m,
            delta_list: self.delta.as_ref().map(|d| d.0.clone()),
            n_traj: self.n_traj,
            seed: self.seed,
            output_dir: self.out.clone(),
        };
        ExperimentConfig::load(self.config.as_deref(), &o)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::SolvePenalized(c) => commands::solve_penalized(&c.load()?),
        Command::SolveGalerkin(c) => commands::solve_galerkin(&c.load()?),
        Command::EstimateCost(c) => commands::estimate_cost(&c.load()?),
        Command::ReproduceTable { table, common } => {
            commands::reproduce_table(table, &common.load()?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("drift-approx: some solves or checks failed; see the manifest");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("drift-approx: {e:#}");
            ExitCode::from(2)
        }
    }
}
