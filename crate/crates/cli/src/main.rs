mod commands;
mod manifest;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

const AFTER_HELP: &str = "\
Outputs (all commands write manifest.txt into --out):
  run       field.csv (t,x,k,v), heatmap_k.png, cross_t100.png, cross_t200.png
  cases     report.csv, field_case<N>.csv, cases_t<T>.png
  converge  report.csv

report.csv written by `cases`:
  case,t_s,status,total_variation,mass_veh,mass_change_veh,source_veh,
  boundary_veh,max_ledger_residual,clamps
  One row per case and recorded time. mass_change_veh, source_veh and
  boundary_veh are cumulative since t = 0; boundary_veh includes the edge-cell
  terms. max_ledger_residual is the largest per-step |residual| / M0 so far.

report.csv written by `converge`:
  scheme,level,n_cells,dx_m,dt_s,l1_diff_to_finer,order,exact
  One row per scheme and refinement level, then one `observed` row per scheme
  carrying the order from the three finest levels.

Exit codes: 0 ok, 2 config or validation error, 3 numerical failure.";

#[derive(Parser)]
#[command(name = "arzsim", version, about = "Aw-Rascle traffic simulations with ramp sources", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write the density field.
    Run(CommonArgs),
    /// Run the scenario under all four source cases and compare them.
    Cases(CommonArgs),
    /// Grid self-convergence study of the scenario.
    Converge(ConvergeArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// Scenario config file (`key = value` lines).
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Only report errors.
    #[arg(long)]
    pub quiet: bool,
    /// Skip PNG rendering.
    #[arg(long)]
    pub no_plots: bool,
}

#[derive(Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also run the Lax-Friedrichs reference scheme.
    #[arg(long)]
    pub oracle: bool,
    /// Refinement factors, growing by a constant ratio.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub levels: Vec<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = match &cli.command {
        Command::Run(a) | Command::Cases(a) => a.quiet,
        Command::Converge(a) => a.common.quiet,
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if quiet {
        "error"
    } else {
        "info"
    }))
    .format_timestamp(None)
    .init();

    let code = match &cli.command {
        Command::Run(args) => commands::run(args),
        Command::Cases(args) => commands::cases(args),
        Command::Converge(args) => commands::converge(args),
    };
    ExitCode::from(code)
}
