//! `pech`: run channel-flow simulations, bound certificates, twin-run
//! experiments and inequality sweeps from flat key = value configs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pe_cli::commands;

#[derive(Parser)]
#[command(name = "pech", version, about = "Hydrostatic channel solver with runtime bound certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a trajectory and certify the bound ladder along it.
    Simulate {
        /// Configuration file (flat key = value).
        config: PathBuf,
    },
    /// Integrate two trajectories and report continuous dependence.
    Twin {
        config: PathBuf,
        /// Perturbation of the second trajectory, `FIELD:KX,KY,M:EPS`
        /// (e.g. `T:1,0,1:1e-8`); omitted means identical twins.
        #[arg(long)]
        perturb: Option<String>,
    },
    /// Randomized verification of the functional-inequality toolkit.
    Ineqlab {
        config: PathBuf,
    },
    /// Print the header of a snapshot file.
    SnapshotInfo {
        path: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config } => commands::cmd_simulate(config),
        Command::Twin { config, perturb } => commands::cmd_twin(config, perturb.as_deref()),
        Command::Ineqlab { config } => commands::cmd_ineqlab(config),
        Command::SnapshotInfo { path } => commands::cmd_snapshot_info(path),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
