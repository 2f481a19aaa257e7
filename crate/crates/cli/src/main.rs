mod commands;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "reorg",
    version,
    about = "Organization model queries and mission planning for reconfigurable robot teams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model and, optionally, a mission against it
    Validate {
        /// Organization model; defaults to the one named by the mission
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        mission: Option<PathBuf>,
    },
    /// Probability of survival of an agent type for a set of functionalities
    Reliability {
        #[arg(long)]
        model: PathBuf,
        /// Agent type, e.g. `SherpaTT,PayloadBattery` or `Payload:3`
        agent_type: String,
        /// Required functionalities
        functionalities: Vec<String>,
        /// Also estimate by sampling resource failures this many times
        #[arg(long, value_name = "N")]
        monte_carlo: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search solution candidates for a mission
    Plan(PlanArgs),
    /// Count feasible coalition structures of a pool and find one that
    /// provides the functionalities
    Coalitions {
        #[arg(long)]
        model: PathBuf,
        /// Agent pool, e.g. `SherpaTT,Payload:2`
        pool: String,
        functionalities: Vec<String>,
        /// Largest pool enumerated exactly
        #[arg(long, default_value_t = 8)]
        max_atoms: usize,
    },
}

#[derive(Args)]
pub struct PlanArgs {
    /// Organization model; defaults to the one named by the mission
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub mission: PathBuf,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = -100.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Extra mobile agents; a comma-separated list runs one search per value
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub psi_m: Vec<u32>,
    /// Extra immobile agents
    #[arg(long, default_value_t = 0)]
    pub psi_im: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 60)]
    pub epoch_seconds: u64,
    #[arg(long, default_value_t = 1200)]
    pub total_seconds: u64,
    /// Count iterations instead of wall-clock time so runs are reproducible
    #[arg(long)]
    pub deterministic: bool,
    /// Output directory
    #[arg(long, default_value = "reorg-out")]
    pub out: PathBuf,
    /// Seconds per agent involved in a reconfiguration
    #[arg(long)]
    pub t_a: Option<f64>,
    /// Seconds per atomic agent involved in a reconfiguration
    #[arg(long)]
    pub t_b: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("REORG_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { model, mission } => commands::validate(model.as_deref(), mission.as_deref()),
        Command::Reliability {
            model,
            agent_type,
            functionalities,
            monte_carlo,
            seed,
        } => commands::reliability(&model, &agent_type, &functionalities, monte_carlo, seed),
        Command::Plan(args) => commands::plan(&args),
        Command::Coalitions {
            model,
            pool,
            functionalities,
            max_atoms,
        } => commands::coalitions(&model, &pool, &functionalities, max_atoms),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
