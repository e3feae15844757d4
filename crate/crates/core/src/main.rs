use std::path::PathBuf;
use std::process::ExitCode;

use blowup_paths::cli::{self, Command, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "blowup-paths", version, about = "Central-charge path experiments on a blown-up surface")]
struct Args {
    #[command(subcommand)]
    command: Sub,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for qde-check and specfun-validate.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// One path: trajectory CSV and quasi-convergence report.
    Simulate,
    /// Grid over (s, λ): table of induced decompositions and wall times.
    Sweep,
    /// Integrator against the closed-form solutions.
    QdeCheck,
    /// Wall-crossing times along each configured path.
    Walls,
    /// Ei against a quadrature reference.
    SpecfunValidate,
    /// Mutation orbit of a decomposition.
    Mutate,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cmd = match args.command {
        Sub::Simulate => Command::Simulate,
        Sub::Sweep => Command::Sweep,
        Sub::QdeCheck => Command::QdeCheck,
        Sub::Walls => Command::Walls,
        Sub::SpecfunValidate => Command::SpecfunValidate,
        Sub::Mutate => Command::Mutate,
    };
    let opts = RunOptions { out: args.out, jobs: args.jobs, seed: args.seed };
    let result = match &args.config {
        Some(p) => cli::load_config(p),
        None => cli::parse_config("{}"),
    }
    .and_then(|cfg| cli::run(cmd, &cfg, &opts));
    match result {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
