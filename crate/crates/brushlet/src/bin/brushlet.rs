use brushlet::runner::{
    cmd_approx, cmd_bells, cmd_partition, cmd_run, cmd_transform, cmd_verify, RunConfig,
};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "brushlet",
    about = "Anisotropic tensor brushlet toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed override for all randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the frequency tiling and export layer JSON plus SVG.
    Partition,
    /// Dump bell and brushlet profiles as CSV.
    Bells,
    /// Analyze the configured test function; export coefficients and grids.
    Transform,
    /// Run the partition / projection / orthonormality verification suites.
    Verify,
    /// Run the m-term approximation rate experiments.
    Approx,
    /// Run every suite present in the config.
    Run,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config <path> is required");
            return ExitCode::from(2);
        }
    };
    let mut config = match RunConfig::from_path(&config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let result = match cli.command {
        Command::Partition => cmd_partition(&config, &cli.out),
        Command::Bells => cmd_bells(&config, &cli.out),
        Command::Transform => cmd_transform(&config, &cli.out),
        Command::Verify => cmd_verify(&config, &cli.out),
        Command::Approx => cmd_approx(&config, &cli.out),
        Command::Run => cmd_run(&config, &cli.out),
    };
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
