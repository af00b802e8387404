use std::path::PathBuf;
use std::process::ExitCode;

use acsigma::commands::{cmd_absorb, cmd_sigma, cmd_sweep, cmd_verify};
use acsigma::config::RunConfig;
use acsigma::ensemble::SweepAxis;
use acsigma::verify::Status;
use acsigma::LabError;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "acsigma", version, about = "Finite-volume AC conductivity measure of the Anderson model")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ensemble-averaged conductivity measure.
    Sigma,
    /// Run every identity and inequality check.
    Verify,
    /// Temperature and/or disorder sweep.
    Sweep {
        #[arg(long, value_enum)]
        axis: Option<Axis>,
    },
    /// Absorbed energy: time-domain route against the measure route.
    Absorb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Temperature,
    Disorder,
}

fn run(cli: Cli) -> Result<bool, LabError> {
    let path = cli.config.ok_or_else(|| LabError::at("--config", "a config file is required"))?;
    let mut config = RunConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::at("--threads", &e.to_string()))?;
    }
    let out = cli.out.as_deref();
    let print_files = |files: Vec<PathBuf>| {
        for f in files {
            println!("{}", f.display());
        }
    };
    match cli.command {
        Command::Sigma => print_files(cmd_sigma(&config, out)?),
        Command::Sweep { axis } => {
            let axis = axis.map(|a| match a {
                Axis::Temperature => SweepAxis::Temperature,
                Axis::Disorder => SweepAxis::Disorder,
            });
            print_files(cmd_sweep(&config, axis, out)?)
        }
        Command::Absorb => print_files(cmd_absorb(&config, out)?),
        Command::Verify => {
            let report = cmd_verify(&config, out)?;
            for c in &report.checks {
                let status = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skipped => "SKIP",
                };
                let margin = c.margin.map(|m| format!("margin {m:.3e}")).unwrap_or_default();
                println!("{status:4}  {:<22} {margin:<20} {}", c.name, c.detail);
            }
            if !report.passed {
                let failing: Vec<_> = report
                    .checks
                    .iter()
                    .filter(|c| c.status == Status::Fail)
                    .map(|c| serde_json::json!({ "check": c.name, "margin": c.margin, "detail": c.detail }))
                    .collect();
                eprintln!("{}", serde_json::json!({ "error": { "kind": "verification", "failed": failing } }));
            }
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
