use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use noisecorr::cli::{self, BitOrder, IngestFormat, RunConfig};
use noisecorr::Error;

#[derive(Parser)]
#[command(name = "noisecorr", version, about = "Averaged Pauli noise reconstruction and correlation analysis")]
struct Args {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Overrides `schedule.shots`.
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Overrides `bootstrap.n_reps`.
    #[arg(long, global = true)]
    n_reps: Option<usize>,
    /// Overrides `fit.min_points`.
    #[arg(long, global = true)]
    min_points: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic experiment record.
    Simulate,
    /// Normalise device counts or a native record.
    Ingest {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "counts")]
        format: IngestFormat,
        #[arg(long, value_enum)]
        bit_order: Option<BitOrder>,
    },
    /// Fit decays and reconstruct observed error rates.
    Reconstruct { record: PathBuf },
    /// Correlation, covariance, mutual information and fidelities.
    Analyze { record: PathBuf },
    /// Fit the configured junction chain and compare it to the reconstruction.
    Grf { record: PathBuf },
    /// Percentile intervals from bootstrap replicates.
    Bootstrap { record: PathBuf },
    /// Distance growth of chain GRF estimates with chain length.
    ChainScaling,
}

fn config(args: &Args) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(d) = &args.output_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(s) = args.shots {
        match &mut cfg.schedule {
            Some(sched) => sched.shots = s,
            None => return Err(Error::Config("--shots needs a schedule section".into())),
        }
    }
    if let Some(n) = args.n_reps {
        cfg.bootstrap.n_reps = n;
    }
    if let Some(n) = args.min_points {
        cfg.fit.min_points = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<Vec<PathBuf>, Error> {
    let cfg = config(args)?;
    match &args.command {
        Command::Simulate => cli::cmd_simulate(&cfg),
        Command::Ingest { path, format, bit_order } => cli::cmd_ingest(&cfg, path, *format, *bit_order),
        Command::Reconstruct { record } => cli::cmd_reconstruct(&cfg, &cli::read_record(record)?),
        Command::Analyze { record } => cli::cmd_analyze(&cfg, &cli::read_record(record)?),
        Command::Grf { record } => cli::cmd_grf(&cfg, &cli::read_record(record)?),
        Command::Bootstrap { record } => cli::cmd_bootstrap(&cfg, &cli::read_record(record)?),
        Command::ChainScaling => cli::cmd_chain_scaling(&cfg),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
