use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use qkd_lsm_cli::{
    emit_results, parse_config, run, Analysis, CliError, Format, OutputError, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "qkd-lsm",
    version,
    about = "Light source monitoring key-rate sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (`section.key = value` lines); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// RNG seed for Monte Carlo runs.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Photon-number bounds for signal and decoy states.
    Bounds,
    /// Key rate versus distance, nominal and drift-corrected.
    DistanceSweep,
    /// Maximum distance versus drifted dark count.
    DcrDrift,
    /// Maximum distance versus relative efficiency drift.
    EffDrift,
    /// Maximum distance over a grid of VOA settings.
    EtaGrid,
    /// Monte Carlo check of zero-click probabilities.
    Montecarlo,
    /// Drift ranges of the configured fixture files.
    FixtureRange,
}

impl From<Command> for Analysis {
    fn from(c: Command) -> Self {
        match c {
            Command::Bounds => Analysis::Bounds,
            Command::DistanceSweep => Analysis::DistanceSweep,
            Command::DcrDrift => Analysis::DcrDrift,
            Command::EffDrift => Analysis::EffDrift,
            Command::EtaGrid => Analysis::EtaGrid,
            Command::Montecarlo => Analysis::MonteCarlo,
            Command::FixtureRange => Analysis::FixtureRange,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QKD_LSM_LOG", "off")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.sweep.seed = seed;
    }
    if let Some(f) = &cli.format {
        cfg.output.format = f.parse::<Format>().expect("clap restricts the value");
    }
    if let Some(jobs) = cli.jobs {
        // only fails if a pool already exists, in which case it is reused
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }

    let table = run(cli.command.into(), &cfg)?;
    info!("{} rows", table.rows.len());

    match cli.out.or(cfg.output.path.clone()) {
        Some(path) => emit_results(&table, cfg.output.format, &path)?,
        None => {
            let text = table.render(cfg.output.format)?;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| OutputError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    Ok(())
}
