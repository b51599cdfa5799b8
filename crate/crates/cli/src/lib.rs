//! Batch front end for light source monitoring analyses: configuration,
//! sweep drivers, drift fixtures and table output.

pub mod config;
pub mod error;
pub mod fixture;
pub mod output;
pub mod sweep;

pub use config::{parse_config, parse_config_str, RunConfig};
pub use error::{CliError, ConfigError, FixtureError, OutputError};
pub use output::{emit_results, Cell, Format, Table};

/// The analyses exposed as subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Bounds,
    DistanceSweep,
    DcrDrift,
    EffDrift,
    EtaGrid,
    MonteCarlo,
    FixtureRange,
}

pub fn run(analysis: Analysis, cfg: &RunConfig) -> Result<Table, CliError> {
    match analysis {
        Analysis::Bounds => sweep::run_bounds(cfg),
        Analysis::DistanceSweep => sweep::run_distance_sweep(cfg),
        Analysis::DcrDrift => sweep::run_dcr_drift_sweep(cfg),
        Analysis::EffDrift => sweep::run_eff_drift_sweep(cfg),
        Analysis::EtaGrid => sweep::run_eta_grid(cfg),
        Analysis::MonteCarlo => sweep::run_montecarlo(cfg),
        Analysis::FixtureRange => sweep::run_fixture_ranges(cfg),
    }
}
