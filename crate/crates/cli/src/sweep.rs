//! Sweep drivers. Each returns a plot-ready [`Table`].
//!
//! Cells are evaluated on the rayon pool and collected in grid order, so the
//! output does not depend on scheduling. Cells that cannot produce a key
//! record 0 and a reason code instead of aborting the sweep.

use std::path::PathBuf;

use log::{debug, info};
use qkd_lsm_core::{
    simulate_pulse_train, zero_click_probability, DetectorModel, DriftRange, LinkModel, LsmError,
    PhotonBounds, PhotonDistribution, SystemConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, FixtureError};
use crate::fixture::{ingest_fixture, DriftFixture, DriftKind, Temperature};
use crate::output::{Cell, Table};

pub const DISTANCE_COLUMNS: [&str; 6] = [
    "distance_km",
    "rate_nominal",
    "rate_modified",
    "rate_lowtemp",
    "rate_lowtemp_modified",
    "reason",
];
pub const DCR_DRIFT_COLUMNS: [&str; 6] = [
    "eta1",
    "eta2",
    "lambda_drifted",
    "dcr_rel",
    "max_distance_km",
    "reason",
];
pub const EFF_DRIFT_COLUMNS: [&str; 5] = ["eta1", "eta2", "eff_rel", "max_distance_km", "reason"];
pub const ETA_GRID_COLUMNS: [&str; 4] = ["eta1", "eta2", "max_distance_km", "reason"];
pub const BOUNDS_COLUMNS: [&str; 12] = [
    "state", "variant", "p0", "p1", "p2", "a0_u", "a0_l", "a1_u", "a1_l", "a2_u", "a2_l", "lambda",
];
pub const MONTECARLO_COLUMNS: [&str; 11] = [
    "config",
    "mean",
    "eta",
    "lambda",
    "n_pulses",
    "n_zero_click",
    "p_hat",
    "std_err",
    "analytic",
    "z_score",
    "seed",
];
pub const FIXTURE_COLUMNS: [&str; 11] = [
    "name",
    "kind",
    "temperature",
    "samples",
    "t_start_min",
    "t_end_min",
    "min",
    "max",
    "nominal",
    "rel_lo",
    "rel_hi",
];

/// Source distributions and helpers shared by all sweeps of one config.
pub struct Sweeper<'a> {
    cfg: &'a RunConfig,
    signal: PhotonDistribution,
    decoy: PhotonDistribution,
}

impl<'a> Sweeper<'a> {
    pub fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        let (signal, decoy) = cfg.source_distributions()?;
        Ok(Self { cfg, signal, decoy })
    }

    /// System with the given dark count, VOA pair and drift range.
    ///
    /// Measured zero-click probabilities from the config only apply to the
    /// configured VOA pair at the room-temperature dark count.
    pub fn system(
        &self,
        lambda: f64,
        eta1: f64,
        eta2: f64,
        drift: DriftRange,
    ) -> Result<SystemConfig, LsmError> {
        let cfg = self.cfg;
        let measured = eta1 == cfg.eta1 && eta2 == cfg.eta2 && lambda == cfg.detector.lambda;
        Ok(SystemConfig {
            intensities: cfg.intensities()?,
            signal_source: self.signal.clone(),
            decoy_source: self.decoy.clone(),
            detector: DetectorModel::new(cfg.detector.eta_d, lambda)?,
            eta1,
            eta2,
            drift,
            channel: cfg.channel,
            measured_signal: cfg.measured.signal.filter(|_| measured),
            measured_decoy: cfg.measured.decoy.filter(|_| measured),
        })
    }

    /// Room-temperature drift range, with configured fixtures taking precedence.
    pub fn room_drift(&self) -> Result<DriftRange, CliError> {
        self.drift_for(Temperature::Room)
    }

    pub fn low_drift(&self) -> Result<DriftRange, CliError> {
        self.drift_for(Temperature::Low)
    }

    fn drift_for(&self, temp: Temperature) -> Result<DriftRange, CliError> {
        let cfg = self.cfg;
        let (mut range, lambda, dcr_file, eff_file) = match temp {
            Temperature::Room => (
                cfg.drift,
                cfg.detector.lambda,
                &cfg.fixtures.room_dcr,
                &cfg.fixtures.room_eff,
            ),
            Temperature::Low => (
                cfg.drift_low,
                cfg.detector.lambda_low,
                &cfg.fixtures.low_dcr,
                &cfg.fixtures.low_eff,
            ),
        };
        if let Some(path) = dcr_file {
            let (_, (lo, hi)) = ingest_fixture(path, DriftKind::Dcr, temp, lambda)?;
            range.dcr_rel_lo = lo;
            range.dcr_rel_hi = hi;
        }
        if let Some(path) = eff_file {
            let (_, (lo, hi)) =
                ingest_fixture(path, DriftKind::Efficiency, temp, cfg.detector.eta_d)?;
            range.eff_rel_lo = lo;
            range.eff_rel_hi = hi;
        }
        let checked = DriftRange::new(
            range.dcr_rel_lo,
            range.dcr_rel_hi,
            range.eff_rel_lo,
            range.eff_rel_hi,
        )
        .map_err(|e| FixtureError::Invalid {
            path: dcr_file
                .clone()
                .or_else(|| eff_file.clone())
                .unwrap_or_default(),
            reason: e.to_string(),
        })?;
        debug!("{} drift range {checked:?}", temp.as_str());
        Ok(checked)
    }

    /// Trusted-source link for the configured intensities and channel.
    pub fn trusted_link(&self) -> Result<LinkModel, LsmError> {
        Ok(LinkModel::trusted(
            self.cfg.intensities()?,
            self.cfg.channel,
        ))
    }
}

/// Maximum distance of a system, or 0 and a reason code.
fn range_cell(system: Result<SystemConfig, LsmError>) -> Result<(f64, String), CliError> {
    let link = match system.and_then(|s| s.link_model()) {
        Ok(link) => link,
        Err(e) => return skip_reason(e).map(|r| (0.0, r.to_string())),
    };
    let distance = link.max_distance()?;
    if distance > 0.0 {
        Ok((distance, "ok".into()))
    } else {
        Ok((0.0, link.point(0.0)?.status.as_str().into()))
    }
}

/// Reason code for errors that only disqualify a single cell.
fn skip_reason(e: LsmError) -> Result<&'static str, CliError> {
    match e {
        LsmError::Validation { .. } => Ok("invalid_settings"),
        LsmError::Domain {
            name: "delta" | "sigma",
            ..
        } => Ok("outside_drift_regime"),
        LsmError::Degenerate(_) => Ok("degenerate_denominator"),
        other => Err(other.into()),
    }
}

/// Key rate versus distance for the four detector variants: nominal and
/// drift-corrected bounds, at room and low temperature.
pub fn run_distance_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let sw = Sweeper::new(cfg)?;
    let none = DriftRange::none();
    let (e1, e2) = (cfg.eta1, cfg.eta2);
    let variants = [
        ("nominal", sw.system(cfg.detector.lambda, e1, e2, none)?),
        (
            "modified",
            sw.system(cfg.detector.lambda, e1, e2, sw.room_drift()?)?,
        ),
        ("lowtemp", sw.system(cfg.detector.lambda_low, e1, e2, none)?),
        (
            "lowtemp_modified",
            sw.system(cfg.detector.lambda_low, e1, e2, sw.low_drift()?)?,
        ),
    ];
    let links = variants
        .iter()
        .map(|(name, s)| Ok((*name, s.link_model()?)))
        .collect::<Result<Vec<_>, LsmError>>()?;
    info!("distance sweep over {} points", cfg.sweep.distances.len());

    let rows = cfg
        .sweep
        .distances
        .par_iter()
        .map(|&d| {
            let mut row: Vec<Cell> = vec![d.into()];
            let mut reasons = Vec::new();
            for (name, link) in &links {
                let p = link.point(d)?;
                if p.rate <= 0.0 {
                    reasons.push(format!("{name}={}", p.status.as_str()));
                }
                row.push(p.rate.into());
            }
            row.push(
                if reasons.is_empty() {
                    "ok".to_string()
                } else {
                    reasons.join(";")
                }
                .into(),
            );
            Ok(row)
        })
        .collect::<Result<Vec<_>, LsmError>>()?;

    let mut table = Table::new(&DISTANCE_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Maximum distance when the monitor's dark count has drifted to each
/// `lambda'` on the grid, for every VOA pair. The drift range spans the
/// nominal dark count and `lambda'`.
pub fn run_dcr_drift_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let sw = Sweeper::new(cfg)?;
    let lambda = cfg.detector.lambda;
    let cells: Vec<(f64, f64, f64)> = cfg
        .sweep
        .eta_pairs
        .iter()
        .flat_map(|&(e1, e2)| cfg.sweep.lambda_grid.iter().map(move |&l| (e1, e2, l)))
        .collect();
    info!("dcr drift sweep over {} cells", cells.len());

    let rows = cells
        .par_iter()
        .map(|&(e1, e2, drifted)| {
            let rel = if lambda > 0.0 {
                drifted / lambda - 1.0
            } else {
                0.0
            };
            let system = DriftRange::dcr_only(rel.min(0.0), rel.max(0.0))
                .and_then(|r| sw.system(lambda, e1, e2, r));
            let (dist, reason) = range_cell(system)?;
            Ok(vec![
                e1.into(),
                e2.into(),
                drifted.into(),
                rel.into(),
                dist.into(),
                reason.into(),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table::new(&DCR_DRIFT_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Maximum distance when the monitor's efficiency has drifted by each
/// relative amount on the grid, for every VOA pair.
pub fn run_eff_drift_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let sw = Sweeper::new(cfg)?;
    let lambda = cfg.detector.lambda;
    let cells: Vec<(f64, f64, f64)> = cfg
        .sweep
        .eta_pairs
        .iter()
        .flat_map(|&(e1, e2)| cfg.sweep.eff_grid.iter().map(move |&d| (e1, e2, d)))
        .collect();
    info!("efficiency drift sweep over {} cells", cells.len());

    let rows = cells
        .par_iter()
        .map(|&(e1, e2, delta)| {
            let system = DriftRange::efficiency_only(delta.min(0.0), delta.max(0.0))
                .and_then(|r| sw.system(lambda, e1, e2, r));
            let (dist, reason) = range_cell(system)?;
            Ok(vec![
                e1.into(),
                e2.into(),
                delta.into(),
                dist.into(),
                reason.into(),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table::new(&EFF_DRIFT_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Maximum distance over a grid of VOA pairs with undrifted bounds.
pub fn run_eta_grid(cfg: &RunConfig) -> Result<Table, CliError> {
    let sw = Sweeper::new(cfg)?;
    let lambda = cfg.detector.lambda;
    let cells: Vec<(f64, f64)> = cfg
        .sweep
        .eta1_grid
        .iter()
        .flat_map(|&e1| cfg.sweep.eta2_grid.iter().map(move |&e2| (e1, e2)))
        .collect();
    info!("eta grid over {} cells", cells.len());

    let rows = cells
        .par_iter()
        .map(|&(e1, e2)| {
            let (dist, reason) = range_cell(sw.system(lambda, e1, e2, DriftRange::none()))?;
            Ok(vec![e1.into(), e2.into(), dist.into(), reason.into()])
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table::new(&ETA_GRID_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Zero-click probabilities and bounds for signal and decoy, with and
/// without the drift correction, at both detector temperatures.
pub fn run_bounds(cfg: &RunConfig) -> Result<Table, CliError> {
    let sw = Sweeper::new(cfg)?;
    let none = DriftRange::none();
    let (e1, e2) = (cfg.eta1, cfg.eta2);
    let (room, low) = (cfg.detector.lambda, cfg.detector.lambda_low);
    let variants = [
        ("nominal", sw.system(room, e1, e2, none)?),
        ("modified", sw.system(room, e1, e2, sw.room_drift()?)?),
        ("lowtemp", sw.system(low, e1, e2, none)?),
        ("lowtemp_modified", sw.system(low, e1, e2, sw.low_drift()?)?),
    ];

    let mut table = Table::new(&BOUNDS_COLUMNS);
    for (state, idx) in [("signal", 0), ("decoy", 1)] {
        for (variant, system) in &variants {
            let (dist, measured) = if idx == 0 {
                (&system.signal_source, system.measured_signal)
            } else {
                (&system.decoy_source, system.measured_decoy)
            };
            let p = match measured {
                Some(p) => p,
                None => system.zero_click_probabilities(dist)?,
            };
            let (s, d) = system.corrected_bounds()?;
            let b: PhotonBounds = if idx == 0 { s } else { d };
            let mut row: Vec<Cell> = vec![state.into(), (*variant).into()];
            row.extend(p.iter().map(|&x| Cell::from(x)));
            row.extend(b.as_array().iter().map(|&x| Cell::from(x)));
            row.push(system.detector.lambda().into());
            table.push(row);
        }
    }
    Ok(table)
}

/// Monte Carlo pulse trains for randomly drawn configurations, compared with
/// the analytic zero-click probability.
pub fn run_montecarlo(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sweep.seed);
    let draws: Vec<(f64, f64, f64, u64)> = (0..cfg.sweep.mc_configs)
        .map(|_| {
            (
                rng.random_range(0.05..1.5),
                rng.random_range(0.0..=1.0),
                rng.random_range(0.0..1e-2),
                rng.random(),
            )
        })
        .collect();
    info!(
        "monte carlo: {} configurations x {} pulses",
        draws.len(),
        cfg.sweep.mc_pulses
    );

    let mut table = Table::new(&MONTECARLO_COLUMNS);
    for (i, &(mean, eta, lambda, seed)) in draws.iter().enumerate() {
        let dist = PhotonDistribution::poisson(mean, cfg.source.n_max)?;
        let det = DetectorModel::new(cfg.detector.eta_d, lambda)?;
        let analytic = zero_click_probability(&dist, eta, &det)?;
        let est = simulate_pulse_train(&dist, eta, &det, cfg.sweep.mc_pulses, seed)?;
        debug!("config {i}: p_hat = {}, analytic = {analytic}", est.p_hat);
        table.push(vec![
            (i as u64).into(),
            mean.into(),
            eta.into(),
            lambda.into(),
            est.n_pulses.into(),
            est.n_zero_click.into(),
            est.p_hat.into(),
            est.std_err.into(),
            analytic.into(),
            est.z_score(analytic).into(),
            seed.into(),
        ]);
    }
    Ok(table)
}

/// Summary and relative drift range of every configured fixture.
pub fn run_fixture_ranges(cfg: &RunConfig) -> Result<Table, CliError> {
    let f = &cfg.fixtures;
    let entries: [(&str, &Option<PathBuf>, DriftKind, Temperature, f64); 4] = [
        (
            "room_dcr",
            &f.room_dcr,
            DriftKind::Dcr,
            Temperature::Room,
            cfg.detector.lambda,
        ),
        (
            "room_eff",
            &f.room_eff,
            DriftKind::Efficiency,
            Temperature::Room,
            cfg.detector.eta_d,
        ),
        (
            "low_dcr",
            &f.low_dcr,
            DriftKind::Dcr,
            Temperature::Low,
            cfg.detector.lambda_low,
        ),
        (
            "low_eff",
            &f.low_eff,
            DriftKind::Efficiency,
            Temperature::Low,
            cfg.detector.eta_d,
        ),
    ];

    let mut table = Table::new(&FIXTURE_COLUMNS);
    for (name, path, kind, temp, nominal) in entries {
        let Some(path) = path else { continue };
        let (fx, (lo, hi)): (DriftFixture, _) = ingest_fixture(path, kind, temp, nominal)?;
        table.push(vec![
            name.into(),
            kind.as_str().into(),
            temp.as_str().into(),
            (fx.values.len() as u64).into(),
            fx.timestamps[0].into(),
            fx.timestamps[fx.timestamps.len() - 1].into(),
            fx.min().into(),
            fx.max().into(),
            nominal.into(),
            lo.into(),
            hi.into(),
        ]);
    }
    if table.is_empty() {
        return Err(FixtureError::NoneConfigured.into());
    }
    Ok(table)
}
