//! Run configuration in a flat `section.key = value` text format.
//!
//! Blank lines and everything after `#` are ignored. Lists are comma
//! separated; numeric lists also accept `start:step:stop`. `eta_pairs` takes
//! comma-separated `eta1/eta2` pairs. Relative paths are resolved against the
//! directory of the config file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qkd_lsm_core::{
    ChannelParams, DetectorModel, DriftRange, MonitorSettings, PhotonDistribution,
    SourceIntensities, DEFAULT_N_MAX,
};

use crate::error::ConfigError;
use crate::output::Format;

pub const PAPER_ETA_PAIRS: [(f64, f64); 4] = [(0.9, 0.1), (0.9, 0.5), (0.8, 0.1), (0.8, 0.2)];

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSection {
    pub mu: f64,
    pub nu: f64,
    pub n_max: usize,
    /// Optional `a_n` CSV files replacing the Poisson signal and decoy states.
    pub signal_file: Option<PathBuf>,
    pub decoy_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSection {
    pub eta_d: f64,
    /// Dark count probability at room temperature.
    pub lambda: f64,
    /// Dark count probability with the detector cooled.
    pub lambda_low: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureSection {
    pub room_dcr: Option<PathBuf>,
    pub room_eff: Option<PathBuf>,
    pub low_dcr: Option<PathBuf>,
    pub low_eff: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasuredSection {
    pub signal: Option<[f64; 3]>,
    pub decoy: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub distances: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub eff_grid: Vec<f64>,
    pub eta1_grid: Vec<f64>,
    pub eta2_grid: Vec<f64>,
    pub eta_pairs: Vec<(f64, f64)>,
    pub mc_pulses: u64,
    pub mc_configs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: SourceSection,
    pub detector: DetectorSection,
    pub eta1: f64,
    pub eta2: f64,
    /// Relative drift ranges at room and low temperature.
    pub drift: DriftRange,
    pub drift_low: DriftRange,
    pub fixtures: FixtureSection,
    pub measured: MeasuredSection,
    pub channel: ChannelParams,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            source: SourceSection {
                mu: 0.6,
                nu: 0.1,
                n_max: DEFAULT_N_MAX,
                signal_file: None,
                decoy_file: None,
            },
            detector: DetectorSection {
                eta_d: 0.1,
                lambda: 5.8e-4,
                lambda_low: 5.4e-6,
            },
            eta1: 0.9,
            eta2: 0.1,
            drift: DriftRange {
                dcr_rel_lo: 5.3 / 5.8 - 1.0,
                dcr_rel_hi: 6.2 / 5.8 - 1.0,
                eff_rel_lo: -0.02,
                eff_rel_hi: 0.02,
            },
            drift_low: DriftRange {
                dcr_rel_lo: 4.6 / 5.4 - 1.0,
                dcr_rel_hi: 6.1 / 5.4 - 1.0,
                eff_rel_lo: -0.01,
                eff_rel_hi: 0.01,
            },
            fixtures: FixtureSection::default(),
            measured: MeasuredSection::default(),
            channel: ChannelParams::default(),
            sweep: SweepSection {
                distances: arange(0.0, 2.0, 150.0),
                lambda_grid: arange(5e-4, 5e-4, 1.5e-2),
                eff_grid: arange(-0.1, 0.01, 0.1),
                eta1_grid: arange(0.55, 0.05, 0.95),
                eta2_grid: arange(0.05, 0.05, 0.45),
                eta_pairs: PAPER_ETA_PAIRS.to_vec(),
                mc_pulses: 1_000_000,
                mc_configs: 20,
                seed: 1,
            },
            output: OutputSection::default(),
        }
    }
}

/// `start, start + step, ...` up to `stop` inclusive (with a small slack for rounding).
pub fn arange(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

impl RunConfig {
    pub fn detector(&self) -> Result<DetectorModel, qkd_lsm_core::LsmError> {
        DetectorModel::new(self.detector.eta_d, self.detector.lambda)
    }

    pub fn intensities(&self) -> Result<SourceIntensities, qkd_lsm_core::LsmError> {
        SourceIntensities::new(self.source.mu, self.source.nu)
    }

    /// Signal and decoy photon-number distributions, from files if configured.
    pub fn source_distributions(
        &self,
    ) -> Result<(PhotonDistribution, PhotonDistribution), ConfigError> {
        let load = |file: &Option<PathBuf>, key: &'static str, mean: f64| match file {
            Some(path) => {
                PhotonDistribution::from_csv_path(path).map_err(|e| ConfigError::Invalid {
                    key: key.into(),
                    reason: format!("{}: {e}", path.display()),
                })
            }
            None => PhotonDistribution::poisson(mean, self.source.n_max).map_err(|e| {
                ConfigError::Invalid {
                    key: "source.n_max".into(),
                    reason: e.to_string(),
                }
            }),
        };
        Ok((
            load(
                &self.source.signal_file,
                "source.signal_file",
                self.source.mu,
            )?,
            load(&self.source.decoy_file, "source.decoy_file", self.source.nu)?,
        ))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, reason: String| ConfigError::Invalid {
            key: key.into(),
            reason,
        };

        if !(self.source.mu.is_finite() && self.source.mu > 0.0) {
            return Err(invalid(
                "source.mu",
                format!("{} must be positive", self.source.mu),
            ));
        }
        if !(self.source.nu > 0.0 && self.source.nu < self.source.mu) {
            return Err(invalid(
                "source.nu",
                format!(
                    "{} must lie in (0, mu = {})",
                    self.source.nu, self.source.mu
                ),
            ));
        }
        if self.source.n_max < 1 {
            return Err(invalid("source.n_max", "must be at least 1".into()));
        }

        if !(self.detector.eta_d > 0.0 && self.detector.eta_d <= 1.0) {
            return Err(invalid(
                "detector.eta_d",
                format!("{} must lie in (0, 1]", self.detector.eta_d),
            ));
        }
        for (key, v) in [
            ("detector.lambda", self.detector.lambda),
            ("detector.lambda_low", self.detector.lambda_low),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(invalid(key, format!("{v} must lie in [0, 1)")));
            }
        }

        if !(self.eta1 > 0.0 && self.eta1 < 1.0) {
            return Err(invalid(
                "monitor.eta1",
                format!("{} must lie in (0, 1)", self.eta1),
            ));
        }
        if !(self.eta2 > 0.0 && self.eta2 < self.eta1) {
            return Err(invalid(
                "monitor.eta2",
                format!("{} must lie in (0, eta1 = {})", self.eta2, self.eta1),
            ));
        }

        for (section, d) in [("drift", &self.drift), ("drift_low", &self.drift_low)] {
            DriftRange::new(d.dcr_rel_lo, d.dcr_rel_hi, d.eff_rel_lo, d.eff_rel_hi)
                .map_err(|e| invalid(section, e.to_string()))?;
        }

        for (key, p) in [
            ("measured.signal", &self.measured.signal),
            ("measured.decoy", &self.measured.decoy),
        ] {
            if let Some(p) = p {
                if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(invalid(key, format!("{p:?} are not probabilities")));
                }
            }
        }

        self.channel
            .validate()
            .map_err(|e| invalid("channel", e.to_string()))?;

        let s = &self.sweep;
        check_grid("sweep.distances", &s.distances, |d| {
            d >= 0.0 && d.is_finite()
        })?;
        check_grid("sweep.lambda_grid", &s.lambda_grid, |l| {
            (0.0..1.0).contains(&l)
        })?;
        check_grid("sweep.eff_grid", &s.eff_grid, |e| e > -0.5 && e <= 0.5)?;
        check_grid("sweep.eta1_grid", &s.eta1_grid, |e| e > 0.0 && e < 1.0)?;
        check_grid("sweep.eta2_grid", &s.eta2_grid, |e| e > 0.0 && e < 1.0)?;
        if s.eta_pairs.is_empty() {
            return Err(invalid("sweep.eta_pairs", "must not be empty".into()));
        }
        for &(e1, e2) in &s.eta_pairs {
            if !(e1 < 1.0 && e2 < e1 && e2 > 0.0) {
                return Err(invalid(
                    "sweep.eta_pairs",
                    format!("{e1}/{e2} violates 1 > eta1 > eta2 > 0"),
                ));
            }
        }
        if s.mc_pulses == 0 {
            return Err(invalid("sweep.mc_pulses", "must be positive".into()));
        }
        if s.mc_configs == 0 {
            return Err(invalid("sweep.mc_configs", "must be positive".into()));
        }
        Ok(())
    }

    /// Monitor settings for an arbitrary VOA pair with this config's detector.
    pub fn monitor(&self, eta1: f64, eta2: f64) -> Result<MonitorSettings, qkd_lsm_core::LsmError> {
        MonitorSettings::new(eta1, eta2, &self.detector()?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());

        line("source.mu", self.source.mu.to_string());
        line("source.nu", self.source.nu.to_string());
        line("source.n_max", self.source.n_max.to_string());
        if let Some(p) = path(&self.source.signal_file) {
            line("source.signal_file", p);
        }
        if let Some(p) = path(&self.source.decoy_file) {
            line("source.decoy_file", p);
        }
        line("detector.eta_d", self.detector.eta_d.to_string());
        line("detector.lambda", self.detector.lambda.to_string());
        line("detector.lambda_low", self.detector.lambda_low.to_string());
        line("monitor.eta1", self.eta1.to_string());
        line("monitor.eta2", self.eta2.to_string());
        for (section, d) in [("drift", &self.drift), ("drift_low", &self.drift_low)] {
            line(&format!("{section}.dcr_lo"), d.dcr_rel_lo.to_string());
            line(&format!("{section}.dcr_hi"), d.dcr_rel_hi.to_string());
            line(&format!("{section}.eff_lo"), d.eff_rel_lo.to_string());
            line(&format!("{section}.eff_hi"), d.eff_rel_hi.to_string());
        }
        for (key, p) in [
            ("fixtures.room_dcr", &self.fixtures.room_dcr),
            ("fixtures.room_eff", &self.fixtures.room_eff),
            ("fixtures.low_dcr", &self.fixtures.low_dcr),
            ("fixtures.low_eff", &self.fixtures.low_eff),
        ] {
            if let Some(p) = path(p) {
                line(key, p);
            }
        }
        for (key, p) in [
            ("measured.signal", &self.measured.signal),
            ("measured.decoy", &self.measured.decoy),
        ] {
            if let Some(p) = p {
                line(key, join(p));
            }
        }
        line("channel.alpha", self.channel.alpha.to_string());
        line("channel.eta_bob", self.channel.eta_bob.to_string());
        line("channel.y0", self.channel.y0.to_string());
        line("channel.e_d", self.channel.e_d.to_string());
        let s = &self.sweep;
        line("sweep.distances", join(&s.distances));
        line("sweep.lambda_grid", join(&s.lambda_grid));
        line("sweep.eff_grid", join(&s.eff_grid));
        line("sweep.eta1_grid", join(&s.eta1_grid));
        line("sweep.eta2_grid", join(&s.eta2_grid));
        line(
            "sweep.eta_pairs",
            s.eta_pairs
                .iter()
                .map(|(a, b)| format!("{a}/{b}"))
                .collect::<Vec<_>>()
                .join(", "),
        );
        line("sweep.mc_pulses", s.mc_pulses.to_string());
        line("sweep.mc_configs", s.mc_configs.to_string());
        line("sweep.seed", s.seed.to_string());
        if let Some(p) = path(&self.output.path) {
            line("output.path", p);
        }
        line("output.format", self.output.format.as_str().into());
        out
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_grid(key: &str, grid: &[f64], valid: impl Fn(f64) -> bool) -> Result<(), ConfigError> {
    let invalid = |reason: String| ConfigError::Invalid {
        key: key.into(),
        reason,
    };
    if grid.is_empty() {
        return Err(invalid("grid must not be empty".into()));
    }
    if let Some(&bad) = grid.iter().find(|&&v| !valid(v)) {
        return Err(invalid(format!("value {bad} is out of range")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("grid must be strictly increasing".into()));
    }
    Ok(())
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_config_str(&text, base)
}

/// Parses config text; relative paths are resolved against `base`.
pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            });
        };
        let key = key.trim();
        if key.is_empty() || !key.contains('.') {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            });
        }
        if entries
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(ConfigError::Duplicate {
                key: key.to_string(),
                line: idx + 1,
            });
        }
    }

    let mut r = Reader { entries, base };
    let mut cfg = RunConfig::default();

    r.float("source.mu", &mut cfg.source.mu)?;
    r.float("source.nu", &mut cfg.source.nu)?;
    r.int("source.n_max", &mut cfg.source.n_max)?;
    r.path("source.signal_file", &mut cfg.source.signal_file);
    r.path("source.decoy_file", &mut cfg.source.decoy_file);
    r.float("detector.eta_d", &mut cfg.detector.eta_d)?;
    r.float("detector.lambda", &mut cfg.detector.lambda)?;
    r.float("detector.lambda_low", &mut cfg.detector.lambda_low)?;
    r.float("monitor.eta1", &mut cfg.eta1)?;
    r.float("monitor.eta2", &mut cfg.eta2)?;
    for (section, d) in [("drift", &mut cfg.drift), ("drift_low", &mut cfg.drift_low)] {
        r.float(&format!("{section}.dcr_lo"), &mut d.dcr_rel_lo)?;
        r.float(&format!("{section}.dcr_hi"), &mut d.dcr_rel_hi)?;
        r.float(&format!("{section}.eff_lo"), &mut d.eff_rel_lo)?;
        r.float(&format!("{section}.eff_hi"), &mut d.eff_rel_hi)?;
    }
    r.path("fixtures.room_dcr", &mut cfg.fixtures.room_dcr);
    r.path("fixtures.room_eff", &mut cfg.fixtures.room_eff);
    r.path("fixtures.low_dcr", &mut cfg.fixtures.low_dcr);
    r.path("fixtures.low_eff", &mut cfg.fixtures.low_eff);
    r.triple("measured.signal", &mut cfg.measured.signal)?;
    r.triple("measured.decoy", &mut cfg.measured.decoy)?;
    r.float("channel.alpha", &mut cfg.channel.alpha)?;
    r.float("channel.eta_bob", &mut cfg.channel.eta_bob)?;
    r.float("channel.y0", &mut cfg.channel.y0)?;
    r.float("channel.e_d", &mut cfg.channel.e_d)?;
    r.list("sweep.distances", &mut cfg.sweep.distances)?;
    r.list("sweep.lambda_grid", &mut cfg.sweep.lambda_grid)?;
    r.list("sweep.eff_grid", &mut cfg.sweep.eff_grid)?;
    r.list("sweep.eta1_grid", &mut cfg.sweep.eta1_grid)?;
    r.list("sweep.eta2_grid", &mut cfg.sweep.eta2_grid)?;
    r.pairs("sweep.eta_pairs", &mut cfg.sweep.eta_pairs)?;
    r.int("sweep.mc_pulses", &mut cfg.sweep.mc_pulses)?;
    r.int("sweep.mc_configs", &mut cfg.sweep.mc_configs)?;
    r.int("sweep.seed", &mut cfg.sweep.seed)?;
    r.path("output.path", &mut cfg.output.path);
    if let Some(v) = r.take("output.format") {
        cfg.output.format = v.parse().map_err(|reason| ConfigError::Invalid {
            key: "output.format".into(),
            reason,
        })?;
    }

    if let Some(key) = r.entries.keys().next() {
        return Err(ConfigError::UnknownKey { key: key.clone() });
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Reader<'a> {
    entries: BTreeMap<String, String>,
    base: &'a Path,
}

impl Reader<'_> {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn float(&mut self, key: &str, slot: &mut f64) -> Result<(), ConfigError> {
        if let Some(v) = self.take(key) {
            *slot = parse_f64(key, &v)?;
        }
        Ok(())
    }

    fn int<T: std::str::FromStr>(&mut self, key: &str, slot: &mut T) -> Result<(), ConfigError> {
        if let Some(v) = self.take(key) {
            // accept integral values written in float notation, e.g. 1e6
            *slot = match v.parse::<T>() {
                Ok(x) => x,
                Err(_) => {
                    let f = parse_f64(key, &v)?;
                    if f.fract() != 0.0 || f < 0.0 {
                        return Err(bad_value(key, &v, "expected a non-negative integer"));
                    }
                    format!("{f:.0}")
                        .parse::<T>()
                        .map_err(|_| bad_value(key, &v, "expected a non-negative integer"))?
                }
            };
        }
        Ok(())
    }

    fn path(&mut self, key: &str, slot: &mut Option<PathBuf>) {
        if let Some(v) = self.take(key) {
            *slot = if v.is_empty() {
                None
            } else {
                Some(self.base.join(v))
            };
        }
    }

    fn list(&mut self, key: &str, slot: &mut Vec<f64>) -> Result<(), ConfigError> {
        if let Some(v) = self.take(key) {
            *slot = parse_list(key, &v)?;
        }
        Ok(())
    }

    fn triple(&mut self, key: &str, slot: &mut Option<[f64; 3]>) -> Result<(), ConfigError> {
        if let Some(v) = self.take(key) {
            let values = v
                .split(',')
                .map(|s| parse_f64(key, s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            let arr: [f64; 3] = values
                .try_into()
                .map_err(|_| bad_value(key, &v, "expected three values p0, p1, p2"))?;
            *slot = Some(arr);
        }
        Ok(())
    }

    fn pairs(&mut self, key: &str, slot: &mut Vec<(f64, f64)>) -> Result<(), ConfigError> {
        if let Some(v) = self.take(key) {
            *slot = v
                .split(',')
                .map(|item| {
                    let (a, b) = item
                        .trim()
                        .split_once('/')
                        .ok_or_else(|| bad_value(key, item, "expected eta1/eta2"))?;
                    Ok((parse_f64(key, a.trim())?, parse_f64(key, b.trim())?))
                })
                .collect::<Result<_, ConfigError>>()?;
        }
        Ok(())
    }
}

fn bad_value(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: format!("{value:?}: {reason}"),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad_value(key, v, "expected a finite number"))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (
                parse_f64(key, start)?,
                parse_f64(key, step)?,
                parse_f64(key, stop)?,
            );
            if !(step > 0.0 && stop >= start) {
                return Err(bad_value(key, v, "range needs step > 0 and stop >= start"));
            }
            if (stop - start) / step > 1e6 {
                return Err(bad_value(key, v, "range has too many points"));
            }
            Ok(arange(start, step, stop))
        }
        [_] if v.is_empty() => Ok(Vec::new()),
        [_] => v.split(',').map(|s| parse_f64(key, s.trim())).collect(),
        _ => Err(bad_value(key, v, "expected a list or start:step:stop")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config_str(text, Path::new("/cfg"))
    }

    fn error_key(err: ConfigError) -> String {
        match err {
            ConfigError::Invalid { key, .. }
            | ConfigError::UnknownKey { key }
            | ConfigError::Duplicate { key, .. } => key,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!((cfg.source.mu, cfg.source.nu), (0.6, 0.1));
        assert_eq!((cfg.eta1, cfg.eta2), (0.9, 0.1));
        assert_eq!((cfg.detector.lambda, cfg.detector.eta_d), (5.8e-4, 0.1));
        assert_eq!(cfg.sweep.eta_pairs, PAPER_ETA_PAIRS.to_vec());
        assert_eq!(cfg.sweep.eta1_grid.len(), 9);
        assert_eq!(cfg.sweep.eta2_grid.len(), 9);
    }

    #[test]
    fn comments_and_whitespace() {
        let cfg = parse("# header\n\n  source.mu = 0.5   # signal\nmonitor.eta1=0.8\n").unwrap();
        assert_eq!(cfg.source.mu, 0.5);
        assert_eq!(cfg.eta1, 0.8);
    }

    #[test]
    fn eta_order_is_validated() {
        let err = parse("monitor.eta2 = 0.95\n").unwrap_err();
        assert_eq!(error_key(err), "monitor.eta2");
        let err = parse("monitor.eta1 = 0.3\nmonitor.eta2 = 0.3\n").unwrap_err();
        assert_eq!(error_key(err), "monitor.eta2");
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(
            error_key(parse("source.nu = 0.7").unwrap_err()),
            "source.nu"
        );
        assert_eq!(
            error_key(parse("detector.lambda = 1.5").unwrap_err()),
            "detector.lambda"
        );
        assert_eq!(
            error_key(parse("source.mu = abc").unwrap_err()),
            "source.mu"
        );
        assert_eq!(
            error_key(parse("source.colour = red").unwrap_err()),
            "source.colour"
        );
        assert_eq!(
            error_key(parse("sweep.distances = 5, 3").unwrap_err()),
            "sweep.distances"
        );
        assert_eq!(
            error_key(parse("sweep.eff_grid =").unwrap_err()),
            "sweep.eff_grid"
        );
        assert_eq!(
            error_key(parse("sweep.eta_pairs = 0.1/0.9").unwrap_err()),
            "sweep.eta_pairs"
        );
        assert_eq!(error_key(parse("drift.dcr_lo = 0.1").unwrap_err()), "drift");
        assert_eq!(
            error_key(parse("source.mu = 1\nsource.mu = 2").unwrap_err()),
            "source.mu"
        );
        assert_eq!(
            error_key(parse("measured.signal = 0.5, 0.6").unwrap_err()),
            "measured.signal"
        );
        assert!(matches!(
            parse("just text").unwrap_err(),
            ConfigError::Syntax { line: 1, .. }
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            parse_config(Path::new("/nonexistent/run.conf")),
            Err(ConfigError::Io { .. })
        ));
    }

    #[test]
    fn ranges_and_lists() {
        let cfg = parse(
            "sweep.distances = 0:10:50\nsweep.eff_grid = -0.05, 0, 0.05\nsweep.mc_pulses = 1e5",
        )
        .unwrap();
        assert_eq!(cfg.sweep.distances, vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0]);
        assert_eq!(cfg.sweep.eff_grid, vec![-0.05, 0.0, 0.05]);
        assert_eq!(cfg.sweep.mc_pulses, 100_000);
        assert!(parse("sweep.mc_pulses = 1.5").is_err());
        assert_eq!(arange(0.55, 0.05, 0.95).len(), 9);
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let cfg =
            parse("fixtures.room_dcr = data/room.csv\nsource.signal_file = /abs/a.csv").unwrap();
        assert_eq!(
            cfg.fixtures.room_dcr,
            Some(PathBuf::from("/cfg/data/room.csv"))
        );
        assert_eq!(cfg.source.signal_file, Some(PathBuf::from("/abs/a.csv")));
    }

    #[test]
    fn round_trip() {
        let text = "\
source.mu = 0.55
source.nu = 0.07
source.n_max = 30
source.decoy_file = decoy.csv
detector.eta_d = 0.12
detector.lambda = 6.1e-4
monitor.eta1 = 0.85
monitor.eta2 = 0.15
drift.dcr_lo = -0.1
drift.eff_hi = 0.03
fixtures.low_eff = low_eff.csv
measured.signal = 0.9994, 0.93, 0.6
channel.alpha = 0.2
sweep.distances = 0:3.3:100
sweep.eta_pairs = 0.9/0.1, 0.7/0.3
sweep.seed = 99
output.path = out.csv
output.format = json
";
        let cfg = parse(text).unwrap();
        let again = parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(again.to_text(), cfg.to_text());

        let defaults = RunConfig::default();
        assert_eq!(parse(&defaults.to_text()).unwrap(), defaults);
    }
}
