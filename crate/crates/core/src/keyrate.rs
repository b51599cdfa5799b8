//! Decoy-state key rate with monitored photon-number bounds.
//!
//! Gains and error rates come from a standard fiber channel model. The
//! source enters only through the bounds on `a_0, a_1, a_2` of the signal
//! and decoy states, so an untrusted source is handled by feeding in the
//! monitored (and drift-corrected) bounds.

use crate::bounds::{photon_number_bounds, MonitorSettings, PhotonBounds};
use crate::detector::{zero_click_probability, DetectorModel};
use crate::drift::{worst_case_bounds, DriftRange};
use crate::error::{LsmError, Result};
use crate::source::{PhotonDistribution, SourceIntensities, DEFAULT_N_MAX};

/// Error rate of a background count.
pub const BACKGROUND_ERROR: f64 = 0.5;

/// Distance cap for the key-rate range search, in km.
pub const MAX_SCAN_KM: u32 = 1000;

/// Target resolution of the range search, in km.
pub const DISTANCE_RESOLUTION: f64 = 0.1;

/// Fiber link and receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Fiber loss in dB/km.
    pub alpha: f64,
    /// Receiver transmittance and detection efficiency.
    pub eta_bob: f64,
    /// Background yield per pulse.
    pub y0: f64,
    /// Intrinsic optical error rate.
    pub e_d: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(LsmError::Validation {
                what: "channel parameters",
                reason,
            })
        };
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha = {} must be finite and >= 0", self.alpha));
        }
        if !(self.eta_bob > 0.0 && self.eta_bob <= 1.0) {
            return bad(format!("eta_bob = {} must lie in (0, 1]", self.eta_bob));
        }
        if !(0.0..1.0).contains(&self.y0) {
            return bad(format!("y0 = {} must lie in [0, 1)", self.y0));
        }
        if !(0.0..=0.5).contains(&self.e_d) {
            return bad(format!("e_d = {} must lie in [0, 0.5]", self.e_d));
        }
        Ok(())
    }

    /// Overall transmittance over `distance` km of fiber.
    pub fn transmittance(&self, distance: f64) -> f64 {
        self.eta_bob * 10f64.powf(-self.alpha * distance / 10.0)
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            alpha: 0.21,
            eta_bob: 0.045,
            y0: 1.7e-6,
            e_d: 0.033,
        }
    }
}

/// Observed gains and error rates for one distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainStats {
    pub q_s: f64,
    pub q_d: f64,
    pub y0: f64,
    pub e_s: f64,
    pub e_d_state: f64,
}

/// Why a key-rate point is zero, if it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateStatus {
    Positive,
    /// The decoy estimate's denominator is not positive for these bounds.
    DegenerateDenominator,
    /// No single-photon contribution can be certified.
    NoSinglePhotonFraction,
    /// Privacy amplification consumes everything.
    ZeroRate,
}

impl RateStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Positive => "ok",
            Self::DegenerateDenominator => "degenerate_denominator",
            Self::NoSinglePhotonFraction => "no_single_photon_fraction",
            Self::ZeroRate => "zero_rate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRatePoint {
    pub distance: f64,
    pub rate: f64,
    pub delta1: f64,
    pub e1: f64,
    pub status: RateStatus,
}

pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(LsmError::Domain {
            name: "x",
            value: x,
            expected: "[0, 1]",
        });
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Signal and decoy gains and QBERs at `distance` km.
pub fn simulate_gains(
    ch: &ChannelParams,
    intensities: &SourceIntensities,
    distance: f64,
) -> Result<GainStats> {
    if distance.is_nan() || distance < 0.0 {
        return Err(LsmError::Domain {
            name: "distance",
            value: distance,
            expected: ">= 0",
        });
    }
    ch.validate()?;
    let eta = ch.transmittance(distance);
    let gain = |mean: f64| ch.y0 - (1.0 - ch.y0) * (-mean * eta).exp_m1();
    let qber = |q: f64| {
        if q > 0.0 {
            (BACKGROUND_ERROR * ch.y0 + ch.e_d * (q - ch.y0)) / q
        } else {
            0.0
        }
    };
    let q_s = gain(intensities.mu());
    let q_d = gain(intensities.nu());
    Ok(GainStats {
        q_s,
        q_d,
        y0: ch.y0,
        e_s: qber(q_s),
        e_d_state: qber(q_d),
    })
}

/// Lower bound on the fraction of signal detections caused by single-photon pulses.
///
/// `signal` and `decoy` are bounds on the photon-number coefficients of the
/// two states. With exact Poisson coefficients this is the usual vacuum+weak
/// decoy estimate.
pub fn delta1_lower(signal: &PhotonBounds, decoy: &PhotonBounds, gains: &GainStats) -> Result<f64> {
    let denom = gains.q_s * (decoy.a1_u * signal.a2_l - signal.a1_l * decoy.a2_u);
    if denom.is_nan() || denom <= 0.0 {
        return Err(LsmError::Degenerate(
            "a1'^U a2^L - a1^L a2'^U must be positive",
        ));
    }
    let num = signal.a1_l
        * (signal.a2_l * gains.q_d - decoy.a2_u * gains.q_s - signal.a2_l * decoy.a0_u * gains.y0
            + decoy.a2_u * signal.a0_l * gains.y0);
    Ok((num / denom).clamp(0.0, 1.0))
}

/// Upper bound on the single-photon error rate, clamped to `[0, 0.5]`.
pub fn e1_upper(gains: &GainStats, delta1: f64, signal: &PhotonBounds) -> Result<f64> {
    if !(delta1 > 0.0 && gains.q_s > 0.0) {
        return Err(LsmError::UndefinedRate(delta1));
    }
    let e1 =
        (gains.e_s * gains.q_s - BACKGROUND_ERROR * gains.y0 * signal.a0_l) / (delta1 * gains.q_s);
    Ok(e1.clamp(0.0, 0.5))
}

/// `R = q/2 Q_s [delta1 (1 - H(e1)) - H(E_s)]` with sifting factor 1/2 and
/// perfect error correction, floored at zero.
pub fn secret_key_rate(gains: &GainStats, delta1: f64, e1: f64) -> Result<f64> {
    let r = 0.5 * gains.q_s * (delta1 * (1.0 - binary_entropy(e1)?) - binary_entropy(gains.e_s)?);
    Ok(r.max(0.0))
}

/// Everything needed to evaluate the key rate as a function of distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    pub intensities: SourceIntensities,
    pub channel: ChannelParams,
    pub signal: PhotonBounds,
    pub decoy: PhotonBounds,
}

impl LinkModel {
    /// Link with a trusted Poisson source: bounds collapse to the exact coefficients.
    pub fn trusted(intensities: SourceIntensities, channel: ChannelParams) -> Self {
        let exact = |mean: f64| {
            let a0 = (-mean).exp();
            PhotonBounds::exact(a0, a0 * mean, a0 * mean * mean / 2.0)
        };
        Self {
            intensities,
            channel,
            signal: exact(intensities.mu()),
            decoy: exact(intensities.nu()),
        }
    }

    pub fn point(&self, distance: f64) -> Result<KeyRatePoint> {
        let gains = simulate_gains(&self.channel, &self.intensities, distance)?;
        let zero = |delta1: f64, status| KeyRatePoint {
            distance,
            rate: 0.0,
            delta1,
            e1: 0.5,
            status,
        };
        let delta1 = match delta1_lower(&self.signal, &self.decoy, &gains) {
            Ok(d) => d,
            Err(LsmError::Degenerate(_)) => {
                return Ok(zero(0.0, RateStatus::DegenerateDenominator))
            }
            Err(e) => return Err(e),
        };
        if delta1 <= 0.0 {
            return Ok(zero(0.0, RateStatus::NoSinglePhotonFraction));
        }
        let e1 = e1_upper(&gains, delta1, &self.signal)?;
        let rate = secret_key_rate(&gains, delta1, e1)?;
        let status = if rate > 0.0 {
            RateStatus::Positive
        } else {
            RateStatus::ZeroRate
        };
        Ok(KeyRatePoint {
            distance,
            rate,
            delta1,
            e1,
            status,
        })
    }

    pub fn rate(&self, distance: f64) -> Result<f64> {
        Ok(self.point(distance)?.rate)
    }

    /// Largest distance with a positive key rate, to within
    /// [`DISTANCE_RESOLUTION`]. Scans in 1 km steps, then bisects the last
    /// positive step. Returns 0 if no key can be made even at 0 km.
    pub fn max_distance(&self) -> Result<f64> {
        if self.rate(0.0)? <= 0.0 {
            return Ok(0.0);
        }
        for km in 1..=MAX_SCAN_KM {
            let d = f64::from(km);
            if self.rate(d)? > 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (d - 1.0, d);
            while hi - lo > DISTANCE_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                if self.rate(mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(lo);
        }
        Ok(f64::from(MAX_SCAN_KM))
    }
}

/// A complete monitored QKD system: source, monitor, drift range and channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub intensities: SourceIntensities,
    /// Photon-number distributions actually emitted for signal and decoy.
    pub signal_source: PhotonDistribution,
    pub decoy_source: PhotonDistribution,
    pub detector: DetectorModel,
    pub eta1: f64,
    pub eta2: f64,
    pub drift: DriftRange,
    pub channel: ChannelParams,
    /// Zero-click probabilities to use instead of the modeled ones.
    pub measured_signal: Option<[f64; 3]>,
    pub measured_decoy: Option<[f64; 3]>,
}

impl SystemConfig {
    /// Poisson source with the given intensities and no drift.
    pub fn poisson(
        intensities: SourceIntensities,
        detector: DetectorModel,
        eta1: f64,
        eta2: f64,
        channel: ChannelParams,
    ) -> Result<Self> {
        Ok(Self {
            intensities,
            signal_source: intensities.signal(DEFAULT_N_MAX)?,
            decoy_source: intensities.decoy(DEFAULT_N_MAX)?,
            detector,
            eta1,
            eta2,
            drift: DriftRange::none(),
            channel,
            measured_signal: None,
            measured_decoy: None,
        })
    }

    pub fn with_drift(mut self, drift: DriftRange) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_monitor(mut self, eta1: f64, eta2: f64) -> Self {
        self.eta1 = eta1;
        self.eta2 = eta2;
        self
    }

    pub fn with_detector(mut self, detector: DetectorModel) -> Self {
        self.detector = detector;
        self
    }

    pub fn settings(&self) -> Result<MonitorSettings> {
        MonitorSettings::new(self.eta1, self.eta2, &self.detector)
    }

    /// Zero-click probabilities at `eta0, eta1, eta2` for one source state.
    pub fn zero_click_probabilities(&self, dist: &PhotonDistribution) -> Result<[f64; 3]> {
        let [e0, e1, e2] = self.settings()?.etas();
        Ok([
            zero_click_probability(dist, e0, &self.detector)?,
            zero_click_probability(dist, e1, &self.detector)?,
            zero_click_probability(dist, e2, &self.detector)?,
        ])
    }

    /// Bounds from the nominal detector parameters, before drift correction.
    pub fn nominal_bounds(&self) -> Result<(PhotonBounds, PhotonBounds)> {
        let settings = self.settings()?;
        let lambda = self.detector.lambda();
        let bound =
            |measured: Option<[f64; 3]>, dist: &PhotonDistribution| -> Result<PhotonBounds> {
                let [p0, p1, p2] = match measured {
                    Some(p) => p,
                    None => self.zero_click_probabilities(dist)?,
                };
                photon_number_bounds(p0, p1, p2, &settings, lambda)
            };
        Ok((
            bound(self.measured_signal, &self.signal_source)?,
            bound(self.measured_decoy, &self.decoy_source)?,
        ))
    }

    /// Drift-corrected bounds for signal and decoy.
    pub fn corrected_bounds(&self) -> Result<(PhotonBounds, PhotonBounds)> {
        let settings = self.settings()?;
        let lambda = self.detector.lambda();
        let (s, d) = self.nominal_bounds()?;
        Ok((
            worst_case_bounds(&s, &self.drift, &settings, lambda)?,
            worst_case_bounds(&d, &self.drift, &settings, lambda)?,
        ))
    }

    pub fn link_model(&self) -> Result<LinkModel> {
        let (signal, decoy) = self.corrected_bounds()?;
        Ok(LinkModel {
            intensities: self.intensities,
            channel: self.channel,
            signal,
            decoy,
        })
    }
}

/// Largest distance with a positive key rate for a monitored system.
pub fn max_distance(cfg: &SystemConfig) -> Result<f64> {
    cfg.link_model()?.max_distance()
}
