//! Passive light source monitoring for decoy-state QKD.
//!
//! The photon-number statistics of an untrusted source are bounded from the
//! zero-click probabilities of a single monitoring detector placed behind a
//! beam splitter and a variable optical attenuator. The bounds can be widened
//! to cover drifts of the detector's dark count and efficiency, and feed a
//! decoy-state key rate.

pub mod bounds;
pub mod detector;
pub mod drift;
pub mod error;
pub mod keyrate;
pub mod source;

pub use bounds::{photon_number_bounds, MonitorSettings, PhotonBounds};
pub use detector::{
    equivalent_splitter, simulate_pulse_train, zero_click_probability, ClickEstimate, DetectorModel,
};
pub use drift::{
    dcr_corrected_bounds, efficiency_down_bounds, efficiency_up_bounds, worst_case_bounds,
    DriftRange,
};
pub use error::{LsmError, Result};
pub use keyrate::{
    binary_entropy, delta1_lower, e1_upper, max_distance, secret_key_rate, simulate_gains,
    ChannelParams, GainStats, KeyRatePoint, LinkModel, RateStatus, SystemConfig,
};
pub use source::{PhotonDistribution, SourceIntensities, DEFAULT_N_MAX};
