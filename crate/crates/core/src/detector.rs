//! Monitoring single-photon detector.
//!
//! A practical detector with efficiency `eta_d` is modeled as an ideal
//! (unit-efficiency) detector behind an attenuator `eta_d`. Choosing the
//! monitoring splitter so that the monitored arm sees the same photon
//! statistics as the channel arm lets the zero-click probability at VOA
//! transmittance `eta` be written directly in terms of the channel-side
//! coefficients `a_n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_unit, LsmError, Result};
use crate::source::PhotonDistribution;

/// Pulses per RNG stream. Fixed so that estimates do not depend on how many
/// workers process the chunks.
const PULSES_PER_STREAM: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    eta_d: f64,
    lambda: f64,
}

impl DetectorModel {
    pub fn new(eta_d: f64, lambda: f64) -> Result<Self> {
        if !(eta_d > 0.0 && eta_d <= 1.0) {
            return Err(LsmError::Domain {
                name: "eta_d",
                value: eta_d,
                expected: "(0, 1]",
            });
        }
        if !(0.0..1.0).contains(&lambda) {
            return Err(LsmError::Domain {
                name: "lambda",
                value: lambda,
                expected: "[0, 1)",
            });
        }
        Ok(Self { eta_d, lambda })
    }

    /// Detection efficiency.
    pub fn eta_d(&self) -> f64 {
        self.eta_d
    }

    /// Dark count probability per pulse.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.eta_d, lambda)
    }

    /// Splitter transmittance that makes the monitored arm equivalent to the channel arm.
    pub fn splitter(&self) -> f64 {
        self.eta_d / (1.0 + self.eta_d)
    }
}

/// Solves `eta_bs = (1 - eta_bs) * eta_d` for the splitter transmittance.
pub fn equivalent_splitter(eta_d: f64) -> Result<f64> {
    if !(eta_d > 0.0 && eta_d <= 1.0) {
        return Err(LsmError::Domain {
            name: "eta_d",
            value: eta_d,
            expected: "(0, 1]",
        });
    }
    Ok(eta_d / (1.0 + eta_d))
}

/// Probability that the monitoring detector stays silent for a pulse drawn
/// from `dist` behind a VOA of transmittance `eta`: `(1 - lambda) P0(eta)`.
///
/// `dist` is the channel-side distribution; the detector efficiency is
/// already absorbed by the splitter choice.
pub fn zero_click_probability(
    dist: &PhotonDistribution,
    eta: f64,
    det: &DetectorModel,
) -> Result<f64> {
    Ok((1.0 - det.lambda()) * dist.survival_probability(eta)?)
}

/// Monte Carlo estimate of a zero-click probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickEstimate {
    pub n_pulses: u64,
    pub n_zero_click: u64,
    pub p_hat: f64,
    pub std_err: f64,
    pub seed: u64,
}

impl ClickEstimate {
    fn from_counts(n_pulses: u64, n_zero_click: u64, seed: u64) -> Self {
        let p_hat = n_zero_click as f64 / n_pulses as f64;
        let std_err = (p_hat * (1.0 - p_hat) / n_pulses as f64).sqrt();
        Self {
            n_pulses,
            n_zero_click,
            p_hat,
            std_err,
            seed,
        }
    }

    /// Distance from `expected` in units of the binomial standard error.
    /// Exact agreement with a degenerate estimate gives 0.
    pub fn z_score(&self, expected: f64) -> f64 {
        let diff = (self.p_hat - expected).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_err
        }
    }
}

/// Simulates `n_pulses` pulses photon by photon.
///
/// Each pulse draws a photon number from `dist` (tail mass lumped at
/// `n_max + 1`), lets every photon reach the ideal detector independently
/// with probability `eta`, and adds a dark count with probability `lambda`.
/// Pulses are split into fixed-size chunks, chunk `k` using ChaCha stream
/// `k` of `seed`, so the result only depends on the inputs and the seed.
pub fn simulate_pulse_train(
    dist: &PhotonDistribution,
    eta: f64,
    det: &DetectorModel,
    n_pulses: u64,
    seed: u64,
) -> Result<ClickEstimate> {
    check_unit("eta", eta)?;
    if n_pulses == 0 {
        return Err(LsmError::Domain {
            name: "n_pulses",
            value: 0.0,
            expected: ">= 1",
        });
    }

    let mut cumulative = Vec::with_capacity(dist.n_max() + 2);
    let mut acc = 0.0;
    for &a in dist.coeffs() {
        acc += a;
        cumulative.push(acc);
    }
    cumulative.push(acc + dist.tail_mass());

    let n_streams = n_pulses.div_ceil(PULSES_PER_STREAM);
    let zero_clicks: u64 = (0..n_streams)
        .into_par_iter()
        .map(|stream| {
            let start = stream * PULSES_PER_STREAM;
            let len = PULSES_PER_STREAM.min(n_pulses - start);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            (0..len)
                .filter(|_| pulse_is_silent(&mut rng, &cumulative, eta, det.lambda()))
                .count() as u64
        })
        .sum();

    Ok(ClickEstimate::from_counts(n_pulses, zero_clicks, seed))
}

fn pulse_is_silent(rng: &mut ChaCha8Rng, cumulative: &[f64], eta: f64, lambda: f64) -> bool {
    let dark = rng.random::<f64>() < lambda;
    let u = rng.random::<f64>();
    let photons = cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1);
    let mut detected = false;
    for _ in 0..photons {
        if rng.random::<f64>() < eta {
            detected = true;
            break;
        }
    }
    !(dark || detected)
}
