//! Photon-number statistics of the transmitter states.
//!
//! A phase-randomized source is diagonal in the Fock basis, so a state is
//! fully described by its photon-number probabilities `a_n`. Distributions
//! are truncated at `n_max`; the probability of `n > n_max` is kept as an
//! explicit `tail_mass` so that downstream estimates can stay conservative.

use std::io::BufRead;
use std::path::Path;

use crate::error::{check_unit, LsmError, Result};

/// Truncation used for Poisson sources when none is given.
pub const DEFAULT_N_MAX: usize = 40;

const NORMALIZATION_TOL: f64 = 1e-12;

/// Truncated photon-number distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    coeffs: Vec<f64>,
    tail_mass: f64,
}

impl PhotonDistribution {
    /// Poisson (weak coherent) distribution with the given mean photon number.
    pub fn poisson(mean: f64, n_max: usize) -> Result<Self> {
        if !(mean >= 0.0 && mean.is_finite()) {
            return Err(LsmError::Domain {
                name: "mean",
                value: mean,
                expected: "finite and >= 0",
            });
        }
        if n_max < 1 {
            return Err(LsmError::Validation {
                what: "poisson truncation",
                reason: "n_max must be at least 1".into(),
            });
        }
        if mean == 0.0 {
            let mut coeffs = vec![0.0; n_max + 1];
            coeffs[0] = 1.0;
            return Ok(Self {
                coeffs,
                tail_mass: 0.0,
            });
        }

        // Recurrence a_{n+1} = a_n * mean / (n + 1), in log space so large
        // means do not underflow e^-mean before the bulk of the mass.
        let ln_mean = mean.ln();
        let mut ln_term = -mean;
        let mut coeffs = Vec::with_capacity(n_max + 1);
        coeffs.push(ln_term.exp());
        for n in 1..=n_max {
            ln_term += ln_mean - (n as f64).ln();
            coeffs.push(ln_term.exp());
        }

        // Sum the tail explicitly instead of 1 - sum: it is tiny for the
        // usual means and the subtraction would only return rounding noise.
        let mut tail = 0.0;
        let mut n = n_max;
        loop {
            n += 1;
            ln_term += ln_mean - (n as f64).ln();
            let term = ln_term.exp();
            tail += term;
            if (n as f64) > mean && term <= tail * f64::EPSILON * 1e-3 {
                break;
            }
            if term == 0.0 && (n as f64) > mean {
                break;
            }
        }

        let dist = Self {
            coeffs,
            tail_mass: tail,
        };
        debug_assert!((dist.total_mass() - 1.0).abs() <= NORMALIZATION_TOL);
        Ok(dist)
    }

    /// Arbitrary distribution, e.g. an untrusted source under test. Missing
    /// probability mass is assigned to the tail.
    pub fn custom(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(LsmError::Validation {
                what: "photon distribution",
                reason: "at least one coefficient is required".into(),
            });
        }
        for (n, &a) in coeffs.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) {
                return Err(LsmError::Validation {
                    what: "photon distribution",
                    reason: format!("a_{n} = {a} is not a probability"),
                });
            }
        }
        let sum: f64 = coeffs.iter().sum();
        if sum > 1.0 + NORMALIZATION_TOL {
            return Err(LsmError::Validation {
                what: "photon distribution",
                reason: format!("coefficients sum to {sum} > 1"),
            });
        }
        Ok(Self {
            coeffs,
            tail_mass: (1.0 - sum).max(0.0),
        })
    }

    /// Reads a single-column CSV with header `a_n`; row `k` holds `a_k`.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let invalid = |reason: String| LsmError::Validation {
            what: "distribution file",
            reason,
        };
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| invalid("empty file".into()))?
            .map_err(|e| invalid(e.to_string()))?;
        if header.trim() != "a_n" {
            return Err(invalid(format!(
                "expected header `a_n`, found `{}`",
                header.trim()
            )));
        }
        let mut coeffs = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line.map_err(|e| invalid(e.to_string()))?;
            let field = line.trim();
            if field.is_empty() {
                continue;
            }
            let a: f64 = field
                .parse()
                .map_err(|_| invalid(format!("row {}: `{field}` is not a number", row + 1)))?;
            coeffs.push(a);
        }
        Self::custom(coeffs)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| LsmError::Validation {
            what: "distribution file",
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Probability of exactly `n` photons; zero beyond the truncation.
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn total_mass(&self) -> f64 {
        self.coeffs.iter().sum::<f64>() + self.tail_mass
    }

    /// Probability that no photon survives an attenuator of transmittance
    /// `eta`: `sum_n (1 - eta)^n a_n`.
    ///
    /// The tail is charged as if all of it sat at `n_max + 1`, which is the
    /// largest contribution it can make, so the result never underestimates
    /// the untruncated value.
    pub fn survival_probability(&self, eta: f64) -> Result<f64> {
        check_unit("eta", eta)?;
        let loss = 1.0 - eta;
        let mut weight = 1.0;
        let mut sum = 0.0;
        for &a in &self.coeffs {
            sum += weight * a;
            weight *= loss;
        }
        sum += weight * self.tail_mass;
        Ok(sum.clamp(0.0, 1.0))
    }
}

/// Signal and decoy mean photon numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceIntensities {
    mu: f64,
    nu: f64,
}

impl SourceIntensities {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu.is_finite() && nu > 0.0 && nu < mu) {
            return Err(LsmError::Validation {
                what: "source intensities",
                reason: format!("need 0 < nu < mu, got mu = {mu}, nu = {nu}"),
            });
        }
        Ok(Self { mu, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn signal(&self, n_max: usize) -> Result<PhotonDistribution> {
        PhotonDistribution::poisson(self.mu, n_max)
    }

    pub fn decoy(&self, n_max: usize) -> Result<PhotonDistribution> {
        PhotonDistribution::poisson(self.nu, n_max)
    }
}

impl Default for SourceIntensities {
    fn default() -> Self {
        Self { mu: 0.6, nu: 0.1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn vacuum_poisson() {
        let d = PhotonDistribution::poisson(0.0, 10).unwrap();
        assert_eq!(d.coeff(0), 1.0);
        assert!(d.coeffs()[1..].iter().all(|&a| a == 0.0));
        assert_eq!(d.tail_mass(), 0.0);
        assert_eq!(d.n_max(), 10);
    }

    #[test]
    fn poisson_values() {
        let d = PhotonDistribution::poisson(0.6, 20).unwrap();
        assert_abs_diff_eq!(d.coeff(0), 0.548812, epsilon = 1e-6);
        let d = PhotonDistribution::poisson(0.1, 20).unwrap();
        assert_abs_diff_eq!(d.coeff(1) / d.coeff(0), 0.1, epsilon = 1e-15);
        for n in 0..20 {
            assert_abs_diff_eq!(
                d.coeff(n + 1) / d.coeff(n),
                0.1 / (n as f64 + 1.0),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn poisson_rejects_negative_mean() {
        assert!(matches!(
            PhotonDistribution::poisson(-0.1, 10),
            Err(LsmError::Domain { name: "mean", .. })
        ));
        assert!(PhotonDistribution::poisson(0.5, 0).is_err());
    }

    #[test]
    fn custom_distributions() {
        let vac = PhotonDistribution::custom(vec![1.0]).unwrap();
        assert_eq!(vac.coeff(0), 1.0);
        assert_eq!(vac.tail_mass(), 0.0);

        let two = PhotonDistribution::custom(vec![0.5, 0.5]).unwrap();
        assert_eq!(
            (two.coeff(0), two.coeff(1), two.tail_mass()),
            (0.5, 0.5, 0.0)
        );

        let short = PhotonDistribution::custom(vec![0.6, 0.3]).unwrap();
        assert_abs_diff_eq!(short.tail_mass(), 0.1, epsilon = 1e-15);

        assert!(PhotonDistribution::custom(vec![0.5, -0.1]).is_err());
        assert!(PhotonDistribution::custom(vec![0.7, 0.4]).is_err());
        assert!(PhotonDistribution::custom(vec![]).is_err());
    }

    #[test]
    fn csv_round() {
        let text = "a_n\n0.5\n0.3\n0.15\n";
        let d = PhotonDistribution::read_csv(text.as_bytes()).unwrap();
        assert_eq!(d.coeffs(), &[0.5, 0.3, 0.15]);
        assert_abs_diff_eq!(d.tail_mass(), 0.05, epsilon = 1e-15);

        assert!(PhotonDistribution::read_csv("n\n0.5\n".as_bytes()).is_err());
        assert!(PhotonDistribution::read_csv("a_n\nabc\n".as_bytes()).is_err());
        assert!(PhotonDistribution::read_csv("".as_bytes()).is_err());
    }

    #[test]
    fn survival_edges() {
        let d = PhotonDistribution::custom(vec![0.6, 0.3]).unwrap();
        assert_abs_diff_eq!(d.survival_probability(0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(d.survival_probability(1.0).unwrap(), 0.6);

        let p = PhotonDistribution::poisson(0.6, 40).unwrap();
        assert_abs_diff_eq!(
            p.survival_probability(0.9).unwrap(),
            0.582748,
            epsilon = 1e-6
        );
        assert_eq!(p.survival_probability(1.0).unwrap(), p.coeff(0));

        assert!(p.survival_probability(-0.01).is_err());
        assert!(p.survival_probability(1.01).is_err());
    }

    #[test]
    fn intensities_validate() {
        assert!(SourceIntensities::new(0.6, 0.1).is_ok());
        assert!(SourceIntensities::new(0.1, 0.6).is_err());
        assert!(SourceIntensities::new(0.6, 0.6).is_err());
        assert!(SourceIntensities::new(0.6, 0.0).is_err());
    }

    fn arb_dist() -> impl Strategy<Value = PhotonDistribution> {
        prop::collection::vec(0.0f64..1.0, 1..12).prop_map(|w| {
            let total: f64 = w.iter().sum::<f64>() + 1e-3;
            PhotonDistribution::custom(w.iter().map(|x| x / total).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn poisson_normalized(mean in 0.0f64..5.0, n_max in 1usize..60) {
            let d = PhotonDistribution::poisson(mean, n_max).unwrap();
            prop_assert!((d.total_mass() - 1.0).abs() <= 1e-12);
            prop_assert!(d.tail_mass() >= 0.0);
            prop_assert!(d.coeffs().iter().all(|&a| (0.0..=1.0).contains(&a)));
        }

        #[test]
        fn survival_monotone_and_above_vacuum(d in arb_dist(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            let s_lo = d.survival_probability(lo).unwrap();
            let s_hi = d.survival_probability(hi).unwrap();
            prop_assert!(s_hi <= s_lo + 1e-15);
            prop_assert!(s_hi >= d.coeff(0) - 1e-15);
            prop_assert!((0.0..=1.0).contains(&s_lo));
        }

        #[test]
        fn poisson_generating_function(mean in 0.0f64..2.0, eta in 0.0f64..=1.0) {
            let d = PhotonDistribution::poisson(mean, 40).unwrap();
            let s = d.survival_probability(eta).unwrap();
            prop_assert!((s - (-mean * eta).exp()).abs() <= 1e-10);
        }

        #[test]
        fn truncation_soundness(mean in 0.0f64..3.0, n_small in 1usize..15, extra in 1usize..20, eta in 0.0f64..=1.0) {
            let small = PhotonDistribution::poisson(mean, n_small).unwrap();
            let large = PhotonDistribution::poisson(mean, n_small + extra).unwrap();
            let diff = (small.survival_probability(eta).unwrap()
                - large.survival_probability(eta).unwrap()).abs();
            prop_assert!(diff <= small.tail_mass() + 1e-15);
        }
    }
}
