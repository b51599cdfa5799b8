//! Interval bounds on `a_0, a_1, a_2` from zero-click probabilities measured
//! at three VOA settings `1 = eta0 > eta1 > eta2 > 0`.

use crate::detector::DetectorModel;
use crate::error::{check_unit, LsmError, Result};

/// A measured `P(eta) / (1 - lambda)` may exceed 1 by this much before the
/// measurement is rejected.
pub const INCONSISTENCY_TOL: f64 = 1e-9;

/// VOA transmittances used by the monitor, plus the matching splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSettings {
    eta1: f64,
    eta2: f64,
    eta_bs: f64,
}

impl MonitorSettings {
    /// `eta0` is always 1.
    pub const ETA0: f64 = 1.0;

    pub fn new(eta1: f64, eta2: f64, det: &DetectorModel) -> Result<Self> {
        if !(eta1 < Self::ETA0 && eta2 < eta1 && eta2 > 0.0) {
            return Err(LsmError::Validation {
                what: "monitor settings",
                reason: format!("need 1 > eta1 > eta2 > 0, got eta1 = {eta1}, eta2 = {eta2}"),
            });
        }
        Ok(Self {
            eta1,
            eta2,
            eta_bs: det.splitter(),
        })
    }

    pub fn eta0(&self) -> f64 {
        Self::ETA0
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    pub fn eta_bs(&self) -> f64 {
        self.eta_bs
    }

    pub fn etas(&self) -> [f64; 3] {
        [Self::ETA0, self.eta1, self.eta2]
    }
}

/// Upper/lower bounds on the first three photon-number probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBounds {
    pub a0_u: f64,
    pub a0_l: f64,
    pub a1_u: f64,
    pub a1_l: f64,
    pub a2_u: f64,
    pub a2_l: f64,
}

impl PhotonBounds {
    /// Degenerate bounds `U = L = a_n`, i.e. a fully trusted source.
    pub fn exact(a0: f64, a1: f64, a2: f64) -> Self {
        Self {
            a0_u: a0,
            a0_l: a0,
            a1_u: a1,
            a1_l: a1,
            a2_u: a2,
            a2_l: a2,
        }
    }

    pub fn upper(&self, n: usize) -> f64 {
        match n {
            0 => self.a0_u,
            1 => self.a1_u,
            2 => self.a2_u,
            _ => panic!("bounds only cover n = 0, 1, 2"),
        }
    }

    pub fn lower(&self, n: usize) -> f64 {
        match n {
            0 => self.a0_l,
            1 => self.a1_l,
            2 => self.a2_l,
            _ => panic!("bounds only cover n = 0, 1, 2"),
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.a0_u, self.a0_l, self.a1_u, self.a1_l, self.a2_u, self.a2_l,
        ]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// True if every interval of `self` contains the matching interval of `inner`.
    pub fn contains(&self, inner: &Self) -> bool {
        (0..3).all(|n| self.upper(n) >= inner.upper(n) && self.lower(n) <= inner.lower(n))
    }

    /// Clamps to `[0, 1]` and pulls each lower bound down to its upper bound.
    pub fn clamped(self) -> Self {
        let fix = |u: f64, l: f64| {
            let u = u.clamp(0.0, 1.0);
            (u, l.clamp(0.0, 1.0).min(u))
        };
        let (a0_u, a0_l) = fix(self.a0_u, self.a0_l);
        let (a1_u, a1_l) = fix(self.a1_u, self.a1_l);
        let (a2_u, a2_l) = fix(self.a2_u, self.a2_l);
        Self {
            a0_u,
            a0_l,
            a1_u,
            a1_l,
            a2_u,
            a2_l,
        }
    }

    /// Componentwise envelope: largest upper and smallest lower bound.
    pub fn hull(&self, other: &Self) -> Self {
        Self {
            a0_u: self.a0_u.max(other.a0_u),
            a0_l: self.a0_l.min(other.a0_l),
            a1_u: self.a1_u.max(other.a1_u),
            a1_l: self.a1_l.min(other.a1_l),
            a2_u: self.a2_u.max(other.a2_u),
            a2_l: self.a2_l.min(other.a2_l),
        }
    }
}

/// Bounds `{a_n^U, a_n^L}` for `n = 0, 1, 2` from zero-click probabilities
/// `p0, p1, p2` measured at `eta0 = 1, eta1, eta2` with a detector of dark
/// count probability `lambda`.
///
/// The dark count enters only through `P0(eta) = P(eta) / (1 - lambda)`,
/// so the result does not depend on `lambda` when the measurements do not.
pub fn photon_number_bounds(
    p0: f64,
    p1: f64,
    p2: f64,
    settings: &MonitorSettings,
    lambda: f64,
) -> Result<PhotonBounds> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(LsmError::Domain {
            name: "lambda",
            value: lambda,
            expected: "[0, 1)",
        });
    }
    check_unit("p0", p0)?;
    check_unit("p1", p1)?;
    check_unit("p2", p2)?;

    let ideal = |p: f64, eta: f64| -> Result<f64> {
        let p_ideal = p / (1.0 - lambda);
        if p_ideal > 1.0 + INCONSISTENCY_TOL {
            return Err(LsmError::InconsistentMeasurement {
                eta,
                p,
                max: 1.0 - lambda,
            });
        }
        Ok(p_ideal)
    };
    let z0 = ideal(p0, MonitorSettings::ETA0)?;
    let z1 = ideal(p1, settings.eta1)?;
    let z2 = ideal(p2, settings.eta2)?;

    let t1 = 1.0 - settings.eta1;
    let t2 = 1.0 - settings.eta2;
    let t1_sq = t1 * t1;
    let t2_sq = t2 * t2;
    let t2_cu = t2_sq * t2;

    let a0 = z0;
    let a1_u = (z1 - z0) / t1;
    let a1_l = (z1 - z0 * (1.0 - t1_sq) - t1_sq) / (t1 - t1_sq);
    let a2_u = (z2 - z0 - t2 * a1_l) / t2_sq;
    let a2_l = (z2 - z0 * (1.0 - t2_cu) - (t2 - t2_cu) * a1_u - t2_cu) / (t2_sq - t2_cu);

    Ok(PhotonBounds {
        a0_u: a0,
        a0_l: a0,
        a1_u,
        a1_l,
        a2_u,
        a2_l,
    }
    .clamped())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::zero_click_probability;
    use crate::source::PhotonDistribution;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn settings(eta1: f64, eta2: f64) -> MonitorSettings {
        MonitorSettings::new(eta1, eta2, &DetectorModel::new(0.1, 0.0).unwrap()).unwrap()
    }

    fn exact_bounds(dist: &PhotonDistribution, s: &MonitorSettings, lambda: f64) -> PhotonBounds {
        let det = DetectorModel::new(0.1, lambda).unwrap();
        let [p0, p1, p2] = s
            .etas()
            .map(|eta| zero_click_probability(dist, eta, &det).unwrap());
        photon_number_bounds(p0, p1, p2, s, lambda).unwrap()
    }

    #[test]
    fn settings_validation() {
        let det = DetectorModel::new(0.1, 0.0).unwrap();
        let s = MonitorSettings::new(0.9, 0.1, &det).unwrap();
        assert_eq!(s.eta0(), 1.0);
        assert_abs_diff_eq!(s.eta_bs(), 1.0 / 11.0, epsilon = 1e-16);
        assert!(MonitorSettings::new(0.1, 0.9, &det).is_err());
        assert!(MonitorSettings::new(1.0, 0.1, &det).is_err());
        assert!(MonitorSettings::new(0.9, 0.0, &det).is_err());
        assert!(MonitorSettings::new(0.5, 0.5, &det).is_err());
    }

    #[test]
    fn vacuum_collapses() {
        let s = settings(0.9, 0.1);
        for lambda in [0.0, 5.4e-6, 5.8e-4, 0.3] {
            let p = 1.0 - lambda;
            let b = photon_number_bounds(p, p, p, &s, lambda).unwrap();
            assert_abs_diff_eq!(b.a0_u, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(b.a0_l, 1.0, epsilon = 1e-12);
            for n in 1..3 {
                assert_abs_diff_eq!(b.upper(n), 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(b.lower(n), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn poisson_example() {
        let s = settings(0.9, 0.1);
        let p0 = (-0.6f64).exp();
        let p1 = (-0.54f64).exp();
        let p2 = (-0.06f64).exp();
        let b = photon_number_bounds(p0, p1, p2, &s, 0.0).unwrap();
        assert_eq!(b.a0_u, p0);
        assert_abs_diff_eq!(b.a1_u, 0.339363, epsilon = 1e-5);
        assert_abs_diff_eq!(
            b.a1_u,
            ((-0.54f64).exp() - (-0.6f64).exp()) / 0.1,
            epsilon = 1e-12
        );
        let a1 = 0.6 * (-0.6f64).exp();
        assert_abs_diff_eq!(a1, 0.329287, epsilon = 1e-6);
        assert!(b.a1_l <= a1 && a1 <= b.a1_u);
    }

    #[test]
    fn dark_count_divides_out_bitwise() {
        let s = settings(0.9, 0.1);
        let dist = PhotonDistribution::poisson(0.6, 40).unwrap();
        let reference = exact_bounds(&dist, &s, 0.0);
        let lambda = 5.8e-4;
        let scaled = s
            .etas()
            .map(|eta| (1.0 - lambda) * dist.survival_probability(eta).unwrap());
        let b = photon_number_bounds(scaled[0], scaled[1], scaled[2], &s, lambda).unwrap();
        assert_eq!(b, reference);
    }

    #[test]
    fn error_paths() {
        let s = settings(0.9, 0.1);
        assert!(matches!(
            photon_number_bounds(0.5, 0.6, 0.9, &s, 1.0),
            Err(LsmError::Domain { name: "lambda", .. })
        ));
        assert!(matches!(
            photon_number_bounds(0.5, 0.6, 0.9995, &s, 1e-3),
            Err(LsmError::InconsistentMeasurement { .. })
        ));
        // within tolerance is accepted
        assert!(photon_number_bounds(0.5, 0.6, 0.999 + 5e-13, &s, 1e-3).is_ok());
        assert!(photon_number_bounds(1.2, 0.6, 0.9, &s, 0.0).is_err());
    }

    #[test]
    fn noisy_measurements_clamp() {
        // A near-vacuum source seen through sampling noise gives negative raw lower bounds.
        let s = settings(0.9, 0.1);
        let b = photon_number_bounds(0.999, 0.99905, 0.9993, &s, 0.0).unwrap();
        for n in 0..3 {
            assert!(0.0 <= b.lower(n) && b.lower(n) <= b.upper(n) && b.upper(n) <= 1.0);
        }
    }

    #[test]
    fn a1_interval_nests_as_eta1_rises() {
        let dist = PhotonDistribution::poisson(0.6, 40).unwrap();
        let mut prev: Option<PhotonBounds> = None;
        for k in 0..9 {
            let eta1 = 0.55 + 0.05 * k as f64;
            let b = exact_bounds(&dist, &settings(eta1, 0.1), 0.0);
            if let Some(p) = prev {
                assert!(b.a1_u <= p.a1_u + 1e-15 && b.a1_l >= p.a1_l - 1e-15);
                assert!(b.a2_l >= p.a2_l - 1e-15);
            }
            prev = Some(b);
        }
    }

    #[test]
    fn a2_lower_tightens_as_eta2_falls() {
        let dist = PhotonDistribution::poisson(0.6, 40).unwrap();
        let mut prev: Option<PhotonBounds> = None;
        for k in 0..9 {
            let eta2 = 0.45 - 0.05 * k as f64;
            let b = exact_bounds(&dist, &settings(0.9, eta2), 0.0);
            if let Some(p) = prev {
                assert!(b.a2_l >= p.a2_l - 1e-15, "eta2 = {eta2}");
            }
            prev = Some(b);
        }
    }

    fn arb_dist() -> impl Strategy<Value = PhotonDistribution> {
        prop::collection::vec(0.0f64..1.0, 3..=11).prop_map(|w| {
            let total: f64 = w.iter().sum::<f64>() + 1e-9;
            PhotonDistribution::custom(w.iter().map(|x| x / total).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn sandwich(dist in arb_dist(), eta1 in 0.05f64..0.99, frac in 0.01f64..0.99) {
            let s = settings(eta1, eta1 * frac);
            let b = exact_bounds(&dist, &s, 0.0);
            for n in 0..3 {
                prop_assert!(b.lower(n) - 1e-9 <= dist.coeff(n));
                prop_assert!(dist.coeff(n) <= b.upper(n) + 1e-9);
                prop_assert!(b.lower(n) <= b.upper(n));
            }
        }

        #[test]
        fn dcr_cancels(dist in arb_dist(), eta1 in 0.05f64..0.99, frac in 0.01f64..0.99, lambda in 0.0f64..0.9) {
            let s = settings(eta1, eta1 * frac);
            let p = s.etas().map(|eta| dist.survival_probability(eta).unwrap());
            let clean = photon_number_bounds(p[0], p[1], p[2], &s, 0.0).unwrap();
            let noisy = photon_number_bounds(
                (1.0 - lambda) * p[0], (1.0 - lambda) * p[1], (1.0 - lambda) * p[2], &s, lambda,
            ).unwrap();
            prop_assert!(clean.max_abs_diff(&noisy) <= 1e-12);
        }

        #[test]
        fn clamping_keeps_order(raw in prop::array::uniform6(-2.0f64..2.0)) {
            let b = PhotonBounds {
                a0_u: raw[0], a0_l: raw[1], a1_u: raw[2], a1_l: raw[3], a2_u: raw[4], a2_l: raw[5],
            }.clamped();
            for n in 0..3 {
                prop_assert!(0.0 <= b.lower(n) && b.lower(n) <= b.upper(n) && b.upper(n) <= 1.0);
            }
        }
    }
}
