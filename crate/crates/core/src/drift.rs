//! Worst-case corrections of [`PhotonBounds`] for drifts of the monitoring
//! detector's dark count probability and detection efficiency.
//!
//! Bounds are computed with the nominal detector parameters. When the real
//! parameters wander inside a measured range, every bound is replaced by its
//! extreme over that range so that the key rate stays a lower bound.

use crate::bounds::{MonitorSettings, PhotonBounds};
use crate::error::{LsmError, Result};

/// Largest relative efficiency drift accepted in either direction.
pub const MAX_EFFICIENCY_DRIFT: f64 = 0.5;

/// Largest absolute dark count change `|delta * lambda|` handled by the
/// first-order DCR correction.
pub const MAX_DCR_SHIFT: f64 = 0.1;

/// Relative drift ranges around the nominal detector parameters.
///
/// Dark count drift `d` means `lambda' = (1 + d) lambda`; efficiency drift
/// `e` means `eta_d' = (1 + e) eta_d`. Both ranges contain the nominal point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftRange {
    pub dcr_rel_lo: f64,
    pub dcr_rel_hi: f64,
    pub eff_rel_lo: f64,
    pub eff_rel_hi: f64,
}

impl DriftRange {
    pub fn new(dcr_rel_lo: f64, dcr_rel_hi: f64, eff_rel_lo: f64, eff_rel_hi: f64) -> Result<Self> {
        let invalid = |reason: String| LsmError::Validation {
            what: "drift range",
            reason,
        };
        let all = [dcr_rel_lo, dcr_rel_hi, eff_rel_lo, eff_rel_hi];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("bounds must be finite".into()));
        }
        if !(dcr_rel_lo <= 0.0 && 0.0 <= dcr_rel_hi) {
            return Err(invalid(format!(
                "dcr range [{dcr_rel_lo}, {dcr_rel_hi}] must contain 0"
            )));
        }
        if !(eff_rel_lo <= 0.0 && 0.0 <= eff_rel_hi) {
            return Err(invalid(format!(
                "efficiency range [{eff_rel_lo}, {eff_rel_hi}] must contain 0"
            )));
        }
        if dcr_rel_lo < -1.0 {
            return Err(invalid(format!(
                "dcr_rel_lo = {dcr_rel_lo} would make the dark count negative"
            )));
        }
        if eff_rel_lo <= -MAX_EFFICIENCY_DRIFT || eff_rel_hi > MAX_EFFICIENCY_DRIFT {
            return Err(invalid(format!(
                "efficiency range [{eff_rel_lo}, {eff_rel_hi}] exceeds the first-order regime (-{MAX_EFFICIENCY_DRIFT}, {MAX_EFFICIENCY_DRIFT}]"
            )));
        }
        Ok(Self {
            dcr_rel_lo,
            dcr_rel_hi,
            eff_rel_lo,
            eff_rel_hi,
        })
    }

    /// No drift at all.
    pub fn none() -> Self {
        Self {
            dcr_rel_lo: 0.0,
            dcr_rel_hi: 0.0,
            eff_rel_lo: 0.0,
            eff_rel_hi: 0.0,
        }
    }

    pub fn dcr_only(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, 0.0, 0.0)
    }

    pub fn efficiency_only(lo: f64, hi: f64) -> Result<Self> {
        Self::new(0.0, 0.0, lo, hi)
    }

    /// Range spanned by a series of measured values around `nominal`,
    /// widened if needed so that it contains the nominal point.
    pub fn relative_span(min: f64, max: f64, nominal: f64) -> Result<(f64, f64)> {
        if !(nominal > 0.0 && min > 0.0 && min <= max) {
            return Err(LsmError::Validation {
                what: "drift span",
                reason: format!(
                    "need 0 < min <= max and nominal > 0, got [{min}, {max}] around {nominal}"
                ),
            });
        }
        Ok((
            (min / nominal - 1.0).min(0.0),
            (max / nominal - 1.0).max(0.0),
        ))
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::none()
    }
}

impl Default for DriftRange {
    fn default() -> Self {
        Self::none()
    }
}

/// First-order bounds for a dark count of `(1 + delta) lambda` when the
/// bounds `b` were computed with `lambda`.
///
/// With `eps = delta lambda / (1 - lambda)` the exact recomputation gives
/// `a -> (1 + eps)(a + k) - k + O(eps^2)` where the offset `k` is
/// `(1 - eta1)/eta1` for `a1^L`, `(1 - eta2)/eta2` for `a2^L`,
/// `-(1 - eta1)/(eta1 (1 - eta2))` for `a2^U` (it is built from `a1^L`)
/// and zero for the rest.
pub fn dcr_corrected_bounds(
    b: &PhotonBounds,
    delta: f64,
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
    let shift = delta * lambda;
    if shift.is_nan() || shift.abs() >= MAX_DCR_SHIFT || delta < -1.0 {
        return Err(LsmError::Domain {
            name: "delta",
            value: delta,
            expected: "delta >= -1 and |delta * lambda| < 0.1",
        });
    }
    if shift == 0.0 {
        return Ok(*b);
    }

    let eps = shift / (1.0 - lambda);
    let scale = 1.0 + eps;
    let k1 = (1.0 - settings.eta1()) / settings.eta1();
    let k2 = (1.0 - settings.eta2()) / settings.eta2();
    let k2_upper = -k1 / (1.0 - settings.eta2());

    Ok(PhotonBounds {
        a0_u: b.a0_u * scale,
        a0_l: b.a0_l * scale,
        a1_u: b.a1_u * scale,
        a1_l: b.a1_l * scale + eps * k1,
        a2_u: b.a2_u * scale + eps * k2_upper,
        a2_l: b.a2_l * scale + eps * k2,
    }
    .clamped())
}

/// Bounds on the channel-side coefficients when the detector efficiency has
/// risen by the relative amount `delta`, from bounds `b` computed with the
/// nominal efficiency.
pub fn efficiency_up_bounds(b: &PhotonBounds, delta: f64) -> Result<PhotonBounds> {
    if !(0.0..1.0).contains(&delta) {
        return Err(LsmError::Domain {
            name: "delta",
            value: delta,
            expected: "[0, 1)",
        });
    }
    if delta == 0.0 {
        return Ok(*b);
    }
    let d = delta;
    let keep = 1.0 - d;

    Ok(PhotonBounds {
        a0_u: b.a0_u + b.a1_u * d + b.a2_u * d * d / keep,
        a0_l: b.a0_l + b.a1_l * d + b.a2_l * d * d,
        a1_u: keep * (b.a1_u + b.a2_u * (2.0 * d - d * d) / (keep * keep)),
        a1_l: keep * (b.a1_l + b.a2_l * 2.0 * d),
        a2_u: b.a2_u / keep,
        a2_l: b.a2_l * keep * keep,
    }
    .clamped())
}

/// Bounds on the channel-side coefficients when the detector efficiency has
/// fallen by the relative amount `sigma`.
///
/// Works with `delta = sigma / (1 - sigma)`, so that `eta_d = (1 + delta) eta_d'`.
/// The `n = 2` bounds are corrected first because the `n = 1` and `n = 0`
/// corrections use them.
pub fn efficiency_down_bounds(b: &PhotonBounds, sigma: f64) -> Result<PhotonBounds> {
    if !(0.0..MAX_EFFICIENCY_DRIFT).contains(&sigma) {
        return Err(LsmError::Domain {
            name: "sigma",
            value: sigma,
            expected: "[0, 0.5)",
        });
    }
    if sigma == 0.0 {
        return Ok(*b);
    }
    let d = sigma / (1.0 - sigma);
    let keep = 1.0 - d;

    let a2_u = b.a2_u / (keep * keep);
    let a2_l = b.a2_l * keep;
    let a1_u = b.a1_u / keep - a2_l * 2.0 * d;
    let a1_l = b.a1_l / keep - a2_u * (2.0 * d - d * d) / (keep * keep);
    let a0_u = b.a0_u - a1_l * d - a2_l * d * d;
    let a0_l = b.a0_l - a1_u * d - a2_u * d * d / keep;

    Ok(PhotonBounds {
        a0_u,
        a0_l,
        a1_u,
        a1_l,
        a2_u,
        a2_l,
    }
    .clamped())
}

/// Extreme bounds over a drift range.
///
/// The DCR correction is affine in the drift, so its extremes sit at the
/// range endpoints. The efficiency correction then takes the envelope of the
/// rising correction at `eff_rel_hi`, the falling one at `|eff_rel_lo|`, and
/// the uncorrected bounds (the nominal point is always inside the range).
pub fn worst_case_bounds(
    b: &PhotonBounds,
    range: &DriftRange,
    settings: &MonitorSettings,
    lambda: f64,
) -> Result<PhotonBounds> {
    let lo = dcr_corrected_bounds(b, range.dcr_rel_lo, settings, lambda)?;
    let hi = dcr_corrected_bounds(b, range.dcr_rel_hi, settings, lambda)?;
    let after_dcr = b.hull(&lo).hull(&hi);

    let up = efficiency_up_bounds(&after_dcr, range.eff_rel_hi)?;
    let down = efficiency_down_bounds(&after_dcr, -range.eff_rel_lo)?;
    Ok(after_dcr.hull(&up).hull(&down).clamped())
}
