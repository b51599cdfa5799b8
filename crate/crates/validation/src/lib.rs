//! Reference computations that do not share code paths with the crates they
//! check. Series are summed term by term and the decoy estimate uses the
//! textbook vacuum+weak decoy expressions for Poisson sources.

use qkd_lsm_core::PhotonBounds;

/// Terms kept in the geometric tail sums.
const SERIES_TERMS: i32 = 4000;

/// Bounds on the coefficients after binomial thinning with retention `keep`,
/// given bounds on the coefficients before it.
///
/// Only `a_0, a_1, a_2` are bounded, so every higher coefficient is capped
/// by the upper bound on `a_2`.
pub fn thinned_bounds(b: &PhotonBounds, keep: f64) -> PhotonBounds {
    let q = 1.0 - keep;
    let [s0, s1, s2] = tail_sums(q);
    PhotonBounds {
        a0_u: b.a0_u + b.a1_u * q + b.a2_u * s0,
        a0_l: b.a0_l + b.a1_l * q + b.a2_l * q * q,
        a1_u: keep * (b.a1_u + b.a2_u * s1),
        a1_l: keep * (b.a1_l + 2.0 * b.a2_l * q),
        a2_u: keep * keep * b.a2_u * s2,
        a2_l: keep * keep * b.a2_l,
    }
}

/// Bounds on the coefficients before binomial thinning with retention
/// `keep`, given bounds on the thinned coefficients. Inverts the
/// inequalities of [`thinned_bounds`] starting from `n = 2`.
pub fn unthinned_bounds(b: &PhotonBounds, keep: f64) -> PhotonBounds {
    let q = 1.0 - keep;
    let [s0, s1, s2] = tail_sums(q);
    let a2_u = b.a2_u / (keep * keep);
    let a2_l = b.a2_l / (keep * keep * s2);
    let a1_u = b.a1_u / keep - 2.0 * q * a2_l;
    let a1_l = b.a1_l / keep - a2_u * s1;
    PhotonBounds {
        a0_u: b.a0_u - a1_l * q - a2_l * q * q,
        a0_l: b.a0_l - a1_u * q - a2_u * s0,
        a1_u,
        a1_l,
        a2_u,
        a2_l,
    }
}

/// `sum q^m`, `sum m q^(m-1)` and `sum C(m, 2) q^(m-2)` over `m >= 2`.
fn tail_sums(q: f64) -> [f64; 3] {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for m in 2..SERIES_TERMS {
        let mf = f64::from(m);
        s0 += q.powi(m);
        s1 += mf * q.powi(m - 1);
        s2 += mf * (mf - 1.0) / 2.0 * q.powi(m - 2);
    }
    [s0, s1, s2]
}

/// Decoy-state quantities for a trusted Poisson source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectDecoy {
    pub q_mu: f64,
    pub e_mu: f64,
    pub y1: f64,
    pub delta1: f64,
    pub e1: f64,
    pub rate: f64,
}

/// Vacuum+weak decoy estimate and key rate over a lossy fiber.
#[allow(clippy::too_many_arguments)]
pub fn direct_decoy(
    mu: f64,
    nu: f64,
    alpha: f64,
    eta_bob: f64,
    y0: f64,
    e_d: f64,
    distance: f64,
) -> DirectDecoy {
    let eta = eta_bob * 10f64.powf(-alpha * distance / 10.0);
    let gain = |m: f64| 1.0 - (1.0 - y0) * (-m * eta).exp();
    let (q_mu, q_nu) = (gain(mu), gain(nu));
    let e_mu = (0.5 * y0 + e_d * (q_mu - y0)) / q_mu;
    let y1 = (mu * mu * q_nu * nu.exp() - nu * nu * q_mu * mu.exp() - (mu * mu - nu * nu) * y0)
        / (mu * nu * (mu - nu));
    let delta1 = mu * (-mu).exp() * y1 / q_mu;
    let e1 = ((e_mu * q_mu * mu.exp() - 0.5 * y0) / (y1 * mu)).clamp(0.0, 0.5);
    let rate = (0.5 * q_mu * (delta1 * (1.0 - h2(e1)) - h2(e_mu))).max(0.0);
    DirectDecoy {
        q_mu,
        e_mu,
        y1,
        delta1,
        e1,
        rate,
    }
}

fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
