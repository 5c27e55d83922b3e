//! Bob reading the polarization states by unambiguous discrimination, which
//! turns his channel into a binary erasure channel.

use super::optimize::ResolvedBounds;
use super::search::{golden_max, lin_space, log_space};
use super::{information_pair, CapacityResult, Constraints, Scheme, SchemeParams};
use crate::channels::{LinkEnvironment, PmParams, TieRule};
use crate::error::{Error, Result};

/// Capacity of the erasure channel `1 - p_?`, with inconclusive probability
/// `p_? = |⟨ψ₀|ψ₁⟩| = exp(-η|α|²(1 - cos θ))`.
pub fn usd_bob_info(eta: f64, mean_photons: f64, theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::domain(format!("theta must lie in [0, pi], got {theta}")));
    }
    if !(mean_photons >= 0.0 && eta >= 0.0) {
        return Err(Error::domain("photon number and efficiency must be non-negative"));
    }
    Ok(-(-eta * mean_photons * (1.0 - theta.cos())).exp_m1())
}

pub(crate) fn search_usd(env: &LinkEnvironment, b: &ResolvedBounds) -> Option<(f64, PmParams)> {
    let params = |mean_photons, theta| PmParams { mean_photons, theta, kappa: 1.0, q0: 0.5, tie_rule: TieRule::AlwaysOne };
    let eval = |p: PmParams| match information_pair(Scheme::UsdPm, &SchemeParams::Pm(p), env) {
        Ok((i_b, i_e)) => i_b - i_e,
        Err(_) => f64::NEG_INFINITY,
    };
    let means = log_space(b.mean_photons.0, b.mean_photons.1, 60);
    let thetas = lin_space(b.theta.0, b.theta.1, 45);
    let mut best: Option<(f64, PmParams)> = None;
    for &a in &means {
        for &t in &thetas {
            let v = eval(params(a, t));
            if v.is_finite() && best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, params(a, t)));
            }
        }
    }
    let mut best = best?;
    let ln_bounds = (b.mean_photons.0.ln(), b.mean_photons.1.ln());
    let mut half_u = if means.len() > 1 { (ln_bounds.1 - ln_bounds.0) / (means.len() - 1) as f64 } else { 0.0 };
    let mut half_t = if thetas.len() > 1 { thetas[1] - thetas[0] } else { 0.0 };
    for _ in 0..2 {
        let p = best.1;
        let lo = (p.mean_photons.ln() - half_u).max(ln_bounds.0);
        let hi = (p.mean_photons.ln() + half_u).min(ln_bounds.1);
        let (u, v) = golden_max(|u| eval(PmParams { mean_photons: u.exp(), ..p }), lo, hi, 1e-7);
        if v >= best.0 {
            best = (v, PmParams { mean_photons: u.exp().clamp(b.mean_photons.0, b.mean_photons.1), ..p });
        }
        let p = best.1;
        let lo = (p.theta - half_t).max(b.theta.0);
        let hi = (p.theta + half_t).min(b.theta.1);
        let (t, v) = golden_max(|t| eval(PmParams { theta: t, ..p }), lo, hi, 1e-7);
        if v >= best.0 {
            best = (v, PmParams { theta: t, ..p });
        }
        half_u /= 2.0;
        half_t /= 2.0;
    }
    Some(best)
}

/// Maximizes `I_B(erasure) - I_E(Helstrom)` over mean photon number and angle.
pub fn usd_private_capacity(env: &LinkEnvironment, constraints: &Constraints) -> Result<CapacityResult> {
    super::optimize_private_capacity(Scheme::UsdPm, env, constraints)
}
