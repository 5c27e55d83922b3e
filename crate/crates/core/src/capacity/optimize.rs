//! Two-stage maximization of the private capacity: a coarse grid over the
//! scheme's parameters, then golden-section coordinate refinement around the
//! best grid cells.

use serde::{Deserialize, Serialize};

use super::search::{golden_max, lin_space, log_space};
use super::{information_pair, private_capacity_point, CapacityResult, Scheme, SchemeParams};
use crate::channels::{LinkEnvironment, OokParams, PmParams, TieRule};
use crate::error::{Error, Result};

const MEAN_PHOTON_GRID: usize = 60;
const THETA_GRID: usize = 45;
const DEFAULT_MIN_MEAN_PHOTONS: f64 = 1e-3;
const DEFAULT_MAX_MEAN_PHOTONS: f64 = 1e3;
const DEFAULT_MAX_THRESHOLD_K: u32 = 40;
const CONSTRAINED_MAX_MEAN_PHOTONS: f64 = 20.0;
const CONSTRAINED_MAX_THETA_DEG: f64 = 10.0;
const PRIOR_RANGE: (f64, f64) = (0.05, 0.95);
const REFINE_PASSES: usize = 2;
/// OOK grid cells carried into refinement.
const OOK_CANDIDATES: usize = 3;

/// Optional caps on the searched parameters. Unset fields take the scheme's
/// defaults (see [`Constraints::resolve`]).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub min_mean_photons: Option<f64>,
    pub max_mean_photons: Option<f64>,
    /// Radians.
    pub min_theta: Option<f64>,
    /// Radians.
    pub max_theta: Option<f64>,
    pub max_threshold_k: Option<u32>,
    /// Hold the input prior at 1/2 instead of optimizing it.
    #[serde(default)]
    pub uniform_prior: bool,
}

/// Concrete search box for one scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedBounds {
    pub mean_photons: (f64, f64),
    pub theta: (f64, f64),
    pub max_threshold_k: u32,
    pub uniform_prior: bool,
}

impl Constraints {
    /// Parses flat `key = value` text. `#` starts a comment. Angles are in degrees.
    ///
    /// Keys: `min_mean_photons`, `max_mean_photons`, `min_theta_deg`,
    /// `max_theta_deg`, `max_threshold_k`, `uniform_prior`.
    pub fn from_key_value(text: &str) -> Result<Self> {
        let mut c = Constraints::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::usage(format!("constraints line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::usage(format!("constraints line {}: '{value}' is not a number", lineno + 1)))
            };
            match key {
                "min_mean_photons" => c.min_mean_photons = Some(num()?),
                "max_mean_photons" => c.max_mean_photons = Some(num()?),
                "min_theta_deg" => c.min_theta = Some(num()?.to_radians()),
                "max_theta_deg" => c.max_theta = Some(num()?.to_radians()),
                "max_threshold_k" => {
                    c.max_threshold_k = Some(value.parse().map_err(|_| {
                        Error::usage(format!("constraints line {}: '{value}' is not a positive integer", lineno + 1))
                    })?)
                }
                "uniform_prior" => {
                    c.uniform_prior = value.parse().map_err(|_| {
                        Error::usage(format!("constraints line {}: '{value}' is not true/false", lineno + 1))
                    })?
                }
                other => return Err(Error::usage(format!("constraints line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        Ok(c)
    }

    /// Fills in scheme defaults and checks the box is non-empty.
    ///
    /// Defaults: photon numbers in [1e-3, 1e3], angles in [2°, 90°], `k ≤ 40`.
    /// `pm-constrained` caps photons at 20 and the angle at 10°; `ook-k1` pins `k = 1`.
    pub fn resolve(&self, scheme: Scheme) -> Result<ResolvedBounds> {
        let constrained = scheme == Scheme::PmConstrained;
        let max_mean_default = if constrained { CONSTRAINED_MAX_MEAN_PHOTONS } else { DEFAULT_MAX_MEAN_PHOTONS };
        let max_theta_default = if constrained { CONSTRAINED_MAX_THETA_DEG } else { 90.0 }.to_radians();
        let bounds = ResolvedBounds {
            mean_photons: (
                self.min_mean_photons.unwrap_or(DEFAULT_MIN_MEAN_PHOTONS),
                self.max_mean_photons.unwrap_or(max_mean_default),
            ),
            theta: (self.min_theta.unwrap_or(2f64.to_radians()), self.max_theta.unwrap_or(max_theta_default)),
            max_threshold_k: if scheme == Scheme::OokThreshold1 {
                1
            } else {
                self.max_threshold_k.unwrap_or(DEFAULT_MAX_THRESHOLD_K)
            },
            uniform_prior: self.uniform_prior,
        };
        let (lo, hi) = bounds.mean_photons;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::usage(format!("empty feasible set: mean photon range [{lo}, {hi}]")));
        }
        let (tlo, thi) = bounds.theta;
        if scheme.is_polarization() && !(tlo >= 0.0 && tlo <= thi && thi <= std::f64::consts::PI) {
            return Err(Error::usage(format!(
                "empty feasible set: angle range [{}°, {}°]",
                tlo.to_degrees(),
                thi.to_degrees()
            )));
        }
        if bounds.max_threshold_k == 0 {
            return Err(Error::usage("empty feasible set: max_threshold_k must be at least 1"));
        }
        Ok(bounds)
    }
}

fn margin(scheme: Scheme, params: SchemeParams, env: &LinkEnvironment) -> f64 {
    match information_pair(scheme, &params, env) {
        Ok((i_bob, i_eve)) => i_bob - i_eve,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Grid step in `ln(mean photons)`, used as the refinement bracket half-width.
fn log_step(b: &ResolvedBounds) -> f64 {
    let (lo, hi) = b.mean_photons;
    (hi.ln() - lo.ln()) / (MEAN_PHOTON_GRID - 1) as f64
}

fn clamp_bracket(center: f64, half: f64, (lo, hi): (f64, f64)) -> (f64, f64) {
    ((center - half).max(lo), (center + half).min(hi))
}

/// Best OOK threshold receiver within the bounds, with `k ≤ b.max_threshold_k`.
pub(crate) fn search_ook(scheme: Scheme, env: &LinkEnvironment, b: &ResolvedBounds) -> Option<(f64, OokParams)> {
    let grid = log_space(b.mean_photons.0, b.mean_photons.1, MEAN_PHOTON_GRID);
    let eval = |a: f64, k: u32, q0: f64| margin(scheme, SchemeParams::Ook(OokParams { mean_photons: a, threshold_k: k, q0 }), env);

    let mut cells: Vec<(f64, u32, f64)> = (1..=b.max_threshold_k)
        .filter_map(|k| {
            grid.iter()
                .map(|&a| (eval(a, k, 0.5), k, a))
                .filter(|c| c.0.is_finite())
                .max_by(|x, y| x.0.total_cmp(&y.0))
        })
        .collect();
    cells.sort_by(|x, y| y.0.total_cmp(&x.0));
    cells.truncate(OOK_CANDIDATES);

    let ln_bounds = (b.mean_photons.0.ln(), b.mean_photons.1.ln());
    cells
        .into_iter()
        .map(|(value, k, a)| {
            let mut best = (value, OokParams { mean_photons: a, threshold_k: k, q0: 0.5 });
            let mut half = log_step(b);
            for _ in 0..REFINE_PASSES {
                let p = best.1;
                let (lo, hi) = clamp_bracket(p.mean_photons.ln(), half, ln_bounds);
                let (u, v) = golden_max(|u| eval(u.exp(), k, p.q0), lo, hi, 1e-7);
                if v >= best.0 {
                    best = (v, OokParams { mean_photons: u.exp().clamp(b.mean_photons.0, b.mean_photons.1), ..p });
                }
                if !b.uniform_prior {
                    let p = best.1;
                    let (q, v) = golden_max(|q| eval(p.mean_photons, k, q), PRIOR_RANGE.0, PRIOR_RANGE.1, 1e-6);
                    if v >= best.0 {
                        best = (v, OokParams { q0: q, ..p });
                    }
                }
                half /= 2.0;
            }
            best
        })
        .max_by(|x, y| x.0.total_cmp(&y.0))
}

/// Best majority-click polarization receiver within the bounds.
fn search_pm(scheme: Scheme, env: &LinkEnvironment, b: &ResolvedBounds) -> Option<(f64, PmParams)> {
    let means = log_space(b.mean_photons.0, b.mean_photons.1, MEAN_PHOTON_GRID);
    let thetas = lin_space(b.theta.0, b.theta.1, THETA_GRID);
    let theta_step = if thetas.len() > 1 { thetas[1] - thetas[0] } else { 0.0 };
    let eval = |p: PmParams| margin(scheme, SchemeParams::Pm(p), env);
    let params = |mean_photons, theta, kappa, q0| PmParams { mean_photons, theta, kappa, q0, tie_rule: TieRule::AlwaysOne };

    let ln_bounds = (b.mean_photons.0.ln(), b.mean_photons.1.ln());
    [(0.0, (0.0, 0.5)), (1.0, (0.5, 1.0))]
        .into_iter()
        .filter_map(|(kappa, kappa_range)| {
            let mut start: Option<(f64, PmParams)> = None;
            for &a in &means {
                for &t in &thetas {
                    let p = params(a, t, kappa, 0.5);
                    let v = eval(p);
                    if v.is_finite() && start.is_none_or(|(best, _)| v > best) {
                        start = Some((v, p));
                    }
                }
            }
            let mut best = start?;
            let (mut half_u, mut half_t, mut half_k) = (log_step(b), theta_step, 0.25);
            for _ in 0..REFINE_PASSES {
                let p = best.1;
                let (lo, hi) = clamp_bracket(p.mean_photons.ln(), half_u, ln_bounds);
                let (u, v) = golden_max(|u| eval(PmParams { mean_photons: u.exp(), ..p }), lo, hi, 1e-7);
                if v >= best.0 {
                    best = (v, PmParams { mean_photons: u.exp().clamp(b.mean_photons.0, b.mean_photons.1), ..p });
                }
                let p = best.1;
                let (lo, hi) = clamp_bracket(p.theta, half_t, b.theta);
                let (t, v) = golden_max(|t| eval(PmParams { theta: t, ..p }), lo, hi, 1e-7);
                if v >= best.0 {
                    best = (v, PmParams { theta: t, ..p });
                }
                if !b.uniform_prior {
                    let p = best.1;
                    let (q, v) = golden_max(|q| eval(PmParams { q0: q, ..p }), PRIOR_RANGE.0, PRIOR_RANGE.1, 1e-6);
                    if v >= best.0 {
                        best = (v, PmParams { q0: q, ..p });
                    }
                }
                let p = best.1;
                let (lo, hi) = clamp_bracket(p.kappa, half_k, kappa_range);
                let (k, v) = golden_max(|k| eval(PmParams { kappa: k, ..p }), lo, hi, 1e-6);
                if v >= best.0 {
                    best = (v, PmParams { kappa: k, ..p });
                }
                half_u /= 2.0;
                half_t /= 2.0;
                half_k /= 2.0;
            }
            Some(best)
        })
        .max_by(|x, y| x.0.total_cmp(&y.0))
}

/// Maximizes `I_B - I_E` over the scheme's free parameters.
///
/// - `ook-k1`: mean photon number and prior, `k = 1`.
/// - `ook-pnr`: mean photon number, threshold `k`, prior.
/// - `pm`, `pm-constrained`: mean photon number, angle, amplitude ratio κ and
///   prior for the majority-click receiver, started from κ = 0 and κ = 1;
///   at κ = 0 the encoding is on-off keying, so the single-detector threshold
///   receiver is searched as well.
/// - `usd`: mean photon number and angle.
pub fn optimize_private_capacity(
    scheme: Scheme,
    env: &LinkEnvironment,
    constraints: &Constraints,
) -> Result<CapacityResult> {
    let bounds = constraints.resolve(scheme)?;
    let best: Option<(f64, SchemeParams)> = match scheme {
        Scheme::OokThreshold1 | Scheme::OokPnr => search_ook(scheme, env, &bounds).map(|(v, p)| (v, SchemeParams::Ook(p))),
        Scheme::Pm | Scheme::PmConstrained => {
            let pm = search_pm(scheme, env, &bounds).map(|(v, p)| (v, SchemeParams::Pm(p)));
            let ook = search_ook(scheme, env, &bounds).map(|(v, p)| (v, SchemeParams::Ook(p)));
            [pm, ook].into_iter().flatten().max_by(|x, y| x.0.total_cmp(&y.0))
        }
        Scheme::UsdPm => super::usd::search_usd(env, &bounds).map(|(v, p)| (v, SchemeParams::Pm(p))),
    };
    let (_, params) = best.ok_or_else(|| Error::Numerical(format!("no finite objective value for scheme {scheme}")))?;
    private_capacity_point(scheme, &params, env)
}
