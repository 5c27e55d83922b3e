//! Mutual informations, private capacity and its optimization over the
//! encoder and receiver parameters.

mod optimize;
mod search;
mod sweep;
mod usd;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::{
    eve_error_ook_in, eve_error_pm_in, ook_channel, pm_channel, BinaryChannel, LinkEnvironment, OokParams, PmParams,
};
use crate::error::{Error, Result};
use crate::photon_stats::{binary_entropy, Probability};

pub use optimize::{optimize_private_capacity, Constraints, ResolvedBounds};
pub use sweep::{capacity_sweep, SweepCell, SweepGrid};
pub use usd::{usd_bob_info, usd_private_capacity};

/// The encoder/receiver families compared throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// On-off keying read by a click/no-click detector (`k = 1`).
    OokThreshold1,
    /// On-off keying with a photon-number threshold `k`.
    OokPnr,
    /// Polarization multiplexing with two photon-counting detectors.
    Pm,
    /// As `Pm` with practical caps on photon number and polarization angle.
    PmConstrained,
    /// Polarization states read by unambiguous discrimination.
    UsdPm,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::OokThreshold1, Scheme::OokPnr, Scheme::Pm, Scheme::PmConstrained, Scheme::UsdPm];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::OokThreshold1 => "ook-k1",
            Scheme::OokPnr => "ook-pnr",
            Scheme::Pm => "pm",
            Scheme::PmConstrained => "pm-constrained",
            Scheme::UsdPm => "usd",
        }
    }

    pub fn is_polarization(self) -> bool {
        matches!(self, Scheme::Pm | Scheme::PmConstrained | Scheme::UsdPm)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown scheme '{s}' (expected one of ook-k1, ook-pnr, pm, pm-constrained, usd)")))
    }
}

/// Parameters of whichever receiver produced a capacity value.
///
/// The polarization schemes may report `Ook` parameters: with `κ = 0` one of
/// the two states is vacuum and the best receiver is a single threshold detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "receiver", rename_all = "kebab-case")]
pub enum SchemeParams {
    Ook(OokParams),
    Pm(PmParams),
}

impl SchemeParams {
    pub fn mean_photons(&self) -> f64 {
        match self {
            SchemeParams::Ook(p) => p.mean_photons,
            SchemeParams::Pm(p) => p.mean_photons,
        }
    }

    pub fn q0(&self) -> f64 {
        match self {
            SchemeParams::Ook(p) => p.q0,
            SchemeParams::Pm(p) => p.q0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub scheme: Scheme,
    /// `max(i_bob - i_eve, 0)`, bits per channel use.
    pub c_p: f64,
    pub i_bob: f64,
    pub i_eve: f64,
    pub best_params: SchemeParams,
}

impl CapacityResult {
    /// Signed difference before the floor at zero.
    pub fn margin(&self) -> f64 {
        self.i_bob - self.i_eve
    }
}

/// `I(X;Y)` of a binary-input binary-output channel at input prior `q0`.
pub fn mutual_info_bob(ch: &BinaryChannel, q0: f64) -> f64 {
    let h = |p: f64| binary_entropy(Probability::new(p).unwrap_or(Probability::ZERO));
    let q1 = 1.0 - q0;
    let output_zero = q0 * ch.eps00 + q1 * ch.eps10;
    (h(output_zero) - q0 * h(ch.eps00) - q1 * h(ch.eps10)).max(0.0)
}

/// Eve's information through a binary symmetric channel with crossover `eps_gamma`.
pub fn mutual_info_eve(eps_gamma: Probability) -> Result<f64> {
    if eps_gamma.value() > 0.5 + 1e-12 {
        return Err(Error::domain(format!(
            "a minimum-error probability cannot exceed 1/2, got {}",
            eps_gamma.value()
        )));
    }
    Ok((1.0 - binary_entropy(eps_gamma)).max(0.0))
}

/// Bob's and Eve's information at one parameter point, without the floor.
pub(crate) fn information_pair(scheme: Scheme, params: &SchemeParams, env: &LinkEnvironment) -> Result<(f64, f64)> {
    match (scheme, params) {
        (Scheme::OokThreshold1, SchemeParams::Ook(p)) if p.threshold_k != 1 => Err(Error::usage(format!(
            "scheme ook-k1 requires threshold k = 1, got {}",
            p.threshold_k
        ))),
        (Scheme::OokThreshold1 | Scheme::OokPnr | Scheme::Pm | Scheme::PmConstrained, SchemeParams::Ook(p)) => {
            let ch = ook_channel(p, env)?;
            Ok((mutual_info_bob(&ch, p.q0), mutual_info_eve(eve_error_ook_in(env, p.mean_photons))?))
        }
        (Scheme::Pm | Scheme::PmConstrained, SchemeParams::Pm(p)) => {
            let ch = pm_channel(p, env)?;
            Ok((mutual_info_bob(&ch, p.q0), mutual_info_eve(eve_error_pm_in(env, p))?))
        }
        (Scheme::UsdPm, SchemeParams::Pm(p)) => {
            p.validate()?;
            if p.kappa != 1.0 {
                return Err(Error::usage("unambiguous discrimination is defined for equal-amplitude states (kappa = 1)"));
            }
            let i_bob = usd_bob_info(env.eta(), p.mean_photons, p.theta)?;
            Ok((i_bob, mutual_info_eve(eve_error_pm_in(env, p))?))
        }
        (s, SchemeParams::Pm(_)) => Err(Error::usage(format!("scheme {s} takes on-off keying parameters"))),
        (s, SchemeParams::Ook(_)) => Err(Error::usage(format!("scheme {s} takes polarization parameters"))),
    }
}

/// Private capacity at a single parameter point.
pub fn private_capacity_point(scheme: Scheme, params: &SchemeParams, env: &LinkEnvironment) -> Result<CapacityResult> {
    let (i_bob, i_eve) = information_pair(scheme, params, env)?;
    Ok(CapacityResult {
        scheme,
        c_p: (i_bob - i_eve).max(0.0),
        i_bob,
        i_eve,
        best_params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::TieRule;
    use approx::assert_abs_diff_eq;

    fn hb(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
        }
    }

    /// Generic `Σ p(x,y) log p(x,y)/(p(x)p(y))`, independent of the entropy form.
    fn generic_mutual_information(ch: &BinaryChannel, q0: f64) -> f64 {
        let px = [q0, 1.0 - q0];
        let rows = [[ch.eps00, ch.eps01], [ch.eps10, ch.eps11]];
        let py = [px[0] * rows[0][0] + px[1] * rows[1][0], px[0] * rows[0][1] + px[1] * rows[1][1]];
        let mut i = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                let joint = px[x] * rows[x][y];
                if joint > 0.0 {
                    i += joint * (rows[x][y] / py[y]).log2();
                }
            }
        }
        i
    }

    #[test]
    fn bob_information_examples() {
        let perfect = BinaryChannel::from_zero_outputs(Probability::ONE, Probability::ZERO);
        assert_abs_diff_eq!(mutual_info_bob(&perfect, 0.5), 1.0, epsilon = 1e-15);
        let useless = BinaryChannel::from_zero_outputs(Probability::new(0.3).unwrap(), Probability::new(0.3).unwrap());
        for q0 in [0.1, 0.5, 0.8] {
            assert_abs_diff_eq!(mutual_info_bob(&useless, q0), 0.0, epsilon = 1e-15);
        }
        let e = (-1.0f64).exp();
        let z = BinaryChannel::from_zero_outputs(Probability::ONE, Probability::new(e).unwrap());
        let uniform_form = hb((1.0 + e) / 2.0) - hb(e) / 2.0;
        assert_abs_diff_eq!(mutual_info_bob(&z, 0.5), uniform_form, epsilon = 1e-15);
        assert_abs_diff_eq!(mutual_info_bob(&z, 0.5), 0.425_530_619_203_450_35, epsilon = 1e-14);
        assert_abs_diff_eq!(mutual_info_bob(&z, 0.5), generic_mutual_information(&z, 0.5), epsilon = 1e-14);
    }

    #[test]
    fn bob_information_matches_generic_routine_at_any_prior() {
        let ch = BinaryChannel::from_zero_outputs(Probability::new(0.91).unwrap(), Probability::new(0.17).unwrap());
        for q0 in [0.05, 0.3, 0.5, 0.77] {
            assert_abs_diff_eq!(mutual_info_bob(&ch, q0), generic_mutual_information(&ch, q0), epsilon = 1e-14);
        }
    }

    #[test]
    fn eve_information_examples() {
        assert_eq!(mutual_info_eve(Probability::HALF).unwrap(), 0.0);
        assert_eq!(mutual_info_eve(Probability::ZERO).unwrap(), 1.0);
        assert_abs_diff_eq!(
            mutual_info_eve(Probability::new(0.146_447).unwrap()).unwrap(),
            0.399_122_969_987_689_4,
            epsilon = 1e-12
        );
        assert!(matches!(mutual_info_eve(Probability::new(0.6).unwrap()), Err(Error::Domain(_))));
    }

    #[test]
    fn point_rejects_mismatched_parameters() {
        let env = LinkEnvironment::new(1.0, 0.01, 0.1).unwrap();
        let ook2 = SchemeParams::Ook(OokParams::new(3.0, 2, 0.5).unwrap());
        let pm = SchemeParams::Pm(PmParams::symmetric(3.0, 0.5).unwrap());
        assert!(matches!(private_capacity_point(Scheme::OokThreshold1, &ook2, &env), Err(Error::Usage(_))));
        assert!(matches!(private_capacity_point(Scheme::OokPnr, &pm, &env), Err(Error::Usage(_))));
        let skew = SchemeParams::Pm(PmParams::new(3.0, 0.5, 0.4, 0.5, TieRule::AlwaysOne).unwrap());
        assert!(matches!(private_capacity_point(Scheme::UsdPm, &skew, &env), Err(Error::Usage(_))));
        assert!(private_capacity_point(Scheme::Pm, &ook2, &env).is_ok());
    }

    #[test]
    fn vacuum_has_no_capacity() {
        let env = LinkEnvironment::new(0.7, 0.2, 0.4).unwrap();
        let r = private_capacity_point(Scheme::OokPnr, &SchemeParams::Ook(OokParams::new(0.0, 2, 0.5).unwrap()), &env).unwrap();
        assert_eq!(r.c_p, 0.0);
    }

    /// Straight-line re-derivation of the k = 1 capacity used as the golden value.
    fn straight_line_k1(eta_alpha2: f64, delta: f64, gamma: f64) -> f64 {
        let e00 = (-delta).exp();
        let e10 = (-(eta_alpha2 + delta)).exp();
        let i_b = hb((e00 + e10) / 2.0) - (hb(e00) + hb(e10)) / 2.0;
        let eps = 0.5 * (1.0 - (1.0 - (-gamma * eta_alpha2).exp()).sqrt());
        (i_b - (1.0 - hb(eps))).max(0.0)
    }

    #[test]
    fn golden_k1_point() {
        let env = LinkEnvironment::new(1.0, 4.8e-6, 0.1).unwrap();
        let p = SchemeParams::Ook(OokParams::new(1.0, 1, 0.5).unwrap());
        let r = private_capacity_point(Scheme::OokThreshold1, &p, &env).unwrap();
        let oracle = straight_line_k1(1.0, 4.8e-6, 0.1);
        assert_abs_diff_eq!(r.c_p, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(r.c_p, 0.355_711_371_844_481_55, epsilon = 1e-12);
    }
}
