//! Classical binary channels induced by Bob's receivers, and Eve's
//! minimum-error (Helstrom) discrimination error for both encodings.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photon_stats::{click_difference_split, poisson_cdf_below, Probability, Rate};

/// Tolerance on the row sums of a [`BinaryChannel`].
pub const CHANNEL_ROW_TOLERANCE: f64 = 1e-9;

/// Physical link seen by Bob and the wiretapper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEnvironment {
    eta: f64,
    delta: Rate,
    gamma: f64,
    eve_includes_receiver_efficiency: bool,
}

impl LinkEnvironment {
    /// `eta`: end-to-end efficiency including Bob's detector; `delta`: noise
    /// clicks per pulse per detector; `gamma`: fraction of Bob's flux that Eve collects.
    pub fn new(eta: f64, delta: f64, gamma: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::domain(format!("eta must lie in (0, 1], got {eta}")));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::domain(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        Ok(LinkEnvironment {
            eta,
            delta: Rate::new(delta)?,
            gamma,
            eve_includes_receiver_efficiency: true,
        })
    }

    /// Whether Eve's exponent carries Bob's efficiency `eta` (default) or
    /// only `gamma`. Applied to both encodings alike.
    pub fn with_eve_receiver_efficiency(mut self, included: bool) -> Self {
        self.eve_includes_receiver_efficiency = included;
        self
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delta(&self) -> Rate {
        self.delta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eve_includes_receiver_efficiency(&self) -> bool {
        self.eve_includes_receiver_efficiency
    }

    /// The efficiency Eve's channel applies to the emitted mean photon number.
    pub fn eve_efficiency(&self) -> f64 {
        if self.eve_includes_receiver_efficiency {
            self.gamma * self.eta
        } else {
            self.gamma
        }
    }
}

/// On-off keying: bit 0 is vacuum, bit 1 a coherent pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OokParams {
    /// Mean photon number at the channel input.
    pub mean_photons: f64,
    /// Bob outputs 1 when he counts at least this many clicks.
    pub threshold_k: u32,
    /// Prior of input bit 0.
    pub q0: f64,
}

impl OokParams {
    pub fn new(mean_photons: f64, threshold_k: u32, q0: f64) -> Result<Self> {
        let p = OokParams { mean_photons, threshold_k, q0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_photons.is_finite() && self.mean_photons >= 0.0) {
            return Err(Error::domain(format!("mean photon number must be >= 0, got {}", self.mean_photons)));
        }
        if self.threshold_k == 0 {
            return Err(Error::domain("threshold k must be at least 1"));
        }
        check_prior(self.q0)
    }
}

/// How Bob's majority-click receiver resolves equal counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    AlwaysZero,
    #[default]
    AlwaysOne,
    /// Choose 0 with probability `q0`.
    Random,
}

impl TieRule {
    /// Fraction of tied outcomes decoded as bit 0.
    pub fn share_to_zero(self, q0: f64) -> f64 {
        match self {
            TieRule::AlwaysZero => 1.0,
            TieRule::AlwaysOne => 0.0,
            TieRule::Random => q0,
        }
    }
}

impl std::str::FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "always-zero" | "zero" | "0" => Ok(TieRule::AlwaysZero),
            "always-one" | "one" | "1" => Ok(TieRule::AlwaysOne),
            "random" => Ok(TieRule::Random),
            other => Err(Error::usage(format!("unknown tie rule '{other}'"))),
        }
    }
}

/// Polarization-multiplexed encoding.
///
/// Bit 0 is `|α⟩_H ⊗ |0⟩_V`; bit 1 is a coherent state of mean `κ|α|²`
/// linearly polarized at `theta` from horizontal. The receiver rotates by
/// `δ = π/4 - θ/2` before a two-detector polarization measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmParams {
    pub mean_photons: f64,
    /// Polarization angle between the two states, radians.
    pub theta: f64,
    /// `|β|² / |α|²`.
    pub kappa: f64,
    pub q0: f64,
    pub tie_rule: TieRule,
}

impl PmParams {
    pub fn new(mean_photons: f64, theta: f64, kappa: f64, q0: f64, tie_rule: TieRule) -> Result<Self> {
        let p = PmParams { mean_photons, theta, kappa, q0, tie_rule };
        p.validate()?;
        Ok(p)
    }

    /// Equal-amplitude states with a uniform prior and ties decoded as 1.
    pub fn symmetric(mean_photons: f64, theta: f64) -> Result<Self> {
        Self::new(mean_photons, theta, 1.0, 0.5, TieRule::AlwaysOne)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_photons.is_finite() && self.mean_photons >= 0.0) {
            return Err(Error::domain(format!("mean photon number must be >= 0, got {}", self.mean_photons)));
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(Error::domain(format!("theta must lie in [0, pi], got {}", self.theta)));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::domain(format!("kappa must lie in [0, 1], got {}", self.kappa)));
        }
        check_prior(self.q0)
    }

    /// Receiver rotation that best separates the two states.
    pub fn rotation(&self) -> f64 {
        FRAC_PI_4 - self.theta / 2.0
    }

    /// Mean clicks at (detector 0, detector 1) for each input bit, noise included.
    pub fn detector_rates(&self, env: &LinkEnvironment) -> [(Rate, Rate); 2] {
        let signal = env.eta() * self.mean_photons;
        let d = env.delta().value();
        let delta = self.rotation();
        let rate = |x: f64| Rate::new(x.max(0.0)).expect("finite non-negative rate");
        let (c0, s0) = (delta.cos().powi(2), delta.sin().powi(2));
        let (c1, s1) = ((self.theta + delta).cos().powi(2), (self.theta + delta).sin().powi(2));
        [
            (rate(signal * c0 + d), rate(signal * s0 + d)),
            (rate(self.kappa * signal * c1 + d), rate(self.kappa * signal * s1 + d)),
        ]
    }
}

fn check_prior(q0: f64) -> Result<()> {
    if !(q0 > 0.0 && q0 < 1.0) {
        return Err(Error::domain(format!("input prior q0 must lie in (0, 1), got {q0}")));
    }
    Ok(())
}

/// Conditional output probabilities `eps_xy = P(y | x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryChannel {
    pub eps00: f64,
    pub eps01: f64,
    pub eps10: f64,
    pub eps11: f64,
}

impl BinaryChannel {
    /// Builds the channel from the probabilities of outputting 0.
    pub fn from_zero_outputs(eps00: Probability, eps10: Probability) -> Self {
        BinaryChannel {
            eps00: eps00.value(),
            eps01: eps00.complement().value(),
            eps10: eps10.value(),
            eps11: eps10.complement().value(),
        }
    }

    pub fn new(eps00: f64, eps01: f64, eps10: f64, eps11: f64) -> Result<Self> {
        for v in [eps00, eps01, eps10, eps11] {
            Probability::new(v)?;
        }
        if (eps00 + eps01 - 1.0).abs() > CHANNEL_ROW_TOLERANCE || (eps10 + eps11 - 1.0).abs() > CHANNEL_ROW_TOLERANCE {
            return Err(Error::domain("binary channel rows must each sum to 1"));
        }
        Ok(BinaryChannel { eps00, eps01, eps10, eps11 })
    }

    /// Error probability at a uniform prior.
    pub fn qber(&self) -> f64 {
        (self.eps01 + self.eps10) / 2.0
    }

    /// Error probability at input prior `q0`.
    pub fn error_probability(&self, q0: f64) -> f64 {
        q0 * self.eps01 + (1.0 - q0) * self.eps10
    }
}

/// Single-detector threshold receiver for on-off keying.
pub fn ook_channel(params: &OokParams, env: &LinkEnvironment) -> Result<BinaryChannel> {
    params.validate()?;
    let k = u64::from(params.threshold_k);
    let signal = Rate::new(env.eta() * params.mean_photons + env.delta().value())?;
    Ok(BinaryChannel::from_zero_outputs(
        poisson_cdf_below(env.delta(), k),
        poisson_cdf_below(signal, k),
    ))
}

/// Two-detector majority-click receiver for the polarization encoding.
/// Bob outputs 0 when detector 0 counts more, 1 when detector 1 does, and
/// resolves ties by `params.tie_rule`.
pub fn pm_channel(params: &PmParams, env: &LinkEnvironment) -> Result<BinaryChannel> {
    params.validate()?;
    let [(a0, a1), (b0, b1)] = params.detector_rates(env);
    let given0 = click_difference_split(a0, a1)?;
    let given1 = click_difference_split(b0, b1)?;
    let to_zero = params.tie_rule.share_to_zero(params.q0);
    Ok(BinaryChannel::from_zero_outputs(
        Probability::from_computed(given0.greater.value() + to_zero * given0.tie.value())?,
        Probability::from_computed(given1.greater.value() + to_zero * given1.tie.value())?,
    ))
}

/// Probabilities of equal counts under input 0 and input 1.
pub fn pm_tie_probabilities(params: &PmParams, env: &LinkEnvironment) -> Result<(Probability, Probability)> {
    params.validate()?;
    let [(a0, a1), (b0, b1)] = params.detector_rates(env);
    Ok((click_difference_split(a0, a1)?.tie, click_difference_split(b0, b1)?.tie))
}

/// Helstrom error for two pure states with squared overlap `e^{-exponent}`.
pub fn helstrom_error(exponent: f64) -> Probability {
    // 1 - e^{-x} via expm1 keeps precision for faint states.
    let distinguishability = -(-exponent.max(0.0)).exp_m1();
    Probability::from_computed(0.5 * (1.0 - distinguishability.sqrt())).expect("helstrom error in [0, 1/2]")
}

/// Eve's minimum error against vacuum vs `|α⟩` when she collects `gamma·eta`
/// of the light.
pub fn eve_error_ook(gamma: f64, eta: f64, mean_photons: f64) -> Probability {
    helstrom_error(gamma * eta * mean_photons)
}

/// Eve's minimum error against two equal-amplitude states separated by
/// `theta` when she collects `gamma·eta` of the light.
pub fn eve_error_pm(gamma: f64, eta: f64, mean_photons: f64, theta: f64) -> Probability {
    eve_error_pm_general(gamma * eta, mean_photons, theta, 1.0)
}

/// As [`eve_error_pm`] for unequal amplitudes `|β|² = κ|α|²`:
/// `|⟨ψ₀|ψ₁⟩|² = exp(-ε|α|²(1 + κ - 2√κ cos θ))`.
pub fn eve_error_pm_general(eve_efficiency: f64, mean_photons: f64, theta: f64, kappa: f64) -> Probability {
    let separation = 1.0 + kappa - 2.0 * kappa.sqrt() * theta.cos();
    helstrom_error(eve_efficiency * mean_photons * separation.max(0.0))
}

/// Eve's error for OOK under `env`'s efficiency convention.
pub fn eve_error_ook_in(env: &LinkEnvironment, mean_photons: f64) -> Probability {
    helstrom_error(env.eve_efficiency() * mean_photons)
}

/// Eve's error for PM under `env`'s efficiency convention.
pub fn eve_error_pm_in(env: &LinkEnvironment, params: &PmParams) -> Probability {
    eve_error_pm_general(env.eve_efficiency(), params.mean_photons, params.theta, params.kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, LN_2};

    fn env(eta: f64, delta: f64, gamma: f64) -> LinkEnvironment {
        LinkEnvironment::new(eta, delta, gamma).unwrap()
    }

    #[test]
    fn environment_invariants() {
        assert!(LinkEnvironment::new(0.0, 0.1, 0.5).is_err());
        assert!(LinkEnvironment::new(1.2, 0.1, 0.5).is_err());
        assert!(LinkEnvironment::new(0.5, -0.1, 0.5).is_err());
        assert!(LinkEnvironment::new(0.5, 0.1, 0.0).is_err());
        assert!(LinkEnvironment::new(1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn ook_examples() {
        let ch = ook_channel(&OokParams::new(0.0, 1, 0.5).unwrap(), &env(1.0, 0.0, 0.1)).unwrap();
        assert_eq!((ch.eps00, ch.eps10), (1.0, 1.0));
        assert_eq!(ch.qber(), 0.5);

        let ch = ook_channel(&OokParams::new(1.0, 1, 0.5).unwrap(), &env(1.0, 0.0, 0.1)).unwrap();
        assert_eq!(ch.eps00, 1.0);
        assert_abs_diff_eq!(ch.eps10, (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(ch.qber(), 0.183_939_720_585_721_2, epsilon = 1e-15);

        let ch = ook_channel(&OokParams::new(10.0, 3, 0.5).unwrap(), &env(1.0, 0.8, 0.1)).unwrap();
        assert_abs_diff_eq!(ch.eps00, 0.952_577_403_928_509_8, epsilon = 1e-14);
        assert_abs_diff_eq!(ch.eps10, 0.001_430_413_179_191_376, epsilon = 1e-15);
    }

    #[test]
    fn ook_efficiency_scales_signal() {
        let a = ook_channel(&OokParams::new(4.0, 2, 0.5).unwrap(), &env(0.5, 0.1, 0.1)).unwrap();
        let b = ook_channel(&OokParams::new(2.0, 2, 0.5).unwrap(), &env(1.0, 0.1, 0.1)).unwrap();
        assert_abs_diff_eq!(a.eps10, b.eps10, epsilon = 1e-15);
    }

    #[test]
    fn pm_zero_angle_carries_nothing() {
        for &(a, d) in &[(3.0, 0.0), (40.0, 2.0)] {
            let ch = pm_channel(&PmParams::symmetric(a, 0.0).unwrap(), &env(1.0, d, 0.1)).unwrap();
            assert_abs_diff_eq!(ch.eps00, ch.eps10, epsilon = 1e-14);
        }
    }

    #[test]
    fn pm_orthogonal_noiseless() {
        let ch = pm_channel(&PmParams::symmetric(1.0, FRAC_PI_2).unwrap(), &env(1.0, 0.0, 0.1)).unwrap();
        assert_abs_diff_eq!(ch.eps00, 1.0 - (-1.0f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(ch.eps11, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn pm_twenty_degrees_against_brute_force() {
        // Oracle values from an explicit double-Poisson convolution over counts < 120.
        let ch = pm_channel(&PmParams::symmetric(20.0, 0.35).unwrap(), &env(1.0, 1.0, 0.1)).unwrap();
        assert_abs_diff_eq!(ch.eps00, 0.914_803_550_973_924_5, epsilon = 1e-12);
        assert_abs_diff_eq!(ch.eps10, 0.055_861_721_400_242_34, epsilon = 1e-12);
    }

    #[test]
    fn tie_probabilities() {
        let e = env(1.0, 0.0, 0.1);
        for &theta in &[0.1, 0.7, 1.3, 2.5] {
            let (t0, t1) = pm_tie_probabilities(&PmParams::symmetric(3.0, theta).unwrap(), &e).unwrap();
            assert_abs_diff_eq!(t0.value(), t1.value(), epsilon = 1e-13);
        }
        let p = PmParams::new(4.0, std::f64::consts::FRAC_PI_4, 0.5, 0.5, TieRule::AlwaysOne).unwrap();
        let (t0, t1) = pm_tie_probabilities(&p, &e).unwrap();
        assert_abs_diff_eq!(t0.value(), 0.077_884_523_137_161_25, epsilon = 1e-13);
        assert_abs_diff_eq!(t1.value(), 0.211_946_276_870_599_9, epsilon = 1e-13);
        assert!(t1.value() >= t0.value());

        let (t0, t1) = pm_tie_probabilities(&PmParams::symmetric(0.0, 1.0).unwrap(), &e).unwrap();
        assert_eq!((t0.value(), t1.value()), (1.0, 1.0));
    }

    #[test]
    fn tie_rule_moves_only_tie_mass() {
        let e = env(1.0, 0.2, 0.1);
        let base = PmParams::new(3.0, 0.8, 0.7, 0.5, TieRule::AlwaysOne).unwrap();
        let (t0, t1) = pm_tie_probabilities(&base, &e).unwrap();
        let one = pm_channel(&base, &e).unwrap();
        let zero = pm_channel(&PmParams { tie_rule: TieRule::AlwaysZero, ..base }, &e).unwrap();
        let random = pm_channel(&PmParams { tie_rule: TieRule::Random, ..base }, &e).unwrap();
        assert_abs_diff_eq!(zero.eps00 - one.eps00, t0.value(), epsilon = 1e-13);
        assert_abs_diff_eq!(zero.eps10 - one.eps10, t1.value(), epsilon = 1e-13);
        assert_abs_diff_eq!(random.eps00 - one.eps00, 0.5 * t0.value(), epsilon = 1e-13);
    }

    #[test]
    fn eve_ook_examples() {
        assert_eq!(eve_error_ook(0.1, 1.0, 0.0).value(), 0.5);
        assert_abs_diff_eq!(eve_error_ook(1.0, 1.0, LN_2).value(), 0.146_446_609_406_726_24, epsilon = 1e-15);
        assert_abs_diff_eq!(eve_error_ook(1.0, 1.0, 1e6).value(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn eve_pm_examples() {
        assert_eq!(eve_error_pm(0.3, 1.0, 5.0, 0.0).value(), 0.5);
        // γ|α|²(1 - cos θ) = ln2 / 2 makes the squared overlap 1/2.
        let theta = 1.0f64;
        let alpha2 = LN_2 / 2.0 / (1.0 - theta.cos());
        assert_abs_diff_eq!(eve_error_pm(1.0, 1.0, alpha2, theta).value(), 0.146_446_609_406_726_24, epsilon = 1e-15);
        assert_abs_diff_eq!(eve_error_pm(1.0, 1.0, 1.0, FRAC_PI_2).value(), 0.035_063_252_483_903_11, epsilon = 1e-15);
    }

    #[test]
    fn eve_general_reduces_to_ook_at_zero_kappa() {
        for &a in &[0.1, 1.0, 7.5] {
            assert_abs_diff_eq!(
                eve_error_pm_general(0.3, a, 1.1, 0.0).value(),
                eve_error_ook(0.3, 1.0, a).value(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn eve_efficiency_flag() {
        let e = env(0.5, 0.0, 0.2);
        assert_abs_diff_eq!(e.eve_efficiency(), 0.1, epsilon = 1e-16);
        assert_abs_diff_eq!(e.with_eve_receiver_efficiency(false).eve_efficiency(), 0.2, epsilon = 1e-16);
    }

    #[test]
    fn params_invariants() {
        assert!(OokParams::new(1.0, 0, 0.5).is_err());
        assert!(OokParams::new(-1.0, 1, 0.5).is_err());
        assert!(OokParams::new(1.0, 1, 1.0).is_err());
        assert!(PmParams::new(1.0, 3.5, 1.0, 0.5, TieRule::AlwaysOne).is_err());
        assert!(PmParams::new(1.0, 1.0, 1.5, 0.5, TieRule::AlwaysOne).is_err());
        assert!(BinaryChannel::new(0.5, 0.4, 0.5, 0.5).is_err());
    }
}
