//! Photon-counting distributions and entropy primitives.
//!
//! Every infinite Poisson sum is truncated at `ceil(λ + 12√λ + 30)` for the
//! largest rate involved, which leaves a tail below 1e-12 for any rate the
//! optimizer visits. Sums are also cut from below at the symmetric point
//! `λ - 12√λ - 30`, where the discarded mass is smaller still.

use std::fmt;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Absolute tolerance within which a computed probability is clamped into [0, 1].
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Rates above this are evaluated in log space.
const LOG_SPACE_RATE: f64 = 50.0;
const LOG_SPACE_COUNT: u64 = 100;

/// Mean number of detected events per pulse.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::domain(format!(
                "rate must be finite and non-negative, got {value}"
            )));
        }
        Ok(Rate(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A probability in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);
    pub const HALF: Probability = Probability(0.5);

    /// Validates a user-supplied probability. Values within
    /// [`PROBABILITY_TOLERANCE`] of the unit interval are clamped.
    pub fn new(value: f64) -> Result<Self> {
        clamp_unit(value).ok_or_else(|| Error::domain(format!("probability out of range: {value}")))
    }

    /// Wraps the result of an internal computation. A value outside the unit
    /// interval by more than the tolerance means a bug upstream, not bad input.
    pub fn from_computed(value: f64) -> Result<Self> {
        clamp_unit(value).ok_or_else(|| {
            Error::Consistency(format!("computed probability out of range: {value:e}"))
        })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Probability {
        Probability(1.0 - self.0)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn clamp_unit(value: f64) -> Option<Probability> {
    if value.is_nan() || value < -PROBABILITY_TOLERANCE || value > 1.0 + PROBABILITY_TOLERANCE {
        return None;
    }
    Some(Probability(value.clamp(0.0, 1.0)))
}

/// Largest index kept in a truncated Poisson sum for rate `lambda`.
pub fn truncation_index(lambda: f64) -> u64 {
    (lambda + 12.0 * lambda.sqrt() + 30.0).ceil() as u64
}

/// Smallest index kept in a truncated Poisson sum for rate `lambda`.
pub(crate) fn lower_truncation_index(lambda: f64) -> u64 {
    (lambda - 12.0 * lambda.sqrt() - 30.0).floor().max(0.0) as u64
}

fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

fn ln_poisson(lambda: f64, n: u64) -> f64 {
    if lambda == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    n as f64 * lambda.ln() - lambda - ln_factorial(n)
}

/// `P(X = n)` for `X ~ Poisson(lambda)`.
pub fn poisson_pmf(lambda: Rate, n: u64) -> Probability {
    let l = lambda.value();
    if l == 0.0 {
        return if n == 0 { Probability::ONE } else { Probability::ZERO };
    }
    let p = if l > LOG_SPACE_RATE || n > LOG_SPACE_COUNT {
        ln_poisson(l, n).exp()
    } else {
        let mut term = (-l).exp();
        for i in 1..=n {
            term *= l / i as f64;
        }
        term
    };
    Probability(p.min(1.0))
}

/// `P(X < k)` for `X ~ Poisson(lambda)`. `k = 0` is the empty sum.
pub fn poisson_cdf_below(lambda: Rate, k: u64) -> Probability {
    if k == 0 {
        return Probability::ZERO;
    }
    let window = PoissonWindow::new(lambda.value());
    let top = (k - 1).min(window.hi());
    let sum: f64 = (window.lo()..=top).map(|n| window.pmf(n)).sum();
    Probability(sum.clamp(0.0, 1.0))
}

/// Poisson pmf tabulated over the truncation window `[lo, hi]`.
///
/// The table is anchored at the mode in log space and filled by the ratio
/// recurrence in both directions, so it neither overflows nor underflows for
/// rates in the thousands.
#[derive(Debug, Clone)]
pub(crate) struct PoissonWindow {
    lo: u64,
    values: Vec<f64>,
}

impl PoissonWindow {
    pub(crate) fn new(lambda: f64) -> Self {
        if lambda == 0.0 {
            return PoissonWindow { lo: 0, values: vec![1.0] };
        }
        let lo = lower_truncation_index(lambda);
        let hi = truncation_index(lambda);
        let mode = (lambda.floor() as u64).clamp(lo, hi);
        let mut values = vec![0.0; (hi - lo + 1) as usize];
        let anchor = if lambda > LOG_SPACE_RATE {
            ln_poisson(lambda, mode).exp()
        } else {
            poisson_pmf(Rate(lambda), mode).value()
        };
        values[(mode - lo) as usize] = anchor;
        let mut p = anchor;
        for n in mode + 1..=hi {
            p *= lambda / n as f64;
            values[(n - lo) as usize] = p;
        }
        let mut p = anchor;
        for n in (lo..mode).rev() {
            p *= (n + 1) as f64 / lambda;
            values[(n - lo) as usize] = p;
        }
        PoissonWindow { lo, values }
    }

    pub(crate) fn lo(&self) -> u64 {
        self.lo
    }

    pub(crate) fn hi(&self) -> u64 {
        self.lo + self.values.len() as u64 - 1
    }

    pub(crate) fn pmf(&self, n: u64) -> f64 {
        if n < self.lo {
            return 0.0;
        }
        self.values.get((n - self.lo) as usize).copied().unwrap_or(0.0)
    }

    /// `P(X > n)` for every `n` in the window, accumulated from the top.
    fn survival_table(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len()];
        let mut acc = 0.0;
        for i in (0..self.values.len()).rev() {
            out[i] = acc;
            acc += self.values[i];
        }
        out
    }
}

/// Split of the click-difference law `D = X₀ - X₁` into `D > 0`, `D = 0`, `D < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceSplit {
    pub greater: Probability,
    pub tie: Probability,
    pub less: Probability,
}

/// `P(X₀ - X₁ = m)` for independent `X₀ ~ Poisson(lambda0)`, `X₁ ~ Poisson(lambda1)`.
///
/// Evaluates the truncated series `Σ_l P₀(l + m) P₁(l)` directly, with no
/// Bessel-function shortcut, so symmetric and asymmetric rates share one path.
pub fn click_difference_pmf(lambda0: Rate, lambda1: Rate, m: i64) -> Probability {
    if m < 0 {
        return click_difference_pmf(lambda1, lambda0, -m);
    }
    let m = m as u64;
    let w0 = PoissonWindow::new(lambda0.value());
    let w1 = PoissonWindow::new(lambda1.value());
    let start = w1.lo().max(w0.lo().saturating_sub(m));
    let end = w1.hi().min(w0.hi().saturating_sub(m));
    if w0.hi() < m || start > end {
        return Probability::ZERO;
    }
    let sum: f64 = (start..=end).map(|l| w0.pmf(l + m) * w1.pmf(l)).sum();
    Probability(sum.clamp(0.0, 1.0))
}

/// Full split of the click difference into win, tie and loss masses for detector 0.
///
/// The same double series as [`click_difference_pmf`], grouped by detector 1's
/// count so each group's inner sum over `m` is a Poisson survival value.
pub fn click_difference_split(lambda0: Rate, lambda1: Rate) -> Result<DifferenceSplit> {
    let w0 = PoissonWindow::new(lambda0.value());
    let w1 = PoissonWindow::new(lambda1.value());
    let survival0 = w0.survival_table();
    let mut greater = 0.0;
    let mut tie = 0.0;
    for l in w1.lo()..=w1.hi() {
        let p1 = w1.pmf(l);
        let s0 = if l < w0.lo() {
            1.0
        } else if l > w0.hi() {
            0.0
        } else {
            survival0[(l - w0.lo()) as usize]
        };
        greater += p1 * s0;
        tie += p1 * w0.pmf(l);
    }
    // The complementary mass is computed by swapping roles rather than as
    // 1 - greater - tie so that small losses keep their relative precision.
    let survival1 = w1.survival_table();
    let mut less = 0.0;
    for l in w0.lo()..=w0.hi() {
        let s1 = if l < w1.lo() {
            1.0
        } else if l > w1.hi() {
            0.0
        } else {
            survival1[(l - w1.lo()) as usize]
        };
        less += w0.pmf(l) * s1;
    }
    let total = greater + tie + less;
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Consistency(format!(
            "click-difference masses sum to {total} for rates ({lambda0}, {lambda1})"
        )));
    }
    Ok(DifferenceSplit {
        greater: Probability::from_computed(greater)?,
        tie: Probability::from_computed(tie)?,
        less: Probability::from_computed(less)?,
    })
}

/// `P(X₀ - X₁ ≥ 0)`.
pub fn click_difference_tail(lambda0: Rate, lambda1: Rate) -> Result<Probability> {
    let split = click_difference_split(lambda0, lambda1)?;
    Probability::from_computed(split.greater.value() + split.tie.value())
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: Probability) -> f64 {
    let p = p.value();
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    -(p * p.log2() + q * q.log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn r(x: f64) -> Rate {
        Rate::new(x).unwrap()
    }

    fn brute_difference(a: f64, b: f64, n: u64) -> Vec<(i64, f64)> {
        // Oracle: explicit convolution of two independently computed pmf tables.
        let pa: Vec<f64> = (0..n).map(|i| (-a).exp() * a.powi(i as i32) / factorial(i)).collect();
        let pb: Vec<f64> = (0..n).map(|i| (-b).exp() * b.powi(i as i32) / factorial(i)).collect();
        let mut out = std::collections::BTreeMap::new();
        for i in 0..n as usize {
            for j in 0..n as usize {
                *out.entry(i as i64 - j as i64).or_insert(0.0) += pa[i] * pb[j];
            }
        }
        out.into_iter().collect()
    }

    fn factorial(n: u64) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn poisson_pmf_examples() {
        assert_eq!(poisson_pmf(r(0.0), 0).value(), 1.0);
        assert_abs_diff_eq!(poisson_pmf(r(1.0), 1).value(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            poisson_pmf(r(200.0), 200).value(),
            0.028_197_727_685_920_82,
            epsilon = 1e-12
        );
    }

    #[test]
    fn negative_rate_rejected() {
        assert!(matches!(Rate::new(-0.1), Err(Error::Domain(_))));
        assert!(Rate::new(f64::INFINITY).is_err());
    }

    #[test]
    fn cdf_below_examples() {
        assert_eq!(poisson_cdf_below(r(0.0), 1).value(), 1.0);
        assert_abs_diff_eq!(poisson_cdf_below(r(0.03), 1).value(), 0.970_445_533_548_508_2, epsilon = 1e-14);
        assert_abs_diff_eq!(poisson_cdf_below(r(5.0), 3).value(), 0.124_652_019_483_081_1, epsilon = 1e-14);
        assert_eq!(poisson_cdf_below(r(5.0), 0).value(), 0.0);
    }

    #[test]
    fn difference_pmf_examples() {
        for m in -3..6 {
            let expected = if m >= 0 { poisson_pmf(r(2.5), m as u64).value() } else { 0.0 };
            assert_abs_diff_eq!(click_difference_pmf(r(2.5), r(0.0), m).value(), expected, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(click_difference_pmf(r(1.0), r(1.0), 0).value(), 0.308_508_322_553_671_04, epsilon = 1e-13);
        assert_abs_diff_eq!(click_difference_pmf(r(2.0), r(1.0), 1).value(), 0.238_463_438_486_297, epsilon = 1e-13);
    }

    #[test]
    fn difference_pmf_matches_bessel_identity() {
        // P(m = 0) = e^{-2λ} I₀(2λ) for equal rates; I₀ by its power series.
        for &lam in &[0.3, 1.0, 4.0, 9.0] {
            let x: f64 = 2.0 * lam;
            let i0: f64 = (0..80).map(|k| (x / 2.0).powi(2 * k) / factorial(k as u64).powi(2)).sum();
            let expected = (-2.0 * lam).exp() * i0;
            assert_abs_diff_eq!(click_difference_pmf(r(lam), r(lam), 0).value(), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn difference_pmf_agrees_with_brute_convolution() {
        for &(a, b) in &[(0.5, 2.0), (3.0, 1.5), (7.0, 7.0)] {
            for (m, p) in brute_difference(a, b, 80) {
                if m.abs() > 25 {
                    continue;
                }
                assert_abs_diff_eq!(click_difference_pmf(r(a), r(b), m).value(), p, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn tail_examples() {
        for &l in &[0.0, 0.7, 30.0, 400.0] {
            assert_abs_diff_eq!(click_difference_tail(r(l), r(0.0)).unwrap().value(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(click_difference_tail(r(1.0), r(1.0)).unwrap().value(), 0.654_254_161_276_835_5, epsilon = 1e-13);
        assert_abs_diff_eq!(click_difference_tail(r(0.5), r(2.0)).unwrap().value(), 0.269_012_060_035_91, epsilon = 1e-13);
    }

    #[test]
    fn split_handles_large_rates() {
        let s = click_difference_split(r(900.0), r(850.0)).unwrap();
        let total = s.greater.value() + s.tie.value() + s.less.value();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        assert!(s.greater.value() > 0.85);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(Probability::HALF), 1.0);
        assert_eq!(binary_entropy(Probability::ZERO), 0.0);
        assert_eq!(binary_entropy(Probability::ONE), 0.0);
        assert_abs_diff_eq!(
            binary_entropy(Probability::new(0.11).unwrap()),
            0.499_915_958_164_528,
            epsilon = 1e-13
        );
    }

    #[test]
    fn probability_clamps_only_within_tolerance() {
        assert_eq!(Probability::new(1.0 + 5e-13).unwrap().value(), 1.0);
        assert_eq!(Probability::new(-5e-13).unwrap().value(), 0.0);
        assert!(matches!(Probability::new(1.0 + 1e-9), Err(Error::Domain(_))));
        assert!(matches!(Probability::from_computed(-1e-6), Err(Error::Consistency(_))));
    }
}
