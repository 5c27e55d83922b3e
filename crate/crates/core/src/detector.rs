//! Time-multiplexed threshold detector used as an approximate photon counter.
//!
//! A pulse of width `T` read by a detector with dead time `τ` is split into
//! `N = floor(T / τ)` intervals, each a click/no-click measurement. With `|α|²`
//! photons spread uniformly over the pulse an interval clicks with probability
//! `p = 1 - exp(-|α|²/N)`, so the count is `Binomial(N, p)`. Photons sharing an
//! interval are lost.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::photon_stats::{poisson_pmf, truncation_index, Probability, Rate};

/// How registered clicks are produced from photon arrivals when sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingModel {
    /// Every arrival is counted; the photon-number-resolving limit.
    Ideal,
    /// The pulse is cut into `N` fixed intervals and each occupied interval
    /// gives one click. Matches the binomial count law exactly.
    Interval,
    /// Continuous time: an arrival within `dead_time` after the last
    /// registered click is discarded, and discarded arrivals do not extend
    /// the window.
    DeadTime,
}

impl std::str::FromStr for CountingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(CountingModel::Ideal),
            "interval" => Ok(CountingModel::Interval),
            "dead-time" => Ok(CountingModel::DeadTime),
            other => Err(Error::usage(format!("unknown counting model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Seconds.
    dead_time: f64,
    /// Seconds.
    pulse_width: f64,
    intervals_n: u32,
    /// Hz.
    dark_rate: f64,
    efficiency: f64,
    counting: CountingModel,
}

impl DetectorModel {
    pub fn new(dead_time: f64, pulse_width: f64, dark_rate: f64, efficiency: f64) -> Result<Self> {
        if !(dead_time > 0.0 && pulse_width > 0.0 && dead_time.is_finite() && pulse_width.is_finite()) {
            return Err(Error::domain("dead time and pulse width must be positive"));
        }
        if !(dark_rate >= 0.0 && dark_rate.is_finite()) {
            return Err(Error::domain("dark count rate must be non-negative"));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::domain(format!("efficiency must lie in (0, 1], got {efficiency}")));
        }
        let ratio = pulse_width / dead_time;
        // Guard against 10 µs / 40 ns landing a hair below 250 in binary floating point.
        let intervals = (ratio * (1.0 + 1e-12)).floor();
        if intervals < 1.0 {
            return Err(Error::domain("pulse width must be at least one dead time"));
        }
        if intervals > f64::from(u32::MAX) {
            return Err(Error::domain("too many measurement intervals"));
        }
        Ok(DetectorModel {
            dead_time,
            pulse_width,
            intervals_n: intervals as u32,
            dark_rate,
            efficiency,
            counting: CountingModel::DeadTime,
        })
    }

    /// Thorlabs SPDMH3-class detector on 10 µs pulses: 45 ns dead time
    /// (`N = 222`), 70 Hz dark counts, 50 % efficiency.
    pub fn reference() -> Self {
        Self::new(45e-9, 10e-6, 70.0, 0.5).expect("valid preset")
    }

    /// As [`DetectorModel::reference`] with a 40 ns dead time, `N = 250`.
    pub fn fast() -> Self {
        Self::new(40e-9, 10e-6, 70.0, 0.5).expect("valid preset")
    }

    /// Looks up a named preset: `reference`, `fast` or `ideal`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "reference" | "default" => Ok(Self::reference()),
            "fast" => Ok(Self::fast()),
            "ideal" => Ok(Self::reference().with_counting(CountingModel::Ideal)),
            other => Err(Error::usage(format!("unknown detector preset '{other}'"))),
        }
    }

    pub fn with_counting(mut self, counting: CountingModel) -> Self {
        self.counting = counting;
        self
    }

    pub fn dead_time(&self) -> f64 {
        self.dead_time
    }

    pub fn pulse_width(&self) -> f64 {
        self.pulse_width
    }

    pub fn intervals(&self) -> u32 {
        self.intervals_n
    }

    pub fn dark_rate(&self) -> f64 {
        self.dark_rate
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn counting(&self) -> CountingModel {
        self.counting
    }

    /// Dark counts per pulse, to be folded into the noise rate.
    pub fn dark_counts_per_pulse(&self) -> f64 {
        self.dark_rate * self.pulse_width
    }

    /// Mean detected photons for a mean incident photon number.
    pub fn detected_mean(&self, incident: f64) -> f64 {
        self.efficiency * incident
    }
}

/// Probability that one of `n` intervals registers a click.
pub fn interval_click_prob(mean_photons: f64, n: u32) -> Result<Probability> {
    check_inputs(mean_photons, n)?;
    Probability::from_computed(-(-mean_photons / f64::from(n)).exp_m1())
}

fn check_inputs(mean_photons: f64, n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("interval count must be at least 1"));
    }
    if !(mean_photons >= 0.0 && mean_photons.is_finite()) {
        return Err(Error::domain(format!("mean photon number must be >= 0, got {mean_photons}")));
    }
    Ok(())
}

/// `P(X = k)` for the `Binomial(n, p)` click count. `k > n` has probability 0.
pub fn pnr_count_pmf(mean_photons: f64, n: u32, k: u32) -> Result<Probability> {
    let p = interval_click_prob(mean_photons, n)?.value();
    if k > n {
        return Ok(Probability::ZERO);
    }
    Probability::from_computed(binomial_pmf(n, p, k))
}

fn binomial_pmf(n: u32, p: f64, k: u32) -> f64 {
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let (nf, kf) = (f64::from(n), f64::from(k));
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
    (ln_choose + kf * p.ln() + (nf - kf) * (-p).ln_1p()).exp()
}

/// Mean photons lost to shared intervals: `|α|² - N(1 - exp(-|α|²/N))`.
pub fn expected_lost_photons(mean_photons: f64, n: u32) -> Result<f64> {
    check_inputs(mean_photons, n)?;
    let nf = f64::from(n);
    let x = mean_photons / nf;
    // x + expm1(-x) cancels to x²/2 for faint pulses; use the series there.
    let per_interval = if x < 1e-4 {
        x * x / 2.0 - x.powi(3) / 6.0 + x.powi(4) / 24.0
    } else {
        x + (-x).exp_m1()
    };
    Ok((nf * per_interval).max(0.0))
}

/// Distribution of the number of lost photons truncated to `0..=max_lost`.
///
/// With Poisson arrivals each interval holds an independent Poisson(|α|²/N)
/// number of photons and loses all but one of them, so the total loss is a
/// sum of `N` i.i.d. terms.
pub fn lost_photon_distribution(mean_photons: f64, n: u32, max_lost: usize) -> Result<Vec<f64>> {
    check_inputs(mean_photons, n)?;
    let mu = Rate::new(mean_photons / f64::from(n))?;
    let mut per_interval = vec![0.0; max_lost + 1];
    per_interval[0] = poisson_pmf(mu, 0).value() + poisson_pmf(mu, 1).value();
    for (j, slot) in per_interval.iter_mut().enumerate().skip(1) {
        *slot = poisson_pmf(mu, j as u64 + 1).value();
    }
    let convolve = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; max_lost + 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate().take(max_lost + 1 - i) {
                out[i + j] += x * y;
            }
        }
        out
    };
    // Truncated polynomial power by repeated squaring.
    let mut result = vec![0.0; max_lost + 1];
    result[0] = 1.0;
    let mut base = per_interval;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = convolve(&result, &base);
        }
        base = convolve(&base, &base);
        e >>= 1;
    }
    Ok(result)
}

/// Mean loss counting only events that lose at most three photons in total.
/// Always a lower bound on [`expected_lost_photons`].
pub fn truncated_lost_photons(mean_photons: f64, n: u32) -> Result<f64> {
    let dist = lost_photon_distribution(mean_photons, n, 3)?;
    Ok(dist.iter().enumerate().map(|(j, p)| j as f64 * p).sum())
}

fn binomial_poisson_tv(mean_photons: f64, n: u32, poisson_mean: f64) -> Result<f64> {
    let p = interval_click_prob(mean_photons, n)?.value();
    let lam = Rate::new(poisson_mean)?;
    let top = u64::from(n).max(truncation_index(poisson_mean));
    let mut tv = 0.0;
    for k in 0..=top {
        let b = if k <= u64::from(n) { binomial_pmf(n, p, k as u32) } else { 0.0 };
        tv += (b - poisson_pmf(lam, k).value()).abs();
    }
    Ok(tv / 2.0)
}

/// Total variation between the interval click count and the ideal
/// photon-number law `Poisson(|α|²)`.
pub fn tv_distance_to_ideal(mean_photons: f64, n: u32) -> Result<f64> {
    binomial_poisson_tv(mean_photons, n, mean_photons)
}

/// Total variation between the interval click count `Binomial(N, p)` and its
/// Poisson limit `Poisson(Np)`.
pub fn tv_distance_to_poisson_limit(mean_photons: f64, n: u32) -> Result<f64> {
    let p = interval_click_prob(mean_photons, n)?.value();
    binomial_poisson_tv(mean_photons, n, f64::from(n) * p)
}

/// Independent, reproducible random stream.
///
/// Streams sharing a master seed but differing in `stream` index never overlap.
#[derive(Debug, Clone)]
pub struct SeedStream(ChaCha8Rng);

impl SeedStream {
    pub fn new(master_seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream);
        SeedStream(rng)
    }
}

impl RngCore for SeedStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Draws a Poisson photon number with the given mean.
fn sample_poisson(rng: &mut SeedStream, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means.
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

/// Registered clicks for one pulse whose arrivals (signal, background and
/// dark counts together) have mean `arrival_rate`.
pub fn sample_pulse_clicks(rng: &mut SeedStream, model: &DetectorModel, arrival_rate: Rate) -> u32 {
    let photons = sample_poisson(rng, arrival_rate.value());
    register_clicks(rng, model, photons)
}

/// Sampler for a fixed arrival rate; avoids rebuilding the Poisson law per pulse.
#[derive(Debug, Clone)]
pub struct ClickSampler {
    arrivals: Option<Poisson<f64>>,
    model: DetectorModel,
}

impl ClickSampler {
    pub fn new(model: DetectorModel, arrival_rate: Rate) -> Self {
        let mean = arrival_rate.value();
        let arrivals = (mean > 0.0).then(|| Poisson::new(mean).expect("positive finite mean"));
        ClickSampler { arrivals, model }
    }

    pub fn sample(&self, rng: &mut SeedStream) -> u32 {
        match &self.arrivals {
            None => 0,
            Some(d) => {
                let photons = d.sample(rng) as u64;
                register_clicks(rng, &self.model, photons)
            }
        }
    }
}

fn register_clicks(rng: &mut SeedStream, model: &DetectorModel, photons: u64) -> u32 {
    if photons == 0 {
        return 0;
    }
    match model.counting {
        CountingModel::Ideal => photons.min(u64::from(u32::MAX)) as u32,
        CountingModel::Interval => {
            let n = model.intervals_n;
            let mut bins: Vec<u32> = (0..photons).map(|_| rng.random_range(0..n)).collect();
            bins.sort_unstable();
            bins.dedup();
            bins.len() as u32
        }
        CountingModel::DeadTime => {
            let mut times: Vec<f64> = (0..photons).map(|_| rng.random::<f64>() * model.pulse_width).collect();
            times.sort_unstable_by(f64::total_cmp);
            let mut clicks = 0u32;
            let mut ready_at = f64::NEG_INFINITY;
            for t in times {
                if t >= ready_at {
                    clicks += 1;
                    ready_at = t + model.dead_time;
                }
            }
            clicks
        }
    }
}
