//! Monte Carlo transmission: draw bits, send them through the noisy lossy
//! link, count clicks and decode, then compare Bob's output with the input.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::SchemeParams;
use crate::channels::{
    eve_error_ook, eve_error_pm, ook_channel, pm_channel, BinaryChannel, LinkEnvironment, OokParams,
    PmParams, TieRule,
};
use crate::detector::{ClickSampler, DetectorModel, SeedStream};
use crate::error::{Error, Result};
use crate::photon_stats::Rate;

pub const DEFAULT_PULSES: u64 = 500_000;
pub const DEFAULT_REPETITIONS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionConfig {
    pub params: SchemeParams,
    pub env: LinkEnvironment,
    pub detector: DetectorModel,
    pub n_pulses: u64,
    pub repetitions: u32,
    pub seed: u64,
}

impl TransmissionConfig {
    pub fn new(params: SchemeParams, env: LinkEnvironment, detector: DetectorModel, seed: u64) -> Self {
        TransmissionConfig { params, env, detector, n_pulses: DEFAULT_PULSES, repetitions: DEFAULT_REPETITIONS, seed }
    }

    pub fn with_pulses(mut self, n_pulses: u64, repetitions: u32) -> Self {
        self.n_pulses = n_pulses;
        self.repetitions = repetitions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pulses == 0 || self.repetitions == 0 {
            return Err(Error::domain("pulse count and repetitions must be at least 1"));
        }
        match &self.params {
            SchemeParams::Ook(p) => p.validate(),
            SchemeParams::Pm(p) => p.validate(),
        }
    }

    /// Analytic channel for the configured receiver, ignoring detector saturation.
    pub fn analytic_channel(&self) -> Result<BinaryChannel> {
        match &self.params {
            SchemeParams::Ook(p) => ook_channel(p, &self.env),
            SchemeParams::Pm(p) => pm_channel(p, &self.env),
        }
    }
}

/// Raw tallies from one repetition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    /// Pulses sent with bit 0 and bit 1.
    pub sent: [u64; 2],
    /// Of those, how many Bob decoded as 0.
    pub decoded_zero: [u64; 2],
    /// Clicks summed over all detectors, split by input bit.
    pub clicks: [u64; 2],
}

impl Tally {
    pub fn pulses(&self) -> u64 {
        self.sent[0] + self.sent[1]
    }

    pub fn errors(&self) -> u64 {
        (self.sent[0] - self.decoded_zero[0]) + self.decoded_zero[1]
    }

    pub fn qber(&self) -> f64 {
        self.errors() as f64 / self.pulses() as f64
    }

    fn merge(self, other: Tally) -> Tally {
        let add = |a: [u64; 2], b: [u64; 2]| [a[0] + b[0], a[1] + b[1]];
        Tally {
            sent: add(self.sent, other.sent),
            decoded_zero: add(self.decoded_zero, other.decoded_zero),
            clicks: add(self.clicks, other.clicks),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissionReport {
    pub qber_mean: f64,
    /// Sample standard deviation over repetitions; 0 for a single repetition.
    pub qber_stddev: f64,
    pub mean_clicks_per_pulse: f64,
    /// Mean clicks on pulses that carried bit 1.
    pub mean_clicks_given_one: f64,
    /// Empirical channel over all repetitions. A row with no pulses is left at
    /// the identity.
    pub confusion: BinaryChannel,
    pub per_repetition: Vec<f64>,
    pub total: Tally,
}

enum Receiver {
    Threshold { k: u32, samplers: [ClickSampler; 2] },
    Majority { tie: TieRule, samplers: [[ClickSampler; 2]; 2] },
}

fn build_receiver(cfg: &TransmissionConfig) -> Receiver {
    let d = cfg.env.delta();
    match &cfg.params {
        SchemeParams::Ook(p) => {
            let signal = Rate::new(cfg.env.eta() * p.mean_photons + d.value()).expect("validated rate");
            Receiver::Threshold {
                k: p.threshold_k,
                samplers: [ClickSampler::new(cfg.detector, d), ClickSampler::new(cfg.detector, signal)],
            }
        }
        SchemeParams::Pm(p) => {
            let rates = p.detector_rates(&cfg.env);
            let pair = |(a, b): (Rate, Rate)| [ClickSampler::new(cfg.detector, a), ClickSampler::new(cfg.detector, b)];
            Receiver::Majority { tie: p.tie_rule, samplers: [pair(rates[0]), pair(rates[1])] }
        }
    }
}

fn run_repetition(cfg: &TransmissionConfig, receiver: &Receiver, stream: u64) -> Tally {
    let mut rng = SeedStream::new(cfg.seed, stream);
    let q0 = cfg.params.q0();
    let mut t = Tally::default();
    for _ in 0..cfg.n_pulses {
        let bit = usize::from(rng.random::<f64>() >= q0);
        let (zero, clicks) = match receiver {
            Receiver::Threshold { k, samplers } => {
                let c = samplers[bit].sample(&mut rng);
                (c < *k, u64::from(c))
            }
            Receiver::Majority { tie, samplers } => {
                let c0 = samplers[bit][0].sample(&mut rng);
                let c1 = samplers[bit][1].sample(&mut rng);
                let zero = match c0.cmp(&c1) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => match tie {
                        TieRule::AlwaysZero => true,
                        TieRule::AlwaysOne => false,
                        TieRule::Random => rng.random::<f64>() < q0,
                    },
                };
                (zero, u64::from(c0) + u64::from(c1))
            }
        };
        t.sent[bit] += 1;
        t.decoded_zero[bit] += u64::from(zero);
        t.clicks[bit] += clicks;
    }
    t
}

/// Runs `repetitions` independent transmissions of `n_pulses` each.
/// Repetition `i` uses stream `i` of the master seed, so the report does not
/// depend on thread scheduling.
pub fn run_transmission(cfg: &TransmissionConfig) -> Result<TransmissionReport> {
    cfg.validate()?;
    let receiver = build_receiver(cfg);
    let tallies: Vec<Tally> = (0..u64::from(cfg.repetitions))
        .into_par_iter()
        .map(|i| run_repetition(cfg, &receiver, i))
        .collect();
    let per_repetition: Vec<f64> = tallies.iter().map(Tally::qber).collect();
    let n = per_repetition.len() as f64;
    let qber_mean = per_repetition.iter().sum::<f64>() / n;
    let qber_stddev = if per_repetition.len() > 1 {
        (per_repetition.iter().map(|q| (q - qber_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let total = tallies.iter().copied().fold(Tally::default(), Tally::merge);
    let row = |b: usize, identity: f64| {
        if total.sent[b] == 0 {
            identity
        } else {
            total.decoded_zero[b] as f64 / total.sent[b] as f64
        }
    };
    let (e00, e10) = (row(0, 1.0), row(1, 0.0));
    let confusion = BinaryChannel { eps00: e00, eps01: 1.0 - e00, eps10: e10, eps11: 1.0 - e10 };
    Ok(TransmissionReport {
        qber_mean,
        qber_stddev,
        mean_clicks_per_pulse: (total.clicks[0] + total.clicks[1]) as f64 / total.pulses() as f64,
        mean_clicks_given_one: if total.sent[1] == 0 { 0.0 } else { total.clicks[1] as f64 / total.sent[1] as f64 },
        confusion,
        per_repetition,
        total,
    })
}

/// Distinct seeds for the points of a sweep, decorrelated by SplitMix64.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveEncoding {
    Ook,
    Pm,
}

impl std::str::FromStr for CurveEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ook" => Ok(CurveEncoding::Ook),
            "pm" => Ok(CurveEncoding::Pm),
            other => Err(Error::usage(format!("unknown encoding '{other}', expected ook or pm"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSettings {
    pub n_pulses: u64,
    pub repetitions: u32,
    pub seed: u64,
    pub detector: DetectorModel,
}

/// QBER against received photon number `η|α|²` at a uniform prior.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub encoding: CurveEncoding,
    pub delta: f64,
    pub received_photons: Vec<f64>,
    /// Thresholds, used for on-off keying.
    pub thresholds: Vec<u32>,
    /// Radians, used for the polarization encoding.
    pub thetas: Vec<f64>,
    /// Interception fractions for the wiretapper's Helstrom curves.
    pub gammas: Vec<f64>,
    pub monte_carlo: Option<MonteCarloSettings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub series: String,
    pub eta_alpha2: f64,
    pub qber: f64,
    pub qber_stddev: Option<f64>,
}

fn trim_number(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Builds the table: per point, Bob's analytic QBER for each receiver
/// setting, its Monte Carlo estimate when requested, and Eve's Helstrom
/// error for each interception fraction. Rows are grouped by series.
pub fn qber_curve(spec: &CurveSpec) -> Result<Vec<CurveRow>> {
    if spec.received_photons.is_empty() {
        return Err(Error::usage("no photon-number points requested"));
    }
    let env = LinkEnvironment::new(1.0, spec.delta, 1.0)?;
    let bob: Vec<(String, Box<dyn Fn(f64) -> Result<SchemeParams>>)> = match spec.encoding {
        CurveEncoding::Ook => {
            if spec.thresholds.is_empty() {
                return Err(Error::usage("on-off keying needs at least one threshold k"));
            }
            spec.thresholds
                .iter()
                .map(|&k| {
                    let f: Box<dyn Fn(f64) -> Result<SchemeParams>> =
                        Box::new(move |x| Ok(SchemeParams::Ook(OokParams::new(x, k, 0.5)?)));
                    (format!("bob_k{k}"), f)
                })
                .collect()
        }
        CurveEncoding::Pm => {
            if spec.thetas.is_empty() {
                return Err(Error::usage("polarization encoding needs at least one angle"));
            }
            spec.thetas
                .iter()
                .map(|&t| {
                    let f: Box<dyn Fn(f64) -> Result<SchemeParams>> =
                        Box::new(move |x| Ok(SchemeParams::Pm(PmParams::symmetric(x, t)?)));
                    (format!("bob_theta{}", trim_number(t.to_degrees())), f)
                })
                .collect()
        }
    };

    let mut rows = Vec::new();
    for (series_index, (name, make)) in bob.iter().enumerate() {
        for &x in &spec.received_photons {
            let params = make(x)?;
            let ch = match &params {
                SchemeParams::Ook(p) => ook_channel(p, &env)?,
                SchemeParams::Pm(p) => pm_channel(p, &env)?,
            };
            rows.push(CurveRow { series: name.clone(), eta_alpha2: x, qber: ch.qber(), qber_stddev: None });
        }
        if let Some(mc) = &spec.monte_carlo {
            let cfgs: Vec<TransmissionConfig> = spec
                .received_photons
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let index = (series_index as u64) << 32 | i as u64;
                    Ok(TransmissionConfig {
                        params: make(x)?,
                        env,
                        detector: mc.detector,
                        n_pulses: mc.n_pulses,
                        repetitions: mc.repetitions,
                        seed: derive_seed(mc.seed, index),
                    })
                })
                .collect::<Result<_>>()?;
            for (cfg, &x) in cfgs.iter().zip(&spec.received_photons) {
                let r = run_transmission(cfg)?;
                rows.push(CurveRow {
                    series: format!("{name}_mc"),
                    eta_alpha2: x,
                    qber: r.qber_mean,
                    qber_stddev: Some(r.qber_stddev),
                });
            }
        }
    }
    for &g in &spec.gammas {
        if !(g > 0.0 && g <= 1.0) {
            return Err(Error::domain(format!("gamma must lie in (0, 1], got {g}")));
        }
        match spec.encoding {
            CurveEncoding::Ook => {
                for &x in &spec.received_photons {
                    rows.push(CurveRow {
                        series: format!("eve_gamma{}", trim_number(g)),
                        eta_alpha2: x,
                        qber: eve_error_ook(g, 1.0, x).value(),
                        qber_stddev: None,
                    });
                }
            }
            CurveEncoding::Pm => {
                for &t in &spec.thetas {
                    for &x in &spec.received_photons {
                        rows.push(CurveRow {
                            series: format!("eve_gamma{}_theta{}", trim_number(g), trim_number(t.to_degrees())),
                            eta_alpha2: x,
                            qber: eve_error_pm(g, 1.0, x, t).value(),
                            qber_stddev: None,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}
