//! Command-line front end. Every subcommand writes one tidy table.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::background::{background_table, standard_scene, SkyScene};
use crate::capacity::{capacity_sweep, SweepGrid};
use crate::capacity::{optimize_private_capacity, CapacityResult, Constraints, Scheme, SchemeParams};
use crate::channels::{LinkEnvironment, OokParams, PmParams, TieRule};
use crate::detector::{
    expected_lost_photons, interval_click_prob, truncated_lost_photons, tv_distance_to_ideal,
    tv_distance_to_poisson_limit, CountingModel, DetectorModel,
};
use crate::error::{Error, Result};
use crate::output::{write_output, Cell, Format, RunManifest, Table};
use crate::protocol::{qber_curve, run_transmission, CurveEncoding, CurveSpec, MonteCarloSettings, TransmissionConfig};

/// Environment variable naming the directory for relative `--out` paths.
pub const OUT_DIR_ENV: &str = "QKPC_OUT_DIR";

pub const HEATMAP_HEADER: [&str; 8] = ["gamma", "delta", "scheme", "c_p", "alpha2", "k", "theta_deg", "kappa"];

#[derive(Debug, Parser)]
#[command(name = "qkpc", version, about = "Private capacity and QBER of keyless quantum wiretap links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// QBER against received photon number for Bob's receivers and Eve's Helstrom bound.
    QberCurve(QberCurveArgs),
    /// Optimized private capacity for one or more schemes over a list of noise levels.
    Capacity(CapacityArgs),
    /// Private capacity over a (gamma, delta) grid.
    Heatmap(HeatmapArgs),
    /// Unambiguous discrimination against the minimum-error receiver at fixed photon numbers.
    Usd(UsdArgs),
    /// Photons lost by the time-multiplexed detector.
    DetectorLoss(DetectorLossArgs),
    /// Background photons per pulse for the sky conditions table.
    Background(BackgroundArgs),
    /// Monte Carlo transmission with QBER estimate.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Clone)]
pub struct OutputArgs {
    /// Output file; relative paths resolve against $QKPC_OUT_DIR when set. Stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct QberCurveArgs {
    /// `ook` or `pm`.
    #[arg(long, value_parser = parse_encoding)]
    pub scheme: CurveEncoding,
    #[arg(long, default_value_t = 0.03)]
    pub delta: f64,
    /// Received photon numbers as `lo:hi`.
    #[arg(long, default_value = "0.1:20", value_parser = parse_range)]
    pub alpha2_range: (f64, f64),
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Thresholds for on-off keying (default 1,2,3).
    #[arg(long, value_delimiter = ',')]
    pub k_list: Option<Vec<u32>>,
    /// Polarization angles in degrees (default 10,45,90).
    #[arg(long, value_delimiter = ',')]
    pub theta_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub gamma_list: Vec<f64>,
    /// Add Monte Carlo estimates next to the analytic curves.
    #[arg(long)]
    pub monte_carlo: bool,
    #[arg(long, default_value_t = 100_000)]
    pub pulses: u64,
    #[arg(long, default_value_t = 5)]
    pub repetitions: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Clone)]
pub struct DetectorArgs {
    /// `reference` (45 ns), `fast` (40 ns) or `ideal`.
    #[arg(long, default_value = "ideal")]
    pub detector: String,
    /// Override the counting model: `ideal`, `interval` or `dead-time`.
    #[arg(long, value_parser = parse_counting)]
    pub counting: Option<CountingModel>,
}

impl DetectorArgs {
    fn model(&self) -> Result<DetectorModel> {
        let m = DetectorModel::preset(&self.detector)?;
        Ok(match self.counting {
            Some(c) => m.with_counting(c),
            None => m,
        })
    }
}

#[derive(Debug, Args, Clone)]
pub struct LinkArgs {
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Eve's exponent uses gamma alone instead of gamma times eta.
    #[arg(long)]
    pub eve_excludes_efficiency: bool,
    /// Flat `key = value` constraints file.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
}

impl LinkArgs {
    fn env(&self, delta: f64) -> Result<LinkEnvironment> {
        Ok(LinkEnvironment::new(self.eta, delta, self.gamma)?.with_eve_receiver_efficiency(!self.eve_excludes_efficiency))
    }

    fn constraints(&self) -> Result<Constraints> {
        match &self.constraints {
            None => Ok(Constraints::default()),
            Some(p) => Constraints::from_key_value(&std::fs::read_to_string(p)?),
        }
    }
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Comma-separated scheme names: ook-k1, ook-pnr, pm, pm-constrained, usd.
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme, default_value = "ook-k1,ook-pnr,pm-constrained,pm")]
    pub scheme: Vec<Scheme>,
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',', conflicts_with = "delta_range")]
    pub delta: Option<Vec<f64>>,
    /// Log-spaced noise levels as `lo:hi`, with `--points` values.
    #[arg(long, value_parser = parse_range)]
    pub delta_range: Option<(f64, f64)>,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// Linearly spaced as `lo:hi`.
    #[arg(long, default_value = "0.01:1", value_parser = parse_range)]
    pub gamma_range: (f64, f64),
    #[arg(long, default_value_t = 25)]
    pub gamma_points: usize,
    /// Log-spaced as `lo:hi`.
    #[arg(long, default_value = "1e-6:100", value_parser = parse_range)]
    pub delta_range: (f64, f64),
    #[arg(long, default_value_t = 25)]
    pub delta_points: usize,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long)]
    pub eve_excludes_efficiency: bool,
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct UsdArgs {
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Log-spaced received photon numbers as `lo:hi`.
    #[arg(long, default_value = "0.1:100", value_parser = parse_range)]
    pub alpha2_range: (f64, f64),
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DetectorLossArgs {
    /// Number of measurement intervals.
    #[arg(long, default_value_t = 250)]
    pub n: u32,
    #[arg(long, default_value = "0:50", value_parser = parse_range)]
    pub alpha2_range: (f64, f64),
    #[arg(long, default_value_t = 51)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BackgroundArgs {
    /// Only `standard` is available.
    #[arg(long, default_value = "standard")]
    pub preset: String,
    /// Aperture in m², replacing the value inferred from the cloudy row.
    #[arg(long)]
    pub aperture: Option<f64>,
    #[arg(long)]
    pub fov_urad: Option<f64>,
    #[arg(long)]
    pub filter_nm: Option<f64>,
    #[arg(long)]
    pub wavelength_nm: Option<f64>,
    #[arg(long)]
    pub gate_ns: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `ook` or `pm`.
    #[arg(long, value_parser = parse_encoding)]
    pub scheme: CurveEncoding,
    /// Mean photon number at the channel input.
    #[arg(long)]
    pub alpha2: f64,
    #[arg(long, default_value_t = 0.03)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Degrees.
    #[arg(long, default_value_t = 90.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.5)]
    pub q0: f64,
    #[arg(long, default_value = "always-one", value_parser = parse_tie)]
    pub tie_rule: TieRule,
    #[arg(long, default_value_t = crate::protocol::DEFAULT_PULSES)]
    pub pulses: u64,
    #[arg(long, default_value_t = crate::protocol::DEFAULT_REPETITIONS)]
    pub repetitions: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_encoding(s: &str) -> std::result::Result<CurveEncoding, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_counting(s: &str) -> std::result::Result<CountingModel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_tie(s: &str) -> std::result::Result<TieRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `lo:hi` with `lo <= hi`.
pub fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("'{a}' is not a number"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("'{b}' is not a number"))?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(format!("range '{s}' must have finite lo <= hi"));
    }
    Ok((lo, hi))
}

fn linear_points(range: (f64, f64), n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::usage("--points must be at least 1"));
    }
    if range.0 == range.1 || n == 1 {
        return Ok(vec![range.0]);
    }
    Ok((0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect())
}

fn log_points(range: (f64, f64), n: usize) -> Result<Vec<f64>> {
    if range.0 <= 0.0 {
        return Err(Error::usage("log-spaced ranges need lo > 0"));
    }
    Ok(linear_points((range.0.ln(), range.1.ln()), n)?.into_iter().map(f64::exp).collect())
}

/// Resolves `--out` against `$QKPC_OUT_DIR` when relative.
pub fn resolve_out(out: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if out.is_relative() && !dir.is_empty() => Path::new(&dir).join(out),
        _ => out.to_path_buf(),
    }
}

fn emit(output: &OutputArgs, table: &Table, manifest: RunManifest) -> Result<()> {
    match &output.out {
        Some(p) => write_output(&resolve_out(p), table, output.format, &manifest),
        None => {
            use std::io::Write;
            let bytes = table.render(output.format)?;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

/// `(receiver, alpha2, k, theta_deg, kappa, q0)` cells for a parameter set.
fn param_cells(p: &SchemeParams) -> [Cell; 6] {
    match p {
        SchemeParams::Ook(o) => [
            "ook".into(),
            Cell::Num(o.mean_photons),
            Cell::Int(i64::from(o.threshold_k)),
            Cell::Empty,
            Cell::Empty,
            Cell::Num(o.q0),
        ],
        SchemeParams::Pm(m) => [
            "pm".into(),
            Cell::Num(m.mean_photons),
            Cell::Empty,
            Cell::Num(m.theta.to_degrees()),
            Cell::Num(m.kappa),
            Cell::Num(m.q0),
        ],
    }
}

fn cmd_qber_curve(a: &QberCurveArgs) -> Result<()> {
    match (a.scheme, &a.k_list, &a.theta_list) {
        (CurveEncoding::Ook, _, Some(_)) => return Err(Error::usage("--theta-list applies to --scheme pm")),
        (CurveEncoding::Pm, Some(_), _) => return Err(Error::usage("--k-list applies to --scheme ook")),
        _ => {}
    }
    let spec = CurveSpec {
        encoding: a.scheme,
        delta: a.delta,
        received_photons: linear_points(a.alpha2_range, a.points)?,
        thresholds: a.k_list.clone().unwrap_or_else(|| vec![1, 2, 3]),
        thetas: a.theta_list.clone().unwrap_or_else(|| vec![10.0, 45.0, 90.0]).into_iter().map(f64::to_radians).collect(),
        gammas: a.gamma_list.clone(),
        monte_carlo: a
            .monte_carlo
            .then(|| -> Result<MonteCarloSettings> {
                Ok(MonteCarloSettings { n_pulses: a.pulses, repetitions: a.repetitions, seed: a.seed, detector: a.detector.model()? })
            })
            .transpose()?,
    };
    let rows = qber_curve(&spec)?;
    let mut t = Table::new(&["series", "eta_alpha2", "qber", "qber_stddev"]);
    for r in rows {
        t.push(vec![r.series.into(), Cell::Num(r.eta_alpha2), Cell::Num(r.qber), r.qber_stddev.into()]);
    }
    let manifest = RunManifest::new(
        "qber-curve",
        json!({
            "scheme": format!("{:?}", a.scheme).to_lowercase(),
            "delta": a.delta,
            "alpha2_range": [a.alpha2_range.0, a.alpha2_range.1],
            "points": a.points,
            "k_list": spec.thresholds,
            "theta_list_deg": a.theta_list,
            "gamma_list": a.gamma_list,
            "monte_carlo": a.monte_carlo,
            "pulses": a.pulses,
            "repetitions": a.repetitions,
            "detector": a.detector.detector,
            "counting": a.detector.counting,
        }),
        a.monte_carlo.then_some(a.seed),
    );
    emit(&a.output, &t, manifest)
}

fn cmd_capacity(a: &CapacityArgs) -> Result<()> {
    let deltas = match (&a.delta, a.delta_range) {
        (Some(d), _) => d.clone(),
        (None, Some(r)) => log_points(r, a.points)?,
        (None, None) => return Err(Error::usage("give --delta or --delta-range")),
    };
    if deltas.is_empty() {
        return Err(Error::usage("no noise levels given"));
    }
    let constraints = a.link.constraints()?;
    let mut t = Table::new(&[
        "scheme", "gamma", "delta", "c_p", "i_bob", "i_eve", "receiver", "alpha2", "k", "theta_deg", "kappa", "q0",
    ]);
    let mut failures = 0usize;
    for &scheme in &a.scheme {
        constraints.resolve(scheme)?;
        let results: Vec<Result<CapacityResult>> = {
            use rayon::prelude::*;
            deltas
                .par_iter()
                .map(|&d| a.link.env(d).and_then(|env| optimize_private_capacity(scheme, &env, &constraints)))
                .collect()
        };
        for (&d, r) in deltas.iter().zip(results) {
            let mut row: Vec<Cell> = vec![scheme.name().into(), Cell::Num(a.link.gamma), Cell::Num(d)];
            match r {
                Ok(r) => {
                    row.extend([Cell::Num(r.c_p), Cell::Num(r.i_bob), Cell::Num(r.i_eve)]);
                    row.extend(param_cells(&r.best_params));
                }
                Err(e @ (Error::Domain(_) | Error::Usage(_))) => return Err(e),
                Err(e) => {
                    failures += 1;
                    eprintln!("warning: {scheme} at delta {d}: {e}");
                    row.extend(std::iter::repeat_n(Cell::Empty, 9));
                }
            }
            t.push(row);
        }
    }
    if failures > 0 {
        eprintln!("warning: {failures} point(s) failed");
    }
    let manifest = RunManifest::new(
        "capacity",
        json!({
            "schemes": a.scheme.iter().map(|s| s.name()).collect::<Vec<_>>(),
            "delta": deltas,
            "gamma": a.link.gamma,
            "eta": a.link.eta,
            "eve_includes_receiver_efficiency": !a.link.eve_excludes_efficiency,
            "constraints": constraints,
        }),
        None,
    );
    emit(&a.output, &t, manifest)
}

fn cmd_heatmap(a: &HeatmapArgs) -> Result<()> {
    let constraints = match &a.constraints {
        None => Constraints::default(),
        Some(p) => Constraints::from_key_value(&std::fs::read_to_string(p)?)?,
    };
    let mut grid = SweepGrid::new(
        a.scheme,
        log_points(a.delta_range, a.delta_points)?,
        linear_points(a.gamma_range, a.gamma_points)?,
    )?
    .with_constraints(constraints);
    grid.eta = a.eta;
    grid.eve_includes_receiver_efficiency = !a.eve_excludes_efficiency;
    let cells = capacity_sweep(&grid)?;
    let mut t = Table::new(&HEATMAP_HEADER);
    let mut failures = 0usize;
    for c in &cells {
        let mut row = vec![Cell::Num(c.gamma), Cell::Num(c.delta), a.scheme.name().into()];
        match &c.result {
            Ok(r) => {
                let [_, alpha2, k, theta, kappa, _] = param_cells(&r.best_params);
                row.extend([Cell::Num(r.c_p), alpha2, k, theta, kappa]);
            }
            Err(e) => {
                failures += 1;
                eprintln!("warning: cell gamma={} delta={}: {e}", c.gamma, c.delta);
                row.extend(std::iter::repeat_n(Cell::Empty, 5));
            }
        }
        t.push(row);
    }
    if failures > 0 {
        eprintln!("warning: {failures} of {} cells failed", cells.len());
    }
    let manifest = RunManifest::new("heatmap", serde_json::to_value(&grid)?, None);
    emit(&a.output, &t, manifest)
}

fn cmd_usd(a: &UsdArgs) -> Result<()> {
    let env = a.link.env(a.delta)?;
    let base = a.link.constraints()?;
    let points = log_points(a.alpha2_range, a.points)?;
    let mut t = Table::new(&["eta_alpha2", "c_p_usd", "theta_deg_usd", "c_p_pm", "theta_deg_pm", "receiver_pm"]);
    for &x in &points {
        let mean = x / env.eta();
        let fixed = Constraints { min_mean_photons: Some(mean), max_mean_photons: Some(mean), ..base.clone() };
        let usd = optimize_private_capacity(Scheme::UsdPm, &env, &fixed)?;
        let pm = optimize_private_capacity(Scheme::Pm, &env, &fixed)?;
        let theta = |r: &CapacityResult| match r.best_params {
            SchemeParams::Pm(p) => Cell::Num(p.theta.to_degrees()),
            SchemeParams::Ook(_) => Cell::Empty,
        };
        let receiver = match pm.best_params {
            SchemeParams::Pm(_) => "pm",
            SchemeParams::Ook(_) => "ook",
        };
        t.push(vec![Cell::Num(x), Cell::Num(usd.c_p), theta(&usd), Cell::Num(pm.c_p), theta(&pm), receiver.into()]);
    }
    let manifest = RunManifest::new(
        "usd",
        json!({
            "delta": a.delta,
            "gamma": a.link.gamma,
            "eta": a.link.eta,
            "alpha2_range": [a.alpha2_range.0, a.alpha2_range.1],
            "points": a.points,
            "eve_includes_receiver_efficiency": !a.link.eve_excludes_efficiency,
            "constraints": base,
        }),
        None,
    );
    emit(&a.output, &t, manifest)
}

fn cmd_detector_loss(a: &DetectorLossArgs) -> Result<()> {
    if a.n == 0 {
        return Err(Error::usage("--n must be at least 1"));
    }
    let mut t = Table::new(&["alpha2", "n", "click_prob", "lost_exact", "lost_truncated", "tv_ideal", "tv_poisson_limit"]);
    for x in linear_points(a.alpha2_range, a.points)? {
        t.push(vec![
            Cell::Num(x),
            Cell::Int(i64::from(a.n)),
            Cell::Num(interval_click_prob(x, a.n)?.value()),
            Cell::Num(expected_lost_photons(x, a.n)?),
            Cell::Num(truncated_lost_photons(x, a.n)?),
            Cell::Num(tv_distance_to_ideal(x, a.n)?),
            Cell::Num(tv_distance_to_poisson_limit(x, a.n)?),
        ]);
    }
    let manifest = RunManifest::new(
        "detector-loss",
        json!({ "n": a.n, "alpha2_range": [a.alpha2_range.0, a.alpha2_range.1], "points": a.points }),
        None,
    );
    emit(&a.output, &t, manifest)
}

fn cmd_background(a: &BackgroundArgs) -> Result<()> {
    if a.preset != "standard" {
        return Err(Error::usage(format!("unknown background preset '{}'", a.preset)));
    }
    let base = standard_scene();
    let scene = SkyScene::new(
        base.brightness,
        a.fov_urad.map_or(base.fov_half_angle, |v| v * 1e-6),
        a.aperture.unwrap_or(base.aperture_area),
        a.filter_nm.map_or(base.filter_bandwidth, |v| v * 1e-3),
        a.wavelength_nm.map_or(base.wavelength, |v| v * 1e-9),
        a.gate_ns.map_or(base.gate_time, |v| v * 1e-9),
    )?;
    let mut t = Table::new(&["condition", "relative_brightness", "brightness", "power_w", "photons_per_pulse"]);
    for r in background_table(&scene)? {
        t.push(vec![
            r.condition.into(),
            Cell::Num(r.relative_brightness),
            Cell::Num(r.brightness),
            Cell::Num(r.power_w),
            Cell::Num(r.photons_per_pulse),
        ]);
    }
    let manifest = RunManifest::new("background", json!({ "preset": a.preset, "scene": scene }), None);
    emit(&a.output, &t, manifest)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let env = LinkEnvironment::new(a.eta, a.delta, 1.0)?;
    let params = match a.scheme {
        CurveEncoding::Ook => SchemeParams::Ook(OokParams::new(a.alpha2, a.k, a.q0)?),
        CurveEncoding::Pm => {
            SchemeParams::Pm(PmParams::new(a.alpha2, a.theta.to_radians(), a.kappa, a.q0, a.tie_rule)?)
        }
    };
    let cfg = TransmissionConfig::new(params, env, a.detector.model()?, a.seed).with_pulses(a.pulses, a.repetitions);
    let report = run_transmission(&cfg)?;
    let analytic = cfg.analytic_channel()?;
    let mut t = Table::new(&["metric", "value"]);
    let mut put = |name: &str, v: f64| t.push(vec![name.into(), Cell::Num(v)]);
    put("qber_mean", report.qber_mean);
    put("qber_stddev", report.qber_stddev);
    put("qber_analytic", analytic.error_probability(a.q0));
    put("eps00", report.confusion.eps00);
    put("eps10", report.confusion.eps10);
    put("eps00_analytic", analytic.eps00);
    put("eps10_analytic", analytic.eps10);
    put("mean_clicks_per_pulse", report.mean_clicks_per_pulse);
    put("mean_clicks_given_one", report.mean_clicks_given_one);
    for (i, q) in report.per_repetition.iter().enumerate() {
        put(&format!("qber_rep{i}"), *q);
    }
    let manifest = RunManifest::new(
        "simulate",
        json!({
            "params": params,
            "eta": a.eta,
            "delta": a.delta,
            "pulses": a.pulses,
            "repetitions": a.repetitions,
            "detector": cfg.detector,
        }),
        Some(a.seed),
    );
    emit(&a.output, &t, manifest)
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::QberCurve(a) => cmd_qber_curve(a),
        Command::Capacity(a) => cmd_capacity(a),
        Command::Heatmap(a) => cmd_heatmap(a),
        Command::Usd(a) => cmd_usd(a),
        Command::DetectorLoss(a) => cmd_detector_loss(a),
        Command::Background(a) => cmd_background(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

/// Exit status for an error: 2 for bad input, 3 for numerical failure, 1 otherwise.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::Domain(_) => 2,
        Error::Numerical(_) | Error::Consistency(_) => 3,
        Error::Io(_) => 1,
    }
}

/// Parses `args` and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qkpc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:0"), Ok((0.0, 0.0)));
        assert_eq!(parse_range("1e-6:100"), Ok((1e-6, 100.0)));
        assert!(parse_range("3:1").is_err());
        assert!(parse_range("3").is_err());
        assert_eq!(linear_points((0.0, 0.0), 50).unwrap(), vec![0.0]);
        assert!(log_points((0.0, 1.0), 5).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::usage("x")), 2);
        assert_eq!(exit_code(&Error::Numerical("x".into())), 3);
    }
}
