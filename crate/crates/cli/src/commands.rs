use std::path::{Path, PathBuf};

use bdrlab::atr::{self, FlopsModel, HysteresisConfig, HysteresisMode, TauScenario};
use bdrlab::calib::{r_ece, CalibrationConfig, CalibrationScenario, RegressionEce};
use bdrlab::seed;
use bdrlab::stats::{
    scaling_fit, scaling_sweep, spearman, BootstrapConfig, ExperimentSpec, NoisePairing,
};
use bdrlab::synth::{
    make_distance_field, make_kernel_features, BoundarySet, NoiseFamily, NoiseSpec, TimeGrid,
};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{Table, Value};

/// Tables produced by a command plus whether its acceptance gate held.
pub struct Outcome {
    pub seed: Option<u64>,
    pub tables: Vec<Table>,
    pub gate_passed: bool,
}

impl Outcome {
    fn ok(seed: Option<u64>, tables: Vec<Table>) -> Self {
        Self {
            seed,
            tables,
            gate_passed: true,
        }
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Usage(format!("{what} is stochastic: --seed is required")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum NoiseKind {
    Laplace,
    Gaussian,
    StudentT,
}

fn noise_spec(kind: NoiseKind, scale: f64, nu: f64, rho: f64) -> Result<NoiseSpec, CliError> {
    let family = match kind {
        NoiseKind::Laplace => NoiseFamily::Laplace { scale },
        NoiseKind::Gaussian => NoiseFamily::Gaussian { sigma: scale },
        NoiseKind::StudentT => NoiseFamily::StudentT { nu, scale },
    };
    Ok(NoiseSpec::new(family, rho)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SeriesKind {
    /// Signed distance to the nearest boundary.
    Distance,
    /// Gaussian kernel feature.
    Features,
    /// Distance plus noise scaled by the stride.
    Observations,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Number of grid positions.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
    /// Frames per grid step.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
    /// Boundary times in frames, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesKind>,
    /// Kernel width in frames.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Kernel centre in frames; defaults to the first boundary.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseKind>,
    /// Noise scale in grid steps.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub len: usize,
    pub stride: f64,
    pub fps: f64,
    pub boundaries: Vec<f64>,
    pub series: SeriesKind,
    pub kappa: f64,
    pub center: Option<f64>,
    pub noise: NoiseKind,
    pub scale: f64,
    pub nu: f64,
    pub rho: f64,
    pub seed: Option<u64>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            len: 100,
            stride: 1.0,
            fps: TimeGrid::DEFAULT_FPS,
            boundaries: vec![25.0],
            series: SeriesKind::Distance,
            kappa: 2.0,
            center: None,
            noise: NoiseKind::Laplace,
            scale: 0.5,
            nu: NoiseFamily::DEFAULT_NU,
            rho: 0.0,
            seed: None,
        }
    }
}

pub fn synth(cfg: &SynthConfig) -> Result<Outcome, CliError> {
    let grid = TimeGrid::with_fps(cfg.stride, cfg.len, cfg.fps)?;
    let boundaries = BoundarySet::new(cfg.boundaries.clone(), &grid)?;
    let values = match cfg.series {
        SeriesKind::Distance => make_distance_field(&grid, &boundaries)?.values().to_vec(),
        SeriesKind::Features => {
            let center = cfg
                .center
                .or_else(|| boundaries.as_slice().first().copied())
                .ok_or_else(|| CliError::Usage("features need --center or a boundary".into()))?;
            make_kernel_features(&grid, center, cfg.kappa)?.values().to_vec()
        }
        SeriesKind::Observations => {
            let seed = require_seed(cfg.seed, "observation synthesis")?;
            let spec = noise_spec(cfg.noise, cfg.scale, cfg.nu, cfg.rho)?;
            let field = make_distance_field(&grid, &boundaries)?;
            let noise = bdrlab::synth::sample_noise(&spec, grid.len(), seed)?;
            field
                .values()
                .iter()
                .zip(noise)
                .map(|(d, e)| d + grid.stride() * e)
                .collect()
        }
    };
    let mut table = Table::new("series", &["position", "time_frames", "value"]);
    for (i, v) in values.into_iter().enumerate() {
        table.push(vec![i.into(), grid.time(i).into(), v.into()]);
    }
    let seed = (cfg.series == SeriesKind::Observations).then_some(cfg.seed).flatten();
    Ok(Outcome::ok(seed, vec![table]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Pairing {
    Independent,
    Shared,
}

#[derive(Debug, Args, Serialize)]
pub struct ScalingArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
    /// Kernel widths in frames, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappas: Option<Vec<f64>>,
    /// Strides in frames, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strides: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Trials per cell.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Per-frame noise scale of the peak estimator's evidence.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cls_noise_scale: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Pairing>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resamples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_r_squared: Option<f64>,
    /// Exit with status 2 when the fit falls outside the band.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub len: usize,
    pub kappas: Vec<f64>,
    pub strides: Vec<f64>,
    pub noise: NoiseKind,
    pub scale: f64,
    pub nu: f64,
    pub rho: f64,
    pub trials: usize,
    pub seed: Option<u64>,
    pub cls_noise_scale: f64,
    pub pairing: Pairing,
    pub block_size: usize,
    pub resamples: usize,
    pub slope_min: f64,
    pub slope_max: f64,
    pub min_r_squared: f64,
    pub gate: bool,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            len: 200,
            kappas: vec![1.0, 2.0, 4.0, 8.0],
            strides: vec![1.0, 2.0, 4.0, 8.0],
            noise: NoiseKind::Laplace,
            scale: 0.5,
            nu: NoiseFamily::DEFAULT_NU,
            rho: 0.0,
            trials: 10_000,
            seed: None,
            cls_noise_scale: ExperimentSpec::DEFAULT_CLS_NOISE_SCALE,
            pairing: Pairing::Independent,
            block_size: 20,
            resamples: 10_000,
            slope_min: 0.8,
            slope_max: 1.3,
            min_r_squared: 0.6,
            gate: true,
        }
    }
}

pub fn scaling(cfg: &ScalingConfig) -> Result<Outcome, CliError> {
    let cells = cfg.kappas.len() * cfg.strides.len();
    if cells < 3 {
        return Err(CliError::Usage(format!(
            "the sweep needs at least 3 cells, got {cells}"
        )));
    }
    let seed = require_seed(cfg.seed, "scaling")?;
    let grid = TimeGrid::new(cfg.strides[0], cfg.len)?;
    let noise = noise_spec(cfg.noise, cfg.scale, cfg.nu, cfg.rho)?;
    let mut base = ExperimentSpec::new(grid, cfg.kappas[0], noise, cfg.trials, seed)?;
    base.cls_noise_scale = cfg.cls_noise_scale;
    base.pairing = match cfg.pairing {
        Pairing::Independent => NoisePairing::Independent,
        Pairing::Shared => NoisePairing::Shared,
    };
    base.validate()?;
    let boot = BootstrapConfig {
        block_size: cfg.block_size,
        num_resamples: cfg.resamples,
        seed: seed::derive(seed, u64::MAX),
    };
    let cells = scaling_sweep(&base, &cfg.kappas, &cfg.strides, &boot)?;
    let fit = scaling_fit(&cells)?;
    let xs: Vec<f64> = cells.iter().map(|c| c.x).collect();
    let rs: Vec<f64> = cells.iter().map(|c| c.report.ratio_r).collect();
    let rank_corr = spearman(&xs, &rs)?;
    let passed = (cfg.slope_min..=cfg.slope_max).contains(&fit.slope) && fit.r_squared >= cfg.min_r_squared;

    let mut table = Table::new(
        "cells",
        &[
            "kappa",
            "stride",
            "x",
            "mse_bdr",
            "mse_cls",
            "ratio",
            "ci_low",
            "ci_high",
            "dispersion_ratio",
            "failures_bdr",
            "failures_cls",
        ],
    );
    for c in &cells {
        let r = &c.report;
        table.push(vec![
            c.kappa.into(),
            c.stride.into(),
            c.x.into(),
            r.bdr.mse.into(),
            r.cls.mse.into(),
            r.ratio_r.into(),
            r.ci_low.into(),
            r.ci_high.into(),
            r.dispersion_ratio.into(),
            r.bdr.failures.into(),
            r.cls.failures.into(),
        ]);
    }
    let mut summary = Table::new("fit", &["slope", "intercept", "r_squared", "spearman", "pass"]);
    summary.push(vec![
        fit.slope.into(),
        fit.intercept.into(),
        fit.r_squared.into(),
        rank_corr.into(),
        passed.into(),
    ]);
    Ok(Outcome {
        seed: Some(seed),
        tables: vec![table, summary],
        gate_passed: passed || !cfg.gate,
    })
}

#[derive(Debug, Args, Serialize)]
pub struct FlopsArgs {
    /// `expected_tau:keep_ratio` pairs, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    /// `count:mean_tau` buckets whose weighted mean adds one more row.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buckets: Option<Vec<String>>,
    /// Keep ratio used for the bucket row.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bucket_keep: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backbone: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shallow_layers: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deep_layers: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_layer_full: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heads: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictors: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attention_fraction: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlopsConfig {
    pub points: Vec<String>,
    pub buckets: Vec<String>,
    pub bucket_keep: f64,
    pub backbone: f64,
    pub shallow_layers: u32,
    pub deep_layers: u32,
    pub per_layer_full: f64,
    pub heads: f64,
    pub predictors: f64,
    pub attention_fraction: f64,
}

impl Default for FlopsConfig {
    fn default() -> Self {
        let m = FlopsModel::default();
        Self {
            points: ["0:0.8", "0.16:0.8", "1:0.8", "1:1"].map(String::from).to_vec(),
            buckets: Vec::new(),
            bucket_keep: m.keep_ratio,
            backbone: m.backbone_g,
            shallow_layers: m.shallow_layers,
            deep_layers: m.deep_layers,
            per_layer_full: m.per_layer_full_g,
            heads: m.heads_g,
            predictors: m.predictors_g,
            attention_fraction: m.attention_fraction,
        }
    }
}

fn parse_pair<A: std::str::FromStr, B: std::str::FromStr>(s: &str, what: &str) -> Result<(A, B), CliError> {
    let bad = || CliError::Usage(format!("malformed {what} `{s}`, expected `a:b`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn flops(cfg: &FlopsConfig) -> Result<Outcome, CliError> {
    let model = FlopsModel {
        backbone_g: cfg.backbone,
        shallow_layers: cfg.shallow_layers,
        deep_layers: cfg.deep_layers,
        per_layer_full_g: cfg.per_layer_full,
        heads_g: cfg.heads,
        predictors_g: cfg.predictors,
        attention_fraction: cfg.attention_fraction,
        keep_ratio: cfg.bucket_keep,
    };
    let mut points: Vec<(&str, f64, f64)> = cfg
        .points
        .iter()
        .map(|p| parse_pair::<f64, f64>(p, "point").map(|(t, k)| ("point", t, k)))
        .collect::<Result<_, _>>()?;
    if !cfg.buckets.is_empty() {
        let buckets: Vec<(u64, f64)> = cfg
            .buckets
            .iter()
            .map(|b| parse_pair(b, "bucket"))
            .collect::<Result<_, _>>()?;
        points.push(("buckets", atr::expected_tau(&buckets)?, cfg.bucket_keep));
    }
    let mut table = Table::new(
        "flops",
        &[
            "source",
            "expected_tau",
            "keep_ratio",
            "per_layer",
            "backbone",
            "shallow",
            "deep",
            "heads",
            "predictors",
            "total",
        ],
    );
    for (source, tau, keep) in points {
        let m = FlopsModel { keep_ratio: keep, ..model };
        let b = m.breakdown(tau)?;
        table.push(vec![
            source.into(),
            tau.into(),
            keep.into(),
            m.per_layer_pruned_cost().into(),
            b.backbone.into(),
            b.shallow.into(),
            b.deep.into(),
            b.heads.into(),
            b.predictors.into(),
            b.total.into(),
        ]);
    }
    Ok(Outcome::ok(None, vec![table]))
}

#[derive(Debug, Args, Serialize)]
pub struct CalibArgs {
    /// Synthetic scenario: well_calibrated or sigma_x2.
    #[arg(long, conflicts_with = "input")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// CSV file with `error,sigma` columns.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantile: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibConfig {
    pub scenario: Option<String>,
    pub input: Option<PathBuf>,
    pub samples: usize,
    pub seed: Option<u64>,
    pub bins: usize,
    pub quantile: f64,
}

impl Default for CalibConfig {
    fn default() -> Self {
        let c = CalibrationConfig::default();
        Self {
            scenario: None,
            input: None,
            samples: 100_000,
            seed: None,
            bins: c.num_bins,
            quantile: c.one_sigma_quantile,
        }
    }
}

/// Reads `(error, sigma)` rows; errors name the offending line.
pub fn read_calibration_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let input_err = |message: String| CliError::Input {
        path: path.to_owned(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(input_err("file is empty".into())),
        Some(r) => r.map_err(|e| input_err(format!("line 1: {e}")))?,
    };
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    if cols != ["error", "sigma"] {
        return Err(input_err(format!("line 1: expected header `error,sigma`, got `{}`", cols.join(","))));
    }
    let (mut errors, mut sigmas) = (Vec::new(), Vec::new());
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            input_err(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |i: usize| -> Result<f64, CliError> {
            let field = record.get(i).unwrap_or("").trim();
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| input_err(format!("line {line}: `{field}` is not a finite number")))
        };
        if record.len() != 2 {
            return Err(input_err(format!("line {line}: expected 2 fields, got {}", record.len())));
        }
        errors.push(parse(0)?);
        sigmas.push(parse(1)?);
    }
    if errors.is_empty() {
        return Err(input_err("no data rows".into()));
    }
    Ok((errors, sigmas))
}

pub fn calib(cfg: &CalibConfig) -> Result<Outcome, CliError> {
    let (errors, sigmas, seed) = match (&cfg.scenario, &cfg.input) {
        (Some(name), None) => {
            let scenario = CalibrationScenario::from_name(name)
                .ok_or_else(|| CliError::Usage(format!("unknown scenario `{name}`")))?;
            let seed = require_seed(cfg.seed, "a synthetic scenario")?;
            let (e, s) = scenario.generate(cfg.samples, seed);
            (e, s, Some(seed))
        }
        (None, Some(path)) => {
            let (e, s) = read_calibration_csv(path)?;
            (e, s, None)
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --scenario or --input".into(),
            ))
        }
    };
    let calib_cfg = CalibrationConfig {
        num_bins: cfg.bins,
        one_sigma_quantile: cfg.quantile,
    };
    let RegressionEce { value, bins } = r_ece(&errors, &sigmas, &calib_cfg)?;
    let mut table = Table::new("bins", &["bin", "count", "min_sigma", "max_sigma", "coverage"]);
    for (i, b) in bins.iter().enumerate() {
        table.push(vec![
            i.into(),
            b.count.into(),
            b.min_sigma.into(),
            b.max_sigma.into(),
            b.coverage.into(),
        ]);
    }
    let mut summary = Table::new("summary", &["samples", "r_ece"]);
    summary.push(vec![errors.len().into(), value.into()]);
    Ok(Outcome::ok(seed, vec![table, summary]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Mode {
    HoldPrevious,
    DeadzoneHalf,
}

impl From<Mode> for HysteresisMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::HoldPrevious => HysteresisMode::HoldPrevious,
            Mode::DeadzoneHalf => HysteresisMode::DeadzoneHalf,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AtrSimArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
    /// Raw flip rate the correlation is tuned for; ignored when --rho is set.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flip_target: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Logit offset of the trace.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    /// Logit scale of the correlated noise.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Mode marked as selected in the report.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtrSimConfig {
    pub len: usize,
    pub flip_target: f64,
    pub rho: Option<f64>,
    pub level: f64,
    pub scale: f64,
    pub gamma: f64,
    pub mode: Mode,
    pub seed: Option<u64>,
}

impl Default for AtrSimConfig {
    fn default() -> Self {
        let sc = TauScenario::calibrated(10_000);
        Self {
            len: sc.len,
            flip_target: 0.182,
            rho: None,
            level: sc.level,
            scale: sc.scale,
            gamma: HysteresisConfig::default().gamma,
            mode: Mode::HoldPrevious,
            seed: None,
        }
    }
}

pub fn atr_sim(cfg: &AtrSimConfig) -> Result<Outcome, CliError> {
    let seed = require_seed(cfg.seed, "atr-sim")?;
    if !(cfg.gamma >= 0.0) {
        return Err(CliError::Usage("--gamma must be non-negative".into()));
    }
    let scenario = TauScenario {
        len: cfg.len,
        rho: cfg.rho.unwrap_or_else(|| TauScenario::rho_for_flip_rate(cfg.flip_target)),
        level: cfg.level,
        scale: cfg.scale,
    };
    let raw = scenario.generate(seed)?;
    let mut table = Table::new("modes", &["mode", "selected", "flip_rate", "mean_tau", "mean_shift"]);
    table.push(vec![
        "raw".into(),
        false.into(),
        atr::flip_rate(&raw).into(),
        raw.mean().into(),
        0.0.into(),
    ]);
    for mode in [Mode::HoldPrevious, Mode::DeadzoneHalf] {
        let out = atr::apply_hysteresis(&raw, &HysteresisConfig { gamma: cfg.gamma, mode: mode.into() });
        let name = mode.to_possible_value().expect("named").get_name().to_owned();
        table.push(vec![
            Value::Text(name),
            (mode == cfg.mode).into(),
            atr::flip_rate(&out).into(),
            out.mean().into(),
            (out.mean() - raw.mean()).into(),
        ]);
    }
    Ok(Outcome::ok(Some(seed), vec![table]))
}
