//! Monte-Carlo trials comparing the distance-regression and peak estimators,
//! plus the resampling and regression utilities used to summarise them.
//!
//! Every trial draws from its own stream, seeded by hashing the master seed
//! with the trial index, and results are collected in trial order. Reports are
//! therefore identical for any thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_len, invalid, Error, Result};
use crate::estimators::{
    estimate_boundary_cls, extract_boundaries, fit_distance, fit_unit_slope_distance, BdrLossConfig,
    ClsEstimatorConfig, ExtractionConfig, FitConfig, Smoothing,
};
use crate::seed;
use crate::synth::{make_distance_field, make_kernel_features, BoundarySet, NoiseSpec, TimeGrid};

/// How the two estimators' noise draws relate within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoisePairing {
    #[default]
    Independent,
    /// Both estimators see the same unit-scale draws.
    Shared,
}

/// Distance-field fitter used by the regression pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BdrFit {
    /// One offset shared by all positions, slope fixed to one.
    #[default]
    UnitSlope,
    /// Free value per position, fitted by gradient descent.
    PerPosition(FitConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ClsSmoothing {
    /// Gaussian filter whose width equals the kernel width.
    #[default]
    Matched,
    Fixed(Smoothing),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorSet {
    pub bdr: bool,
    pub cls: bool,
}

impl EstimatorSet {
    pub const BOTH: Self = Self { bdr: true, cls: true };
    pub const BDR: Self = Self { bdr: true, cls: false };
    pub const CLS: Self = Self { bdr: false, cls: true };
}

/// One synthetic condition.
///
/// Distance observations are `d(t) + stride * e(t)` with `e` drawn from
/// `noise`, so the noise is expressed in grid steps. Peak observations are
/// `clip(phi(t) + cls_noise_scale / sqrt(stride) * u(t), 0, 1)` where `u` is
/// unit-scale noise of the same family and correlation: each position
/// averages `stride` frames of per-frame evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub grid: TimeGrid,
    pub kappa: f64,
    pub boundary: f64,
    pub noise: NoiseSpec,
    pub num_trials: usize,
    pub master_seed: u64,
    pub estimators: EstimatorSet,
    pub cls_noise_scale: f64,
    pub pairing: NoisePairing,
    pub bdr_fit: BdrFit,
    pub bdr_loss: BdrLossConfig,
    pub extraction: ExtractionConfig,
    pub cls_smoothing: ClsSmoothing,
}

impl ExperimentSpec {
    pub const DEFAULT_CLS_NOISE_SCALE: f64 = 0.0625;

    /// Both estimators, boundary at the middle grid position.
    pub fn new(grid: TimeGrid, kappa: f64, noise: NoiseSpec, num_trials: usize, master_seed: u64) -> Result<Self> {
        let spec = Self {
            grid,
            kappa,
            boundary: mid_boundary(&grid),
            noise,
            num_trials,
            master_seed,
            estimators: EstimatorSet::BOTH,
            cls_noise_scale: Self::DEFAULT_CLS_NOISE_SCALE,
            pairing: NoisePairing::Independent,
            bdr_fit: BdrFit::UnitSlope,
            bdr_loss: BdrLossConfig::default(),
            extraction: ExtractionConfig::default(),
            cls_smoothing: ClsSmoothing::Matched,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_trials < 2 {
            return Err(invalid("num_trials", "need at least 2 trials"));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(invalid("kappa", "must be positive"));
        }
        if !(self.boundary > 0.0 && self.boundary < self.grid.span()) {
            return Err(invalid("boundary", "must lie strictly inside the grid"));
        }
        if !(self.cls_noise_scale >= 0.0 && self.cls_noise_scale.is_finite()) {
            return Err(invalid("cls_noise_scale", "must be non-negative"));
        }
        if !(self.estimators.bdr || self.estimators.cls) {
            return Err(invalid("estimators", "select at least one estimator"));
        }
        self.bdr_loss.validate()?;
        self.extraction.validate()?;
        if let BdrFit::PerPosition(fit) = self.bdr_fit {
            fit.validate()?;
        }
        self.cls_config().smoothing.validate()
    }

    /// Same condition on another grid, boundary re-centred.
    pub fn on_grid(&self, grid: TimeGrid) -> Self {
        Self {
            grid,
            boundary: mid_boundary(&grid),
            ..self.clone()
        }
    }

    fn cls_config(&self) -> ClsEstimatorConfig {
        let smoothing = match self.cls_smoothing {
            ClsSmoothing::Matched => Smoothing::Gaussian { sigma: self.kappa },
            ClsSmoothing::Fixed(s) => s,
        };
        ClsEstimatorConfig { smoothing }
    }
}

/// Time of the middle grid position.
pub fn mid_boundary(grid: &TimeGrid) -> f64 {
    grid.time(grid.len() / 2)
}

/// Signed errors in frames, indexed by trial; `None` marks a failed estimate.
/// A list is empty when its estimator was not selected.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialErrors {
    pub bdr: Vec<Option<f64>>,
    pub cls: Vec<Option<f64>>,
}

struct TrialContext {
    distance: Vec<f64>,
    kernel: Vec<f64>,
    cls: ClsEstimatorConfig,
}

pub fn run_trials(spec: &ExperimentSpec) -> Result<TrialErrors> {
    spec.validate()?;
    let grid = spec.grid;
    let truth = BoundarySet::new(vec![spec.boundary], &grid)?;
    let ctx = TrialContext {
        distance: make_distance_field(&grid, &truth)?.values().to_vec(),
        kernel: make_kernel_features(&grid, spec.boundary, spec.kappa)?.values().to_vec(),
        cls: spec.cls_config(),
    };
    let results: Vec<(Option<f64>, Option<f64>)> = (0..spec.num_trials as u64)
        .into_par_iter()
        .map(|trial| run_trial(spec, &ctx, trial))
        .collect();
    let (bdr, cls): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(TrialErrors {
        bdr: if spec.estimators.bdr { bdr } else { Vec::new() },
        cls: if spec.estimators.cls { cls } else { Vec::new() },
    })
}

fn run_trial(spec: &ExperimentSpec, ctx: &TrialContext, trial: u64) -> (Option<f64>, Option<f64>) {
    let trial_seed = seed::derive(spec.master_seed, trial);
    let bdr_seed = seed::derive(trial_seed, 0);
    let cls_seed = match spec.pairing {
        NoisePairing::Independent => seed::derive(trial_seed, 1),
        NoisePairing::Shared => bdr_seed,
    };
    let bdr = spec
        .estimators
        .bdr
        .then(|| bdr_trial(spec, ctx, bdr_seed))
        .flatten();
    let cls = spec
        .estimators
        .cls
        .then(|| cls_trial(spec, ctx, cls_seed))
        .flatten();
    (bdr, cls)
}

fn bdr_trial(spec: &ExperimentSpec, ctx: &TrialContext, seed: u64) -> Option<f64> {
    let grid = &spec.grid;
    let mut noise = vec![0.0; grid.len()];
    spec.noise.fill_unit(&mut seed::rng(seed), &mut noise);
    let amplitude = spec.noise.scale() * grid.stride();
    let observations: Vec<f64> = ctx
        .distance
        .iter()
        .zip(&noise)
        .map(|(d, e)| d + amplitude * e)
        .collect();
    let fitted = match spec.bdr_fit {
        BdrFit::UnitSlope => fit_unit_slope_distance(&observations, grid, spec.bdr_loss.huber_delta),
        BdrFit::PerPosition(fit) => fit_distance(&observations, grid, &spec.bdr_loss, &fit),
    }
    .ok()?;
    let found = extract_boundaries(&fitted, grid, &spec.extraction).ok()?;
    nearest_error(found.as_slice(), spec.boundary)
}

fn cls_trial(spec: &ExperimentSpec, ctx: &TrialContext, seed: u64) -> Option<f64> {
    let grid = &spec.grid;
    let mut noise = vec![0.0; grid.len()];
    spec.noise.fill_unit(&mut seed::rng(seed), &mut noise);
    let amplitude = spec.cls_noise_scale / grid.stride().sqrt();
    let p: Vec<f64> = ctx
        .kernel
        .iter()
        .zip(&noise)
        .map(|(k, e)| (k + amplitude * e).clamp(0.0, 1.0))
        .collect();
    estimate_boundary_cls(&p, grid, &ctx.cls)
        .ok()
        .map(|b| b - spec.boundary)
}

/// Signed error of the candidate closest to the truth.
fn nearest_error(candidates: &[f64], truth: f64) -> Option<f64> {
    candidates
        .iter()
        .map(|b| b - truth)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
}

/// Error statistics of one estimator; failures are excluded from the moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSummary {
    pub n: usize,
    pub failures: usize,
    pub mean_error: f64,
    /// Mean squared error about the truth.
    pub mse: f64,
    /// Variance about the mean error.
    pub variance: f64,
}

pub fn summarize(errors: &[Option<f64>]) -> EstimatorSummary {
    let ok: Vec<f64> = errors.iter().flatten().copied().collect();
    let n = ok.len();
    let failures = errors.len() - n;
    if n == 0 {
        return EstimatorSummary {
            n,
            failures,
            mean_error: f64::NAN,
            mse: f64::NAN,
            variance: f64::NAN,
        };
    }
    let mean = ok.iter().sum::<f64>() / n as f64;
    EstimatorSummary {
        n,
        failures,
        mean_error: mean,
        mse: ok.iter().map(|e| e * e).sum::<f64>() / n as f64,
        variance: ok.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    /// Consecutive trials resampled together.
    pub block_size: usize,
    pub num_resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            block_size: 20,
            num_resamples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    pub bdr: EstimatorSummary,
    pub cls: EstimatorSummary,
    /// Ratio of mean squared errors about the truth.
    pub ratio_r: f64,
    /// Ratio of variances about each estimator's own mean.
    pub dispersion_ratio: f64,
    /// 95% blocked-bootstrap interval for `ratio_r`.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// MSE ratio of paired per-trial errors, with a blocked-bootstrap interval.
pub fn variance_ratio(
    errors_bdr: &[Option<f64>],
    errors_cls: &[Option<f64>],
    boot: &BootstrapConfig,
) -> Result<VarianceReport> {
    if errors_bdr.is_empty() || errors_cls.is_empty() {
        return Err(invalid("errors", "both error lists must be non-empty"));
    }
    check_len(errors_bdr.len(), errors_cls.len())?;
    if boot.block_size == 0 {
        return Err(invalid("block_size", "must be positive"));
    }
    let bdr = summarize(errors_bdr);
    let cls = summarize(errors_cls);
    if !(cls.mse > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    if bdr.n == 0 {
        return Err(invalid("errors_bdr", "every trial failed"));
    }

    let sq = |e: &Option<f64>| e.map_or((0.0, 0.0), |e| (e * e, 1.0));
    let groups: Vec<[f64; 4]> = errors_bdr
        .chunks(boot.block_size)
        .zip(errors_cls.chunks(boot.block_size))
        .map(|(b, c)| {
            let mut g = [0.0; 4];
            for (eb, ec) in b.iter().zip(c) {
                let (sb, nb) = sq(eb);
                let (sc, nc) = sq(ec);
                g[0] += sb;
                g[1] += nb;
                g[2] += sc;
                g[3] += nc;
            }
            g
        })
        .collect();
    let (ci_low, ci_high) = blocked_bootstrap(&groups, boot.num_resamples, boot.seed, |sample| {
        let mut t = [0.0; 4];
        for g in sample {
            for k in 0..4 {
                t[k] += g[k];
            }
        }
        (t[0] / t[1]) / (t[2] / t[3])
    })?;
    Ok(VarianceReport {
        bdr,
        cls,
        ratio_r: bdr.mse / cls.mse,
        dispersion_ratio: bdr.variance / cls.variance,
        ci_low,
        ci_high,
    })
}

/// Percentile interval (2.5%, 97.5%) of `statistic` over resamples of whole
/// groups drawn with replacement.
pub fn blocked_bootstrap<G, F>(groups: &[G], num_resamples: usize, seed: u64, statistic: F) -> Result<(f64, f64)>
where
    G: Sync,
    F: Fn(&[&G]) -> f64 + Sync,
{
    if groups.len() < 2 {
        return Err(invalid("groups", format!("need at least 2 groups, got {}", groups.len())));
    }
    if num_resamples == 0 {
        return Err(invalid("num_resamples", "must be positive"));
    }
    let mut stats: Vec<f64> = (0..num_resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::rng(seed::derive(seed, r));
            let sample: Vec<&G> = (0..groups.len())
                .map(|_| &groups[rng.random_range(0..groups.len())])
                .collect();
            statistic(&sample)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    Ok((percentile(&stats, 0.025), percentile(&stats, 0.975)))
}

/// Bootstrap interval for the pooled mean of grouped samples.
pub fn bootstrap_mean_ci(groups: &[Vec<f64>], num_resamples: usize, seed: u64) -> Result<(f64, f64)> {
    let sums: Vec<(f64, f64)> = groups
        .iter()
        .map(|g| (g.iter().sum(), g.len() as f64))
        .collect();
    blocked_bootstrap(&sums, num_resamples, seed, |sample| {
        let (s, n) = sample
            .iter()
            .fold((0.0, 0.0), |(s, n), g| (s + g.0, n + g.1));
        s / n
    })
}

/// Linear-interpolation percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Holm step-down adjusted p-values, monotone and capped at one.
pub fn holm_bonferroni(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(invalid("p_values", format!("{p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]).then(i.cmp(&j)));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max((m - rank) as f64 * p_values[i]).min(1.0);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    check_len(x.len(), y.len())?;
    if x.len() < 3 {
        return Err(Error::TooShort { min: 3, actual: x.len() });
    }
    if let Some(v) = x.iter().chain(y).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(invalid("values", format!("must be positive, got {v}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("x", "all x values are equal"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sst: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r_squared = if sst == 0.0 { 1.0 } else { 1.0 - sse / sst };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation, ties given average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x.len(), y.len())?;
    if x.len() < 2 {
        return Err(Error::TooShort { min: 2, actual: x.len() });
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    Ok(cov / (vx * vy).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthBin {
    pub label: &'static str,
    pub count: usize,
    /// `None` when no result fell in the bin.
    pub mean_r: Option<f64>,
}

/// Mean ratio in the width bins `W <= s`, `(s, 2s]`, `(2s, 3s]` and `> 3s`
/// for stride `s`.
pub fn width_stratified_r(results: &[(f64, f64)], stride: f64) -> Result<[WidthBin; 4]> {
    if !(stride > 0.0) {
        return Err(invalid("stride", "must be positive"));
    }
    if let Some(&(w, r)) = results.iter().find(|(w, r)| !(*w > 0.0 && *r > 0.0)) {
        return Err(invalid("results", format!("width {w} and ratio {r} must be positive")));
    }
    const LABELS: [&str; 4] = ["W<=dt", "dt<W<=2dt", "2dt<W<=3dt", "W>3dt"];
    let mut sums = [(0.0, 0usize); 4];
    for &(w, r) in results {
        let rel = w / stride;
        let bin = if rel <= 1.0 {
            0
        } else if rel <= 2.0 {
            1
        } else if rel <= 3.0 {
            2
        } else {
            3
        };
        sums[bin].0 += r;
        sums[bin].1 += 1;
    }
    Ok(std::array::from_fn(|i| WidthBin {
        label: LABELS[i],
        count: sums[i].1,
        mean_r: (sums[i].1 > 0).then(|| sums[i].0 / sums[i].1 as f64),
    }))
}

fn report_for(spec: &ExperimentSpec, boot: &BootstrapConfig, index: u64) -> Result<VarianceReport> {
    let errors = run_trials(spec)?;
    let boot = BootstrapConfig {
        seed: seed::derive(boot.seed, index),
        ..*boot
    };
    variance_ratio(&errors.bdr, &errors.cls, &boot)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingCell {
    pub kappa: f64,
    pub stride: f64,
    /// `stride^2 / kappa`.
    pub x: f64,
    pub report: VarianceReport,
}

/// Runs every `(kappa, stride)` combination on the base spec's grid length,
/// each cell with its own derived seed.
pub fn scaling_sweep(
    base: &ExperimentSpec,
    kappas: &[f64],
    strides: &[f64],
    boot: &BootstrapConfig,
) -> Result<Vec<ScalingCell>> {
    let mut cells = Vec::with_capacity(kappas.len() * strides.len());
    for (ki, &kappa) in kappas.iter().enumerate() {
        for (si, &stride) in strides.iter().enumerate() {
            let index = (ki * strides.len() + si) as u64;
            let grid = TimeGrid::with_fps(stride, base.grid.len(), base.grid.fps())?;
            let spec = ExperimentSpec {
                kappa,
                master_seed: seed::derive(base.master_seed, index),
                ..base.on_grid(grid)
            };
            let report = report_for(&spec, boot, index)?;
            cells.push(ScalingCell {
                kappa,
                stride,
                x: stride * stride / kappa,
                report,
            });
        }
    }
    Ok(cells)
}

/// Log-log fit of the MSE ratio against `stride^2 / kappa`.
pub fn scaling_fit(cells: &[ScalingCell]) -> Result<LogLogFit> {
    let x: Vec<f64> = cells.iter().map(|c| c.x).collect();
    let y: Vec<f64> = cells.iter().map(|c| c.report.ratio_r).collect();
    loglog_slope(&x, &y)
}

/// Runs the base spec at each plateau width `W`, with `kappa = W / 2`.
pub fn width_sweep(base: &ExperimentSpec, widths: &[f64], boot: &BootstrapConfig) -> Result<Vec<(f64, VarianceReport)>> {
    widths
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let spec = ExperimentSpec {
                kappa: w / 2.0,
                master_seed: seed::derive(base.master_seed, i as u64),
                ..base.clone()
            };
            Ok((w, report_for(&spec, boot, i as u64)?))
        })
        .collect()
}

/// Re-runs the base spec at each AR(1) coefficient with the same seeds.
pub fn correlation_robustness(
    base: &ExperimentSpec,
    rhos: &[f64],
    boot: &BootstrapConfig,
) -> Result<Vec<(f64, VarianceReport)>> {
    rhos.iter()
        .map(|&rho| {
            let spec = ExperimentSpec {
                noise: base.noise.with_rho(rho)?,
                ..base.clone()
            };
            Ok((rho, report_for(&spec, boot, 0)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum VarianceScaling {
    Fit {
        fit: LogLogFit,
        /// `(x, mean squared error)` per condition.
        points: Vec<(f64, f64)>,
    },
    /// Some condition had zero error variance, so no log-log fit exists.
    Degenerate,
}

fn variance_scaling(specs: Vec<(f64, ExperimentSpec)>, pick: fn(&TrialErrors) -> &[Option<f64>]) -> Result<VarianceScaling> {
    if specs.len() < 3 {
        return Err(Error::TooShort { min: 3, actual: specs.len() });
    }
    let points = specs
        .iter()
        .map(|(x, spec)| {
            let errors = run_trials(spec)?;
            Ok((*x, summarize(pick(&errors)).mse))
        })
        .collect::<Result<Vec<_>>>()?;
    if points.iter().any(|&(_, v)| !(v > 0.0)) {
        return Ok(VarianceScaling::Degenerate);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    Ok(VarianceScaling::Fit {
        fit: loglog_slope(&x, &y)?,
        points,
    })
}

/// Distance-regression MSE against sequence length, boundary kept mid-grid.
pub fn finite_sample_variance_check(base: &ExperimentSpec, lengths: &[usize]) -> Result<VarianceScaling> {
    let specs = lengths
        .iter()
        .enumerate()
        .map(|(i, &len)| {
            let grid = TimeGrid::with_fps(base.grid.stride(), len, base.grid.fps())?;
            let spec = ExperimentSpec {
                estimators: EstimatorSet::BDR,
                master_seed: seed::derive(base.master_seed, i as u64),
                ..base.on_grid(grid)
            };
            Ok((len as f64, spec))
        })
        .collect::<Result<Vec<_>>>()?;
    variance_scaling(specs, |e| &e.bdr)
}

/// Peak-estimator MSE against kernel width.
pub fn cls_kappa_variance_check(base: &ExperimentSpec, kappas: &[f64]) -> Result<VarianceScaling> {
    let specs = kappas
        .iter()
        .enumerate()
        .map(|(i, &kappa)| {
            let spec = ExperimentSpec {
                kappa,
                estimators: EstimatorSet::CLS,
                master_seed: seed::derive(base.master_seed, i as u64),
                ..base.clone()
            };
            (kappa, spec)
        })
        .collect();
    variance_scaling(specs, |e| &e.cls)
}
