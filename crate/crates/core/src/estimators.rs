//! Distance-field loss and fitting, zero-crossing extraction and the
//! classification-peak baseline.

use crate::error::{check_len, check_min_len, invalid, Error, Result};
use crate::synth::{BoundarySet, SignedDistanceField, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdrLossConfig {
    /// Weight of the slope penalty.
    pub alpha: f64,
    /// Huber width used in place of the absolute value while fitting.
    pub huber_delta: f64,
}

impl Default for BdrLossConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            huber_delta: 0.01,
        }
    }
}

impl BdrLossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be non-negative"));
        }
        if !(self.huber_delta > 0.0 && self.huber_delta.is_finite()) {
            return Err(invalid("huber_delta", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop once an accepted step lowers the loss by less than this.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            step_size: 1.0,
            max_iters: 2000,
            tolerance: 1e-12,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(invalid("step_size", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("tolerance", "must be positive"));
        }
        Ok(())
    }
}

fn slope_excess(a: f64, b: f64, stride: f64) -> f64 {
    ((b - a).abs() - stride).max(0.0)
}

fn slope_penalty(prediction: &[f64], stride: f64, alpha: f64) -> f64 {
    let pairs = (prediction.len() - 1) as f64;
    let sum: f64 = prediction
        .windows(2)
        .map(|w| slope_excess(w[0], w[1], stride).powi(2))
        .sum();
    alpha * sum / pairs
}

/// Mean absolute distance error plus the hinge-squared penalty on slopes
/// steeper than the grid stride.
pub fn bdr_loss(target: &SignedDistanceField, prediction: &[f64], cfg: &BdrLossConfig) -> Result<f64> {
    cfg.validate()?;
    let d = target.values();
    check_len(d.len(), prediction.len())?;
    let l1 = d.iter().zip(prediction).map(|(a, b)| (a - b).abs()).sum::<f64>() / d.len() as f64;
    Ok(l1 + slope_penalty(prediction, target.grid().stride(), cfg.alpha))
}

fn huber(r: f64, delta: f64) -> f64 {
    if r.abs() <= delta {
        r * r / (2.0 * delta)
    } else {
        r.abs() - delta / 2.0
    }
}

fn huber_slope(r: f64, delta: f64) -> f64 {
    if r.abs() <= delta {
        r / delta
    } else {
        r.signum()
    }
}

/// The loss minimised by [`fit_distance`]: the absolute term is Huber-smoothed.
pub fn smoothed_bdr_loss(
    observations: &[f64],
    prediction: &[f64],
    stride: f64,
    cfg: &BdrLossConfig,
) -> Result<f64> {
    check_len(observations.len(), prediction.len())?;
    check_min_len(2, prediction.len())?;
    Ok(smoothed_loss(observations, prediction, stride, cfg))
}

fn smoothed_loss(obs: &[f64], pred: &[f64], stride: f64, cfg: &BdrLossConfig) -> f64 {
    let fit = obs
        .iter()
        .zip(pred)
        .map(|(o, p)| huber(p - o, cfg.huber_delta))
        .sum::<f64>()
        / obs.len() as f64;
    fit + slope_penalty(pred, stride, cfg.alpha)
}

/// Analytic gradient of [`smoothed_bdr_loss`] with respect to the prediction.
pub fn smoothed_bdr_gradient(
    observations: &[f64],
    prediction: &[f64],
    stride: f64,
    cfg: &BdrLossConfig,
) -> Result<Vec<f64>> {
    check_len(observations.len(), prediction.len())?;
    check_min_len(2, prediction.len())?;
    let mut grad = vec![0.0; prediction.len()];
    smoothed_gradient(observations, prediction, stride, cfg, &mut grad);
    Ok(grad)
}

fn smoothed_gradient(obs: &[f64], pred: &[f64], stride: f64, cfg: &BdrLossConfig, grad: &mut [f64]) {
    let n = pred.len() as f64;
    for ((g, o), p) in grad.iter_mut().zip(obs).zip(pred) {
        *g = huber_slope(p - o, cfg.huber_delta) / n;
    }
    let w = 2.0 * cfg.alpha / (pred.len() - 1) as f64;
    for k in 0..pred.len() - 1 {
        let step = pred[k + 1] - pred[k];
        let excess = slope_excess(pred[k], pred[k + 1], stride);
        if excess > 0.0 {
            let push = w * excess * step.signum();
            grad[k + 1] += push;
            grad[k] -= push;
        }
    }
}

/// Fits a per-position distance series to noisy observations by gradient
/// descent with backtracking on the smoothed loss. Every accepted step lowers
/// the loss.
pub fn fit_distance(
    observations: &[f64],
    grid: &TimeGrid,
    loss_cfg: &BdrLossConfig,
    fit_cfg: &FitConfig,
) -> Result<Vec<f64>> {
    loss_cfg.validate()?;
    fit_cfg.validate()?;
    check_len(grid.len(), observations.len())?;
    if let Some(i) = observations.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let stride = grid.stride();
    let mut current = observations.to_vec();
    let mut loss = smoothed_loss(observations, &current, stride, loss_cfg);
    let mut grad = vec![0.0; current.len()];
    let mut trial = vec![0.0; current.len()];
    let mut step = fit_cfg.step_size;

    for _ in 0..fit_cfg.max_iters {
        smoothed_gradient(observations, &current, stride, loss_cfg, &mut grad);
        if grad.iter().all(|&g| g == 0.0) {
            break;
        }
        let mut accepted = None;
        while step > 1e-16 {
            for ((t, c), g) in trial.iter_mut().zip(&current).zip(&grad) {
                *t = c - step * g;
            }
            let candidate = smoothed_loss(observations, &trial, stride, loss_cfg);
            if candidate < loss {
                accepted = Some(candidate);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = accepted else { break };
        std::mem::swap(&mut current, &mut trial);
        let gain = loss - next;
        loss = next;
        step *= 1.5;
        if gain < fit_cfg.tolerance {
            break;
        }
    }
    Ok(current)
}

/// Fits `d(t) = t - b` with a single offset `b` chosen to minimise the
/// Huber-smoothed absolute error against the observations. The slope penalty
/// is zero for this family, so this is the constrained minimiser of the
/// smoothed loss.
pub fn fit_unit_slope_distance(observations: &[f64], grid: &TimeGrid, huber_delta: f64) -> Result<Vec<f64>> {
    check_len(grid.len(), observations.len())?;
    if !(huber_delta > 0.0) {
        return Err(invalid("huber_delta", "must be positive"));
    }
    if let Some(i) = observations.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let offsets: Vec<f64> = grid.times().zip(observations).map(|(t, y)| t - y).collect();
    let b = huber_location(&offsets, huber_delta);
    Ok(grid.times().map(|t| t - b).collect())
}

/// Root of `sum(clamp((b - r) / delta, -1, 1))`, which lies within `delta`
/// of the median.
fn huber_location(values: &[f64], delta: f64) -> f64 {
    let mut sorted = values.to_vec();
    let mid = sorted.len() / 2;
    let (_, median, _) = sorted.select_nth_unstable_by(mid, f64::total_cmp);
    let median = *median;
    let score = |b: f64| values.iter().map(|r| huber_slope(b - r, delta)).sum::<f64>();
    if score(median) == 0.0 {
        return median;
    }
    let (mut lo, mut hi) = (median - delta, median + delta);
    loop {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            return m;
        }
        let s = score(m);
        if s == 0.0 {
            return m;
        }
        if s < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
}

/// Which finite difference is compared against the gradient threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdDifference {
    /// `|d[t+1] - d[t]|` at the crossing.
    #[default]
    Forward,
    /// `|d[t+1] - d[t-1]| / 2`, one-sided at the ends.
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionConfig {
    /// Minimum slope at a crossing, in units of the unit-speed slope.
    pub grad_threshold: f64,
    /// Suppression radius in grid positions.
    pub nms_window: f64,
    pub difference: ThresholdDifference,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            grad_threshold: 0.5,
            nms_window: 5.0,
            difference: ThresholdDifference::Forward,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_threshold >= 0.0) {
            return Err(invalid("grad_threshold", "must be non-negative"));
        }
        if !(self.nms_window >= 1.0) {
            return Err(invalid("nms_window", "must be at least 1"));
        }
        Ok(())
    }
}

/// Rising zero crossings of a predicted distance field, refined by linear
/// interpolation and thinned by [`nms_1d`]. Boundaries are returned in frames.
///
/// Slopes are divided by the stride before thresholding, so a clean field has
/// slope 1 at every stride.
pub fn extract_boundaries(prediction: &[f64], grid: &TimeGrid, cfg: &ExtractionConfig) -> Result<BoundarySet> {
    cfg.validate()?;
    check_len(grid.len(), prediction.len())?;
    let stride = grid.stride();
    let n = prediction.len();
    let mut candidates = Vec::new();
    for t in 0..n - 1 {
        let (a, b) = (prediction[t], prediction[t + 1]);
        if !(a < 0.0 && b >= 0.0) {
            continue;
        }
        let forward = b - a;
        let slope = match cfg.difference {
            ThresholdDifference::Forward => forward,
            ThresholdDifference::Centered if t == 0 => forward,
            ThresholdDifference::Centered => (prediction[t + 1] - prediction[t - 1]) / 2.0,
        } / stride;
        if slope.abs() > cfg.grad_threshold {
            candidates.push((t as f64 + (-a) / forward, forward.abs()));
        }
    }
    let kept = nms_1d(&candidates, cfg.nms_window);
    Ok(BoundarySet::from_sorted(kept.into_iter().map(|p| p * stride).collect()))
}

/// Greedy suppression: strongest first (earlier wins ties), dropping anything
/// within `window` positions of an accepted candidate. Output is ascending.
pub fn nms_1d(candidates: &[(f64, f64)], window: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| {
        let (pi, si) = candidates[i];
        let (pj, sj) = candidates[j];
        sj.total_cmp(&si).then(pi.total_cmp(&pj))
    });
    let mut kept: Vec<f64> = Vec::new();
    for i in order {
        let p = candidates[i].0;
        if kept.iter().all(|&q| (p - q).abs() > window) {
            kept.push(p);
        }
    }
    kept.sort_by(f64::total_cmp);
    kept
}

/// Smoothing applied before peak picking.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Smoothing {
    #[default]
    None,
    /// Centred moving average over an odd number of positions.
    MovingAverage { window: usize },
    /// Gaussian filter with `sigma` in frames, truncated at four sigma.
    Gaussian { sigma: f64 },
}

impl Smoothing {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::None => Ok(()),
            Self::MovingAverage { window } if window >= 1 && window % 2 == 1 => Ok(()),
            Self::MovingAverage { window } => Err(invalid(
                "smoothing_window",
                format!("must be odd and at least 1, got {window}"),
            )),
            Self::Gaussian { sigma } if sigma > 0.0 && sigma.is_finite() => Ok(()),
            Self::Gaussian { sigma } => Err(invalid("sigma", format!("must be positive, got {sigma}"))),
        }
    }

    fn weights(&self, stride: f64) -> Option<Vec<f64>> {
        match *self {
            Self::None | Self::MovingAverage { window: 1 } => None,
            Self::MovingAverage { window } => Some(vec![1.0; window]),
            Self::Gaussian { sigma } => {
                let s = sigma / stride;
                let half = (4.0 * s).ceil() as i64;
                Some(
                    (-half..=half)
                        .map(|k| (-0.5 * (k as f64 / s).powi(2)).exp())
                        .collect(),
                )
            }
        }
    }

    /// Applies the filter; edge outputs renormalise over the taps that fall
    /// inside the series.
    pub fn apply(&self, series: &[f64], stride: f64) -> Vec<f64> {
        let Some(w) = self.weights(stride) else {
            return series.to_vec();
        };
        let half = (w.len() / 2) as isize;
        let n = series.len() as isize;
        (0..n)
            .map(|i| {
                let (mut num, mut den) = (0.0, 0.0);
                for (k, wk) in w.iter().enumerate() {
                    let j = i + k as isize - half;
                    if (0..n).contains(&j) {
                        num += wk * series[j as usize];
                        den += wk;
                    }
                }
                num / den
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClsEstimatorConfig {
    pub smoothing: Smoothing,
}

/// Peak of a boundary-probability series, refined by a three-point parabola.
/// The earliest maximum wins ties. Returns frames.
pub fn estimate_boundary_cls(probability: &[f64], grid: &TimeGrid, cfg: &ClsEstimatorConfig) -> Result<f64> {
    cfg.smoothing.validate()?;
    check_len(grid.len(), probability.len())?;
    check_min_len(3, probability.len())?;
    if let Some(i) = probability.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let p = cfg.smoothing.apply(probability, grid.stride());
    Ok(peak_position(&p)? * grid.stride())
}

fn peak_position(p: &[f64]) -> Result<f64> {
    let first = p[0];
    if p.iter().all(|&v| v == first) {
        return Err(Error::NoUniquePeak);
    }
    let i = (1..p.len()).fold(0, |best, i| if p[i] > p[best] { i } else { best });
    if i == 0 || i == p.len() - 1 {
        return Ok(i as f64);
    }
    let (l, c, r) = (p[i - 1], p[i], p[i + 1]);
    let curvature = l - 2.0 * c + r;
    let offset = if curvature < 0.0 {
        (0.5 * (l - r) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Ok(i as f64 + offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{make_distance_field, make_kernel_features};

    fn grid(stride: f64, len: usize) -> TimeGrid {
        TimeGrid::new(stride, len).unwrap()
    }

    fn field(stride: f64, len: usize, b: &[f64]) -> SignedDistanceField {
        let g = grid(stride, len);
        make_distance_field(&g, &BoundarySet::new(b.to_vec(), &g).unwrap()).unwrap()
    }

    #[test]
    fn loss_is_zero_on_exact_fit() {
        let d = field(1.0, 50, &[20.0]);
        assert_eq!(bdr_loss(&d, d.values(), &BdrLossConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn loss_of_constant_offset() {
        let d = field(1.0, 50, &[20.0]);
        let shifted: Vec<f64> = d.values().iter().map(|v| v + 1.0).collect();
        let l = bdr_loss(&d, &shifted, &BdrLossConfig::default()).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_penalises_one_steep_step() {
        // Oracle: hand evaluation of the penalty, one pair of slope 3 at stride 1.
        let t = 40;
        let g = grid(1.0, t);
        let pred: Vec<f64> = (0..t).map(|i| if i < 10 { i as f64 } else { i as f64 + 2.0 }).collect();
        let d = make_distance_field(&g, &BoundarySet::new(vec![0.0], &g).unwrap()).unwrap();
        let alpha = 0.1;
        let cfg = BdrLossConfig { alpha, ..Default::default() };
        let l1 = 2.0 * 30.0 / t as f64;
        let expected_penalty = alpha * 4.0 / (t - 1) as f64;
        let l = bdr_loss(&d, &pred, &cfg).unwrap();
        assert!((l - l1 - expected_penalty).abs() < 1e-12);
    }

    #[test]
    fn loss_scales_slope_reference_with_stride() {
        let d = field(4.0, 30, &[40.0]);
        let l = bdr_loss(&d, d.values(), &BdrLossConfig::default()).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn loss_rejects_length_mismatch() {
        let d = field(1.0, 10, &[5.0]);
        assert!(matches!(
            bdr_loss(&d, &[0.0; 9], &BdrLossConfig::default()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn fit_keeps_clean_field() {
        let d = field(1.0, 80, &[30.0]);
        let g = *d.grid();
        let fit = fit_distance(d.values(), &g, &BdrLossConfig::default(), &FitConfig::default()).unwrap();
        let l = bdr_loss(&d, &fit, &BdrLossConfig::default()).unwrap();
        assert!(l < 1e-6);
    }

    #[test]
    fn fit_without_penalty_tracks_observations() {
        let g = grid(1.0, 30);
        let obs: Vec<f64> = (0..30).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let cfg = BdrLossConfig { alpha: 0.0, huber_delta: 0.01 };
        let fit = fit_distance(&obs, &g, &cfg, &FitConfig::default()).unwrap();
        for (f, o) in fit.iter().zip(&obs) {
            assert!((f - o).abs() <= 0.01);
        }
    }

    #[test]
    fn fit_rejects_non_finite() {
        let g = grid(1.0, 3);
        assert_eq!(
            fit_distance(&[0.0, f64::NAN, 1.0], &g, &BdrLossConfig::default(), &FitConfig::default()),
            Err(Error::NonFinite(1))
        );
    }

    #[test]
    fn fit_does_not_increase_loss() {
        let g = grid(1.0, 40);
        let obs: Vec<f64> = (0..40).map(|i| i as f64 + if i % 3 == 0 { 4.0 } else { -3.0 }).collect();
        let cfg = BdrLossConfig { alpha: 2.0, huber_delta: 0.01 };
        let before = smoothed_bdr_loss(&obs, &obs, 1.0, &cfg).unwrap();
        let fit = fit_distance(&obs, &g, &cfg, &FitConfig::default()).unwrap();
        let after = smoothed_bdr_loss(&obs, &fit, 1.0, &cfg).unwrap();
        assert!(after < before);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let obs: Vec<f64> = (0..12).map(|i| (i as f64 * 1.7).sin() * 3.0).collect();
        let pred: Vec<f64> = (0..12).map(|i| (i as f64 * 0.9).cos() * 4.0).collect();
        let cfg = BdrLossConfig { alpha: 0.7, huber_delta: 0.5 };
        let g = smoothed_bdr_gradient(&obs, &pred, 1.0, &cfg).unwrap();
        let h = 1e-5;
        for k in 0..pred.len() {
            let mut up = pred.clone();
            let mut dn = pred.clone();
            up[k] += h;
            dn[k] -= h;
            let fd = (smoothed_bdr_loss(&obs, &up, 1.0, &cfg).unwrap()
                - smoothed_bdr_loss(&obs, &dn, 1.0, &cfg).unwrap())
                / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-7, "{k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn unit_slope_fit_recovers_offset() {
        let d = field(2.0, 50, &[41.0]);
        let fit = fit_unit_slope_distance(d.values(), d.grid(), 0.01).unwrap();
        for (f, v) in fit.iter().zip(d.values()) {
            assert!((f - v).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_slope_fit_is_robust_to_outliers() {
        let g = grid(1.0, 21);
        let mut obs: Vec<f64> = g.times().map(|t| t - 10.0).collect();
        obs[3] += 100.0;
        obs[17] -= 40.0;
        let fit = fit_unit_slope_distance(&obs, &g, 0.01).unwrap();
        assert!((fit[10]).abs() < 1e-9);
    }

    #[test]
    fn extraction_interpolates_linearly() {
        let g = grid(1.0, 4);
        let b = extract_boundaries(&[-2.0, -1.0, 0.5, 1.5], &g, &ExtractionConfig::default()).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b.as_slice()[0] - (1.0 + 1.0 / 1.5)).abs() < 1e-12);
    }

    #[test]
    fn extraction_is_exact_on_grid() {
        let d = field(1.0, 100, &[25.0]);
        let b = extract_boundaries(d.values(), d.grid(), &ExtractionConfig::default()).unwrap();
        assert_eq!(b.as_slice(), &[25.0]);
    }

    #[test]
    fn extraction_rejects_shallow_crossing() {
        let g = grid(1.0, 2);
        let b = extract_boundaries(&[-0.2, 0.2], &g, &ExtractionConfig::default()).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn extraction_ignores_falling_jump_between_boundaries() {
        let d = field(1.0, 100, &[25.0, 75.0]);
        let b = extract_boundaries(d.values(), d.grid(), &ExtractionConfig::default()).unwrap();
        assert_eq!(b.as_slice(), &[25.0, 75.0]);
    }

    #[test]
    fn extraction_with_centered_threshold() {
        let cfg = ExtractionConfig {
            difference: ThresholdDifference::Centered,
            ..Default::default()
        };
        let d = field(2.0, 60, &[31.0, 90.0]);
        let b = extract_boundaries(d.values(), d.grid(), &cfg).unwrap();
        assert_eq!(b.len(), 2);
        assert!((b.as_slice()[0] - 31.0).abs() < 1e-12);
        assert!((b.as_slice()[1] - 90.0).abs() < 1e-12);
    }

    #[test]
    fn nms_examples() {
        assert_eq!(nms_1d(&[(10.0, 2.0), (12.0, 1.0)], 5.0), vec![10.0]);
        assert_eq!(nms_1d(&[(10.0, 2.0), (20.0, 1.0)], 5.0), vec![10.0, 20.0]);
        assert_eq!(nms_1d(&[(12.0, 1.0), (10.0, 1.0)], 5.0), vec![10.0]);
        assert!(nms_1d(&[], 5.0).is_empty());
    }

    #[test]
    fn cls_examples() {
        let g = grid(1.0, 60);
        let k = make_kernel_features(&g, 25.0, 2.0).unwrap();
        let cfg = ClsEstimatorConfig::default();
        assert_eq!(estimate_boundary_cls(k.values(), &g, &cfg).unwrap(), 25.0);
        assert_eq!(estimate_boundary_cls(&[0.0, 1.0, 0.0], &grid(1.0, 3), &cfg).unwrap(), 1.0);
        let five = [0.0, 0.8, 1.0, 0.8, 0.0];
        assert_eq!(estimate_boundary_cls(&five, &grid(1.0, 5), &cfg).unwrap(), 2.0);
    }

    #[test]
    fn cls_flat_series_has_no_peak() {
        let g = grid(1.0, 5);
        let err = estimate_boundary_cls(&[0.3; 5], &g, &ClsEstimatorConfig::default()).unwrap_err();
        assert_eq!(err.to_string(), "no unique peak");
    }

    #[test]
    fn cls_tie_picks_earliest_peak() {
        let g = grid(1.0, 7);
        let p = [0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        assert_eq!(estimate_boundary_cls(&p, &g, &ClsEstimatorConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn cls_smoothing_keeps_symmetric_peak() {
        let g = grid(2.0, 40);
        let k = make_kernel_features(&g, 40.0, 4.0).unwrap();
        for smoothing in [Smoothing::MovingAverage { window: 3 }, Smoothing::Gaussian { sigma: 4.0 }] {
            let cfg = ClsEstimatorConfig { smoothing };
            let b = estimate_boundary_cls(k.values(), &g, &cfg).unwrap();
            assert!((b - 40.0).abs() < 1e-12, "{smoothing:?}: {b}");
        }
        let bad = ClsEstimatorConfig { smoothing: Smoothing::MovingAverage { window: 4 } };
        assert!(estimate_boundary_cls(k.values(), &g, &bad).is_err());
    }

    #[test]
    fn moving_average_edges_renormalise() {
        let s = Smoothing::MovingAverage { window: 3 }.apply(&[3.0, 6.0, 9.0], 1.0);
        assert_eq!(s, vec![4.5, 6.0, 7.5]);
    }
}
