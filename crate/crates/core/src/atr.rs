//! Continuous depth allocation: residual blending, hysteresis, guarded token
//! pruning, sparsity penalties and the analytic cost model.

use crate::error::{check_len, invalid, Result};
use crate::seed;
use crate::synth::{BoundarySet, NoiseFamily, NoiseSpec, TimeGrid};

/// Per-position depth allocation, each value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauTrace(Vec<f64>);

impl TauTrace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(invalid("tau", format!("{v} outside [0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `shallow + tau * (deep - shallow)`.
pub fn blend_residual(shallow: &[f64], deep: &[f64], tau: &TauTrace) -> Result<Vec<f64>> {
    check_len(shallow.len(), deep.len())?;
    check_len(shallow.len(), tau.len())?;
    Ok(shallow
        .iter()
        .zip(deep)
        .zip(tau.values())
        .map(|((s, d), t)| s + t * (d - s))
        .collect())
}

/// Derivative of [`blend_residual`] with respect to tau.
pub fn blend_tau_derivative(shallow: &[f64], deep: &[f64]) -> Result<Vec<f64>> {
    check_len(shallow.len(), deep.len())?;
    Ok(shallow.iter().zip(deep).map(|(s, d)| d - s).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HysteresisMode {
    /// Keep the previous stabilised value while the new one stays inside the band.
    #[default]
    HoldPrevious,
    /// Snap values within the band around one half to exactly one half.
    DeadzoneHalf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisConfig {
    pub gamma: f64,
    pub mode: HysteresisMode,
}

impl Default for HysteresisConfig {
    fn default() -> Self {
        Self {
            gamma: 0.05,
            mode: HysteresisMode::HoldPrevious,
        }
    }
}

pub fn apply_hysteresis(tau: &TauTrace, cfg: &HysteresisConfig) -> TauTrace {
    let gamma = cfg.gamma;
    let values = match cfg.mode {
        HysteresisMode::HoldPrevious => {
            let mut out: Vec<f64> = Vec::with_capacity(tau.len());
            for &t in tau.values() {
                let v = match out.last() {
                    Some(&prev) if (t - prev).abs() < gamma => prev,
                    _ => t,
                };
                out.push(v);
            }
            out
        }
        HysteresisMode::DeadzoneHalf => tau
            .values()
            .iter()
            .map(|&t| if (t - 0.5).abs() <= gamma { 0.5 } else { t })
            .collect(),
    };
    TauTrace(values)
}

/// Fraction of adjacent pairs on opposite sides of one half; exactly one half
/// counts as the upper side. Traces shorter than two have rate zero.
pub fn flip_rate(tau: &TauTrace) -> f64 {
    let v = tau.values();
    if v.len() < 2 {
        return 0.0;
    }
    let flips = v.windows(2).filter(|w| (w[0] >= 0.5) != (w[1] >= 0.5)).count();
    flips as f64 / (v.len() - 1) as f64
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `logistic(scale * ln(variance) + offset)` per position.
pub fn surrogate_tau(uncertainty: &[f64], scale: f64, offset: f64) -> Result<TauTrace> {
    if let Some(v) = uncertainty.iter().find(|v| !(**v > 0.0)) {
        return Err(invalid("uncertainty", format!("must be positive, got {v}")));
    }
    Ok(TauTrace(
        uncertainty
            .iter()
            .map(|u| logistic(scale * u.ln() + offset))
            .collect(),
    ))
}

/// Offset for [`surrogate_tau`] whose mean tau hits `target_mean`, by bisection.
pub fn calibrate_tau_offset(uncertainty: &[f64], scale: f64, target_mean: f64) -> Result<f64> {
    if !(target_mean > 0.0 && target_mean < 1.0) {
        return Err(invalid("target_mean", "must lie in (0, 1)"));
    }
    if uncertainty.is_empty() {
        return Err(invalid("uncertainty", "must not be empty"));
    }
    let mean_at = |offset: f64| surrogate_tau(uncertainty, scale, offset).map(|t| t.mean());
    let (mut lo, mut hi) = (-1.0, 1.0);
    while mean_at(lo)? > target_mean {
        lo *= 2.0;
    }
    while mean_at(hi)? < target_mean {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid)? < target_mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Synthetic tau trace: `logistic(level + scale * z)` with `z` a unit Gaussian
/// AR(1) process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauScenario {
    pub len: usize,
    pub rho: f64,
    pub level: f64,
    pub scale: f64,
}

impl TauScenario {
    /// Correlation giving a raw flip rate of `rate` for a zero-level trace:
    /// for a Gaussian AR(1) the sign-change rate is `acos(rho) / pi`.
    pub fn rho_for_flip_rate(rate: f64) -> f64 {
        (std::f64::consts::PI * rate).cos()
    }

    /// Raw flip rate near 18% with small in-band steps.
    pub fn calibrated(len: usize) -> Self {
        Self {
            len,
            rho: Self::rho_for_flip_rate(0.182),
            level: 0.0,
            scale: 0.2,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<TauTrace> {
        let spec = NoiseSpec::new(NoiseFamily::Gaussian { sigma: 1.0 }, self.rho)?;
        let mut z = vec![0.0; self.len];
        spec.fill(&mut seed::rng(seed), &mut z);
        Ok(TauTrace(
            z.into_iter()
                .map(|z| logistic(self.level + self.scale * z))
                .collect(),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneConfig {
    pub keep_ratio: f64,
    /// Frames on either side of a predicted boundary that are always kept.
    pub guard_radius: f64,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            keep_ratio: 0.8,
            guard_radius: 12.0,
        }
    }
}

impl PruneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.keep_ratio > 0.0 && self.keep_ratio <= 1.0) {
            return Err(invalid("keep_ratio", "must lie in (0, 1]"));
        }
        if !(self.guard_radius >= 0.0) {
            return Err(invalid("guard_radius", "must be non-negative"));
        }
        Ok(())
    }

    pub fn keep_count(&self, len: usize) -> usize {
        ((self.keep_ratio * len as f64) + 1e-9).floor() as usize
    }
}

/// Top-k positions by importance (earlier wins ties), plus every position
/// within the guard radius of a predicted boundary.
pub fn prune_mask(
    importance: &[f64],
    cfg: &PruneConfig,
    predicted_boundaries: &BoundarySet,
    grid: &TimeGrid,
) -> Result<Vec<bool>> {
    cfg.validate()?;
    check_len(grid.len(), importance.len())?;
    let mut order: Vec<usize> = (0..importance.len()).collect();
    order.sort_by(|&i, &j| importance[j].total_cmp(&importance[i]).then(i.cmp(&j)));
    let mut keep = vec![false; importance.len()];
    for &i in order.iter().take(cfg.keep_count(importance.len())) {
        keep[i] = true;
    }
    let stride = grid.stride();
    let last = grid.len() as i64 - 1;
    for &b in predicted_boundaries.as_slice() {
        let lo = (((b - cfg.guard_radius) / stride).floor() as i64 - 1).clamp(0, last);
        let hi = (((b + cfg.guard_radius) / stride).ceil() as i64 + 1).clamp(0, last);
        for i in lo..=hi {
            let i = i as usize;
            if (grid.time(i) - b).abs() <= cfg.guard_radius {
                keep[i] = true;
            }
        }
    }
    Ok(keep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub lambda_c: f64,
    pub lambda_p: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            lambda_c: 0.05,
            lambda_p: 0.01,
        }
    }
}

/// `(lambda_c * mean(tau), lambda_p * mean(keep_weights))`.
pub fn sparsity_penalties(tau: &TauTrace, keep_weights: &[f64], cfg: &PenaltyConfig) -> (f64, f64) {
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    (cfg.lambda_c * tau.mean(), cfg.lambda_p * mean(keep_weights))
}

/// Count-weighted mean of per-bucket mean tau values.
pub fn expected_tau(buckets: &[(u64, f64)]) -> Result<f64> {
    if buckets.is_empty() {
        return Err(invalid("buckets", "must not be empty"));
    }
    if buckets.iter().any(|&(n, _)| n == 0) {
        return Err(invalid("buckets", "counts must be positive"));
    }
    let total: u64 = buckets.iter().map(|&(n, _)| n).sum();
    let weighted: f64 = buckets.iter().map(|&(n, t)| n as f64 * t).sum();
    Ok(weighted / total as f64)
}

/// Analytic cost model, in GFLOPs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlopsModel {
    pub backbone_g: f64,
    pub shallow_layers: u32,
    pub deep_layers: u32,
    pub per_layer_full_g: f64,
    pub heads_g: f64,
    pub predictors_g: f64,
    /// Share of a layer's cost that is quadratic in the kept tokens.
    pub attention_fraction: f64,
    pub keep_ratio: f64,
}

impl Default for FlopsModel {
    fn default() -> Self {
        Self {
            backbone_g: 124.0,
            shallow_layers: 2,
            deep_layers: 7,
            per_layer_full_g: 12.33,
            heads_g: 5.0,
            predictors_g: 0.12,
            attention_fraction: 0.6,
            keep_ratio: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlopsBreakdown {
    pub backbone: f64,
    pub shallow: f64,
    pub deep: f64,
    pub heads: f64,
    pub predictors: f64,
    pub total: f64,
}

impl FlopsModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.attention_fraction) {
            return Err(invalid("attention_fraction", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.keep_ratio) {
            return Err(invalid("keep_ratio", "must lie in [0, 1]"));
        }
        let costs = [self.backbone_g, self.per_layer_full_g, self.heads_g, self.predictors_g];
        if costs.iter().any(|c| !(*c >= 0.0)) {
            return Err(invalid("cost", "costs must be non-negative"));
        }
        Ok(())
    }

    /// Attention scales with the square of the kept fraction, the rest linearly.
    pub fn per_layer_pruned_cost(&self) -> f64 {
        let k = self.keep_ratio;
        let a = self.attention_fraction;
        self.per_layer_full_g * (a * k * k + (1.0 - a) * k)
    }

    pub fn breakdown(&self, expected_tau: f64) -> Result<FlopsBreakdown> {
        self.validate()?;
        if !(0.0..=1.0).contains(&expected_tau) {
            return Err(invalid("expected_tau", format!("{expected_tau} outside [0, 1]")));
        }
        let layer = self.per_layer_pruned_cost();
        let shallow = self.shallow_layers as f64 * layer;
        let deep = expected_tau * self.deep_layers as f64 * layer;
        Ok(FlopsBreakdown {
            backbone: self.backbone_g,
            shallow,
            deep,
            heads: self.heads_g,
            predictors: self.predictors_g,
            total: self.backbone_g + shallow + deep + self.heads_g + self.predictors_g,
        })
    }

    pub fn total_flops(&self, expected_tau: f64) -> Result<f64> {
        self.breakdown(expected_tau).map(|b| b.total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(v: &[f64]) -> TauTrace {
        TauTrace::new(v.to_vec()).unwrap()
    }

    #[test]
    fn tau_range_is_enforced() {
        assert!(TauTrace::new(vec![0.0, 1.0]).is_ok());
        assert!(TauTrace::new(vec![1.1]).is_err());
        assert!(TauTrace::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn blend_examples() {
        let shallow = [1.0, 2.0];
        let deep = [5.0, -2.0];
        assert_eq!(blend_residual(&shallow, &deep, &trace(&[0.0, 0.0])).unwrap(), shallow);
        assert_eq!(blend_residual(&shallow, &deep, &trace(&[1.0, 1.0])).unwrap(), deep);
        let out = blend_residual(&[0.0], &[10.0], &trace(&[0.16])).unwrap();
        assert!((out[0] - 1.6).abs() < 1e-12);
        assert!(blend_residual(&[0.0], &[1.0, 2.0], &trace(&[0.5])).is_err());
    }

    #[test]
    fn hold_previous_example() {
        let out = apply_hysteresis(&trace(&[0.30, 0.33, 0.40]), &HysteresisConfig::default());
        assert_eq!(out.values(), &[0.30, 0.30, 0.40]);
    }

    #[test]
    fn zero_band_is_identity() {
        let t = trace(&[0.3, 0.31, 0.49, 0.7]);
        for mode in [HysteresisMode::HoldPrevious, HysteresisMode::DeadzoneHalf] {
            assert_eq!(apply_hysteresis(&t, &HysteresisConfig { gamma: 0.0, mode }), t);
        }
    }

    #[test]
    fn deadzone_snaps_to_half() {
        let cfg = HysteresisConfig { gamma: 0.05, mode: HysteresisMode::DeadzoneHalf };
        let out = apply_hysteresis(&trace(&[0.2, 0.46, 0.54, 0.56]), &cfg);
        assert_eq!(out.values(), &[0.2, 0.5, 0.5, 0.56]);
    }

    #[test]
    fn deadzone_can_add_flips() {
        let cfg = HysteresisConfig { gamma: 0.05, mode: HysteresisMode::DeadzoneHalf };
        let raw = trace(&[0.4, 0.48, 0.4]);
        assert_eq!(flip_rate(&raw), 0.0);
        assert_eq!(flip_rate(&apply_hysteresis(&raw, &cfg)), 1.0);
    }

    #[test]
    fn flip_rate_examples() {
        assert_eq!(flip_rate(&trace(&[0.3; 5])), 0.0);
        assert_eq!(flip_rate(&trace(&[0.4, 0.6, 0.4, 0.6, 0.4])), 1.0);
        assert!((flip_rate(&trace(&[0.4, 0.6, 0.6, 0.4])) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(flip_rate(&trace(&[0.5, 0.7])), 0.0);
    }

    #[test]
    fn surrogate_examples() {
        let u = [0.5, 1.0, 4.0];
        let flat = surrogate_tau(&u, 0.0, 0.3).unwrap();
        assert!(flat.values().iter().all(|&t| t == logistic(0.3)));
        let base = surrogate_tau(&[1.0, 1.0], 0.7, -1.0).unwrap();
        let bumped = surrogate_tau(&[1.0, 2.0], 0.7, -1.0).unwrap();
        assert!(bumped.values()[1] > base.values()[1]);
        assert!(surrogate_tau(&[0.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn offset_calibration_hits_target_mean() {
        let u: Vec<f64> = (1..=500).map(|i| 0.01 * i as f64).collect();
        let offset = calibrate_tau_offset(&u, 1.3, 0.16).unwrap();
        let mean = surrogate_tau(&u, 1.3, offset).unwrap().mean();
        assert!((mean - 0.16).abs() < 1e-3, "{mean}");
    }

    #[test]
    fn prune_keeps_everything_at_full_ratio() {
        let g = TimeGrid::new(1.0, 20).unwrap();
        let imp: Vec<f64> = (0..20).map(|i| (i % 7) as f64).collect();
        let cfg = PruneConfig { keep_ratio: 1.0, guard_radius: 0.0 };
        assert!(prune_mask(&imp, &cfg, &BoundarySet::default(), &g).unwrap().iter().all(|&k| k));
    }

    #[test]
    fn prune_ties_keep_earliest() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        let cfg = PruneConfig { keep_ratio: 0.8, guard_radius: 12.0 };
        let mask = prune_mask(&[1.0; 10], &cfg, &BoundarySet::default(), &g).unwrap();
        assert_eq!(mask, [true, true, true, true, true, true, true, true, false, false]);
    }

    #[test]
    fn prune_guard_overrides_importance() {
        let g = TimeGrid::new(1.0, 100).unwrap();
        let imp: Vec<f64> = (0..100).map(|i| if (30..70).contains(&i) { 0.0 } else { 1.0 }).collect();
        let cfg = PruneConfig { keep_ratio: 0.5, guard_radius: 12.0 };
        let b = BoundarySet::new(vec![50.0], &g).unwrap();
        let mask = prune_mask(&imp, &cfg, &b, &g).unwrap();
        assert!((38..=62).all(|i| mask[i]));
        assert!(!mask[37] && !mask[63]);
    }

    #[test]
    fn penalties() {
        let cfg = PenaltyConfig::default();
        assert_eq!(sparsity_penalties(&trace(&[0.0; 4]), &[1.0; 4], &cfg).0, 0.0);
        assert!((sparsity_penalties(&trace(&[1.0; 4]), &[1.0; 4], &cfg).0 - 0.05).abs() < 1e-15);
        let (c, p) = sparsity_penalties(&trace(&[0.16; 4]), &[0.5; 4], &cfg);
        assert!((c - 0.008).abs() < 1e-15);
        assert!((p - 0.005).abs() < 1e-15);
    }

    #[test]
    fn expected_tau_examples() {
        let buckets = [(1247, 0.24), (2103, 0.16), (891, 0.09), (327, 0.05)];
        assert!((expected_tau(&buckets).unwrap() - 0.160).abs() < 5e-4);
        assert_eq!(expected_tau(&[(9, 0.3)]).unwrap(), 0.3);
        assert_eq!(expected_tau(&[(4, 0.0), (4, 1.0)]).unwrap(), 0.5);
        assert!(expected_tau(&[]).is_err());
        assert!(expected_tau(&[(0, 0.1)]).is_err());
    }

    #[test]
    fn flops_examples() {
        let m = FlopsModel::default();
        assert!((m.per_layer_pruned_cost() - 8.68).abs() < 0.01);
        assert!((m.total_flops(0.16).unwrap() - 156.2).abs() < 0.5);
        // Plugging the constants in by hand: 124 + 2 * 12.33 * 0.704 + 5 + 0.12.
        assert!((m.total_flops(0.0).unwrap() - 146.48064).abs() < 1e-9);
        let full = FlopsModel { keep_ratio: 1.0, ..m };
        assert_eq!(full.per_layer_pruned_cost(), 12.33);
        let nine_layers = 124.0 + 9.0 * 12.33 + 5.0 + 0.12;
        assert!((full.total_flops(1.0).unwrap() - nine_layers).abs() < 1e-9);
        assert_eq!(FlopsModel { keep_ratio: 0.0, ..m }.per_layer_pruned_cost(), 0.0);
        assert!(m.total_flops(1.5).is_err());
    }

    #[test]
    fn calibrated_scenario_flip_rate() {
        let sc = TauScenario::calibrated(100_000);
        let raw = sc.generate(1).unwrap();
        let r = flip_rate(&raw);
        assert!((r - 0.182).abs() < 0.01, "{r}");
    }
}
