//! Heteroscedastic regression loss and coverage-based regression calibration
//! error.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, invalid, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationConfig {
    pub num_bins: usize,
    /// Standard-normal `z` with `P(|Z| <= z)` equal to the one-sigma mass.
    pub one_sigma_quantile: f64,
}

impl CalibrationConfig {
    pub const NOMINAL_COVERAGE: f64 = 0.68;
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            num_bins: 10,
            one_sigma_quantile: 0.9945,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_bins < 2 {
            return Err(invalid("num_bins", "must be at least 2"));
        }
        if !(self.one_sigma_quantile > 0.0) {
            return Err(invalid("one_sigma_quantile", "must be positive"));
        }
        Ok(())
    }
}

/// Gaussian negative log-likelihood without the constant:
/// `sum((d - p)^2 / (2 v) + ln(v) / 2)`.
pub fn heteroscedastic_loss(target: &[f64], prediction: &[f64], variance: &[f64]) -> Result<f64> {
    check_len(target.len(), prediction.len())?;
    check_len(target.len(), variance.len())?;
    if let Some(v) = variance.iter().find(|v| !(**v > 0.0)) {
        return Err(invalid("variance", format!("must be positive, got {v}")));
    }
    Ok(target
        .iter()
        .zip(prediction)
        .zip(variance)
        .map(|((d, p), v)| (d - p).powi(2) / (2.0 * v) + 0.5 * v.ln())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageBin {
    pub count: usize,
    pub min_sigma: f64,
    pub max_sigma: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionEce {
    pub value: f64,
    pub bins: Vec<CoverageBin>,
}

/// Sorts by predicted sigma, splits into equal-mass bins (the first bins take
/// the remainder) and sums the mass-weighted gap between each bin's one-sigma
/// coverage and the nominal 68%.
pub fn r_ece(errors: &[f64], sigmas: &[f64], cfg: &CalibrationConfig) -> Result<RegressionEce> {
    cfg.validate()?;
    check_len(errors.len(), sigmas.len())?;
    let n = errors.len();
    if n < cfg.num_bins {
        return Err(invalid(
            "errors",
            format!("need at least {} samples, got {n}", cfg.num_bins),
        ));
    }
    if let Some(s) = sigmas.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(invalid("sigma", format!("must be positive, got {s}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigmas[i].total_cmp(&sigmas[j]).then(i.cmp(&j)));

    let (base, extra) = (n / cfg.num_bins, n % cfg.num_bins);
    let mut bins = Vec::with_capacity(cfg.num_bins);
    let mut start = 0;
    for b in 0..cfg.num_bins {
        let size = base + usize::from(b < extra);
        let members = &order[start..start + size];
        start += size;
        let covered = members
            .iter()
            .filter(|&&i| errors[i].abs() <= cfg.one_sigma_quantile * sigmas[i])
            .count();
        bins.push(CoverageBin {
            count: size,
            min_sigma: sigmas[members[0]],
            max_sigma: sigmas[members[size - 1]],
            coverage: covered as f64 / size as f64,
        });
    }
    let value = bins
        .iter()
        .map(|b| b.count as f64 / n as f64 * (b.coverage - CalibrationConfig::NOMINAL_COVERAGE).abs())
        .sum();
    Ok(RegressionEce { value, bins })
}

/// Synthetic (error, reported sigma) samples with known calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationScenario {
    /// Reported sigma equals the true per-sample sigma.
    WellCalibrated,
    /// Reported sigma is twice the true sigma.
    SigmaX2,
}

impl CalibrationScenario {
    pub fn name(&self) -> &'static str {
        match self {
            Self::WellCalibrated => "well_calibrated",
            Self::SigmaX2 => "sigma_x2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::WellCalibrated, Self::SigmaX2]
            .into_iter()
            .find(|s| s.name() == name)
    }

    /// True sigmas are log-uniform on `[0.25, 4]`; errors are Gaussian with
    /// those sigmas.
    pub fn generate(&self, samples: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = seed::rng(seed);
        let factor = match self {
            Self::WellCalibrated => 1.0,
            Self::SigmaX2 => 2.0,
        };
        (0..samples)
            .map(|_| {
                let sigma = 4f64.powf(rng.random_range(-1.0..1.0));
                let z: f64 = StandardNormal.sample(&mut rng);
                (sigma * z, factor * sigma)
            })
            .unzip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_vanishes_at_unit_variance_and_zero_residual() {
        assert_eq!(heteroscedastic_loss(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn loss_rejects_non_positive_variance() {
        assert!(heteroscedastic_loss(&[0.0], &[0.0], &[0.0]).is_err());
        assert!(heteroscedastic_loss(&[0.0], &[0.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn doubling_variance_with_zero_residual_adds_half_log_two() {
        let t = [0.0; 7];
        let a = heteroscedastic_loss(&t, &t, &[0.3; 7]).unwrap();
        let b = heteroscedastic_loss(&t, &t, &[0.6; 7]).unwrap();
        assert!((b - a - 7.0 * 0.5 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn optimum_variance_is_squared_residual() {
        // Oracle: d/dv (r^2 / 2v + ln(v) / 2) = 0 at v = r^2; checked by grid search.
        for r in [0.3f64, 1.0, 2.5] {
            let best = (1..=20_000)
                .map(|k| k as f64 * 1e-3)
                .min_by(|a, b| {
                    let la = heteroscedastic_loss(&[r], &[0.0], &[*a]).unwrap();
                    let lb = heteroscedastic_loss(&[r], &[0.0], &[*b]).unwrap();
                    la.total_cmp(&lb)
                })
                .unwrap();
            assert!((best / (r * r) - 1.0).abs() < 0.01, "{r}: {best}");
            let at = heteroscedastic_loss(&[r], &[0.0], &[r * r]).unwrap();
            assert!((at - (0.5 + 0.5 * (r * r).ln())).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_predictions_overcover() {
        let e = r_ece(&[0.0; 25], &[1.0; 25], &CalibrationConfig::default()).unwrap();
        assert!((e.value - 0.32).abs() < 1e-12);
        assert!(e.bins.iter().all(|b| b.coverage == 1.0));
    }

    #[test]
    fn remainder_goes_to_low_sigma_bins() {
        let sig: Vec<f64> = (1..=23).map(f64::from).collect();
        let e = r_ece(&[0.0; 23], &sig, &CalibrationConfig::default()).unwrap();
        let counts: Vec<usize> = e.bins.iter().map(|b| b.count).collect();
        assert_eq!(counts, [3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(e.bins[0].min_sigma, 1.0);
        assert_eq!(e.bins[9].max_sigma, 23.0);
    }

    #[test]
    fn too_few_samples() {
        assert!(r_ece(&[0.0; 5], &[1.0; 5], &CalibrationConfig::default()).is_err());
    }
}
