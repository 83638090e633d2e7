//! Synthetic grids, signed-distance targets, kernel features and AR(1) noise.

use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal, StudentT};

use crate::error::{check_min_len, invalid, Error, Result};
use crate::seed;

/// Sampling grid: position `i` sits at `i * stride` frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    stride: f64,
    len: usize,
    fps: f64,
}

impl TimeGrid {
    pub const DEFAULT_FPS: f64 = 30.0;

    pub fn new(stride: f64, len: usize) -> Result<Self> {
        Self::with_fps(stride, len, Self::DEFAULT_FPS)
    }

    pub fn with_fps(stride: f64, len: usize, fps: f64) -> Result<Self> {
        if !(stride.is_finite() && stride > 0.0) {
            return Err(invalid("stride", format!("must be positive, got {stride}")));
        }
        if len < 2 {
            return Err(invalid("len", format!("need at least 2 positions, got {len}")));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(invalid("fps", format!("must be positive, got {fps}")));
        }
        Ok(Self { stride, len, fps })
    }

    pub fn stride(&self) -> f64 {
        self.stride
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Time of position `i` in frames.
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.stride
    }

    pub fn seconds(&self, i: usize) -> f64 {
        self.time(i) / self.fps
    }

    /// Time of the last position in frames.
    pub fn span(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.time(i))
    }

    pub fn contains(&self, frames: f64) -> bool {
        (0.0..=self.span()).contains(&frames)
    }
}

/// Strictly increasing boundary times in frames.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundarySet(Vec<f64>);

impl BoundarySet {
    pub fn new(boundaries: Vec<f64>, grid: &TimeGrid) -> Result<Self> {
        for (i, &b) in boundaries.iter().enumerate() {
            if !b.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if !grid.contains(b) {
                return Err(invalid(
                    "boundaries",
                    format!("{b} lies outside [0, {}]", grid.span()),
                ));
            }
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("boundaries", "must be strictly increasing"));
        }
        Ok(Self(boundaries))
    }

    pub(crate) fn from_sorted(boundaries: Vec<f64>) -> Self {
        debug_assert!(boundaries.windows(2).all(|w| w[0] < w[1]));
        Self(boundaries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Boundary closest to `t`; equidistant ties go to the earlier boundary.
    pub fn nearest(&self, t: f64) -> Option<f64> {
        let after = self.0.partition_point(|&b| b <= t);
        let prev = after.checked_sub(1).map(|i| self.0[i]);
        let next = self.0.get(after).copied();
        match (prev, next) {
            (Some(p), Some(n)) => Some(if t - p <= n - t { p } else { n }),
            (p, n) => p.or(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedDistanceField {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl SignedDistanceField {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `d(t) = t - nearest boundary`, in frames.
pub fn make_distance_field(grid: &TimeGrid, boundaries: &BoundarySet) -> Result<SignedDistanceField> {
    if boundaries.is_empty() {
        return Err(Error::NoBoundaries);
    }
    let values = grid
        .times()
        .map(|t| t - boundaries.nearest(t).expect("non-empty"))
        .collect();
    Ok(SignedDistanceField { grid: *grid, values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelFeatureSeries {
    grid: TimeGrid,
    values: Vec<f64>,
    kappa: f64,
    center: f64,
}

impl KernelFeatureSeries {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn center(&self) -> f64 {
        self.center
    }
}

/// Gaussian bump of width `kappa` frames centred on `center`.
pub fn make_kernel_features(grid: &TimeGrid, center: f64, kappa: f64) -> Result<KernelFeatureSeries> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid("kappa", format!("must be positive, got {kappa}")));
    }
    if !center.is_finite() {
        return Err(invalid("center", "must be finite"));
    }
    let inv = 1.0 / (2.0 * kappa * kappa);
    let values = grid
        .times()
        .map(|t| (-(t - center).powi(2) * inv).exp())
        .collect();
    Ok(KernelFeatureSeries {
        grid: *grid,
        values,
        kappa,
        center,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseFamily {
    /// Variance `2 * scale^2`.
    Laplace { scale: f64 },
    Gaussian { sigma: f64 },
    /// `scale` multiplies a standard Student-t draw; it is not a standard deviation.
    StudentT { nu: f64, scale: f64 },
}

impl NoiseFamily {
    pub const DEFAULT_NU: f64 = 3.0;

    pub fn scale(&self) -> f64 {
        match *self {
            Self::Laplace { scale } | Self::StudentT { scale, .. } => scale,
            Self::Gaussian { sigma } => sigma,
        }
    }

    pub fn with_scale(self, scale: f64) -> Self {
        match self {
            Self::Laplace { .. } => Self::Laplace { scale },
            Self::Gaussian { .. } => Self::Gaussian { sigma: scale },
            Self::StudentT { nu, .. } => Self::StudentT { nu, scale },
        }
    }

    /// Marginal variance, when finite.
    pub fn variance(&self) -> Option<f64> {
        match *self {
            Self::Laplace { scale } => Some(2.0 * scale * scale),
            Self::Gaussian { sigma } => Some(sigma * sigma),
            Self::StudentT { nu, scale } if nu > 2.0 => Some(scale * scale * nu / (nu - 2.0)),
            Self::StudentT { .. } => None,
        }
    }

    fn unit_draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Laplace { .. } => {
                let u: f64 = Open01.sample(rng);
                if u < 0.5 {
                    (2.0 * u).ln()
                } else {
                    -(2.0 * (1.0 - u)).ln()
                }
            }
            Self::Gaussian { .. } => StandardNormal.sample(rng),
            Self::StudentT { nu, .. } => StudentT::new(nu).expect("validated nu").sample(rng),
        }
    }
}

/// Noise family plus variance-preserving AR(1) correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    family: NoiseFamily,
    rho: f64,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, rho: f64) -> Result<Self> {
        let scale = family.scale();
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(invalid("scale", format!("must be non-negative, got {scale}")));
        }
        if let NoiseFamily::StudentT { nu, .. } = family {
            if !(nu.is_finite() && nu > 0.0) {
                return Err(invalid("nu", format!("must be positive, got {nu}")));
            }
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(invalid("rho", format!("must lie in [0, 1), got {rho}")));
        }
        Ok(Self { family, rho })
    }

    pub fn iid(family: NoiseFamily) -> Result<Self> {
        Self::new(family, 0.0)
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn scale(&self) -> f64 {
        self.family.scale()
    }

    pub fn with_rho(self, rho: f64) -> Result<Self> {
        Self::new(self.family, rho)
    }

    pub fn with_scale(self, scale: f64) -> Result<Self> {
        Self::new(self.family.with_scale(scale), self.rho)
    }

    /// Fills `out` with unit-scale correlated noise; multiply by [`Self::scale`]
    /// to get draws from this spec.
    pub fn fill_unit<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let innovation = (1.0 - self.rho * self.rho).sqrt();
        let mut prev = 0.0;
        for (i, slot) in out.iter_mut().enumerate() {
            let eta = self.family.unit_draw(rng);
            prev = if i == 0 {
                eta
            } else {
                self.rho * prev + innovation * eta
            };
            *slot = prev;
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.fill_unit(rng, out);
        let scale = self.scale();
        out.iter_mut().for_each(|x| *x *= scale);
    }
}

pub fn sample_noise(spec: &NoiseSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    check_min_len(1, count)?;
    let mut out = vec![0.0; count];
    spec.fill(&mut seed::rng(seed), &mut out);
    Ok(out)
}

/// Centred-difference magnitude `|x[i+1] - x[i-1]|`; the two ends use
/// one-sided differences.
pub fn feature_gradient(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    check_min_len(3, n)?;
    let mut out = Vec::with_capacity(n);
    out.push((series[1] - series[0]).abs());
    out.extend(series.windows(3).map(|w| (w[2] - w[0]).abs()));
    out.push((series[n - 1] - series[n - 2]).abs());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(stride: f64, len: usize) -> TimeGrid {
        TimeGrid::new(stride, len).unwrap()
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::with_fps(1.0, 10, 0.0).is_err());
        let g = grid(2.0, 5);
        assert_eq!(g.time(3), 6.0);
        assert_eq!(g.seconds(3), 6.0 / 30.0);
        assert_eq!(g.span(), 8.0);
    }

    #[test]
    fn boundary_set_validation() {
        let g = grid(1.0, 10);
        assert!(BoundarySet::new(vec![3.0, 3.0], &g).is_err());
        assert!(BoundarySet::new(vec![5.0, 3.0], &g).is_err());
        assert!(BoundarySet::new(vec![9.5], &g).is_err());
        assert!(BoundarySet::new(vec![0.0, 9.0], &g).is_ok());
    }

    #[test]
    fn distance_field_single_boundary() {
        let g = grid(1.0, 100);
        let b = BoundarySet::new(vec![25.0], &g).unwrap();
        let d = make_distance_field(&g, &b).unwrap();
        assert_eq!(d.values()[20], -5.0);
        assert_eq!(d.values()[30], 5.0);
        assert_eq!(d.values()[25], 0.0);
    }

    #[test]
    fn distance_field_tie_goes_to_earlier_boundary() {
        let g = grid(1.0, 100);
        let b = BoundarySet::new(vec![25.0, 75.0], &g).unwrap();
        let d = make_distance_field(&g, &b).unwrap();
        assert_eq!(d.values()[50], 25.0);
        assert_eq!(d.values()[51], -24.0);
        assert_eq!(d.values()[75], 0.0);
    }

    #[test]
    fn distance_field_needs_boundaries() {
        let g = grid(1.0, 10);
        assert_eq!(
            make_distance_field(&g, &BoundarySet::default()),
            Err(Error::NoBoundaries)
        );
        assert_eq!(Error::NoBoundaries.to_string(), "no boundaries");
    }

    #[test]
    fn kernel_peak_and_width() {
        let g = grid(1.0, 60);
        let k = make_kernel_features(&g, 25.0, 2.0).unwrap();
        assert_eq!(k.values()[25], 1.0);
        assert!((k.values()[27] - (-0.5f64).exp()).abs() < 1e-15);
        assert!((k.values()[23] - (-0.5f64).exp()).abs() < 1e-15);
        assert!(make_kernel_features(&g, 25.0, 0.0).is_err());
    }

    #[test]
    fn kernel_plateau_width_doubles_with_kappa() {
        let fine = grid(0.001, 60_001);
        let width = |kappa: f64| {
            let k = make_kernel_features(&fine, 30.0, kappa).unwrap();
            let n = k.values().iter().filter(|&&v| v > (-0.5f64).exp()).count();
            n as f64 * fine.stride()
        };
        let (w2, w4) = (width(2.0), width(4.0));
        assert!((w2 - 4.0).abs() < 0.01, "{w2}");
        assert!((w4 / w2 - 2.0).abs() < 0.01);
    }

    #[test]
    fn laplace_variance() {
        let spec = NoiseSpec::iid(NoiseFamily::Laplace { scale: 1.0 }).unwrap();
        let x = sample_noise(&spec, 1_000_000, 11).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
        assert!((var / 2.0 - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn ar1_lag_one_autocorrelation() {
        let spec = NoiseSpec::new(NoiseFamily::Laplace { scale: 1.0 }, 0.9).unwrap();
        let x = sample_noise(&spec, 200_000, 5).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let c0: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let c1: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        assert!((c1 / c0 - 0.9).abs() < 0.02);
    }

    #[test]
    fn zero_sigma_gaussian_is_silent() {
        let spec = NoiseSpec::iid(NoiseFamily::Gaussian { sigma: 0.0 }).unwrap();
        assert!(sample_noise(&spec, 100, 1).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rho_out_of_range_is_rejected() {
        let fam = NoiseFamily::Gaussian { sigma: 1.0 };
        assert!(NoiseSpec::new(fam, 1.0).is_err());
        assert!(NoiseSpec::new(fam, -0.1).is_err());
    }

    #[test]
    fn student_t_uses_raw_scale() {
        let spec = NoiseSpec::iid(NoiseFamily::StudentT { nu: 3.0, scale: 2.0 }).unwrap();
        assert_eq!(spec.family().variance(), Some(12.0));
        let x = sample_noise(&spec, 1000, 3).unwrap();
        assert!(x.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn gradient_examples() {
        assert!(feature_gradient(&[3.0; 8]).unwrap().iter().all(|&g| g == 0.0));
        let ramp: Vec<f64> = (0..10).map(f64::from).collect();
        let g = feature_gradient(&ramp).unwrap();
        assert!(g[1..9].iter().all(|&v| v == 2.0));
        assert_eq!(g[0], 1.0);
        assert!(feature_gradient(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn kernel_gradient_matches_analytic_derivative() {
        let g = grid(1.0, 51);
        let k = make_kernel_features(&g, 25.0, 2.0).unwrap();
        let grad = feature_gradient(k.values()).unwrap();
        assert!(grad[25].abs() < 1e-15);
        // |phi'(t)| = |t - c| / kappa^2 * phi(t), largest at |t - c| = kappa.
        let analytic: Vec<f64> = g
            .times()
            .map(|t| ((t - 25.0).abs() / 4.0) * (-(t - 25.0).powi(2) / 8.0).exp())
            .collect();
        let argmax = |v: &[f64]| {
            (0..v.len()).fold(0, |best, i| if v[i] > v[best] { i } else { best })
        };
        assert_eq!(argmax(&analytic), 23);
        let left = argmax(&grad[..25]);
        let right = 25 + argmax(&grad[25..]);
        assert!((22..=23).contains(&left), "{left}");
        assert!((27..=28).contains(&right), "{right}");
    }
}
