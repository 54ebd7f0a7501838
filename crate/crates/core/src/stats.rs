//! Empirical distribution of the projections against the two Gaussian
//! limit laws.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use statrs::function::gamma::gamma;

/// The limiting laws: density `e^{-t^2} / sqrt(pi)` (variance 1/2) and the
/// standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianModel {
    VarHalf,
    Standard,
}

impl GaussianModel {
    /// Standard for a quadratic character with trivial additive character
    /// projected on the real axis; variance 1/2 otherwise.
    pub fn select(chi_order: u64, psi_trivial: bool, theta: f64) -> Self {
        if chi_order == 2 && psi_trivial && theta == 0.0 {
            GaussianModel::Standard
        } else {
            GaussianModel::VarHalf
        }
    }

    pub fn variance(self) -> f64 {
        match self {
            GaussianModel::VarHalf => 0.5,
            GaussianModel::Standard => 1.0,
        }
    }

    pub fn cdf(self, t: f64) -> f64 {
        let z = match self {
            GaussianModel::VarHalf => t,
            GaussianModel::Standard => t / SQRT_2,
        };
        if z == f64::INFINITY {
            return 1.0;
        }
        if z == f64::NEG_INFINITY {
            return 0.0;
        }
        0.5 * (1.0 + erf(z))
    }

    pub fn density(self, t: f64) -> f64 {
        match self {
            GaussianModel::VarHalf => (-t * t).exp() / PI.sqrt(),
            GaussianModel::Standard => (-t * t / 2.0).exp() / (2.0 * PI).sqrt(),
        }
    }

    /// Factor `c_k` such that `c_k E[T^k] = mu_k`: `2^(k/2)` for the
    /// variance-1/2 law, 1 for the standard one.
    pub fn moment_scale(self, k: u32) -> f64 {
        match self {
            GaussianModel::VarHalf => 2f64.powf(k as f64 / 2.0),
            GaussianModel::Standard => 1.0,
        }
    }
}

/// `mu_k = 1 * 3 * ... * (k - 1)` for even `k`, 0 for odd `k`.
pub fn double_factorial_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    (1..k).step_by(2).map(|m| m as f64).product()
}

/// `c_k E[T^k]` for `T` distributed by `model`; equals `mu_k`.
pub fn gaussian_scaled_moment(model: GaussianModel, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    // E[T^k] = variance^(k/2) (k - 1)!!; powers of two are exact
    let raw = model.variance().powi(k as i32 / 2) * double_factorial_moment(k);
    model.moment_scale(k) * raw
}

/// The same moment through the Gamma function:
/// `E[(sqrt 2 T)^k] = 2^(k/2) (1 + (-1)^k) Gamma((1 + k)/2) / (2 sqrt(pi))`
/// for `T` of variance 1/2.
pub fn gaussian_moment_gamma_form(k: u32) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    2f64.powf(k as f64 / 2.0) * (1.0 + sign) * gamma((1.0 + k as f64) / 2.0) / (2.0 * PI.sqrt())
}

/// Pass threshold for the Kolmogorov distance of a sample of size `n`.
pub fn ks_threshold(n: usize) -> f64 {
    1.63 / (n as f64).sqrt() + 0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub width: f64,
    pub count: u64,
}

/// Sorted sample with its counting function and histogram.
#[derive(Debug, Clone)]
pub struct DistributionReport {
    sorted: Vec<f64>,
    histogram: Vec<HistogramBin>,
}

impl DistributionReport {
    pub fn new(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let histogram = freedman_diaconis(&sorted);
        DistributionReport { sorted, histogram }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn histogram(&self) -> &[HistogramBin] {
        &self.histogram
    }

    /// `G(lambda)`: how many values are at most `lambda`.
    pub fn counting(&self, lambda: f64) -> usize {
        self.sorted.partition_point(|&u| u <= lambda)
    }

    pub fn empirical_cdf(&self, lambda: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.counting(lambda) as f64 / self.sorted.len() as f64
    }

    pub fn ks_distance(&self, model: GaussianModel) -> f64 {
        self.ks_distance_with(|t| model.cdf(t))
    }

    /// Kolmogorov distance to an arbitrary continuous CDF.
    pub fn ks_distance_with(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let f = cdf(u);
                (((i + 1) as f64 / n) - f).abs().max((f - i as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }
}

fn freedman_diaconis(sorted: &[f64]) -> Vec<HistogramBin> {
    let n = sorted.len();
    if n == 0 {
        return Vec::new();
    }
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    let quantile = |q: f64| {
        let pos = q * (n - 1) as f64;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        if i + 1 < n {
            sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
        } else {
            sorted[i]
        }
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let range = hi - lo;
    if range <= 0.0 {
        return vec![HistogramBin {
            left: lo,
            width: 0.0,
            count: n as u64,
        }];
    }
    let mut width = 2.0 * iqr / (n as f64).cbrt();
    if width <= 0.0 || !width.is_finite() {
        width = range / (n as f64).sqrt().ceil();
    }
    let bins = ((range / width).ceil() as usize).clamp(1, 10_000);
    let width = range / bins as f64;
    let mut counts = vec![0u64; bins];
    for &u in sorted {
        let b = (((u - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            left: lo + i as f64 * width,
            width,
            count,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn cdf_values() {
        assert_eq!(GaussianModel::VarHalf.cdf(0.0), 0.5);
        assert_eq!(GaussianModel::Standard.cdf(0.0), 0.5);
        assert_eq!(GaussianModel::Standard.cdf(f64::INFINITY), 1.0);
        assert!((GaussianModel::Standard.cdf(40.0) - 1.0).abs() < 1e-15);
        let quad = 0.5 + simpson(|t| (-t * t).exp() / PI.sqrt(), 0.0, 1.0, 2000);
        assert!((GaussianModel::VarHalf.cdf(1.0) - quad).abs() < 1e-10);
        assert!((GaussianModel::VarHalf.cdf(1.0) - (1.0 + erf(1.0)) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn moments_of_the_limit_laws() {
        assert_eq!(gaussian_scaled_moment(GaussianModel::VarHalf, 3), 0.0);
        assert_eq!(gaussian_scaled_moment(GaussianModel::VarHalf, 2), 1.0);
        assert_eq!(gaussian_scaled_moment(GaussianModel::VarHalf, 4), 3.0);
        assert_eq!(gaussian_scaled_moment(GaussianModel::Standard, 6), 15.0);
        let quad = simpson(
            |t| (SQRT_2 * t).powi(8) * GaussianModel::VarHalf.density(t),
            -12.0,
            12.0,
            20_000,
        );
        assert!((quad - 105.0).abs() < 1e-6);
        for k in 2..=20 {
            assert_eq!(double_factorial_moment(k), (k - 1) as f64 * double_factorial_moment(k - 2));
            let rel = (gaussian_moment_gamma_form(k) - double_factorial_moment(k)).abs()
                / double_factorial_moment(k).max(1.0);
            assert!(rel < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn counting_function() {
        let r = DistributionReport::new(&[3.0, -1.0, 0.5, 2.0, 0.0]);
        assert_eq!(r.counting(-5.0), 0);
        assert_eq!(r.counting(3.0), 5);
        assert_eq!(r.counting(0.5), 3);
        for lam in [-2.0, -1.0, 0.25, 1.0, 2.5, 9.0] {
            assert_eq!(r.counting(lam) as f64 / 5.0, r.empirical_cdf(lam));
        }
    }

    #[test]
    fn ks_on_quantiles_and_constants() {
        let n = 1000;
        // quantiles of the standard law by bisection on the CDF
        let quantile = |q: f64| {
            let (mut lo, mut hi) = (-40.0, 40.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if GaussianModel::Standard.cdf(mid) < q {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let sample: Vec<f64> = (0..n).map(|i| quantile((i as f64 + 0.5) / n as f64)).collect();
        let r = DistributionReport::new(&sample);
        assert!(r.ks_distance(GaussianModel::Standard) <= 0.5 / n as f64 + 1e-9);

        let zeros = DistributionReport::new(&[0.0; 50]);
        assert!((zeros.ks_distance(GaussianModel::VarHalf) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_on_a_seeded_gaussian_sample() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let sample: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let r = DistributionReport::new(&sample);
        assert!(r.ks_distance(GaussianModel::Standard) < 0.02);
        assert!(r.ks_distance(GaussianModel::VarHalf) > 0.05);
        // shifting sample and model together leaves the distance unchanged
        let shifted: Vec<f64> = sample.iter().map(|u| u + 1.5).collect();
        let rs = DistributionReport::new(&shifted);
        let a = r.ks_distance(GaussianModel::Standard);
        let b = rs.ks_distance_with(|t| GaussianModel::Standard.cdf(t - 1.5));
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn histogram_covers_sample() {
        let sample: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
        let r = DistributionReport::new(&sample);
        let total: u64 = r.histogram().iter().map(|b| b.count).sum();
        assert_eq!(total, 500);
        let single = DistributionReport::new(&[1.0, 1.0]);
        assert_eq!(single.histogram().len(), 1);
    }

    #[test]
    fn model_selection() {
        assert_eq!(GaussianModel::select(2, true, 0.0), GaussianModel::Standard);
        assert_eq!(GaussianModel::select(2, false, 0.0), GaussianModel::VarHalf);
        assert_eq!(GaussianModel::select(3, true, 0.0), GaussianModel::VarHalf);
        assert_eq!(GaussianModel::select(2, true, 0.5), GaussianModel::VarHalf);
    }
}
