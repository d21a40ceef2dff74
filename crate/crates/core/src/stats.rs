//! Estimates, streaming moments, and plug-in distance estimators.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{invalid, Result};

/// A numeric result with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            stderr: 0.0,
            samples: 0,
            seed: 0,
        }
    }

    /// `|value - target| <= sigmas * stderr` (with a tiny absolute slack for
    /// exact values).
    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.value - target).abs() <= sigmas * self.stderr + 1e-12
    }
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    pub fn estimate(&self, seed: u64) -> Estimate {
        Estimate {
            value: self.mean,
            stderr: self.stderr(),
            samples: self.count as usize,
            seed,
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut m = Moments::new();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov statistic of `samples` against N(0, 1).
pub fn ks_standard_normal(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            let lo = f - i as f64 / m;
            let hi = (i + 1) as f64 / m - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Histogram estimate of total variation between two equal-size samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    /// Plug-in `1/2 sum |p_A - p_B|` over cells.
    pub tv: f64,
    /// Expected plug-in value when both samples share one law,
    /// `sum_c sqrt(p_c (1 - p_c) / (pi m))` with pooled `p_c`.
    pub bias_floor: f64,
    /// Efron-Stein bound on the estimator's standard deviation, `1/sqrt(m)`.
    pub stderr: f64,
    pub cells: usize,
    pub samples: usize,
}

impl TvEstimate {
    /// True when the estimate is indistinguishable from two draws of one law.
    pub fn at_floor(&self, sigmas: f64) -> bool {
        self.tv <= self.bias_floor + sigmas * self.stderr
    }
}

/// Empirical quantile of a sorted slice (nearest rank).
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Histogram TV between two samples in dimension `dim <= 3`, stored flat
/// (`samples[i * dim + d]`).
///
/// Bins are equal-width over the pooled 0.1%-99.9% quantile box; points
/// outside the box share a single overflow cell.
pub fn tv_histogram(a: &[f64], b: &[f64], dim: usize, bins: usize) -> Result<TvEstimate> {
    if dim == 0 || dim > 3 {
        return Err(invalid("dim", format!("histogram TV supports 1..=3 dimensions, got {dim}")));
    }
    if bins == 0 {
        return Err(invalid("bins", "need at least one bin per axis"));
    }
    if a.len() != b.len() || a.len() % dim != 0 || a.is_empty() {
        return Err(invalid("samples", "sample sets must be non-empty and of equal size"));
    }
    let m = a.len() / dim;
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    for d in 0..dim {
        let mut pooled: Vec<f64> = a
            .iter()
            .skip(d)
            .step_by(dim)
            .chain(b.iter().skip(d).step_by(dim))
            .copied()
            .collect();
        pooled.sort_by(|x, y| x.total_cmp(y));
        lo[d] = quantile_sorted(&pooled, 0.001);
        hi[d] = quantile_sorted(&pooled, 0.999);
        if hi[d] <= lo[d] {
            hi[d] = lo[d] + 1.0;
        }
    }
    let cells = bins.pow(dim as u32) + 1;
    let cell_of = |x: &[f64]| -> usize {
        let mut idx = 0usize;
        for d in 0..dim {
            if !(x[d] >= lo[d] && x[d] <= hi[d]) {
                return cells - 1;
            }
            let t = ((x[d] - lo[d]) / (hi[d] - lo[d]) * bins as f64) as usize;
            idx = idx * bins + t.min(bins - 1);
        }
        idx
    };
    let mut ca = vec![0u64; cells];
    let mut cb = vec![0u64; cells];
    for x in a.chunks_exact(dim) {
        ca[cell_of(x)] += 1;
    }
    for x in b.chunks_exact(dim) {
        cb[cell_of(x)] += 1;
    }
    let mf = m as f64;
    let mut tv = 0.0;
    let mut floor = 0.0;
    for (&x, &y) in ca.iter().zip(&cb) {
        tv += (x as f64 - y as f64).abs();
        let p = (x + y) as f64 / (2.0 * mf);
        floor += (p * (1.0 - p) / (std::f64::consts::PI * mf)).sqrt();
    }
    Ok(TvEstimate {
        tv: 0.5 * tv / mf,
        bias_floor: floor,
        stderr: 1.0 / mf.sqrt(),
        cells,
        samples: m,
    })
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{fill_normal, sample_rng};

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let whole: Moments = xs.iter().copied().collect();
        let mut left: Moments = xs[..313].iter().copied().collect();
        left.merge(xs[313..].iter().copied().collect());
        assert!((whole.mean - left.mean).abs() < 1e-12);
        assert!((whole.variance() - left.variance()).abs() < 1e-10);
    }

    #[test]
    fn identical_samples_have_zero_tv() {
        let mut rng = sample_rng(3, 1, 0);
        let mut a = vec![0.0; 5000];
        fill_normal(&mut rng, &mut a);
        let est = tv_histogram(&a, &a, 1, 40).unwrap();
        assert_eq!(est.tv, 0.0);
        assert!(est.bias_floor > 0.0);
    }

    #[test]
    fn histogram_rejects_high_dimension_and_unequal_sizes() {
        assert!(tv_histogram(&[0.0; 8], &[0.0; 8], 4, 3).is_err());
        assert!(tv_histogram(&[0.0; 8], &[0.0; 6], 1, 3).is_err());
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-14);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (a, b) = linear_fit(&xs, &ys).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
    }
}
