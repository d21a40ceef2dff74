//! Unbiased estimation of `sum_a (E x_a)^2` from a stream of feature
//! vectors, as the inner product of the means of two independent halves.

use crate::par;
use crate::stats::Estimate;

#[derive(Debug, Clone)]
struct Half {
    count: usize,
    sum: Vec<f64>,
    /// Upper triangle of `sum x x^T`, row major.
    cross: Vec<f64>,
}

impl Half {
    fn new(dim: usize) -> Self {
        Half {
            count: 0,
            sum: vec![0.0; dim],
            cross: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let mut k = 0;
        for (i, &xi) in x.iter().enumerate() {
            self.sum[i] += xi;
            for &xj in &x[i..] {
                self.cross[k] += xi * xj;
                k += 1;
            }
        }
    }

    fn merge(&mut self, other: Half) {
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
        for (a, b) in self.cross.iter_mut().zip(other.cross) {
            *a += b;
        }
    }

    fn mean(&self) -> Vec<f64> {
        self.sum.iter().map(|s| s / self.count as f64).collect()
    }

    /// Unbiased covariance as a dense matrix.
    fn cov(&self, mean: &[f64]) -> Vec<Vec<f64>> {
        let d = mean.len();
        let c = self.count as f64;
        let mut out = vec![vec![0.0; d]; d];
        let mut k = 0;
        for i in 0..d {
            for j in i..d {
                let v = (self.cross[k] - c * mean[i] * mean[j]) / (c - 1.0);
                out[i][j] = v;
                out[j][i] = v;
                k += 1;
            }
        }
        out
    }
}

pub(crate) struct SplitResult {
    /// Per-feature unbiased squared-mean estimates `m_A[a] m_B[a]`.
    pub squares: Vec<f64>,
    /// Delta-method standard error of `sum squares`.
    pub stderr: f64,
    /// Pooled mean of every feature with its standard error.
    pub means: Vec<Estimate>,
}

/// Runs `features(i, out)` for `i < samples`; even indices form one half
/// and odd indices the other.
pub(crate) fn split_estimate<F>(dim: usize, samples: usize, seed: u64, features: F) -> SplitResult
where
    F: Fn(usize, &mut Vec<f64>) + Sync + Send,
{
    let (a, b, _) = par::reduce_chunks(
        samples,
        || (Half::new(dim), Half::new(dim), Vec::with_capacity(dim)),
        |acc, i| {
            let (ha, hb, buf) = acc;
            buf.clear();
            features(i, buf);
            if i % 2 == 0 {
                ha.push(buf);
            } else {
                hb.push(buf);
            }
        },
        |acc, other| {
            acc.0.merge(other.0);
            acc.1.merge(other.1);
        },
    );
    let ma = a.mean();
    let mb = b.mean();
    let ca = a.cov(&ma);
    let cb = b.cov(&mb);
    let (na, nb) = (a.count as f64, b.count as f64);
    let quad = |c: &Vec<Vec<f64>>, v: &[f64]| -> f64 {
        c.iter()
            .zip(v)
            .map(|(row, vi)| vi * row.iter().zip(v).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    };
    let trace: f64 = (0..dim)
        .map(|i| (0..dim).map(|j| ca[i][j] * cb[j][i]).sum::<f64>())
        .sum();
    let var = quad(&ca, &mb) / na + quad(&cb, &ma) / nb + trace / (na * nb);
    let total = na + nb;
    let means = (0..dim)
        .map(|i| {
            let mean = (a.sum[i] + b.sum[i]) / total;
            // pooled variance around the pooled mean
            let ss = a.cross[diag_index(dim, i)] + b.cross[diag_index(dim, i)];
            let v = (ss - total * mean * mean) / (total - 1.0);
            Estimate {
                value: mean,
                stderr: (v.max(0.0) / total).sqrt(),
                samples,
                seed,
            }
        })
        .collect();
    SplitResult {
        squares: ma.iter().zip(&mb).map(|(x, y)| x * y).collect(),
        stderr: var.max(0.0).sqrt(),
        means,
    }
}

/// Position of `(i, i)` in the packed upper triangle.
fn diag_index(dim: usize, i: usize) -> usize {
    i * dim - i * i.saturating_sub(1) / 2
}
