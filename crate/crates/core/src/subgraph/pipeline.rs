use std::fmt::Write as _;

use serde::Serialize;

use super::derivs::{grad_hess_stats, sigma2, sigma2_floor, Sigma2Mode};
use super::pattern::{chi_many, GraphPattern, Motif};
use crate::error::{invalid, Error, Result};
use crate::models::{ou_noise_matrix_in_place, NullSpec, Sampler, Spec, SymMatrix};
use crate::par;
use crate::rng::{derive_seed, normal, sample_rng, streams};
use crate::stats::{Estimate, Moments};

/// `2 sqrt(5) kappa_1 kappa_2 / sigma^2`, unclamped.
pub fn chatterjee_bound(kappa1: f64, kappa2: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::ZeroVariance("sigma^2 must be positive".into()));
    }
    Ok(2.0 * 5f64.sqrt() * kappa1 * kappa2 / sigma2)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChatterjeeStats {
    pub kappa1: Estimate,
    pub kappa2: Estimate,
    pub sigma2: Estimate,
    pub sigma2_floor: f64,
    /// `max(sigma^2, floor)`.
    pub sigma2_tilde: f64,
    pub raw_bound: f64,
    /// `raw_bound` clamped to `[0, 1]`.
    pub tv_bound: f64,
    pub power_converged: f64,
}

/// All statistics of the second-order Poincare bound at a fixed `M`.
pub fn chatterjee_stats(
    m: &SymMatrix,
    pattern: &GraphPattern,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<ChatterjeeStats> {
    let gh = grad_hess_stats(m, pattern, eps, samples, seed)?;
    let s2 = sigma2_auto(m, pattern, eps, seed)?;
    let floor = sigma2_floor(pattern, eps);
    let raw = chatterjee_bound(gh.kappa1.value, gh.kappa2.value, s2.value)?;
    Ok(ChatterjeeStats {
        kappa1: gh.kappa1,
        kappa2: gh.kappa2,
        sigma2: s2,
        sigma2_floor: floor,
        sigma2_tilde: s2.value.max(floor),
        raw_bound: raw,
        tv_bound: raw.clamp(0.0, 1.0),
        power_converged: gh.converged,
    })
}

/// Exact `sigma^2` when a closed form or the enumeration budget allows,
/// Monte Carlo otherwise.
fn sigma2_auto(m: &SymMatrix, pattern: &GraphPattern, eps: f64, seed: u64) -> Result<Estimate> {
    match sigma2(m, pattern, eps, Sigma2Mode::Exact) {
        Err(Error::BudgetExceeded(_)) => sigma2(
            m,
            pattern,
            eps,
            Sigma2Mode::MonteCarlo {
                samples: 2000,
                seed: derive_seed(seed, 0x5157),
            },
        ),
        other => other,
    }
}

/// Samples of the noisy statistic and of its Gaussian surrogate.
#[derive(Debug, Clone, Serialize)]
pub struct NoisyCountLaws {
    pub pattern: String,
    /// `chi(sqrt(1-eps) M + sqrt(eps) G)`, one entry per planted `M`.
    pub noisy: Vec<f64>,
    /// `sqrt(1-eps)^e chi(M) + sigma_tilde(M) g`, when requested.
    pub surrogate: Option<Vec<f64>>,
}

/// Draws `count` planted matrices and evaluates every pattern on the
/// noisy matrix (and optionally the surrogate). Sample `i` uses planted
/// index `i`, noise index `i` and surrogate index `i`.
pub fn noisy_count_laws(
    sampler: &Sampler,
    patterns: &[GraphPattern],
    eps: f64,
    count: usize,
    seed: u64,
    with_surrogate: bool,
) -> Result<Vec<NoisyCountLaws>> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid("eps", format!("{eps} is outside [0, 1]")));
    }
    let n = sampler.spec().n();
    if !matches!(sampler.spec().base(), NullSpec::GaussWigner { .. }) {
        return Err(invalid("spec", "noisy counts need a matrix model"));
    }
    let a = (1.0 - eps).sqrt();
    let rows: Vec<Result<(Vec<f64>, Vec<f64>)>> = par::map_indices(count, |i| {
        let mut m = SymMatrix::zeros(n);
        sampler.draw_matrix(seed, i as u64, &mut m);
        let mut x = m.clone();
        let mut rng = sample_rng(seed, streams::NOISE, i as u64);
        ou_noise_matrix_in_place(&mut rng, &mut x, eps);
        let noisy = chi_many(&x, patterns)?;
        let mut sur = Vec::new();
        if with_surrogate {
            let clean = chi_many(&m, patterns)?;
            let mut srng = sample_rng(seed, streams::SURROGATE, i as u64);
            for (p, c) in patterns.iter().zip(clean) {
                let s2 = sigma2_auto(&m, p, eps, derive_seed(seed, i as u64))?.value;
                let sd = s2.max(sigma2_floor(p, eps)).sqrt();
                sur.push(a.powi(p.e() as i32) * c + sd * normal(&mut srng));
            }
        }
        Ok((noisy, sur))
    });
    let mut out: Vec<NoisyCountLaws> = patterns
        .iter()
        .map(|p| NoisyCountLaws {
            pattern: p.to_string(),
            noisy: Vec::with_capacity(count),
            surrogate: with_surrogate.then(|| Vec::with_capacity(count)),
        })
        .collect();
    for row in rows {
        let (noisy, sur) = row?;
        for (k, law) in out.iter_mut().enumerate() {
            law.noisy.push(noisy[k]);
            if let Some(s) = law.surrogate.as_mut() {
                s.push(sur[k]);
            }
        }
    }
    Ok(out)
}

/// Samples of `chi_theta(W)` for `W` from the null, one vector per pattern.
pub fn null_count_law(n: usize, patterns: &[GraphPattern], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let sampler = Sampler::new(&Spec::Null(NullSpec::GaussWigner { n }))?;
    let rows: Vec<Result<Vec<f64>>> = par::map_indices(count, |i| {
        let mut m = SymMatrix::zeros(n);
        sampler.draw_matrix(seed, i as u64, &mut m);
        chi_many(&m, patterns)
    });
    let mut out = vec![Vec::with_capacity(count); patterns.len()];
    for row in rows {
        for (k, v) in row?.into_iter().enumerate() {
            out[k].push(v);
        }
    }
    Ok(out)
}

/// Null moments `E[chi^k]` for `k = 1..=max_power`: `[pattern][k - 1]`.
pub fn null_moments(
    n: usize,
    patterns: &[GraphPattern],
    max_power: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<Moments>>> {
    let sampler = Sampler::new(&Spec::Null(NullSpec::GaussWigner { n }))?;
    if let Some(p) = patterns.iter().find(|p| p.v() > n) {
        return Err(Error::InvalidPattern(format!("n = {n} is smaller than pattern {p}")));
    }
    let empty = || vec![vec![Moments::new(); max_power]; patterns.len()];
    Ok(par::reduce_chunks(
        samples,
        empty,
        |acc, i| {
            let mut m = SymMatrix::zeros(n);
            sampler.draw_matrix(seed, i as u64, &mut m);
            let vals = chi_many(&m, patterns).expect("sizes checked");
            for (row, x) in acc.iter_mut().zip(vals) {
                let mut p = 1.0;
                for slot in row.iter_mut() {
                    p *= x;
                    slot.push(p);
                }
            }
        },
        |acc, other| {
            for (ra, rb) in acc.iter_mut().zip(other) {
                for (a, b) in ra.iter_mut().zip(rb) {
                    a.merge(b);
                }
            }
        },
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub q: usize,
    pub moment: f64,
    pub stderr: f64,
    /// `E[chi^q]^{1/q} / sqrt(q)`.
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub pattern: String,
    pub n: usize,
    pub samples: usize,
    pub rows: Vec<MomentRow>,
}

/// Sub-Gaussian moment profile of `chi_theta` under the null. Rows whose
/// ratio exceeds `1 + tolerance` are flagged.
pub fn moment_check(
    patterns: &[GraphPattern],
    qs: &[usize],
    n: usize,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<MomentReport>> {
    if let Some(q) = qs.iter().find(|q| **q == 0 || **q % 2 == 1 || **q > 12) {
        return Err(invalid("q", format!("{q} must be even and at most 12")));
    }
    let top = qs.iter().copied().max().unwrap_or(2);
    let moments = null_moments(n, patterns, top, samples, seed)?;
    Ok(patterns
        .iter()
        .zip(moments)
        .map(|(p, mo)| MomentReport {
            pattern: p.to_string(),
            n,
            samples,
            rows: qs
                .iter()
                .map(|&q| {
                    let m = &mo[q - 1];
                    let qf = q as f64;
                    let ratio = m.mean.max(0.0).powf(1.0 / qf) / qf.sqrt();
                    let ratio_stderr = if m.mean > 0.0 { ratio * m.stderr() / (qf * m.mean) } else { 0.0 };
                    MomentRow {
                        q,
                        moment: m.mean,
                        stderr: m.stderr(),
                        ratio,
                        ratio_stderr,
                        flagged: ratio > 1.0 + tolerance,
                    }
                })
                .collect(),
        })
        .collect())
}

/// Exact Gaussian moment ratio `((q-1)!!)^{1/q} / sqrt(q)` for the edge.
pub fn gaussian_moment_ratio(q: usize) -> f64 {
    let df: f64 = (1..q).step_by(2).map(|k| k as f64).product();
    df.powf(1.0 / q as f64) / (q as f64).sqrt()
}

/// One CSV row: `(pattern hash, n, eps, statistic, value, stderr)`.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub pattern_hash: u64,
    pub n: usize,
    pub eps: f64,
    pub statistic: String,
    pub value: f64,
    pub stderr: f64,
}

pub const RESULT_HEADER: &str = "pattern_hash,n,eps,statistic,value,stderr";

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{:016x},{},{},{},{:e},{:e}",
            r.pattern_hash, r.n, r.eps, r.statistic, r.value, r.stderr
        );
    }
    out
}

/// Whether the closed-form statistics exist for this pattern.
pub fn has_closed_form(p: &GraphPattern) -> bool {
    matches!(p.motif(), Motif::Edge | Motif::TwoPath | Motif::Triangle)
}
