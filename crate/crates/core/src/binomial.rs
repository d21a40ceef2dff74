//! Exact binomial-space pipeline: truncation of the weight law, damped
//! Krawtchouk coefficients, certified TV upper bounds, and exact oracles.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::models::noisy_weight_law;
use crate::orthopoly::{KrawtchoukBasis, WeightLaw};

/// Largest `n` handled; everything here is exact enumeration.
pub const MAX_N: usize = 4096;

/// Default truncation radius `2 sqrt(log n)`.
pub fn default_tau(n: usize) -> f64 {
    2.0 * (n as f64).ln().sqrt()
}

/// Default split degree `(4 / eps) log n`.
pub fn default_split(n: usize, eps: f64) -> usize {
    ((4.0 / eps) * (n as f64).ln()).floor() as usize
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    pub tau: f64,
    pub mass_dropped: f64,
    #[serde(skip)]
    pub law: WeightLaw,
}

/// Conditions `pi` on `|y| <= tau`.
pub fn truncate(pi: &WeightLaw, tau: f64) -> Result<TruncationReport> {
    if !(tau > 0.0) {
        return Err(invalid("tau", "must be positive"));
    }
    check_n(pi.n())?;
    let mut pmf = vec![0.0; pi.n() + 1];
    let mut kept = 0.0;
    for (w, &p) in pi.pmf().iter().enumerate() {
        if pi.y_of_w(w).abs() <= tau {
            pmf[w] = p;
            kept += p;
        }
    }
    if kept <= 0.0 {
        return Err(Error::DegenerateTruncation { tau });
    }
    for v in pmf.iter_mut() {
        *v /= kept;
    }
    let dropped: f64 = pi
        .pmf()
        .iter()
        .enumerate()
        .filter(|(w, _)| pi.y_of_w(*w).abs() > tau)
        .map(|(_, p)| p)
        .sum();
    Ok(TruncationReport {
        tau,
        mass_dropped: dropped,
        law: WeightLaw::from_pmf(pi.n(), pi.gamma(), pmf)?,
    })
}

/// `1/2 sum_w |a(w) - b(w)|`.
pub fn exact_tv(a: &WeightLaw, b: &WeightLaw) -> Result<f64> {
    if !a.same_frame(b) {
        return Err(Error::SupportMismatch("laws use different (n, gamma)".into()));
    }
    Ok(0.5 * a.pmf().iter().zip(b.pmf()).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Overrides for the bound's free parameters.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundOptions {
    pub tau: Option<f64>,
    pub split: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifiedBound {
    pub n: usize,
    pub gamma: f64,
    pub eps: f64,
    pub degree: usize,
    pub tau: f64,
    pub split: usize,
    /// `chi^2_D(pi || nu)` of the untruncated law.
    pub delta: f64,
    /// `sum_{1 <= l <= T} (1 - eps)^{2l} a_l^2` on the truncated law.
    pub low: f64,
    /// `(1 - eps)^{2(T+1)} (chi^2(pi_bar || nu) - sum_{l <= T} a_l^2)`.
    pub tail: f64,
    pub mass_dropped: f64,
    pub chi2_noisy_truncated: f64,
    /// Highest degree with finite coefficients (normally `n`).
    pub degree_cap: usize,
    /// `1/2 sqrt(low + tail) + mass_dropped`, before clamping.
    pub raw_bound: f64,
    pub tv_bound: f64,
}

/// Certified upper bound on `TV(nu, T_eps pi)`.
///
/// The noisy truncated law has Krawtchouk coefficients `(1 - eps)^l a_l`,
/// so its chi-squared divergence is `sum_l (1 - eps)^{2l} a_l^2`. Degrees
/// above the split `T` are bounded through Parseval on the truncated law,
/// and truncation costs `TV(pi, pi_bar) = mass_dropped`.
pub fn certified_tv_bound(
    pi: &WeightLaw,
    eps: f64,
    degree: usize,
    basis: &KrawtchoukBasis,
    opts: BoundOptions,
) -> Result<CertifiedBound> {
    let n = pi.n();
    check_n(n)?;
    check_basis(pi, basis)?;
    if !(eps > 0.0 && eps < 1.0) && eps != 1.0 {
        return Err(invalid("eps", format!("{eps} is outside (0, 1]")));
    }
    if degree > n {
        return Err(Error::DegreeTooLarge { degree, max: n });
    }
    let tau = opts.tau.unwrap_or_else(|| default_tau(n));
    let split = opts.split.unwrap_or_else(|| default_split(n, eps));
    let delta = chi2_d(pi, basis, degree)?;
    let trunc = truncate(pi, tau)?;
    let coeffs = basis.coefficients_of(&trunc.law, basis.max_degree())?;
    let degree_cap = coeffs
        .iter()
        .position(|c| !c.is_finite())
        .map_or(coeffs.len() - 1, |p| p - 1);
    let nu = basis.weight_law();
    let chi2_trunc = trunc.law.chi_squared_from(&nu)?;
    let top = split.min(degree_cap);
    let damp = 1.0 - eps;
    let mut low = 0.0;
    let mut seen = 0.0;
    for (l, a) in coeffs.iter().enumerate().take(top + 1).skip(1) {
        low += damp.powi(2 * l as i32) * a * a;
        seen += a * a;
    }
    let rest = (chi2_trunc - seen).max(0.0);
    let tail = damp.powi(2 * (top as i32 + 1)) * rest;
    let chi2 = low + tail;
    let raw = 0.5 * chi2.sqrt() + trunc.mass_dropped;
    Ok(CertifiedBound {
        n,
        gamma: pi.gamma(),
        eps,
        degree,
        tau,
        split,
        delta,
        low,
        tail,
        mass_dropped: trunc.mass_dropped,
        chi2_noisy_truncated: chi2,
        degree_cap,
        raw_bound: raw,
        tv_bound: raw.min(1.0),
    })
}

/// `sum_{l=1}^{D} (E_pi Kr_l)^2`.
pub fn chi2_d(pi: &WeightLaw, basis: &KrawtchoukBasis, degree: usize) -> Result<f64> {
    check_basis(pi, basis)?;
    let a = basis.coefficients_of(pi, degree)?;
    Ok(a.iter().skip(1).map(|x| x * x).sum())
}

/// `TV(nu, T_eps pi)` computed exactly through the noisy weight law.
pub fn exact_noisy_tv(pi: &WeightLaw, eps: f64) -> Result<f64> {
    let noisy = noisy_weight_law(pi, eps, pi.gamma())?;
    exact_tv(&WeightLaw::null(pi.n(), pi.gamma())?, &noisy)
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub t: f64,
    pub tail: f64,
    /// `(delta + 2^{-t^2/4}) e^{-t^2/4}` without the constant.
    pub shape: f64,
    pub ratio: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailProbe {
    /// `sqrt(chi^2_D)`.
    pub delta: f64,
    pub constant: f64,
    /// Smallest constant that covers every row.
    pub fitted_constant: f64,
    pub rows: Vec<TailRow>,
}

/// Compares `Pr_pi[|y| >= t]` with `C (delta + 2^{-t^2/4}) e^{-t^2/4}`.
/// Grid points with `t > sqrt(D)` are skipped.
pub fn tail_probe(
    pi: &WeightLaw,
    basis: &KrawtchoukBasis,
    degree: usize,
    t_grid: &[f64],
    constant: f64,
) -> Result<TailProbe> {
    let delta = chi2_d(pi, basis, degree)?.sqrt();
    let limit = (degree as f64).sqrt();
    let mut rows = Vec::new();
    let mut fitted = 0.0f64;
    for &t in t_grid.iter().filter(|&&t| t <= limit + 1e-12) {
        let tail: f64 = pi
            .pmf()
            .iter()
            .enumerate()
            .filter(|(w, _)| pi.y_of_w(*w).abs() >= t)
            .map(|(_, p)| p)
            .sum();
        let e = (-t * t / 4.0).exp();
        let shape = (delta + 2f64.powf(-t * t / 4.0)) * e;
        let ratio = tail / shape;
        fitted = fitted.max(ratio);
        rows.push(TailRow {
            t,
            tail,
            shape,
            ratio,
            violation: ratio > constant,
        });
    }
    Ok(TailProbe {
        delta,
        constant,
        fitted_constant: fitted,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoeffProbe {
    pub tau: f64,
    pub mass_dropped: f64,
    /// `sqrt(chi^2_D)` of the untruncated law.
    pub delta: f64,
    /// `|E_pi[Kr_l(y) 1(|y| <= tau)]|` for `l = 0..=D`.
    pub coeffs: Vec<f64>,
    /// `max_{l >= 1} coeff_l / (delta l^{5/4})`; infinite when `delta = 0`
    /// and some coefficient is non-zero.
    pub fitted_constant: f64,
}

pub fn truncated_coeff_probe(
    pi: &WeightLaw,
    basis: &KrawtchoukBasis,
    tau: f64,
    degree: usize,
) -> Result<CoeffProbe> {
    check_basis(pi, basis)?;
    if degree > basis.max_degree() {
        return Err(Error::DegreeTooLarge {
            degree,
            max: basis.max_degree(),
        });
    }
    let delta = chi2_d(pi, basis, degree)?.sqrt();
    let mut coeffs = vec![0.0; degree + 1];
    let mut vals = vec![0.0; degree + 1];
    let mut dropped = 0.0;
    for (w, &p) in pi.pmf().iter().enumerate() {
        let y = pi.y_of_w(w);
        if y.abs() > tau {
            dropped += p;
            continue;
        }
        basis.fill(y, &mut vals);
        for (c, v) in coeffs.iter_mut().zip(&vals) {
            *c += p * v;
        }
    }
    for c in coeffs.iter_mut() {
        *c = c.abs();
    }
    let fitted = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(l, c)| {
            let scale = delta * (l as f64).powf(1.25);
            if scale > 0.0 {
                c / scale
            } else if *c > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(CoeffProbe {
        tau,
        mass_dropped: dropped,
        delta,
        coeffs,
        fitted_constant: fitted,
    })
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub n: usize,
    pub gamma: f64,
    pub eps: f64,
    pub degree: usize,
    pub delta: f64,
    pub bound: f64,
    pub exact_tv: f64,
    pub mass_dropped: f64,
    pub seed: u64,
}

pub const SWEEP_HEADER: &str = "label,n,gamma,eps,D,delta,bound,exact_tv,mass_dropped,seed";

impl SweepRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:e},{:e},{:e},{}",
            self.label,
            self.n,
            self.gamma,
            self.eps,
            self.degree,
            self.delta,
            self.bound,
            self.exact_tv,
            self.mass_dropped,
            self.seed
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv());
    }
    out
}

/// Runs the certified bound and the exact oracle for every law and `eps`.
pub fn sweep(
    laws: &[(String, WeightLaw)],
    eps_grid: &[f64],
    degree: impl Fn(usize, f64) -> usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for (label, law) in laws {
        let basis = KrawtchoukBasis::new(law.n(), law.gamma())?;
        for &eps in eps_grid {
            let d = degree(law.n(), eps).min(law.n());
            let b = certified_tv_bound(law, eps, d, &basis, BoundOptions::default())?;
            rows.push(SweepRow {
                label: label.clone(),
                n: law.n(),
                gamma: law.gamma(),
                eps,
                degree: d,
                delta: b.delta,
                bound: b.tv_bound,
                exact_tv: exact_noisy_tv(law, eps)?,
                mass_dropped: b.mass_dropped,
                seed,
            });
        }
    }
    Ok(rows)
}

/// Symmetric Boolean planted laws used for soundness checks: biased
/// products and several weight-conditioned nulls.
pub fn standard_corpus(n: usize, gamma: f64) -> Result<Vec<(String, WeightLaw)>> {
    let mut out = Vec::new();
    let sd = (n as f64 * gamma * (1.0 - gamma)).sqrt();
    let scale = (gamma * (1.0 - gamma) / n as f64).sqrt();
    for mult in [-1.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let eta = mult * scale;
        out.push((format!("biased(eta={eta:.5})"), WeightLaw::biased_product(n, gamma, eta)?));
    }
    let mean = gamma * n as f64;
    let window = |lo: f64, hi: f64| -> Vec<usize> {
        (0..=n)
            .filter(|&w| {
                let y = (w as f64 - mean) / sd;
                y >= lo && y <= hi
            })
            .collect()
    };
    out.push(("even".into(), WeightLaw::weight_conditioned(n, gamma, &(0..=n).step_by(2).collect::<Vec<_>>())?));
    out.push(("mod3".into(), WeightLaw::weight_conditioned(n, gamma, &(0..=n).step_by(3).collect::<Vec<_>>())?));
    out.push(("upper".into(), WeightLaw::weight_conditioned(n, gamma, &window(0.0, f64::INFINITY))?));
    out.push(("central".into(), WeightLaw::weight_conditioned(n, gamma, &window(-1.0, 1.0))?));
    out.push(("tails".into(), WeightLaw::weight_conditioned(n, gamma, &{
        let mut v = window(f64::NEG_INFINITY, -1.0);
        v.extend(window(1.0, f64::INFINITY));
        v
    })?));
    out.push(("shifted".into(), WeightLaw::weight_conditioned(n, gamma, &window(0.5, 3.0))?));
    Ok(out)
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_N {
        return Err(invalid("n", format!("exact pipeline supports n <= {MAX_N}")));
    }
    Ok(())
}

fn check_basis(pi: &WeightLaw, basis: &KrawtchoukBasis) -> Result<()> {
    if pi.n() != basis.n() || pi.gamma() != basis.gamma() {
        return Err(Error::SupportMismatch(
            "law and basis use different (n, gamma)".into(),
        ));
    }
    Ok(())
}
