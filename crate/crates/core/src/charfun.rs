//! `E[exp(i p(g))]` for a univariate polynomial `p` of a standard Gaussian,
//! and the three variance regimes that bound it.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quadrature::{integrate_adaptive, GaussHermite};
use crate::rng::{normal, sample_rng, streams};

/// A polynomial in the normalized Hermite basis, `p = sum_a c_a h_a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermitePoly {
    pub coeffs: Vec<f64>,
}

impl HermitePoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        HermitePoly { coeffs }
    }

    /// Converts `sum_j m_j x^j` using `x h_k = sqrt(k+1) h_{k+1} + sqrt(k) h_{k-1}`.
    pub fn from_monomial(mono: &[f64]) -> Self {
        let mut coeffs = vec![0.0; mono.len().max(1)];
        let mut power = vec![1.0];
        for (j, &m) in mono.iter().enumerate() {
            if j > 0 {
                let mut next = vec![0.0; power.len() + 1];
                for (k, &v) in power.iter().enumerate() {
                    next[k + 1] += v * ((k + 1) as f64).sqrt();
                    if k > 0 {
                        next[k - 1] += v * (k as f64).sqrt();
                    }
                }
                power = next;
            }
            for (c, v) in coeffs.iter_mut().zip(&power) {
                *c += m * v;
            }
        }
        HermitePoly { coeffs }
    }

    pub fn zero() -> Self {
        HermitePoly { coeffs: vec![0.0] }
    }

    /// Index of the last non-zero coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut prev = 0.0;
        let mut cur = 1.0;
        let mut total = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            total += c * cur;
            let kf = k as f64;
            let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
            prev = cur;
            cur = next;
        }
        total
    }

    pub fn mean(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }

    pub fn variance(&self) -> f64 {
        self.coeffs.iter().skip(1).map(|c| c * c).sum()
    }

    pub fn neg(&self) -> Self {
        HermitePoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        HermitePoly {
            coeffs: self.coeffs.iter().map(|c| t * c).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CfMethod {
    GaussHermite,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyCf {
    pub value: Complex64,
    pub method: CfMethod,
    /// `|GH(m) - GH(2m)|`.
    pub doubling_gap: f64,
    pub converged: bool,
}

/// Minimum node count accepted.
pub const MIN_NODES: usize = 64;
/// Gap between the two Gauss-Hermite rules above which the result is not
/// trusted.
pub const GAP_TOL: f64 = 1e-6;
/// Gap below which the Gauss-Hermite answer is returned directly.
const ACCEPT_GAP: f64 = 1e-10;
const ADAPTIVE_HALF_WIDTH: f64 = 9.0;

/// Gauss-Hermite rules with `m` and `2m` nodes, built once.
#[derive(Debug, Clone)]
pub struct CfEngine {
    coarse: GaussHermite,
    fine: GaussHermite,
}

impl CfEngine {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(invalid("nodes", format!("need at least {MIN_NODES} nodes")));
        }
        Ok(CfEngine {
            coarse: GaussHermite::new(nodes)?,
            fine: GaussHermite::new(2 * nodes)?,
        })
    }

    pub fn nodes(&self) -> usize {
        self.coarse.len()
    }

    /// Quadrature of `E exp(i p(g))`. When the two rules disagree beyond
    /// round-off, an adaptive Gauss-Kronrod pass over `[-9, 9]` replaces
    /// them; `converged` is false only if that also fails and the rules
    /// differ by more than [`GAP_TOL`].
    pub fn cf(&self, p: &HermitePoly) -> PolyCf {
        let a = self.coarse.expect_complex(|x| Complex64::cis(p.eval(x)));
        let b = self.fine.expect_complex(|x| Complex64::cis(p.eval(x)));
        let gap = (a - b).norm();
        if gap <= ACCEPT_GAP {
            return PolyCf {
                value: b,
                method: CfMethod::GaussHermite,
                doubling_gap: gap,
                converged: true,
            };
        }
        let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let f = |x: f64| Complex64::cis(p.eval(x)) * density(x);
        let panels = 72;
        let breaks: Vec<f64> = (0..=panels)
            .map(|j| -ADAPTIVE_HALF_WIDTH + 2.0 * ADAPTIVE_HALF_WIDTH * j as f64 / panels as f64)
            .collect();
        match integrate_adaptive(&f, &breaks, 1e-12, 40) {
            Ok((v, _)) => PolyCf {
                value: v,
                method: CfMethod::Adaptive,
                doubling_gap: gap,
                converged: true,
            },
            Err(_) => PolyCf {
                value: b,
                method: CfMethod::GaussHermite,
                doubling_gap: gap,
                converged: gap <= GAP_TOL,
            },
        }
    }

    /// `E (p(g) - c_0)^2` by quadrature, for checking [`HermitePoly::variance`].
    pub fn centered_second_moment(&self, p: &HermitePoly) -> f64 {
        let c0 = p.mean();
        self.fine.expect(|x| (p.eval(x) - c0).powi(2))
    }
}

/// One-off [`CfEngine::cf`].
pub fn poly_cf(p: &HermitePoly, nodes: usize) -> Result<PolyCf> {
    Ok(CfEngine::new(nodes)?.cf(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `Var <= 9^{-k}`.
    Small,
    /// Between the two thresholds.
    Intermediate,
    /// `Var >= k^{C k}`.
    Large,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Small => "small",
            Regime::Intermediate => "intermediate",
            Regime::Large => "large",
        }
    }
}

/// Constants of the three bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeConstants {
    /// Exponent of the large-variance threshold `k^{C k}`.
    pub big_c: f64,
    /// Scale in `1 - c2 k^{-|c| k} / k`.
    pub c2: f64,
    /// Scale in `C' Var^{-1/(4k)}`.
    pub c_prime: f64,
    /// Absolute slack for quadrature error.
    pub slack: f64,
}

impl Default for RegimeConstants {
    fn default() -> Self {
        RegimeConstants {
            big_c: 2.0,
            c2: 1.0 / 16.0,
            c_prime: 1.0,
            slack: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub coeffs: Vec<f64>,
    pub degree: usize,
    pub variance: f64,
    pub regime: Regime,
    /// `c` with `Var = k^{c k}` (zero when `k = 1`).
    pub c_exponent: f64,
    pub bound: f64,
    pub observed: f64,
    pub converged: bool,
    pub pass: bool,
}

fn classify(k: usize, var: f64, big_c: f64) -> (Regime, f64) {
    let kf = k as f64;
    let c = if k > 1 { var.ln() / (kf * kf.ln()) } else { 0.0 };
    if var <= 9f64.powf(-kf) {
        (Regime::Small, c)
    } else if var >= kf.powf(big_c * kf) {
        (Regime::Large, c)
    } else {
        (Regime::Intermediate, c)
    }
}

/// `k^{-|c| k}`, i.e. `min(Var, 1/Var)` for `k > 1` and 1 for `k = 1`.
fn intermediate_factor(k: usize, c: f64) -> f64 {
    let kf = k as f64;
    kf.powf(-c.abs() * kf)
}

/// Classifies `Var p(g)` and checks the matching bound on `|E exp(i p(g))|`.
pub fn verify_cf_regimes(p: &HermitePoly, engine: &CfEngine, consts: &RegimeConstants) -> RegimeReport {
    let k = p.degree().max(1);
    let var = p.variance();
    let (regime, c) = classify(k, var, consts.big_c);
    let kf = k as f64;
    let bound = match regime {
        Regime::Small => 1.0 - var / 4.0,
        Regime::Intermediate => 1.0 - consts.c2 * intermediate_factor(k, c) / kf,
        Regime::Large => consts.c_prime * var.powf(-1.0 / (4.0 * kf)),
    };
    let cf = engine.cf(p);
    let observed = cf.value.norm();
    RegimeReport {
        coeffs: p.coeffs.clone(),
        degree: k,
        variance: var,
        regime,
        c_exponent: c,
        bound,
        observed,
        converged: cf.converged,
        pass: cf.converged && observed <= bound + consts.slack,
    }
}

/// Fitted constants and how many polynomials informed each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantFit {
    pub constants: RegimeConstants,
    pub intermediate_used: usize,
    pub large_used: usize,
}

/// Fits `c2` (largest value holding on the corpus, times `safety`) and `C'`
/// (smallest value holding, divided by `safety`); other fields come from
/// `base`, and a constant without corpus members keeps its base value.
pub fn fit_constants(corpus: &[HermitePoly], engine: &CfEngine, base: RegimeConstants, safety: f64) -> ConstantFit {
    let mut c2 = f64::INFINITY;
    let mut cp: f64 = 0.0;
    let (mut ni, mut nl) = (0, 0);
    for p in corpus {
        let k = p.degree().max(1);
        let var = p.variance();
        let (regime, c) = classify(k, var, base.big_c);
        let obs = engine.cf(p).value.norm();
        match regime {
            Regime::Intermediate => {
                ni += 1;
                c2 = c2.min((1.0 - obs) * k as f64 / intermediate_factor(k, c));
            }
            Regime::Large => {
                nl += 1;
                cp = cp.max(obs * var.powf(1.0 / (4.0 * k as f64)));
            }
            Regime::Small => {}
        }
    }
    let mut constants = base;
    if ni > 0 {
        constants.c2 = c2.max(0.0) * safety;
    }
    if nl > 0 {
        constants.c_prime = cp / safety;
    }
    ConstantFit {
        constants,
        intermediate_used: ni,
        large_used: nl,
    }
}

/// Random polynomials of exact degree `k` with the given variances:
/// Gaussian direction for `c_1..c_k`, Gaussian `c_0`.
pub fn random_corpus(k: usize, variances: &[f64], seed: u64) -> Vec<HermitePoly> {
    variances
        .iter()
        .enumerate()
        .map(|(i, &var)| {
            let mut rng = sample_rng(seed, streams::CORPUS, i as u64);
            let mut c: Vec<f64> = (0..=k).map(|_| normal(&mut rng)).collect();
            let s: f64 = c[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = var.sqrt() / s;
            c[1..].iter_mut().for_each(|v| *v *= scale);
            HermitePoly::new(c)
        })
        .collect()
}

/// Log-uniform variances in `[lo, hi]`.
pub fn log_uniform_variances(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = sample_rng(seed, streams::CORPUS, u64::MAX >> 8);
    (0..count)
        .map(|_| (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp())
        .collect()
}

pub const REGIME_HEADER: &str = "coefficients,variance,regime,bound,observed,pass";

pub fn regime_csv(reports: &[RegimeReport]) -> String {
    let mut out = format!("{REGIME_HEADER}\n");
    for r in reports {
        let coeffs: Vec<String> = r.coeffs.iter().map(|c| format!("{c:e}")).collect();
        let _ = writeln!(
            out,
            "\"{}\",{:e},{},{:e},{:e},{}",
            coeffs.join(" "),
            r.variance,
            r.regime.name(),
            r.bound,
            r.observed,
            r.pass
        );
    }
    out
}
