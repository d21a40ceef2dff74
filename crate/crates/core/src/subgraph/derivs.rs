//! Gradient, Hessian action and conditional variance of `chi_theta` as a
//! function of the off-diagonal entries.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use super::pattern::{chi_theta, GraphPattern, Motif};
use super::shape::Shape;
use crate::error::{invalid, Error, Result};
use crate::models::{ou_noise_matrix_in_place, SymMatrix};
use crate::par;
use crate::rng::{sample_rng, streams};
use crate::stats::{Estimate, Moments};

/// `sum_{i<j} a_ij b_ij`.
pub fn upper_dot(a: &SymMatrix, b: &SymMatrix) -> f64 {
    let n = a.n();
    (0..n)
        .map(|i| a.row(i)[i + 1..].iter().zip(&b.row(i)[i + 1..]).map(|(x, y)| x * y).sum::<f64>())
        .sum()
}

/// Partial derivatives `d chi / d M_ij` as a symmetric matrix with zero
/// diagonal.
pub fn gradient(m: &SymMatrix, pattern: &GraphPattern) -> Result<SymMatrix> {
    let n = check_n(m, pattern)?;
    let scale = 1.0 / pattern.labelings(n).sqrt();
    let a = m.off_diagonal();
    let mut g = SymMatrix::zeros(n);
    match pattern.motif() {
        Motif::Edge => {
            for i in 0..n {
                for j in i + 1..n {
                    g.set(i, j, scale);
                }
            }
        }
        Motif::TwoPath => {
            let r: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
            for i in 0..n {
                for j in i + 1..n {
                    g.set(i, j, scale * (r[i] + r[j] - 2.0 * a.get(i, j)));
                }
            }
        }
        Motif::Triangle => {
            let sq = a.matmul(&a);
            for i in 0..n {
                for j in i + 1..n {
                    g.set(i, j, scale * sq[i * n + j]);
                }
            }
        }
        _ => return gradient_generic(m, pattern),
    }
    Ok(g)
}

/// Enumeration version of [`gradient`], valid for every pattern.
pub fn gradient_generic(m: &SymMatrix, pattern: &GraphPattern) -> Result<SymMatrix> {
    let n = check_n(m, pattern)?;
    let a = m.off_diagonal();
    let edges = pattern.edges();
    let mut g = SymMatrix::zeros(n);
    let mut vals = vec![0.0; edges.len()];
    for_each_injection(pattern.shape(), n, |labels| {
        for (k, &(u, v)) in edges.iter().enumerate() {
            vals[k] = a.get(labels[u], labels[v]);
        }
        for (k, &(u, v)) in edges.iter().enumerate() {
            let rest: f64 = vals.iter().enumerate().filter(|(t, _)| *t != k).map(|(_, x)| x).product();
            let (x, y) = (labels[u], labels[v]);
            g.set(x, y, g.get(x, y) + rest);
        }
    });
    let scale = 1.0 / (pattern.aut() as f64 * pattern.labelings(n).sqrt());
    Ok(g.map(|x| x * scale))
}

/// Hessian action `H v` with `H_{pq} = d^2 chi / dM_p dM_q` over unordered
/// pairs.
pub fn hess_vec(m: &SymMatrix, pattern: &GraphPattern, v: &SymMatrix) -> Result<SymMatrix> {
    let n = check_n(m, pattern)?;
    let scale = 1.0 / pattern.labelings(n).sqrt();
    let vv = v.off_diagonal();
    let mut out = SymMatrix::zeros(n);
    match pattern.motif() {
        Motif::Edge => {}
        Motif::TwoPath => {
            let s: Vec<f64> = (0..n).map(|i| vv.row(i).iter().sum()).collect();
            for i in 0..n {
                for j in i + 1..n {
                    out.set(i, j, scale * (s[i] + s[j] - 2.0 * vv.get(i, j)));
                }
            }
        }
        Motif::Triangle => {
            let a = m.off_diagonal();
            let va = vv.matmul(&a);
            for i in 0..n {
                for j in i + 1..n {
                    // (VA + AV)_ij = (VA)_ij + (VA)_ji
                    out.set(i, j, scale * (va[i * n + j] + va[j * n + i]));
                }
            }
        }
        _ => return hess_vec_generic(m, pattern, v),
    }
    Ok(out)
}

pub fn hess_vec_generic(m: &SymMatrix, pattern: &GraphPattern, v: &SymMatrix) -> Result<SymMatrix> {
    let n = check_n(m, pattern)?;
    let a = m.off_diagonal();
    let edges = pattern.edges();
    let mut out = SymMatrix::zeros(n);
    let mut vals = vec![0.0; edges.len()];
    let mut pairs = vec![(0usize, 0usize); edges.len()];
    for_each_injection(pattern.shape(), n, |labels| {
        for (k, &(u, w)) in edges.iter().enumerate() {
            pairs[k] = (labels[u], labels[w]);
            vals[k] = a.get(labels[u], labels[w]);
        }
        for k in 0..edges.len() {
            for l in 0..edges.len() {
                if k == l {
                    continue;
                }
                let rest: f64 = vals
                    .iter()
                    .enumerate()
                    .filter(|(t, _)| *t != k && *t != l)
                    .map(|(_, x)| x)
                    .product();
                let (x, y) = pairs[k];
                let (p, q) = pairs[l];
                out.set(x, y, out.get(x, y) + rest * v.get(p, q));
            }
        }
    });
    let scale = 1.0 / (pattern.aut() as f64 * pattern.labelings(n).sqrt());
    Ok(out.map(|x| x * scale))
}

/// Result of a power iteration on a symmetric operator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerResult {
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const POWER_STEPS: usize = 50;
pub const POWER_TOL: f64 = 1e-6;

/// `||H||_op` by power iteration with `||Hv||` for unit `v`.
pub fn hessian_norm(m: &SymMatrix, pattern: &GraphPattern, start_seed: u64) -> Result<PowerResult> {
    let n = m.n();
    let mut rng = sample_rng(start_seed, streams::AUX, 0);
    let mut v = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            v.set(i, j, rng.random::<f64>() - 0.5);
        }
    }
    let norm0 = upper_dot(&v, &v).sqrt();
    if norm0 == 0.0 {
        return Ok(PowerResult { norm: 0.0, iterations: 0, converged: true });
    }
    v = v.map(|x| x / norm0);
    let mut prev = f64::NAN;
    for it in 1..=POWER_STEPS {
        let w = hess_vec(m, pattern, &v)?;
        let lam = upper_dot(&w, &w).sqrt();
        if lam == 0.0 {
            return Ok(PowerResult { norm: 0.0, iterations: it, converged: true });
        }
        if (lam - prev).abs() <= POWER_TOL * lam {
            return Ok(PowerResult { norm: lam, iterations: it, converged: true });
        }
        prev = lam;
        v = w.map(|x| x / lam);
    }
    Ok(PowerResult { norm: prev, iterations: POWER_STEPS, converged: false })
}

#[derive(Debug, Clone, Serialize)]
pub struct GradHessStats {
    /// `(E ||grad_G chi(aM + bG)||^4)^{1/4}`.
    pub kappa1: Estimate,
    /// `(E ||Hess_G chi(aM + bG)||_op^4)^{1/4}`.
    pub kappa2: Estimate,
    /// Fraction of power iterations that met the tolerance.
    pub converged: f64,
}

/// Monte Carlo `kappa_1`, `kappa_2` for `G -> chi(sqrt(1-eps) M + sqrt(eps) G)`.
pub fn grad_hess_stats(
    m: &SymMatrix,
    pattern: &GraphPattern,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<GradHessStats> {
    check_eps(eps)?;
    check_n(m, pattern)?;
    if samples == 0 {
        return Err(invalid("samples", "need at least one"));
    }
    let acc = par::reduce_chunks(
        samples,
        || Ok((Moments::new(), Moments::new(), 0usize)),
        |acc: &mut Result<(Moments, Moments, usize)>, i| {
            let Ok((g4, h4, conv)) = acc else { return };
            let step = (|| -> Result<(f64, f64, bool)> {
                let x = noisy_point(m, eps, seed, i as u64);
                let g = gradient(&x, pattern)?;
                let gn = eps * upper_dot(&g, &g);
                let h = hessian_norm(&x, pattern, seed ^ (i as u64).wrapping_mul(0x9E37_79B9))?;
                Ok((gn * gn, (eps * h.norm).powi(4), h.converged))
            })();
            match step {
                Ok((a, b, c)) => {
                    g4.push(a);
                    h4.push(b);
                    *conv += usize::from(c);
                }
                Err(e) => *acc = Err(e),
            }
        },
        |acc, other| match (acc.as_mut(), other) {
            (Ok(a), Ok(b)) => {
                a.0.merge(b.0);
                a.1.merge(b.1);
                a.2 += b.2;
            }
            (Ok(_), Err(e)) => *acc = Err(e),
            _ => {}
        },
    )?;
    let (g4, h4, conv) = acc;
    Ok(GradHessStats {
        kappa1: fourth_root(&g4, seed),
        kappa2: fourth_root(&h4, seed),
        converged: conv as f64 / samples as f64,
    })
}

fn fourth_root(m: &Moments, seed: u64) -> Estimate {
    let value = m.mean.max(0.0).powf(0.25);
    let stderr = if value > 0.0 {
        value * m.stderr() / (4.0 * m.mean)
    } else {
        0.0
    };
    Estimate {
        value,
        stderr,
        samples: m.count as usize,
        seed,
    }
}

/// `sqrt(1 - eps) M + sqrt(eps) G` with `G` from the noise stream.
pub fn noisy_point(m: &SymMatrix, eps: f64, seed: u64, index: u64) -> SymMatrix {
    let mut x = m.clone();
    let mut rng = sample_rng(seed, streams::NOISE, index);
    ou_noise_matrix_in_place(&mut rng, &mut x, eps);
    x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma2Mode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Largest `n` and edge count for generic exact `sigma^2`.
pub const EXACT_MAX_N: usize = 60;
pub const EXACT_MAX_EDGES: usize = 6;

/// `Var_G chi(sqrt(1-eps) M + sqrt(eps) G)`.
///
/// Exact mode expands the statistic in the orthonormal monomials `G_S` and
/// sums the squared coefficients over `S != {}`; edge, 2-path and triangle
/// have closed forms at every `n`.
pub fn sigma2(m: &SymMatrix, pattern: &GraphPattern, eps: f64, mode: Sigma2Mode) -> Result<Estimate> {
    check_eps(eps)?;
    let n = check_n(m, pattern)?;
    match mode {
        Sigma2Mode::Exact => sigma2_exact(m, pattern, eps).map(Estimate::exact),
        Sigma2Mode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::InsufficientSamples { needed: 2, have: samples });
            }
            let vals = par::map_indices(samples, |i| {
                chi_theta(&noisy_point(m, eps, seed, i as u64), pattern)
            });
            let mut mo = Moments::new();
            for v in vals {
                mo.push(v?);
            }
            let var = mo.variance();
            // stderr of a sample variance, Gaussian approximation
            let se = var * (2.0 / (mo.count as f64 - 1.0)).sqrt();
            let _ = n;
            Ok(Estimate { value: var, stderr: se, samples, seed })
        }
    }
}

fn sigma2_exact(m: &SymMatrix, pattern: &GraphPattern, eps: f64) -> Result<f64> {
    let n = m.n();
    let big_l = pattern.labelings(n);
    let a = m.off_diagonal();
    let (p, q) = (1.0 - eps, eps);
    match pattern.motif() {
        Motif::Edge => Ok(eps),
        Motif::TwoPath => {
            let r: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
            let mut s = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let d = r[i] + r[j] - 2.0 * a.get(i, j);
                    s += d * d;
                }
            }
            Ok(q * p * s / big_l + q * q)
        }
        Motif::Triangle => {
            let sq = a.matmul(&a);
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    s1 += sq[i * n + j] * sq[i * n + j];
                    s2 += a.get(i, j) * a.get(i, j);
                }
            }
            Ok(q * p * p * s1 / big_l + q * q * p * (n as f64 - 2.0) * s2 / big_l + q * q * q)
        }
        _ => sigma2_enumerated(m, pattern, eps),
    }
}

/// Coefficient expansion by enumeration; the oracle for the closed forms.
pub fn sigma2_enumerated(m: &SymMatrix, pattern: &GraphPattern, eps: f64) -> Result<f64> {
    let n = check_n(m, pattern)?;
    let e = pattern.e();
    if n > EXACT_MAX_N || e > EXACT_MAX_EDGES {
        return Err(Error::BudgetExceeded(format!(
            "exact sigma^2 needs n <= {EXACT_MAX_N} and e <= {EXACT_MAX_EDGES} (have n = {n}, e = {e})"
        )));
    }
    let a_coef = (1.0 - eps).sqrt();
    let b_coef = eps.sqrt();
    let mm = m.off_diagonal();
    let edges = pattern.edges();
    let mut coeffs: HashMap<u128, f64> = HashMap::new();
    let mut ids = vec![0u32; e];
    let mut vals = vec![0.0; e];
    for_each_injection(pattern.shape(), n, |labels| {
        for (k, &(u, v)) in edges.iter().enumerate() {
            let (x, y) = (labels[u].min(labels[v]), labels[u].max(labels[v]));
            ids[k] = (x * n + y) as u32;
            vals[k] = mm.get(x, y);
        }
        for subset in 1u32..(1 << e) {
            let mut c = 1.0;
            let mut chosen: Vec<u32> = Vec::with_capacity(e);
            for k in 0..e {
                if subset >> k & 1 == 1 {
                    c *= b_coef;
                    chosen.push(ids[k]);
                } else {
                    c *= a_coef * vals[k];
                }
            }
            if c == 0.0 {
                continue;
            }
            chosen.sort_unstable();
            let key = chosen.iter().fold(0u128, |acc, &id| (acc << 20) | u128::from(id + 1));
            *coeffs.entry(key).or_insert(0.0) += c;
        }
    });
    let norm = pattern.aut() as f64 * pattern.labelings(n).sqrt();
    let mut keys: Vec<_> = coeffs.into_iter().collect();
    keys.sort_by_key(|k| k.0);
    Ok(keys.iter().map(|(_, c)| (c / norm).powi(2)).sum())
}

/// Variance floor `(eps / 2)(1 - eps)^{e - 1}`.
pub fn sigma2_floor(pattern: &GraphPattern, eps: f64) -> f64 {
    0.5 * eps * (1.0 - eps).powi(pattern.e() as i32 - 1)
}

/// Calls `f(labels)` for every ordered injective map of the pattern's
/// vertices into `0..n`.
pub(crate) fn for_each_injection(shape: &Shape, n: usize, mut f: impl FnMut(&[usize])) {
    let v = shape.v();
    let mut labels = vec![0usize; v];
    let mut used = vec![false; n];
    fn go(d: usize, labels: &mut [usize], used: &mut [bool], f: &mut dyn FnMut(&[usize])) {
        if d == labels.len() {
            f(labels);
            return;
        }
        for x in 0..used.len() {
            if used[x] {
                continue;
            }
            used[x] = true;
            labels[d] = x;
            go(d + 1, labels, used, f);
            used[x] = false;
        }
    }
    go(0, &mut labels, &mut used, &mut f);
}

fn check_n(m: &SymMatrix, pattern: &GraphPattern) -> Result<usize> {
    let n = m.n();
    if n < pattern.v() {
        return Err(Error::InvalidPattern(format!("n = {n} is smaller than pattern {pattern}")));
    }
    Ok(n)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid("eps", format!("{eps} is outside [0, 1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sample, NullSpec, Spec};
    use crate::subgraph::pattern::make_pattern;

    fn random(n: usize, seed: u64) -> SymMatrix {
        sample(&Spec::Null(NullSpec::GaussWigner { n }), 1, seed)
            .unwrap()
            .matrix(0)
            .unwrap()
            .clone()
    }

    fn patterns() -> Vec<GraphPattern> {
        vec![
            GraphPattern::edge(),
            GraphPattern::two_path(),
            GraphPattern::triangle(),
            GraphPattern::four_cycle(),
        ]
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = random(7, 2);
        let h = 1e-6;
        for p in patterns() {
            let g = gradient(&m, &p).unwrap();
            let gg = gradient_generic(&m, &p).unwrap();
            for i in 0..7 {
                for j in i + 1..7 {
                    let mut up = m.clone();
                    up.set(i, j, m.get(i, j) + h);
                    let mut dn = m.clone();
                    dn.set(i, j, m.get(i, j) - h);
                    let fd = (chi_theta(&up, &p).unwrap() - chi_theta(&dn, &p).unwrap()) / (2.0 * h);
                    let scale = g.get(i, j).abs().max(1e-2);
                    assert!((fd - g.get(i, j)).abs() / scale < 1e-5, "{p} ({i},{j})");
                    assert!((gg.get(i, j) - g.get(i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hessian_closed_forms_match_generic() {
        let m = random(6, 3);
        let v = random(6, 4);
        for p in patterns() {
            let a = hess_vec(&m, &p, &v).unwrap();
            let b = hess_vec_generic(&m, &p, &v).unwrap();
            for i in 0..6 {
                for j in i + 1..6 {
                    assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-12, "{p}");
                }
            }
        }
    }

    #[test]
    fn edge_kappas() {
        let m = random(10, 1);
        let s = grad_hess_stats(&m, &GraphPattern::edge(), 0.3, 20, 5).unwrap();
        assert!((s.kappa1.value - 0.3f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.kappa2.value, 0.0);
        let z = grad_hess_stats(&m, &GraphPattern::triangle(), 0.0, 5, 5).unwrap();
        assert_eq!(z.kappa1.value, 0.0);
        assert_eq!(z.kappa2.value, 0.0);
    }

    #[test]
    fn sigma2_closed_forms_match_enumeration() {
        let star = make_pattern(&[(0, 1), (0, 2), (0, 3)]).unwrap();
        let m = random(8, 6);
        for p in patterns().into_iter().chain([star]) {
            for eps in [0.2, 0.7, 1.0] {
                let a = sigma2(&m, &p, eps, Sigma2Mode::Exact).unwrap().value;
                let b = sigma2_enumerated(&m, &p, eps).unwrap();
                assert!((a - b).abs() < 1e-10 * b.max(1.0), "{p} eps={eps}: {a} vs {b}");
                if eps == 1.0 {
                    assert!((a - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn sigma2_lower_bound_chain() {
        let m = random(9, 8);
        for p in patterns() {
            let eps = 0.4;
            let s = sigma2(&m, &p, eps, Sigma2Mode::Exact).unwrap().value;
            let g = gradient(&m, &p).unwrap();
            let lb = eps * (1.0 - eps).powi(p.e() as i32 - 1) * upper_dot(&g, &g);
            assert!(s >= lb - 1e-12);
        }
    }

    #[test]
    fn enumeration_budget() {
        let m = random(61, 1);
        assert!(matches!(
            sigma2_enumerated(&m, &GraphPattern::triangle(), 0.3),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
