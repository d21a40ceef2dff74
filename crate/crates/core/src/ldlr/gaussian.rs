use std::collections::HashMap;

use super::split::split_estimate;
use super::{cumulative, AdvantageEstimate, BasisCoeffs, CoeffEntry, Method};
use crate::error::{invalid, Error, Result};
use crate::models::{Domain, Sampler, Spec};
use crate::orthopoly::hermite_all;

/// Largest degree accepted; the family has 271 elements at `D = 12`.
pub const MAX_DEGREE: usize = 12;

/// Integer partitions of `1..=max` with non-increasing parts, ordered by
/// size and then lexicographically descending.
pub fn partitions(max: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=cap.min(rest)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 1..=max {
        rec(size, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Symmetrized products of Hermite polynomials over distinct coordinates.
///
/// `psi_lambda(x) = S_lambda(x) / sqrt(N_lambda)` where `S_lambda` sums
/// `prod_a h_{lambda_a}(x_{j_a})` over distinct monomials and `N_lambda`
/// counts them. All `S_lambda` are built in one pass over the coordinates:
/// coordinate `j` either stays unused or takes one part of `lambda`.
#[derive(Debug, Clone)]
pub struct SymmetricHermite {
    n: usize,
    degree: usize,
    parts: Vec<Vec<usize>>,
    /// For each partition (index 1.. in `parts`, shifted by the empty one),
    /// `(k, index of lambda minus one copy of k)` for each distinct part.
    links: Vec<Vec<(usize, usize)>>,
    norms: Vec<f64>,
}

impl SymmetricHermite {
    pub fn new(n: usize, degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::DegreeTooLarge { degree, max: MAX_DEGREE });
        }
        if n == 0 {
            return Err(invalid("n", "need n >= 1"));
        }
        let mut all = vec![Vec::new()];
        all.extend(partitions(degree));
        let index: HashMap<Vec<usize>, usize> = all.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut links = Vec::with_capacity(all.len());
        let mut norms = Vec::with_capacity(all.len());
        for p in &all {
            let mut l = Vec::new();
            let mut distinct = p.clone();
            distinct.dedup();
            for &k in &distinct {
                let mut q = p.clone();
                let pos = q.iter().position(|&x| x == k).expect("part present");
                q.remove(pos);
                l.push((k, index[&q]));
            }
            links.push(l);
            norms.push(monomial_count(n, p));
        }
        Ok(SymmetricHermite {
            n,
            degree,
            parts: all,
            links,
            norms,
        })
    }

    /// Non-empty partitions in output order.
    pub fn indices(&self) -> &[Vec<usize>] {
        &self.parts[1..]
    }

    pub fn len(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of distinct monomials `N_lambda` for each index.
    pub fn monomial_counts(&self) -> &[f64] {
        &self.norms[1..]
    }

    /// `psi_lambda(x)` for every non-empty partition, appended to `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut Vec<f64>) {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        let mut s = vec![0.0; self.parts.len()];
        s[0] = 1.0;
        let mut h = vec![0.0; self.degree + 1];
        for &xj in x {
            hermite_all(xj, &mut h);
            // descending size: smaller partitions still hold the old values
            for idx in (1..self.parts.len()).rev() {
                let mut add = 0.0;
                for &(k, from) in &self.links[idx] {
                    add += h[k] * s[from];
                }
                s[idx] += add;
            }
        }
        out.extend(s[1..].iter().zip(&self.norms[1..]).map(|(v, nrm)| v / nrm.sqrt()));
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.eval_into(x, &mut out);
        out
    }
}

/// `n! / ((n - r)! prod_a m_a!)` for a partition with `r` parts and part
/// multiplicities `m_a`; zero when `r > n`.
fn monomial_count(n: usize, p: &[usize]) -> f64 {
    if p.len() > n {
        return 0.0;
    }
    let falling: f64 = (0..p.len()).map(|i| (n - i) as f64).product();
    let mut mult = 1.0;
    let mut run = 0;
    for i in 0..p.len() {
        run = if i > 0 && p[i] == p[i - 1] { run + 1 } else { 1 };
        mult *= run as f64;
    }
    falling / mult
}

fn label(p: &[usize]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Monte Carlo `chi^2_D` over the symmetric Hermite family, for a planted
/// law given by a draw function `draw(index, out)`.
pub fn chi2_sym_gaussian_with<F>(
    n: usize,
    degree: usize,
    samples: usize,
    seed: u64,
    symmetric: bool,
    draw: F,
) -> Result<(AdvantageEstimate, BasisCoeffs)>
where
    F: Fn(u64, &mut [f64]) + Sync + Send,
{
    if samples < 4 {
        return Err(Error::InsufficientSamples { needed: 4, have: samples });
    }
    let family = SymmetricHermite::new(n, degree)?;
    let res = split_estimate(family.len(), samples, seed, |i, out| {
        let mut x = vec![0.0; n];
        draw(i as u64, &mut x);
        family.eval_into(&x, out);
    });
    let entries: Vec<CoeffEntry> = family
        .indices()
        .iter()
        .zip(&res.means)
        .map(|(p, m)| CoeffEntry {
            index: label(p),
            degree: p.iter().sum(),
            estimate: m.value,
            stderr: m.stderr,
        })
        .collect();
    let by_degree = cumulative(
        degree,
        family.indices().iter().zip(&res.squares).map(|(p, s)| (p.iter().sum(), *s)),
    );
    Ok((
        AdvantageEstimate {
            chi2_d: by_degree[degree],
            stderr: res.stderr,
            degree,
            method: Method::MonteCarlo,
            samples,
            seed,
            symmetric,
            by_degree,
        },
        BasisCoeffs { degree, entries },
    ))
}

/// [`chi2_sym_gaussian_with`] for a vector-valued spec. Every built-in
/// vector kind is permutation symmetric.
pub fn chi2_sym_gaussian(spec: &Spec, degree: usize, samples: usize, seed: u64) -> Result<(AdvantageEstimate, BasisCoeffs)> {
    if spec.domain() != Domain::Vectors {
        return Err(invalid("spec", "symmetric Gaussian advantage needs a vector model"));
    }
    let sampler = Sampler::new(spec)?;
    chi2_sym_gaussian_with(spec.n(), degree, samples, seed, true, |i, out| {
        sampler.draw_vector(seed, i, out)
    })
}
