use std::fmt::Write as _;

use serde::Serialize;

use super::weight_law::WeightLaw;
use crate::error::{invalid, Error, Result};

/// Shifted Krawtchouk polynomials `Kr_0..Kr_n` in the centred coordinate `y`,
/// orthonormal against Binomial(n, gamma).
///
/// Evaluation uses the orthonormal three-term recurrence of the binomial
/// Jacobi matrix, written in `y`:
///
/// ```text
/// sqrt((k+1)(n-k)/n) Kr_{k+1} = (y + k(2g-1)/s) Kr_k - sqrt(k(n-k+1)/n) Kr_{k-1}
/// ```
///
/// with `s = sqrt(n g (1-g))`. It is valid at every real `y`, not only on
/// the support.
#[derive(Debug, Clone, PartialEq)]
pub struct KrawtchoukBasis {
    n: usize,
    gamma: f64,
    max_degree: usize,
    shift: Vec<f64>,
    lead: Vec<f64>,
    back: Vec<f64>,
}

impl KrawtchoukBasis {
    /// Basis with every degree up to `n`.
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        Self::with_max_degree(n, gamma, n)
    }

    pub fn with_max_degree(n: usize, gamma: f64, max_degree: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "need n >= 1"));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(invalid("gamma", format!("{gamma} is outside (0, 1)")));
        }
        if max_degree > n {
            return Err(Error::DegreeTooLarge {
                degree: max_degree,
                max: n,
            });
        }
        let nf = n as f64;
        let s = (nf * gamma * (1.0 - gamma)).sqrt();
        let mut shift = Vec::with_capacity(max_degree);
        let mut lead = Vec::with_capacity(max_degree);
        let mut back = Vec::with_capacity(max_degree);
        for k in 0..max_degree {
            let kf = k as f64;
            shift.push(kf * (2.0 * gamma - 1.0) / s);
            lead.push(((kf + 1.0) * (nf - kf) / nf).sqrt());
            back.push((kf * (nf - kf + 1.0) / nf).sqrt());
        }
        Ok(KrawtchoukBasis {
            n,
            gamma,
            max_degree,
            shift,
            lead,
            back,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// The null weight law this basis is orthonormal against.
    pub fn weight_law(&self) -> WeightLaw {
        WeightLaw::null(self.n, self.gamma).expect("parameters validated at construction")
    }

    pub fn eval(&self, k: usize, y: f64) -> Result<f64> {
        if k > self.max_degree {
            return Err(Error::DegreeTooLarge {
                degree: k,
                max: self.max_degree,
            });
        }
        let mut out = vec![0.0; k + 1];
        self.fill(y, &mut out);
        Ok(out[k])
    }

    /// All values `Kr_0(y)..Kr_max(y)`.
    pub fn eval_all(&self, y: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.max_degree + 1];
        self.fill(y, &mut out);
        out
    }

    /// Fills `out[k] = Kr_k(y)` for `k < out.len()`; `out.len()` must not
    /// exceed `max_degree + 1`.
    pub fn fill(&self, y: f64, out: &mut [f64]) {
        assert!(out.len() <= self.max_degree + 1, "degree out of range");
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        if out.len() == 1 {
            return;
        }
        out[1] = y;
        for k in 1..out.len() - 1 {
            out[k + 1] = ((y + self.shift[k]) * out[k] - self.back[k] * out[k - 1]) / self.lead[k];
        }
    }

    /// Monomial coefficients of `Kr_k` in `y`, lowest degree first.
    pub fn monomial_coefficients(&self, k: usize) -> Result<Vec<f64>> {
        if k > self.max_degree {
            return Err(Error::DegreeTooLarge {
                degree: k,
                max: self.max_degree,
            });
        }
        let mut prev = vec![1.0];
        if k == 0 {
            return Ok(prev);
        }
        let mut cur = vec![0.0, 1.0];
        for j in 1..k {
            let mut next = vec![0.0; j + 2];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] += c;
                next[i] += self.shift[j] * c;
            }
            for (i, c) in prev.iter().enumerate() {
                next[i] -= self.back[j] * c;
            }
            for c in next.iter_mut() {
                *c /= self.lead[j];
            }
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// CSV with one row per degree: `degree,c0,c1,...,c_kmax`.
    pub fn coefficients_csv(&self, kmax: usize) -> Result<String> {
        let mut out = String::from("degree");
        for i in 0..=kmax {
            let _ = write!(out, ",c{i}");
        }
        out.push('\n');
        for k in 0..=kmax {
            let coeffs = self.monomial_coefficients(k)?;
            let _ = write!(out, "{k}");
            for i in 0..=kmax {
                let _ = write!(out, ",{:e}", coeffs.get(i).copied().unwrap_or(0.0));
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// `E_law[Kr_k(y)]` for every `k` up to `kmax`.
    pub fn coefficients_of(&self, law: &WeightLaw, kmax: usize) -> Result<Vec<f64>> {
        if law.n() != self.n || law.gamma() != self.gamma {
            return Err(Error::SupportMismatch(
                "law and basis use different (n, gamma)".into(),
            ));
        }
        if kmax > self.max_degree {
            return Err(Error::DegreeTooLarge {
                degree: kmax,
                max: self.max_degree,
            });
        }
        let mut acc = vec![0.0; kmax + 1];
        let mut vals = vec![0.0; kmax + 1];
        for (w, &p) in law.pmf().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            self.fill(law.y_of_w(w), &mut vals);
            for (a, v) in acc.iter_mut().zip(&vals) {
                *a += p * v;
            }
        }
        Ok(acc)
    }
}

/// Outcome of a grid check of `|Kr_k(y)| <= C k^{1/4} e^{y^2/4}`.
#[derive(Debug, Clone, Serialize)]
pub struct KrawtchoukBoundReport {
    pub n: usize,
    pub k: usize,
    pub max_ratio: f64,
    pub argmax: f64,
    pub constant: f64,
    pub within: bool,
    /// False when the degree or grid leaves `k <= n/2`, `|y| <= n^{1/6}/2`.
    pub in_range: bool,
}

pub fn verify_krawtchouk_bound(
    basis: &KrawtchoukBasis,
    k: usize,
    grid: &[f64],
    constant: f64,
) -> Result<KrawtchoukBoundReport> {
    if k > basis.max_degree() {
        return Err(Error::DegreeTooLarge {
            degree: k,
            max: basis.max_degree(),
        });
    }
    let n = basis.n();
    let y_max = (n as f64).powf(1.0 / 6.0) / 2.0;
    let in_range = 2 * k <= n && grid.iter().all(|y| y.abs() <= y_max);
    let scale = (k.max(1) as f64).powf(-0.25);
    let mut vals = vec![0.0; k + 1];
    let mut max_ratio = 0.0f64;
    let mut argmax = f64::NAN;
    for &y in grid {
        basis.fill(y, &mut vals);
        let r = vals[k].abs() * scale * (-y * y / 4.0).exp();
        if r > max_ratio || argmax.is_nan() {
            max_ratio = max_ratio.max(r);
            argmax = y;
        }
    }
    Ok(KrawtchoukBoundReport {
        n,
        k,
        max_ratio,
        argmax,
        constant,
        within: max_ratio.is_finite() && max_ratio <= constant,
        in_range,
    })
}
