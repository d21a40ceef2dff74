use crate::error::{invalid, Error, Result};

/// Binomial(n, p) probabilities for `w = 0..=n`.
///
/// Built from the mode outward by ratio recursion and renormalized, which
/// stays accurate far into the tails without log-gamma round-off.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[n] = 1.0;
        return pmf;
    }
    let mode = (((n + 1) as f64) * p).floor().min(n as f64) as usize;
    let odds = p / (1.0 - p);
    pmf[mode] = 1.0;
    for w in mode..n {
        pmf[w + 1] = pmf[w] * (n - w) as f64 / (w + 1) as f64 * odds;
    }
    for w in (0..mode).rev() {
        pmf[w] = pmf[w + 1] * (w + 1) as f64 / (n - w) as f64 / odds;
    }
    let total: f64 = pmf.iter().sum();
    for v in pmf.iter_mut() {
        *v /= total;
    }
    pmf
}

/// A probability law on the weights `w = 0..=n` of a Boolean string,
/// together with the centring map `y(w) = (w - gamma n) / sqrt(n gamma (1 - gamma))`.
///
/// The null law is Binomial(n, gamma); planted laws reuse the same
/// coordinates with an arbitrary pmf.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightLaw {
    n: usize,
    gamma: f64,
    pmf: Vec<f64>,
}

impl WeightLaw {
    /// The null law Binomial(n, gamma).
    pub fn null(n: usize, gamma: f64) -> Result<Self> {
        validate(n, gamma)?;
        Ok(WeightLaw {
            n,
            gamma,
            pmf: binomial_pmf(n, gamma),
        })
    }

    /// An arbitrary law on `0..=n`; the pmf must be non-negative and sum to 1.
    pub fn from_pmf(n: usize, gamma: f64, pmf: Vec<f64>) -> Result<Self> {
        validate(n, gamma)?;
        if pmf.len() != n + 1 {
            return Err(Error::SupportMismatch(format!(
                "pmf has {} entries, expected {}",
                pmf.len(),
                n + 1
            )));
        }
        if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("pmf", "entries must be finite and non-negative"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("pmf", format!("total mass {total} is not 1")));
        }
        Ok(WeightLaw { n, gamma, pmf })
    }

    /// Binomial(n, gamma + eta): the weight law of a biased product.
    pub fn biased_product(n: usize, gamma: f64, eta: f64) -> Result<Self> {
        validate(n, gamma)?;
        let p = gamma + eta;
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("eta", format!("gamma + eta = {p} must lie in (0, 1)")));
        }
        Ok(WeightLaw {
            n,
            gamma,
            pmf: binomial_pmf(n, p),
        })
    }

    /// The null law conditioned on `w` lying in `allowed`.
    pub fn weight_conditioned(n: usize, gamma: f64, allowed: &[usize]) -> Result<Self> {
        let null = Self::null(n, gamma)?;
        let mut pmf = vec![0.0; n + 1];
        for &w in allowed {
            if w > n {
                return Err(invalid("weights", format!("weight {w} exceeds n = {n}")));
            }
            pmf[w] = null.pmf[w];
        }
        let total: f64 = pmf.iter().sum();
        if total <= 0.0 {
            return Err(invalid("weights", "allowed weights carry no null mass"));
        }
        for v in pmf.iter_mut() {
            *v /= total;
        }
        Ok(WeightLaw { n, gamma, pmf })
    }

    pub fn point_mass(n: usize, gamma: f64, w: usize) -> Result<Self> {
        validate(n, gamma)?;
        if w > n {
            return Err(invalid("w", format!("weight {w} exceeds n = {n}")));
        }
        let mut pmf = vec![0.0; n + 1];
        pmf[w] = 1.0;
        Ok(WeightLaw { n, gamma, pmf })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, w: usize) -> f64 {
        self.pmf[w]
    }

    /// Scale `sqrt(n gamma (1 - gamma))`.
    pub fn scale(&self) -> f64 {
        (self.n as f64 * self.gamma * (1.0 - self.gamma)).sqrt()
    }

    pub fn y_of_w(&self, w: usize) -> f64 {
        (w as f64 - self.gamma * self.n as f64) / self.scale()
    }

    pub fn support_y(&self) -> Vec<f64> {
        (0..=self.n).map(|w| self.y_of_w(w)).collect()
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(w, p)| p * f(self.y_of_w(w)))
            .sum()
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.expect(|y| y.powi(k))
    }

    pub fn same_frame(&self, other: &WeightLaw) -> bool {
        self.n == other.n && self.gamma == other.gamma
    }

    /// Full chi-squared divergence `sum_w (self(w) - other(w))^2 / other(w)`.
    /// Infinite when `self` charges a weight `other` does not.
    pub fn chi_squared_from(&self, other: &WeightLaw) -> Result<f64> {
        if !self.same_frame(other) {
            return Err(Error::SupportMismatch("laws use different (n, gamma)".into()));
        }
        let mut total = 0.0;
        for (p, q) in self.pmf.iter().zip(&other.pmf) {
            if *q > 0.0 {
                total += (p - q) * (p - q) / q;
            } else if *p > 0.0 {
                return Ok(f64::INFINITY);
            }
        }
        Ok(total)
    }
}

fn validate(n: usize, gamma: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "need n >= 1"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", format!("{gamma} is outside (0, 1)")));
    }
    Ok(())
}
