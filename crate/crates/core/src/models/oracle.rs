use crate::error::{invalid, Error, Result};
use crate::orthopoly::{binomial_pmf, WeightLaw};

/// Exact weight law of `T_eps x` when `x` is symmetric with weight law `pi`.
///
/// Given weight `w`, the kept-or-resampled ones contribute
/// Bin(w, 1 - eps (1 - gamma)) and the zeros Bin(n - w, eps gamma).
pub fn noisy_weight_law(pi: &WeightLaw, eps: f64, gamma: f64) -> Result<WeightLaw> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid("eps", format!("{eps} is outside [0, 1]")));
    }
    if (gamma - pi.gamma()).abs() > 1e-15 {
        return Err(Error::SupportMismatch(format!(
            "noise gamma {gamma} differs from the law's gamma {}",
            pi.gamma()
        )));
    }
    let n = pi.n();
    let stay = 1.0 - eps * (1.0 - gamma);
    let flip = eps * gamma;
    let mut out = vec![0.0; n + 1];
    for (w, &p) in pi.pmf().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let ones = binomial_pmf(w, stay);
        let zeros = binomial_pmf(n - w, flip);
        for (a, &pa) in ones.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            let scaled = p * pa;
            for (b, &pb) in zeros.iter().enumerate() {
                out[a + b] += scaled * pb;
            }
        }
    }
    let total: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= total;
    }
    WeightLaw::from_pmf(n, gamma, out)
}

/// Exact law on the hypercube `{0, 1}^n` (bit set = symbol `+1`), for
/// brute-force checks at small `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeLaw {
    n: usize,
    gamma: f64,
    p: Vec<f64>,
}

const MAX_CUBE: usize = 22;

impl HypercubeLaw {
    /// Spreads each weight class of `law` uniformly over its strings.
    pub fn from_weight_law(law: &WeightLaw) -> Result<Self> {
        let n = law.n();
        check_dim(n)?;
        let mut binom = vec![0.0; n + 1];
        binom[0] = 1.0;
        for k in 1..=n {
            binom[k] = binom[k - 1] * (n - k + 1) as f64 / k as f64;
        }
        let p = (0..1usize << n)
            .map(|x| {
                let w = x.count_ones() as usize;
                law.prob(w) / binom[w]
            })
            .collect();
        Ok(HypercubeLaw {
            n,
            gamma: law.gamma(),
            p,
        })
    }

    /// Arbitrary law on the cube; `p[x]` is the mass of bit pattern `x`.
    pub fn from_pmf(n: usize, gamma: f64, p: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if p.len() != 1 << n {
            return Err(Error::SupportMismatch(format!("need 2^{n} entries")));
        }
        Ok(HypercubeLaw { n, gamma, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pmf(&self) -> &[f64] {
        &self.p
    }

    /// Applies `T_eps` one coordinate at a time, `O(n 2^n)`.
    pub fn apply_noise(&self, eps: f64) -> HypercubeLaw {
        let mut p = self.p.clone();
        let g = self.gamma;
        for i in 0..self.n {
            let bit = 1usize << i;
            for x in 0..p.len() {
                if x & bit != 0 {
                    continue;
                }
                let p0 = p[x];
                let p1 = p[x | bit];
                let s = p0 + p1;
                p[x] = (1.0 - eps) * p0 + eps * (1.0 - g) * s;
                p[x | bit] = (1.0 - eps) * p1 + eps * g * s;
            }
        }
        HypercubeLaw {
            n: self.n,
            gamma: self.gamma,
            p,
        }
    }

    pub fn weight_law(&self) -> Result<WeightLaw> {
        let mut pmf = vec![0.0; self.n + 1];
        for (x, &v) in self.p.iter().enumerate() {
            pmf[x.count_ones() as usize] += v;
        }
        WeightLaw::from_pmf(self.n, self.gamma, pmf)
    }

    pub fn expect<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        self.p.iter().enumerate().map(|(x, &v)| v * f(x)).sum()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_CUBE {
        return Err(invalid("n", format!("hypercube oracle supports 1..={MAX_CUBE}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_keeps_law() {
        let pi = WeightLaw::biased_product(12, 0.3, 0.1).unwrap();
        let out = noisy_weight_law(&pi, 0.0, 0.3).unwrap();
        for (a, b) in out.pmf().iter().zip(pi.pmf()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn full_noise_gives_null() {
        let pi = WeightLaw::point_mass(15, 0.4, 3).unwrap();
        let out = noisy_weight_law(&pi, 1.0, 0.4).unwrap();
        let null = WeightLaw::null(15, 0.4).unwrap();
        for (a, b) in out.pmf().iter().zip(null.pmf()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn point_mass_at_top() {
        let pi = WeightLaw::point_mass(10, 0.5, 10).unwrap();
        let out = noisy_weight_law(&pi, 0.5, 0.5).unwrap();
        let expected = binomial_pmf(10, 0.75);
        for (a, b) in out.pmf().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn cube_oracle_agrees_with_formula() {
        let pi = WeightLaw::weight_conditioned(9, 0.35, &[1, 4, 8]).unwrap();
        for eps in [0.1, 0.5, 0.9] {
            let a = noisy_weight_law(&pi, eps, 0.35).unwrap();
            let b = HypercubeLaw::from_weight_law(&pi)
                .unwrap()
                .apply_noise(eps)
                .weight_law()
                .unwrap();
            for (x, y) in a.pmf().iter().zip(b.pmf()) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn full_noise_on_cube_is_product() {
        let pi = WeightLaw::point_mass(8, 0.5, 0).unwrap();
        let cube = HypercubeLaw::from_weight_law(&pi).unwrap().apply_noise(1.0);
        for &v in cube.pmf() {
            assert!((v - 1.0 / 256.0).abs() < 1e-15);
        }
    }
}
