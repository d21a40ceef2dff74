/// Normalized probabilists' Hermite polynomial `h_k(x) = He_k(x) / sqrt(k!)`.
///
/// Uses the orthonormal three-term recurrence
/// `sqrt(k+1) h_{k+1} = x h_k - sqrt(k) h_{k-1}`.
pub fn hermite(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = x;
    for j in 1..k {
        let jf = j as f64;
        let next = (x * cur - jf.sqrt() * prev) / (jf + 1.0).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[j] = h_j(x)` for `j < out.len()`.
#[inline]
pub fn hermite_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = x;
    for j in 1..out.len() - 1 {
        let jf = j as f64;
        out[j + 1] = (x * out[j] - jf.sqrt() * out[j - 1]) / (jf + 1.0).sqrt();
    }
}

/// The family `h_0, ..., h_{max_degree}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermiteBasis {
    pub max_degree: usize,
}

impl HermiteBasis {
    pub fn new(max_degree: usize) -> Self {
        HermiteBasis { max_degree }
    }

    pub fn eval(&self, k: usize, x: f64) -> f64 {
        hermite(k, x)
    }

    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.max_degree + 1];
        hermite_all(x, &mut out);
        out
    }

    /// `h_k'(x) = sqrt(k) h_{k-1}(x)`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            0.0
        } else {
            (k as f64).sqrt() * hermite(k - 1, x)
        }
    }

    /// Evaluates `sum_j coeffs[j] h_j(x)`.
    pub fn combination(coeffs: &[f64], x: f64) -> f64 {
        let mut h = vec![0.0; coeffs.len()];
        hermite_all(x, &mut h);
        coeffs.iter().zip(&h).map(|(c, v)| c * v).sum()
    }

    /// Hermite coefficients of the derivative of `sum_j c_j h_j`.
    pub fn derivative_coeffs(coeffs: &[f64]) -> Vec<f64> {
        (1..coeffs.len())
            .map(|j| (j as f64).sqrt() * coeffs[j])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussHermite;

    #[test]
    fn low_degree_values() {
        assert_eq!(hermite(0, 3.7), 1.0);
        assert_eq!(hermite(1, 2.0), 2.0);
        assert!((hermite(2, 0.0) + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        // He_3(x) = x^3 - 3x
        let x = 1.3f64;
        assert!((hermite(3, x) - (x.powi(3) - 3.0 * x) / 6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_under_gauss_hermite() {
        let gh = GaussHermite::new(40).unwrap();
        for a in 0..=12 {
            for b in 0..=12 {
                let ip = gh.expect(|x| hermite(a, x) * hermite(b, x));
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((ip - target).abs() < 1e-10, "a={a} b={b} ip={ip}");
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let basis = HermiteBasis::new(12);
        let step = 1e-5;
        for k in 1..=12 {
            for &x in &[-2.3, -0.7, 0.4, 1.9, 3.1] {
                let fd = (hermite(k, x + step) - hermite(k, x - step)) / (2.0 * step);
                let exact = basis.derivative(k, x);
                let scale = exact.abs().max(1e-3);
                assert!((fd - exact).abs() / scale < 1e-6, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn eval_all_agrees_with_single() {
        let all = HermiteBasis::new(15).eval_all(0.83);
        for (k, v) in all.iter().enumerate() {
            assert!((v - hermite(k, 0.83)).abs() < 1e-14);
        }
    }
}
