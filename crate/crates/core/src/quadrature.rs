//! Gauss-Hermite rules for the standard Gaussian and an adaptive
//! Gauss-Kronrod integrator for oscillatory integrands.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Nodes and weights of an `m`-point Gauss-Hermite rule for N(0, 1):
/// `E[f(g)] ~ sum_i w_i f(x_i)`, with `sum_i w_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Eigenvalues of the Jacobi matrix as starting points, polished by
    /// Newton steps on the normalized Hermite recurrence. Weights use the
    /// Christoffel identity `w_i = 1 / (m h_{m-1}(x_i)^2)`.
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("nodes", "need at least one node"));
        }
        let jacobi = nalgebra::DMatrix::from_fn(m, m, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64).sqrt()
            } else {
                0.0
            }
        });
        let mut guesses: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
        guesses.sort_by(|a, b| a.total_cmp(b));
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for (i, &x0) in guesses.iter().enumerate() {
            let mut x = x0;
            let mut converged = false;
            let mut last = scaled_tail(m, x);
            for _ in 0..50 {
                let (hm, hm1, _) = last;
                let step = hm / ((m as f64).sqrt() * hm1);
                x -= step;
                last = scaled_tail(m, x);
                if step.abs() <= 1e-15 * x.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NoConvergence(format!(
                    "Gauss-Hermite root {i} of {m}"
                )));
            }
            let (_, hm1, log_scale) = last;
            nodes.push(x);
            weights.push((-2.0 * log_scale).exp() / (m as f64 * hm1 * hm1));
        }
        // enforce exact symmetry
        for i in 0..m / 2 {
            let j = m - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[j]);
            nodes[i] = -x;
            nodes[j] = x;
            weights[i] = w;
            weights[j] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Ok(GaussHermite { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn expect_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

/// `(h_m(x), h_{m-1}(x), log_scale)` with both values divided by
/// `exp(log_scale)` to avoid overflow.
fn scaled_tail(m: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    for k in 0..m {
        let kf = k as f64;
        let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (cur, prev, log_scale)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7-K15 panel; returns (Kronrod estimate, |Kronrod - Gauss|).
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss-Kronrod quadrature of a complex integrand on `[a, b]`
/// with absolute tolerance `tol` per initial panel.
///
/// `panels` gives the initial subdivision (phase-aware callers pass many).
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: &F,
    breakpoints: &[f64],
    tol: f64,
    max_depth: usize,
) -> Result<(Complex64, f64)> {
    fn recurse<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        whole: (Complex64, f64),
        tol: f64,
        depth: usize,
    ) -> Option<(Complex64, f64)> {
        if whole.1 <= tol {
            return Some(whole);
        }
        if depth == 0 {
            return None;
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        let (lv, le) = recurse(f, a, m, left, 0.5 * tol, depth - 1)?;
        let (rv, re) = recurse(f, m, b, right, 0.5 * tol, depth - 1)?;
        Some((lv + rv, le + re))
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in breakpoints.windows(2) {
        let whole = gk15(f, w[0], w[1]);
        match recurse(f, w[0], w[1], whole, tol, max_depth) {
            Some((v, e)) => {
                total += v;
                err += e;
            }
            None => {
                return Err(Error::NoConvergence(format!(
                    "adaptive quadrature on [{}, {}]",
                    w[0], w[1]
                )))
            }
        }
    }
    Ok((total, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_rule_is_sqrt3() {
        let gh = GaussHermite::new(3).unwrap();
        let s3 = 3f64.sqrt();
        assert!((gh.nodes[0] + s3).abs() < 1e-14);
        assert!(gh.nodes[1].abs() < 1e-14);
        assert!((gh.nodes[2] - s3).abs() < 1e-14);
        assert!((gh.weights[0] - 1.0 / 6.0).abs() < 1e-14);
        assert!((gh.weights[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_moments_are_exact() {
        let gh = GaussHermite::new(20).unwrap();
        let mut double_fact = 1.0;
        for k in 1..20 {
            double_fact *= (2 * k - 1) as f64;
            let m = gh.expect(|x| x.powi(2 * k as i32));
            assert!((m / double_fact - 1.0).abs() < 1e-11, "k={k} m={m}");
        }
        assert!((gh.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn large_rules_converge() {
        for m in [64, 400, 800] {
            let gh = GaussHermite::new(m).unwrap();
            assert!((gh.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let cf = gh.expect_complex(|x| Complex64::new(0.0, 1.5 * x).exp());
            assert!((cf.re - (-1.125f64).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn kronrod_integrates_smooth_function() {
        let f = |x: f64| Complex64::new(x.exp(), x.cos());
        let (v, _) = integrate_adaptive(&f, &[0.0, 0.5, 1.0], 1e-13, 30).unwrap();
        assert!((v.re - (1f64.exp() - 1.0)).abs() < 1e-13);
        assert!((v.im - 1f64.sin()).abs() < 1e-13);
    }
}
