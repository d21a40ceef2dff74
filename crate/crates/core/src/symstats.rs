//! The symmetric statistic `F_k` of a Gaussian-type vector, the Hermite
//! regularity test, and characteristic-function diagnostics.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::models::{ou_noise_in_place, Sampler, Spec};
use crate::orthopoly::hermite_all;
use crate::par;
use crate::rng::{derive_seed, normal, sample_rng, streams};

pub use crate::stats::{tv_histogram, TvEstimate};

/// Largest regularity degree accepted.
pub const MAX_ELL: usize = 16;
/// Rejection attempts per conditioned sample.
pub const MAX_ATTEMPTS: usize = 1000;

/// `(F_k)_i = n^{-1/2} sum_j h_i(x_j)` for `i = 1..=k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymStatVector {
    pub k: usize,
    pub values: Vec<f64>,
}

pub fn eval_fk(x: &[f64], k: usize) -> Result<SymStatVector> {
    if k == 0 {
        return Err(invalid("k", "need k >= 1"));
    }
    let mut values = vec![0.0; k];
    fk_into(x, &mut vec![0.0; k + 1], &mut values);
    Ok(SymStatVector { k, values })
}

fn fk_into(x: &[f64], h: &mut [f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for &xj in x {
        hermite_all(xj, h);
        for (o, hv) in out.iter_mut().zip(&h[1..]) {
            *o += hv;
        }
    }
    let s = (x.len() as f64).sqrt();
    out.iter_mut().for_each(|v| *v /= s);
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub ell: usize,
    /// Row-major `(ell + 1) x (ell + 1)` matrix `n^{-1} sum_j h_a(y_j) h_b(y_j)`.
    pub gram: Vec<f64>,
    pub min_eig: f64,
    pub max_eig: f64,
    pub is_regular: bool,
}

impl RegularityReport {
    pub fn gram_entry(&self, a: usize, b: usize) -> f64 {
        self.gram[a * (self.ell + 1) + b]
    }
}

/// Empirical Hermite Gram matrix of `y` up to degree `ell` and the test
/// "all eigenvalues in `[1/2, 3/2]`".
pub fn regularity_check(y: &[f64], ell: usize) -> Result<RegularityReport> {
    if ell > MAX_ELL {
        return Err(Error::DegreeTooLarge { degree: ell, max: MAX_ELL });
    }
    if y.is_empty() {
        return Err(invalid("y", "empty vector"));
    }
    let d = ell + 1;
    let mut gram = vec![0.0; d * d];
    let mut h = vec![0.0; d];
    for &yj in y {
        hermite_all(yj, &mut h);
        for a in 0..d {
            for b in a..d {
                gram[a * d + b] += h[a] * h[b];
            }
        }
    }
    let n = y.len() as f64;
    for a in 0..d {
        for b in a..d {
            let v = gram[a * d + b] / n;
            gram[a * d + b] = v;
            gram[b * d + a] = v;
        }
    }
    let eig = DMatrix::from_row_slice(d, d, &gram).symmetric_eigenvalues();
    let min_eig = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eig = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RegularityReport {
        ell,
        gram,
        min_eig,
        max_eig,
        is_regular: min_eig >= 0.5 && max_eig <= 1.5,
    })
}

/// How to produce `F_k` samples from a vector model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkOptions {
    pub k: usize,
    /// OU noise applied to each draw before evaluating `F_k`.
    pub eps: f64,
    /// Redraw until the point is `ell`-regular (before noise).
    pub regular: Option<usize>,
}

/// `count` draws of `F_k`, stored flat (`out[i * k + c]`).
///
/// Conditioned draws retry the model with derived seeds and fail after
/// [`MAX_ATTEMPTS`] rejections.
pub fn fk_samples(spec: &Spec, opts: FkOptions, count: usize, seed: u64) -> Result<Vec<f64>> {
    if opts.k == 0 {
        return Err(invalid("k", "need k >= 1"));
    }
    if !(0.0..=1.0).contains(&opts.eps) {
        return Err(invalid("eps", "need 0 <= eps <= 1"));
    }
    if let Some(ell) = opts.regular {
        if ell > MAX_ELL {
            return Err(Error::DegreeTooLarge { degree: ell, max: MAX_ELL });
        }
    }
    let sampler = Sampler::new(spec)?;
    let n = spec.n();
    let rows = par::map_indices(count, |i| -> Result<Vec<f64>> {
        let mut x = vec![0.0; n];
        let mut accepted = false;
        for attempt in 0..MAX_ATTEMPTS {
            let s = if attempt == 0 { seed } else { derive_seed(seed, attempt as u64) };
            sampler.draw_vector(s, i as u64, &mut x);
            match opts.regular {
                Some(ell) if !regularity_check(&x, ell)?.is_regular => continue,
                _ => {
                    accepted = true;
                    break;
                }
            }
        }
        if !accepted {
            return Err(Error::NoConvergence(format!(
                "no regular point after {MAX_ATTEMPTS} attempts"
            )));
        }
        let mut rng = sample_rng(seed, streams::NOISE, i as u64);
        ou_noise_in_place(&mut rng, &mut x, opts.eps);
        let mut out = vec![0.0; opts.k];
        fk_into(&x, &mut vec![0.0; opts.k + 1], &mut out);
        Ok(out)
    });
    let mut flat = Vec::with_capacity(count * opts.k);
    for r in rows {
        flat.extend(r?);
    }
    Ok(flat)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentProbe {
    /// `(t, (E <z, xi>^t)^{1/t} / sqrt(t))` for even `t <= T`.
    pub profile: Vec<(usize, f64)>,
    pub max_ratio: f64,
    pub cap: f64,
    pub flagged: bool,
}

/// Sub-Gaussian moment profile of `<z, xi>` for flat samples `z` in `R^k`.
pub fn moment_probe(samples: &[f64], k: usize, xi: &[f64], t_max: usize, cap: f64) -> Result<MomentProbe> {
    if xi.len() != k || k == 0 || samples.len() % k != 0 {
        return Err(invalid("xi", "direction and samples must share the dimension"));
    }
    if t_max < 2 || t_max % 2 != 0 {
        return Err(invalid("T", "need an even moment order >= 2"));
    }
    let m = samples.len() / k;
    let needed = 100 * 3usize.pow(t_max as u32);
    if m < needed {
        return Err(Error::InsufficientSamples { needed, have: m });
    }
    let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(invalid("xi", "zero direction"));
    }
    let mut sums = vec![0.0; t_max / 2];
    for z in samples.chunks_exact(k) {
        let p: f64 = z.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() / norm;
        let p2 = p * p;
        let mut acc = 1.0;
        for s in sums.iter_mut() {
            acc *= p2;
            *s += acc;
        }
    }
    let profile: Vec<(usize, f64)> = sums
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let t = 2 * (j + 1);
            (t, (s / m as f64).powf(1.0 / t as f64) / (t as f64).sqrt())
        })
        .collect();
    let max_ratio = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(MomentProbe {
        profile,
        max_ratio,
        cap,
        flagged: max_ratio > cap,
    })
}

/// `xi = r * direction` on a radial design.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub k: usize,
    pub directions: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
}

impl RadialGrid {
    /// `directions` uniform random unit vectors (just `+1` when `k = 1`) and
    /// `radii` equally spaced points in `(0, r_max]`.
    pub fn new(k: usize, directions: usize, radii: usize, r_max: f64, seed: u64) -> Result<Self> {
        if k == 0 || directions == 0 || radii == 0 || r_max <= 0.0 {
            return Err(invalid("grid", "need k, directions, radii >= 1 and r_max > 0"));
        }
        let dirs = if k == 1 {
            vec![vec![1.0]]
        } else {
            let mut rng = sample_rng(seed, streams::AUX, 0);
            (0..directions)
                .map(|_| {
                    let v: Vec<f64> = (0..k).map(|_| normal(&mut rng)).collect();
                    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / s).collect()
                })
                .collect()
        };
        let radii = (1..=radii).map(|j| r_max * j as f64 / radii as f64).collect();
        Ok(RadialGrid {
            k,
            directions: dirs,
            radii,
        })
    }

    /// Direction-major list of frequencies.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.directions.len() * self.radii.len());
        for d in &self.directions {
            for &r in &self.radii {
                out.push(d.iter().map(|x| r * x).collect());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfPoint {
    pub xi: Vec<f64>,
    pub value: Complex64,
    /// Standard error of the complex mean, `sqrt((Var cos + Var sin) / m)`.
    pub stderr: f64,
}

impl CfPoint {
    pub fn radius(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// `m^{-1} sum_s exp(i <xi, z_s>)` for every `xi`.
pub fn empirical_cf(samples: &[f64], k: usize, xis: &[Vec<f64>]) -> Result<Vec<CfPoint>> {
    if k == 0 || samples.is_empty() || samples.len() % k != 0 {
        return Err(invalid("samples", "need a non-empty flat sample set"));
    }
    if xis.iter().any(|x| x.len() != k) {
        return Err(invalid("xi", "frequency dimension differs from samples"));
    }
    let m = (samples.len() / k) as f64;
    Ok(par::map_indices(xis.len(), |j| {
        let xi = &xis[j];
        let (mut c, mut s, mut c2, mut s2) = (0.0, 0.0, 0.0, 0.0);
        for z in samples.chunks_exact(k) {
            let phase: f64 = z.iter().zip(xi).map(|(a, b)| a * b).sum();
            let (sn, cs) = phase.sin_cos();
            c += cs;
            s += sn;
            c2 += cs * cs;
            s2 += sn * sn;
        }
        let (mc, ms) = (c / m, s / m);
        let var = (c2 / m - mc * mc) + (s2 / m - ms * ms);
        CfPoint {
            xi: xi.clone(),
            value: Complex64::new(mc, ms),
            stderr: (var.max(0.0) / m).sqrt(),
        }
    }))
}

pub fn cf_csv(points: &[CfPoint]) -> String {
    let k = points.first().map_or(0, |p| p.xi.len());
    let mut out = String::new();
    for c in 0..k {
        let _ = write!(out, "xi_{},", c + 1);
    }
    out.push_str("re,im,stderr\n");
    for p in points {
        for x in &p.xi {
            let _ = write!(out, "{x:e},");
        }
        let _ = writeln!(out, "{:e},{:e},{:e}", p.value.re, p.value.im, p.stderr);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyMatch {
    pub radius: f64,
    pub sup: f64,
    /// Combined standard error at the maximizing frequency.
    pub stderr: f64,
    pub argmax: Vec<f64>,
    pub points: usize,
}

/// `sup_{|xi| <= R} |cf_planted(xi) - cf_null(xi)|` over a shared grid.
pub fn frequency_match_diag(null: &[CfPoint], planted: &[CfPoint], radius: f64) -> Result<FrequencyMatch> {
    if null.len() != planted.len() || null.iter().zip(planted).any(|(a, b)| a.xi != b.xi) {
        return Err(invalid("grid", "characteristic functions use different frequency grids"));
    }
    let mut best = FrequencyMatch {
        radius,
        sup: 0.0,
        stderr: 0.0,
        argmax: Vec::new(),
        points: 0,
    };
    for (a, b) in null.iter().zip(planted) {
        if a.radius() > radius + 1e-12 {
            continue;
        }
        best.points += 1;
        let d = (a.value - b.value).norm();
        if d >= best.sup {
            best.sup = d;
            best.stderr = a.stderr.hypot(b.stderr);
            best.argmax = a.xi.clone();
        }
    }
    if best.points == 0 {
        return Err(invalid("radius", "no grid point inside the ball"));
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    /// `(R, max over directions of |cf|, stderr)`.
    pub curve: Vec<(f64, f64, f64)>,
    /// Radii above the noise floor that entered the fit.
    pub used: usize,
}

impl DecayFit {
    pub fn csv(&self) -> String {
        let mut out = String::from("radius,envelope,stderr\n");
        for (r, e, s) in &self.curve {
            let _ = writeln!(out, "{r:e},{e:e},{s:e}");
        }
        out
    }
}

/// Fits `|cf| ~ a exp(-b eps R^2)` to the per-radius envelope over the
/// radii where it stays above `floor_sigmas` standard errors.
pub fn fourier_decay_diag(points: &[CfPoint], eps: f64, floor_sigmas: f64) -> Result<DecayFit> {
    if eps <= 0.0 {
        return Err(invalid("eps", "need eps > 0"));
    }
    let mut by_r: Vec<(f64, f64, f64)> = Vec::new();
    for p in points {
        let r = p.radius();
        let v = p.value.norm();
        match by_r.iter_mut().find(|e| (e.0 - r).abs() < 1e-9 * r.max(1.0)) {
            Some(e) => {
                if v > e.1 {
                    e.1 = v;
                    e.2 = p.stderr;
                }
            }
            None => by_r.push((r, v, p.stderr)),
        }
    }
    by_r.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (xs, ys): (Vec<f64>, Vec<f64>) = by_r
        .iter()
        .filter(|(_, v, s)| *v > floor_sigmas * s && *v > 0.0)
        .map(|(r, v, _)| (r * r, v.ln()))
        .unzip();
    let (a, b) = match crate::stats::linear_fit(&xs, &ys) {
        Some((icpt, slope)) => (icpt.exp(), -slope / eps),
        None => (f64::NAN, f64::NAN),
    };
    Ok(DecayFit {
        a,
        b,
        eps,
        used: xs.len(),
        curve: by_r,
    })
}

/// Draws a Gaussian vector and checks regularity; the fraction of regular
/// points among `trials` independent draws.
pub fn regular_fraction(n: usize, ell: usize, trials: usize, seed: u64) -> Result<f64> {
    let hits = par::map_indices(trials, |t| -> Result<bool> {
        let mut rng = sample_rng(seed, streams::NULL, t as u64);
        let y: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        Ok(regularity_check(&y, ell)?.is_regular)
    });
    let mut count = 0usize;
    for h in hits {
        count += h? as usize;
    }
    Ok(count as f64 / trials as f64)
}

/// A random coefficient vector of degree `<= ell`, for spot checks of the
/// eigenvalue test.
pub fn random_coefficients<R: Rng + ?Sized>(rng: &mut R, ell: usize) -> Vec<f64> {
    (0..=ell).map(|_| normal(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{NullSpec, PlantedKind, PlantedSpec};
    use crate::stats::{ks_standard_normal, Moments};

    #[test]
    fn fk_of_zero_vector() {
        let f = eval_fk(&[0.0; 50], 2).unwrap();
        assert_eq!(f.values[0], 0.0);
        assert!((f.values[1] + (25.0f64).sqrt()).abs() < 1e-12);
        assert!(eval_fk(&[1.0], 0).is_err());
    }

    #[test]
    fn fk_null_is_orthonormal() {
        let spec = Spec::Null(NullSpec::GaussVector { n: 30 });
        let k = 4;
        let z = fk_samples(&spec, FkOptions { k, eps: 0.0, regular: None }, 20_000, 1).unwrap();
        for a in 0..k {
            let mut m = Moments::new();
            let mut sq = Moments::new();
            for row in z.chunks_exact(k) {
                m.push(row[a]);
                sq.push(row[a] * row[a]);
            }
            assert!(m.mean.abs() < 3.0 * m.stderr(), "mean of F_{}", a + 1);
            assert!((sq.mean - 1.0).abs() < 3.0 * sq.stderr(), "variance of F_{}", a + 1);
        }
        let mut c = Moments::new();
        for row in z.chunks_exact(k) {
            c.push(row[0] * row[2]);
        }
        assert!(c.mean.abs() < 3.0 * c.stderr());
    }

    #[test]
    fn f1_is_standard_normal() {
        // 99% level over repeated trials
        let spec = Spec::Null(NullSpec::GaussVector { n: 7 });
        let over = (0..20)
            .filter(|&seed| {
                let z = fk_samples(&spec, FkOptions { k: 1, eps: 0.0, regular: None }, 5000, seed).unwrap();
                ks_standard_normal(&z) > 1.63 / (5000f64).sqrt()
            })
            .count();
        assert!(over <= 2, "{over} of 20 trials rejected");
    }

    #[test]
    fn regularity_examples() {
        let r = regularity_check(&[0.0; 100], 2).unwrap();
        assert!(r.min_eig.abs() < 1e-12);
        assert!(!r.is_regular);
        let mut y: Vec<f64> = {
            let mut rng = sample_rng(5, streams::NULL, 0);
            (0..2000).map(|_| normal(&mut rng)).collect()
        };
        assert!(regularity_check(&y, 4).unwrap().is_regular);
        for v in y.iter_mut().take(1000) {
            *v = 10.0;
        }
        let r = regularity_check(&y, 4).unwrap();
        assert!(!r.is_regular && r.max_eig > 1.5);
        assert!(regularity_check(&y, 17).is_err());
    }

    #[test]
    fn eigen_test_matches_quadratic_forms() {
        let mut rng = sample_rng(11, streams::AUX, 0);
        let y: Vec<f64> = (0..300).map(|_| 1.2 * normal(&mut rng)).collect();
        let r = regularity_check(&y, 3).unwrap();
        let mut h = vec![0.0; 4];
        for _ in 0..200 {
            let c = random_coefficients(&mut rng, 3);
            let cc: f64 = c.iter().map(|v| v * v).sum();
            let q: f64 = y
                .iter()
                .map(|&yj| {
                    hermite_all(yj, &mut h);
                    let p: f64 = c.iter().zip(&h).map(|(a, b)| a * b).sum();
                    p * p
                })
                .sum::<f64>()
                / y.len() as f64;
            let ratio = q / cc;
            assert!(ratio >= r.min_eig - 1e-9 && ratio <= r.max_eig + 1e-9);
        }
    }

    #[test]
    fn moment_probe_first_component() {
        let spec = Spec::Null(NullSpec::GaussVector { n: 5 });
        let z = fk_samples(&spec, FkOptions { k: 2, eps: 0.0, regular: None }, 8100, 2).unwrap();
        let p = moment_probe(&z, 2, &[1.0, 0.0], 4, 1.2).unwrap();
        assert!(!p.flagged, "{:?}", p.profile);
        assert!(matches!(
            moment_probe(&z, 2, &[1.0, 0.0], 6, 1.2),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn empirical_cf_of_gaussian() {
        let mut rng = sample_rng(4, streams::NULL, 0);
        let z: Vec<f64> = (0..20_000).map(|_| normal(&mut rng)).collect();
        let xis: Vec<Vec<f64>> = [0.0, 0.5, 1.0, 2.0].iter().map(|&t| vec![t]).collect();
        let cf = empirical_cf(&z, 1, &xis).unwrap();
        assert_eq!(cf[0].value, Complex64::new(1.0, 0.0));
        for p in &cf[1..] {
            let t = p.xi[0];
            assert!((p.value - Complex64::new((-t * t / 2.0).exp(), 0.0)).norm() < 3.0 * p.stderr + 1e-3);
            assert!(p.stderr <= 1.0 / (20_000f64).sqrt());
        }
        let csv = cf_csv(&cf);
        assert!(csv.starts_with("xi_1,re,im,stderr\n"));
    }

    #[test]
    fn frequency_match_identical_and_mismatch() {
        let grid = RadialGrid::new(2, 4, 8, 2.0, 1).unwrap();
        let spec = Spec::Null(NullSpec::GaussVector { n: 10 });
        let z = fk_samples(&spec, FkOptions { k: 2, eps: 0.0, regular: None }, 2000, 1).unwrap();
        let cf = empirical_cf(&z, 2, &grid.points()).unwrap();
        let fm = frequency_match_diag(&cf, &cf, 2.0).unwrap();
        assert_eq!(fm.sup, 0.0);
        assert_eq!(fm.points, 32);
        assert!(frequency_match_diag(&cf, &cf[1..], 2.0).is_err());
    }

    #[test]
    fn null_decay_rate() {
        let grid = RadialGrid::new(1, 1, 24, 3.0, 0).unwrap();
        let spec = Spec::Null(NullSpec::GaussVector { n: 9 });
        let z = fk_samples(&spec, FkOptions { k: 1, eps: 0.0, regular: None }, 50_000, 8).unwrap();
        let cf = empirical_cf(&z, 1, &grid.points()).unwrap();
        let fit = fourier_decay_diag(&cf, 0.5, 10.0).unwrap();
        assert!((fit.b * fit.eps - 0.5).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn conditioned_sampler_rejects_until_regular() {
        let spec = Spec::Planted(
            PlantedSpec::new(PlantedKind::QuadratureProduct { m: 5 }, NullSpec::GaussVector { n: 400 }).unwrap(),
        );
        let z = fk_samples(&spec, FkOptions { k: 2, eps: 0.5, regular: Some(2) }, 50, 1).unwrap();
        assert_eq!(z.len(), 100);
        // the two-point law never passes the degree-2 test
        let spec = Spec::Planted(
            PlantedSpec::new(PlantedKind::QuadratureProduct { m: 2 }, NullSpec::GaussVector { n: 50 }).unwrap(),
        );
        assert!(fk_samples(&spec, FkOptions { k: 1, eps: 0.0, regular: Some(2) }, 2, 1).is_err());
    }
}
