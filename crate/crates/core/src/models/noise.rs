use rand::Rng;

use super::matrix::SymMatrix;
use crate::rng::{normal, sample_rng, streams};

/// Boolean noise `T_eps`: each coordinate is kept with probability
/// `1 - eps` and otherwise replaced by a fresh symbol, `+1` with
/// probability `gamma`.
pub fn boolean_noise_in_place<R: Rng + ?Sized>(rng: &mut R, x: &mut [i8], eps: f64, gamma: f64) {
    if eps <= 0.0 {
        return;
    }
    for v in x.iter_mut() {
        if rng.random::<f64>() < eps {
            *v = if rng.random::<f64>() < gamma { 1 } else { -1 };
        }
    }
}

pub fn apply_boolean_noise(x: &[i8], eps: f64, gamma: f64, seed: u64) -> Vec<i8> {
    let mut out = x.to_vec();
    let mut rng = sample_rng(seed, streams::NOISE, 0);
    boolean_noise_in_place(&mut rng, &mut out, eps, gamma);
    out
}

/// Ornstein-Uhlenbeck noise `x -> sqrt(1 - eps) x + sqrt(eps) g`.
pub fn ou_noise_in_place<R: Rng + ?Sized>(rng: &mut R, x: &mut [f64], eps: f64) {
    if eps <= 0.0 {
        return;
    }
    let a = (1.0 - eps).sqrt();
    let b = eps.sqrt();
    for v in x.iter_mut() {
        *v = a * *v + b * normal(rng);
    }
}

pub fn apply_ou_noise(x: &[f64], eps: f64, seed: u64) -> Vec<f64> {
    let mut out = x.to_vec();
    let mut rng = sample_rng(seed, streams::NOISE, 0);
    ou_noise_in_place(&mut rng, &mut out, eps);
    out
}

/// Matrix version; the fresh Gaussian is a Wigner matrix with N(0, 1)
/// diagonal, drawn in upper-triangle row-major order.
pub fn ou_noise_matrix_in_place<R: Rng + ?Sized>(rng: &mut R, m: &mut SymMatrix, eps: f64) {
    if eps <= 0.0 {
        return;
    }
    let a = (1.0 - eps).sqrt();
    let b = eps.sqrt();
    let n = m.n();
    for i in 0..n {
        for j in i..n {
            let v = a * m.get(i, j) + b * normal(rng);
            m.set(i, j, v);
        }
    }
}

pub fn apply_ou_noise_matrix(m: &SymMatrix, eps: f64, seed: u64) -> SymMatrix {
    let mut out = m.clone();
    let mut rng = sample_rng(seed, streams::NOISE, 0);
    ou_noise_matrix_in_place(&mut rng, &mut out, eps);
    out
}
