//! Degree-D advantage `chi^2_D(P || N)` in the symmetric Boolean, symmetric
//! Gaussian-vector and Wigner-matrix settings.

mod boolean;
mod gaussian;
mod split;
mod wigner;

use std::fmt::Write as _;

use serde::Serialize;

pub use boolean::chi2_sym_boolean;
pub use gaussian::{chi2_sym_gaussian, chi2_sym_gaussian_with, partitions, SymmetricHermite, MAX_DEGREE};
pub use wigner::{chi2_wigner, chi2_wigner_with, WignerFamily, DEFAULT_BUDGET, MAX_FAMILY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdvantageEstimate {
    pub chi2_d: f64,
    pub stderr: f64,
    pub degree: usize,
    pub method: Method,
    pub samples: usize,
    pub seed: u64,
    /// False when the planted law is not known to be symmetric; the value
    /// is then only a lower bound on the unrestricted advantage.
    pub symmetric: bool,
    /// `by_degree[k]` sums the squared coefficients of degree `<= k`.
    pub by_degree: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoeffEntry {
    pub index: String,
    pub degree: usize,
    pub estimate: f64,
    pub stderr: f64,
}

/// Estimated `E_P[psi_alpha]` for every non-constant basis element.
#[derive(Debug, Clone, Serialize)]
pub struct BasisCoeffs {
    pub degree: usize,
    pub entries: Vec<CoeffEntry>,
}

impl BasisCoeffs {
    pub fn csv(&self) -> String {
        let mut out = String::from("index,degree,estimate,stderr\n");
        for e in &self.entries {
            let _ = writeln!(out, "\"{}\",{},{:e},{:e}", e.index, e.degree, e.estimate, e.stderr);
        }
        out
    }
}

fn cumulative(degree: usize, terms: impl Iterator<Item = (usize, f64)>) -> Vec<f64> {
    let mut by = vec![0.0; degree + 1];
    for (d, v) in terms {
        by[d] += v;
    }
    for k in 1..=degree {
        by[k] += by[k - 1];
    }
    by
}
