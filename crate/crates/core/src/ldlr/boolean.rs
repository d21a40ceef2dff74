use super::{cumulative, AdvantageEstimate, BasisCoeffs, CoeffEntry, Method};
use crate::error::{Error, Result};
use crate::orthopoly::{KrawtchoukBasis, WeightLaw};

/// Exact `chi^2_D = sum_{l=1}^{D} (E_pi Kr_l)^2` for a symmetric Boolean law
/// given by its weight law.
pub fn chi2_sym_boolean(
    pi: &WeightLaw,
    basis: &KrawtchoukBasis,
    degree: usize,
) -> Result<(AdvantageEstimate, BasisCoeffs)> {
    if degree > pi.n() {
        return Err(Error::DegreeTooLarge { degree, max: pi.n() });
    }
    let a = basis.coefficients_of(pi, degree)?;
    let entries: Vec<CoeffEntry> = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(l, &v)| CoeffEntry {
            index: format!("Kr{l}"),
            degree: l,
            estimate: v,
            stderr: 0.0,
        })
        .collect();
    let by_degree = cumulative(degree, entries.iter().map(|e| (e.degree, e.estimate * e.estimate)));
    Ok((
        AdvantageEstimate {
            chi2_d: by_degree[degree],
            stderr: 0.0,
            degree,
            method: Method::Exact,
            samples: 0,
            seed: 0,
            symmetric: true,
            by_degree,
        },
        BasisCoeffs { degree, entries },
    ))
}
