use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::orthopoly::WeightLaw;
use crate::quadrature::GaussHermite;

/// What a single draw is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// `{+1, -1}^n`, stored as `i8`.
    Strings,
    /// `R^n`.
    Vectors,
    /// Symmetric `n x n` matrices.
    Matrices,
}

impl Domain {
    pub fn tag(self) -> u8 {
        match self {
            Domain::Strings => 0,
            Domain::Vectors => 1,
            Domain::Matrices => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Domain::Strings),
            1 => Some(Domain::Vectors),
            2 => Some(Domain::Matrices),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NullSpec {
    /// i.i.d. coordinates, `+1` with probability `gamma`.
    BooleanProduct { n: usize, gamma: f64 },
    GaussVector { n: usize },
    /// Symmetric with i.i.d. N(0, 1) entries on and above the diagonal.
    GaussWigner { n: usize },
}

impl NullSpec {
    pub fn n(&self) -> usize {
        match *self {
            NullSpec::BooleanProduct { n, .. } | NullSpec::GaussVector { n } | NullSpec::GaussWigner { n } => n,
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            NullSpec::BooleanProduct { .. } => Domain::Strings,
            NullSpec::GaussVector { .. } => Domain::Vectors,
            NullSpec::GaussWigner { .. } => Domain::Matrices,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(invalid("n", "need n >= 1"));
        }
        if let NullSpec::BooleanProduct { gamma, .. } = *self {
            if !(gamma > 0.0 && gamma < 1.0) {
                return Err(invalid("gamma", format!("{gamma} is outside (0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpikeSigns {
    Rademacher,
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlantedKind {
    /// Coordinates i.i.d. Ber(gamma + eta).
    BiasedProduct { eta: f64 },
    /// The null conditioned on the weight lying in `weights`.
    WeightConditioned { weights: Vec<usize> },
    /// `g + (lambda / sqrt(n)) 1`.
    SpikedMean { lambda: f64 },
    /// Product of `m`-point Gauss-Hermite marginals.
    QuadratureProduct { m: usize },
    /// `lambda u u^T + W` with `u` uniform on `sparsity`-sparse vectors with
    /// entries `+-1/sqrt(sparsity)`.
    WignerSpike {
        lambda: f64,
        sparsity: usize,
        signs: SpikeSigns,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub kind: PlantedKind,
    pub base: NullSpec,
}

impl PlantedSpec {
    pub fn new(kind: PlantedKind, base: NullSpec) -> Result<Self> {
        let spec = PlantedSpec { kind, base };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let n = self.base.n();
        match (&self.kind, self.base) {
            (PlantedKind::BiasedProduct { eta }, NullSpec::BooleanProduct { gamma, .. }) => {
                let p = gamma + eta;
                if !(p > 0.0 && p < 1.0) {
                    return Err(invalid("eta", format!("gamma + eta = {p} must lie in (0, 1)")));
                }
            }
            (PlantedKind::WeightConditioned { weights }, NullSpec::BooleanProduct { .. }) => {
                if weights.is_empty() || weights.iter().any(|&w| w > n) {
                    return Err(invalid("weights", format!("need a non-empty subset of 0..={n}")));
                }
            }
            (PlantedKind::SpikedMean { lambda }, NullSpec::GaussVector { .. }) => {
                if !lambda.is_finite() {
                    return Err(invalid("lambda", "must be finite"));
                }
            }
            (PlantedKind::QuadratureProduct { m }, NullSpec::GaussVector { .. }) => {
                if *m < 2 {
                    return Err(invalid("m", "need at least two nodes"));
                }
            }
            (
                PlantedKind::WignerSpike {
                    lambda, sparsity, ..
                },
                NullSpec::GaussWigner { .. },
            ) => {
                if !lambda.is_finite() {
                    return Err(invalid("lambda", "must be finite"));
                }
                if *sparsity == 0 || *sparsity > n {
                    return Err(invalid("sparsity", format!("need 1 <= sparsity <= {n}")));
                }
            }
            (kind, base) => {
                return Err(invalid(
                    "kind",
                    format!("{kind:?} cannot be planted on {base:?}"),
                ))
            }
        }
        Ok(())
    }

    /// Exact weight law for the Boolean kinds.
    pub fn weight_law(&self) -> Option<Result<WeightLaw>> {
        let NullSpec::BooleanProduct { n, gamma } = self.base else {
            return None;
        };
        match &self.kind {
            PlantedKind::BiasedProduct { eta } => Some(WeightLaw::biased_product(n, gamma, *eta)),
            PlantedKind::WeightConditioned { weights } => {
                Some(WeightLaw::weight_conditioned(n, gamma, weights))
            }
            _ => None,
        }
    }
}

/// Anything that can be sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Spec {
    Null(NullSpec),
    Planted(PlantedSpec),
}

impl Spec {
    pub fn n(&self) -> usize {
        self.base().n()
    }

    pub fn base(&self) -> NullSpec {
        match self {
            Spec::Null(s) => *s,
            Spec::Planted(p) => p.base,
        }
    }

    pub fn domain(&self) -> Domain {
        self.base().domain()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Spec::Null(s) => s.validate(),
            Spec::Planted(p) => p.validate(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Spec::Null(s) => format!("{s:?}"),
            Spec::Planted(p) => format!("{:?} on {:?}", p.kind, p.base),
        }
    }
}

impl From<NullSpec> for Spec {
    fn from(s: NullSpec) -> Self {
        Spec::Null(s)
    }
}

impl From<PlantedSpec> for Spec {
    fn from(p: PlantedSpec) -> Self {
        Spec::Planted(p)
    }
}

/// Product of `m`-point Gauss-Hermite marginals on `R^n`. Matches the
/// Gaussian moments through degree `2m - 1` coordinatewise.
pub fn quadrature_product_spec(m: usize, n: usize) -> Result<PlantedSpec> {
    PlantedSpec::new(PlantedKind::QuadratureProduct { m }, NullSpec::GaussVector { n })
}

/// Cumulative weights of the Gauss-Hermite marginal, for inverse-CDF draws.
pub(crate) fn quadrature_marginal(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let gh = GaussHermite::new(m)?;
    let mut cdf = Vec::with_capacity(m);
    let mut acc = 0.0;
    for w in &gh.weights {
        acc += w;
        cdf.push(acc);
    }
    Ok((gh.nodes, cdf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_domains() {
        let r = PlantedSpec::new(PlantedKind::SpikedMean { lambda: 1.0 }, NullSpec::GaussWigner { n: 4 });
        assert!(r.is_err());
        let r = PlantedSpec::new(
            PlantedKind::BiasedProduct { eta: 0.6 },
            NullSpec::BooleanProduct { n: 4, gamma: 0.5 },
        );
        assert!(r.is_err());
        assert!(quadrature_product_spec(1, 5).is_err());
    }

    #[test]
    fn quadrature_marginals() {
        let gh = GaussHermite::new(2).unwrap();
        assert!((gh.nodes[0] + 1.0).abs() < 1e-14 && (gh.nodes[1] - 1.0).abs() < 1e-14);
        assert!((gh.weights[0] - 0.5).abs() < 1e-14);
        for m in 2..=8 {
            let gh = GaussHermite::new(m).unwrap();
            assert!(gh.expect(|x| x).abs() < 1e-12);
            assert!((gh.expect(|x| x * x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_tags_round_trip() {
        for d in [Domain::Strings, Domain::Vectors, Domain::Matrices] {
            assert_eq!(Domain::from_tag(d.tag()), Some(d));
        }
        assert_eq!(Domain::from_tag(9), None);
    }
}
