use super::split::split_estimate;
use super::{cumulative, AdvantageEstimate, BasisCoeffs, CoeffEntry, Method};
use crate::error::{invalid, Error, Result};
use crate::models::{Domain, PlantedKind, Sampler, Spec, SymMatrix};
use crate::subgraph::{connected_shapes, EntryCache, Shape};

/// Default per-shape cost budget (rough operations per evaluation).
pub const DEFAULT_BUDGET: f64 = 1e8;
/// Largest family accepted.
pub const MAX_FAMILY: usize = 1000;

/// An orthonormal family of symmetrized multigraph Hermite polynomials.
#[derive(Debug, Clone)]
pub struct WignerFamily {
    n: usize,
    shapes: Vec<Shape>,
}

impl WignerFamily {
    /// Every connected shape of degree `<= max_degree`; fails if one of
    /// them costs more than `budget` at size `n`.
    pub fn connected(n: usize, max_degree: usize, budget: f64) -> Result<Self> {
        let shapes = Self::fitting(n, max_degree)?;
        if let Some(s) = shapes.iter().find(|s| s.cost(n) > budget) {
            return Err(Error::BudgetExceeded(format!(
                "shape {} costs {:.1e} > {budget:.1e} at n = {n}",
                s.describe(),
                s.cost(n)
            )));
        }
        Self::from_shapes(n, shapes)
    }

    /// Connected shapes of degree `<= max_degree` whose cost fits `budget`.
    pub fn within_budget(n: usize, max_degree: usize, budget: f64) -> Result<Self> {
        let shapes = Self::fitting(n, max_degree)?.into_iter().filter(|s| s.cost(n) <= budget).collect();
        Self::from_shapes(n, shapes)
    }

    pub fn from_shapes(n: usize, shapes: Vec<Shape>) -> Result<Self> {
        if shapes.is_empty() {
            return Err(invalid("family", "no shapes selected"));
        }
        if shapes.len() > MAX_FAMILY {
            return Err(Error::BudgetExceeded(format!("{} shapes > {MAX_FAMILY}", shapes.len())));
        }
        if let Some(s) = shapes.iter().find(|s| s.v() > n) {
            return Err(Error::InvalidPattern(format!("{} does not fit n = {n}", s.describe())));
        }
        Ok(WignerFamily { n, shapes })
    }

    fn fitting(n: usize, max_degree: usize) -> Result<Vec<Shape>> {
        if max_degree == 0 {
            return Err(invalid("degree", "need D >= 1"));
        }
        Ok(connected_shapes(max_degree).into_iter().filter(|s| s.v() <= n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.shapes.iter().map(Shape::degree).max().unwrap_or(0)
    }

    pub fn eval_into(&self, m: &SymMatrix, out: &mut Vec<f64>) {
        let mut cache = EntryCache::new(m);
        for s in &self.shapes {
            out.push(s.psi(&mut cache).expect("family fits n"));
        }
    }
}

/// Monte Carlo `sum_alpha (E_P psi_alpha)^2` over `family`, with planted
/// matrices produced by `draw(index, out)`.
pub fn chi2_wigner_with<F>(
    family: &WignerFamily,
    samples: usize,
    seed: u64,
    symmetric: bool,
    draw: F,
) -> Result<(AdvantageEstimate, BasisCoeffs)>
where
    F: Fn(u64, &mut SymMatrix) + Sync + Send,
{
    if samples < 4 {
        return Err(Error::InsufficientSamples { needed: 4, have: samples });
    }
    let n = family.n();
    let degree = family.max_degree();
    let res = split_estimate(family.len(), samples, seed, |i, out| {
        let mut m = SymMatrix::zeros(n);
        draw(i as u64, &mut m);
        family.eval_into(&m, out);
    });
    let entries: Vec<CoeffEntry> = family
        .shapes()
        .iter()
        .zip(&res.means)
        .map(|(s, m)| CoeffEntry {
            index: s.describe(),
            degree: s.degree(),
            estimate: m.value,
            stderr: m.stderr,
        })
        .collect();
    let by_degree = cumulative(degree, family.shapes().iter().zip(&res.squares).map(|(s, v)| (s.degree(), *v)));
    Ok((
        AdvantageEstimate {
            chi2_d: by_degree[degree],
            stderr: res.stderr,
            degree,
            method: Method::MonteCarlo,
            samples,
            seed,
            symmetric,
            by_degree,
        },
        BasisCoeffs { degree, entries },
    ))
}

/// [`chi2_wigner_with`] for a matrix spec. Both spike sign conventions are
/// invariant under vertex relabeling.
pub fn chi2_wigner(spec: &Spec, family: &WignerFamily, samples: usize, seed: u64) -> Result<(AdvantageEstimate, BasisCoeffs)> {
    if spec.domain() != Domain::Matrices {
        return Err(invalid("spec", "Wigner advantage needs a matrix model"));
    }
    if spec.n() != family.n() {
        return Err(invalid("family", "family size differs from the model"));
    }
    let symmetric = match spec {
        Spec::Planted(p) => matches!(p.kind, PlantedKind::WignerSpike { .. }),
        Spec::Null(_) => true,
    };
    let sampler = Sampler::new(spec)?;
    chi2_wigner_with(family, samples, seed, symmetric, |i, out| sampler.draw_matrix(seed, i, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{NullSpec, PlantedSpec, SpikeSigns};

    fn spike(n: usize, lambda: f64, sparsity: usize, signs: SpikeSigns) -> Spec {
        Spec::Planted(
            PlantedSpec::new(
                PlantedKind::WignerSpike { lambda, sparsity, signs },
                NullSpec::GaussWigner { n },
            )
            .unwrap(),
        )
    }

    #[test]
    fn null_is_zero() {
        let spec = Spec::Null(NullSpec::GaussWigner { n: 8 });
        let fam = WignerFamily::connected(8, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(fam.len(), 8);
        let (est, coeffs) = chi2_wigner(&spec, &fam, 4000, 5).unwrap();
        assert!(est.chi2_d.abs() < 3.0 * est.stderr, "{} +- {}", est.chi2_d, est.stderr);
        assert_eq!(coeffs.entries.len(), 8);
    }

    #[test]
    fn edge_coefficient_matches_enumeration() {
        // E psi_edge = E[sum_{i<j} spike_ij] / sqrt(C(n,2)); average over
        // all supports of size l in {0..4}
        let (n, l, lambda) = (4usize, 2usize, 2.0);
        let mut total = 0.0;
        let mut count = 0.0;
        for mask in 0u32..16 {
            if mask.count_ones() as usize != l {
                continue;
            }
            for i in 0..n {
                for j in i + 1..n {
                    if mask >> i & mask >> j & 1 == 1 {
                        total += lambda / l as f64;
                    }
                }
            }
            count += 1.0;
        }
        let exact = total / count / 6f64.sqrt();
        let edge = Shape::new(2, &[(0, 1, 1)]).unwrap();
        let fam = WignerFamily::from_shapes(n, vec![edge]).unwrap();
        let (est, coeffs) = chi2_wigner(&spike(n, lambda, l, SpikeSigns::Positive), &fam, 40_000, 9).unwrap();
        let e = &coeffs.entries[0];
        assert!((e.estimate - exact).abs() < 3.0 * e.stderr, "{} vs {exact}", e.estimate);
        assert!((est.chi2_d - exact * exact).abs() < 3.0 * est.stderr);
    }

    #[test]
    fn budget_rejects_and_filters() {
        assert!(matches!(
            WignerFamily::connected(400, 4, DEFAULT_BUDGET),
            Err(Error::BudgetExceeded(_))
        ));
        let fam = WignerFamily::within_budget(400, 4, DEFAULT_BUDGET).unwrap();
        assert!(fam.shapes().iter().all(|s| s.v() <= 3));
        assert!(fam.len() > 5);
    }

    #[test]
    fn by_degree_is_cumulative() {
        let fam = WignerFamily::connected(6, 3, DEFAULT_BUDGET).unwrap();
        let (est, coeffs) = chi2_wigner(&spike(6, 4.0, 3, SpikeSigns::Rademacher), &fam, 500, 1).unwrap();
        let mut by = vec![0.0; 4];
        assert_eq!(est.by_degree.len(), 4);
        assert!((est.by_degree[3] - est.chi2_d).abs() < 1e-12);
        for e in &coeffs.entries {
            by[e.degree] += 1.0;
        }
        assert_eq!(by, vec![0.0, 1.0, 2.0, 5.0]);
    }
}
