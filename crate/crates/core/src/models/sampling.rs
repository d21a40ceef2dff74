use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::matrix::SymMatrix;
use super::spec::{quadrature_marginal, Domain, NullSpec, PlantedKind, Spec, SpikeSigns};
use crate::error::{invalid, Result};
use crate::par;
use crate::rng::{normal, sample_rng, streams};

/// Batch of i.i.d. draws, reproducible from `(spec, count, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub domain: Domain,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub label: String,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Payload {
    /// `count * n` symbols in `{+1, -1}`.
    Strings(Vec<i8>),
    /// `count * n` coordinates.
    Vectors(Vec<f64>),
    Matrices(Vec<SymMatrix>),
}

impl SampleBatch {
    pub fn string(&self, i: usize) -> Option<&[i8]> {
        match &self.payload {
            Payload::Strings(v) => v.get(i * self.n..(i + 1) * self.n),
            _ => None,
        }
    }

    pub fn vector(&self, i: usize) -> Option<&[f64]> {
        match &self.payload {
            Payload::Vectors(v) => v.get(i * self.n..(i + 1) * self.n),
            _ => None,
        }
    }

    pub fn matrix(&self, i: usize) -> Option<&SymMatrix> {
        match &self.payload {
            Payload::Matrices(v) => v.get(i),
            _ => None,
        }
    }
}

/// Draws `count` i.i.d. samples. Sample `i` depends only on
/// `(spec, seed, i)`, never on the thread count.
pub fn sample(spec: &Spec, count: usize, seed: u64) -> Result<SampleBatch> {
    if count == 0 {
        return Err(invalid("count", "need at least one sample"));
    }
    let sampler = Sampler::new(spec)?;
    let n = spec.n();
    let payload = match spec.domain() {
        Domain::Strings => {
            let rows = par::map_indices(count, |i| {
                let mut x = vec![0i8; n];
                sampler.draw_string(seed, i as u64, &mut x);
                x
            });
            Payload::Strings(rows.concat())
        }
        Domain::Vectors => {
            let rows = par::map_indices(count, |i| {
                let mut x = vec![0.0; n];
                sampler.draw_vector(seed, i as u64, &mut x);
                x
            });
            Payload::Vectors(rows.concat())
        }
        Domain::Matrices => Payload::Matrices(par::map_indices(count, |i| {
            let mut m = SymMatrix::zeros(n);
            sampler.draw_matrix(seed, i as u64, &mut m);
            m
        })),
    };
    Ok(SampleBatch {
        domain: spec.domain(),
        n,
        count,
        seed,
        label: spec.label(),
        payload,
    })
}

/// A spec with its lookup tables precomputed, for streaming draws.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: Spec,
    stream: u64,
    table: Option<(Vec<f64>, Vec<f64>)>,
}

impl Sampler {
    pub fn new(spec: &Spec) -> Result<Self> {
        spec.validate()?;
        let (stream, table) = match spec {
            Spec::Null(_) => (streams::NULL, None),
            Spec::Planted(p) => {
                let table = match &p.kind {
                    PlantedKind::QuadratureProduct { m } => Some(quadrature_marginal(*m)?),
                    PlantedKind::WeightConditioned { .. } => {
                        let law = p.weight_law().expect("boolean kind")?;
                        let mut acc = 0.0;
                        let cdf = law
                            .pmf()
                            .iter()
                            .map(|q| {
                                acc += q;
                                acc
                            })
                            .collect();
                        Some(((0..=law.n()).map(|w| w as f64).collect(), cdf))
                    }
                    _ => None,
                };
                (streams::PLANTED, table)
            }
        };
        Ok(Sampler {
            spec: spec.clone(),
            stream,
            table,
        })
    }

    pub fn spec(&self) -> &Spec {
        &self.spec
    }

    pub fn rng(&self, seed: u64, index: u64) -> ChaCha8Rng {
        sample_rng(seed, self.stream, index)
    }

    pub fn draw_string(&self, seed: u64, index: u64, out: &mut [i8]) {
        let mut rng = self.rng(seed, index);
        let NullSpec::BooleanProduct { gamma, .. } = self.spec.base() else {
            panic!("draw_string on a non-Boolean spec");
        };
        match &self.spec {
            Spec::Null(_) => bernoulli_fill(&mut rng, gamma, out),
            Spec::Planted(p) => match p.kind {
                PlantedKind::BiasedProduct { eta } => bernoulli_fill(&mut rng, gamma + eta, out),
                PlantedKind::WeightConditioned { .. } => {
                    let (_, cdf) = self.table.as_ref().expect("table built");
                    let w = inverse_cdf(cdf, rng.random::<f64>());
                    let picked = random_subset(&mut rng, out.len(), w);
                    out.fill(-1);
                    for i in picked {
                        out[i] = 1;
                    }
                }
                _ => unreachable!("validated Boolean kind"),
            },
        }
    }

    pub fn draw_vector(&self, seed: u64, index: u64, out: &mut [f64]) {
        let mut rng = self.rng(seed, index);
        match &self.spec {
            Spec::Null(_) => {
                for v in out.iter_mut() {
                    *v = normal(&mut rng);
                }
            }
            Spec::Planted(p) => match p.kind {
                PlantedKind::SpikedMean { lambda } => {
                    let shift = lambda / (out.len() as f64).sqrt();
                    for v in out.iter_mut() {
                        *v = normal(&mut rng) + shift;
                    }
                }
                PlantedKind::QuadratureProduct { .. } => {
                    let (nodes, cdf) = self.table.as_ref().expect("table built");
                    for v in out.iter_mut() {
                        *v = nodes[inverse_cdf(cdf, rng.random::<f64>())];
                    }
                }
                _ => unreachable!("validated vector kind"),
            },
        }
    }

    /// Entries are drawn in upper-triangle row-major order.
    pub fn draw_matrix(&self, seed: u64, index: u64, out: &mut SymMatrix) {
        let mut rng = self.rng(seed, index);
        let n = out.n();
        for i in 0..n {
            for j in i..n {
                out.set(i, j, normal(&mut rng));
            }
        }
        if let Spec::Planted(p) = &self.spec {
            if let PlantedKind::WignerSpike {
                lambda,
                sparsity,
                signs,
            } = p.kind
            {
                let support = random_subset(&mut rng, n, sparsity);
                let u: Vec<f64> = support
                    .iter()
                    .map(|_| match signs {
                        SpikeSigns::Positive => 1.0,
                        SpikeSigns::Rademacher => {
                            if rng.random::<bool>() {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                    })
                    .collect();
                let scale = lambda / sparsity as f64;
                for (a, &i) in support.iter().enumerate() {
                    for (b, &j) in support.iter().enumerate() {
                        if i <= j {
                            out.set(i, j, out.get(i, j) + scale * u[a] * u[b]);
                        }
                    }
                }
            }
        }
    }
}

fn bernoulli_fill(rng: &mut ChaCha8Rng, p: f64, out: &mut [i8]) {
    for v in out.iter_mut() {
        *v = if rng.random::<f64>() < p { 1 } else { -1 };
    }
}

fn inverse_cdf(cdf: &[f64], u: f64) -> usize {
    let mut i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
    // round-off can leave u above the last cumulative weight; step back to
    // a cell with positive mass
    while i > 0 && cdf[i] == cdf[i - 1] {
        i -= 1;
    }
    i
}

/// `k` distinct indices from `0..n`, by partial Fisher-Yates.
pub(crate) fn random_subset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}
