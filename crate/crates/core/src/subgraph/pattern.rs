use std::fmt;

use super::shape::{triangle_sum, EntryCache, Shape, MAX_VERTICES};
use crate::error::{Error, Result};
use crate::models::SymMatrix;

/// Motifs with dedicated closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motif {
    Edge,
    TwoPath,
    Triangle,
    FourCycle,
    Other,
}

/// A small connected simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphPattern {
    shape: Shape,
    motif: Motif,
}

impl GraphPattern {
    pub fn edge() -> Self {
        make_pattern(&[(0, 1)]).expect("edge")
    }

    pub fn two_path() -> Self {
        make_pattern(&[(0, 1), (1, 2)]).expect("2-path")
    }

    pub fn triangle() -> Self {
        make_pattern(&[(0, 1), (1, 2), (0, 2)]).expect("triangle")
    }

    pub fn four_cycle() -> Self {
        make_pattern(&[(0, 1), (1, 2), (2, 3), (0, 3)]).expect("4-cycle")
    }

    /// `edge`, `2path`, `triangle` or `4cycle`.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "edge" => Ok(Self::edge()),
            "2path" | "two_path" | "2-path" => Ok(Self::two_path()),
            "triangle" => Ok(Self::triangle()),
            "4cycle" | "four_cycle" | "4-cycle" => Ok(Self::four_cycle()),
            _ => Err(Error::InvalidPattern(format!("unknown pattern name `{name}`"))),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn motif(&self) -> Motif {
        self.motif
    }

    pub fn v(&self) -> usize {
        self.shape.v()
    }

    pub fn e(&self) -> usize {
        self.shape.edge_count()
    }

    pub fn aut(&self) -> u64 {
        self.shape.aut()
    }

    pub fn labelings(&self, n: usize) -> f64 {
        self.shape.labelings(n)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.shape.edges().iter().map(|e| (e.0, e.1)).collect()
    }

    pub fn hash64(&self) -> u64 {
        self.shape.hash64()
    }
}

impl fmt::Display for GraphPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.motif {
            Motif::Edge => write!(f, "edge"),
            Motif::TwoPath => write!(f, "2path"),
            Motif::Triangle => write!(f, "triangle"),
            Motif::FourCycle => write!(f, "4cycle"),
            Motif::Other => write!(f, "{}", self.shape.describe()),
        }
    }
}

/// Builds a pattern from an undirected edge list on vertices `0..v`.
pub fn make_pattern(edges: &[(usize, usize)]) -> Result<GraphPattern> {
    let v = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
    if v > MAX_VERTICES {
        return Err(Error::InvalidPattern(format!("{v} vertices exceeds {MAX_VERTICES}")));
    }
    let multi: Vec<_> = edges.iter().map(|&(a, b)| (a, b, 1)).collect();
    let shape = Shape::new(v, &multi)?;
    let key = shape.canonical_key();
    let motif = [
        (Motif::Edge, 2usize, vec![(0usize, 1usize, 1usize)]),
        (Motif::TwoPath, 3, vec![(0, 1, 1), (0, 2, 1)]),
        (Motif::Triangle, 3, vec![(0, 1, 1), (0, 2, 1), (1, 2, 1)]),
        (Motif::FourCycle, 4, vec![(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)]),
    ]
    .into_iter()
    .find(|(_, nv, k)| *nv == v && *k == key)
    .map_or(Motif::Other, |t| t.0);
    Ok(GraphPattern { shape, motif })
}

/// Parses `u v` pairs, one per line, 0-indexed; `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<GraphPattern> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Format(format!("line {}: `{s}` is not a vertex id", lineno + 1)))
        };
        if nums.len() != 2 {
            return Err(Error::Format(format!("line {}: expected `u v`", lineno + 1)));
        }
        edges.push((parse(nums[0])?, parse(nums[1])?));
    }
    if edges.is_empty() {
        return Err(Error::InvalidPattern("empty edge list".into()));
    }
    make_pattern(&edges)
}

/// Normalized signed count `chi_theta(M)`; the diagonal of `M` is ignored.
pub fn chi_theta(m: &SymMatrix, pattern: &GraphPattern) -> Result<f64> {
    Ok(chi_many(m, std::slice::from_ref(pattern))?[0])
}

/// `chi_theta(M)` for several patterns, sharing the off-diagonal copy and
/// `A^2` between them.
pub fn chi_many(m: &SymMatrix, patterns: &[GraphPattern]) -> Result<Vec<f64>> {
    let n = m.n();
    if let Some(p) = patterns.iter().find(|p| p.v() > n) {
        return Err(Error::InvalidPattern(format!("n = {n} is smaller than pattern {p}")));
    }
    let a = m.off_diagonal();
    let need_sq = patterns.iter().any(|p| p.motif == Motif::FourCycle);
    let sq = need_sq.then(|| a.matmul(&a));
    let rows: Vec<f64> = if patterns.iter().any(|p| p.motif == Motif::TwoPath) {
        (0..n).map(|i| a.row(i).iter().sum()).collect()
    } else {
        Vec::new()
    };
    let row_sq: Vec<f64> = if need_sq || patterns.iter().any(|p| p.motif == Motif::TwoPath) {
        (0..n).map(|i| a.row(i).iter().map(|x| x * x).sum()).collect()
    } else {
        Vec::new()
    };
    let mut cache: Option<EntryCache> = None;
    let mut out = Vec::with_capacity(patterns.len());
    for p in patterns {
        let distinct = match p.motif {
            Motif::Edge => (0..n).map(|i| a.row(i)[i + 1..].iter().sum::<f64>()).sum(),
            Motif::TwoPath => {
                let s: f64 = rows.iter().zip(&row_sq).map(|(r, q)| r * r - q).sum();
                s / 2.0
            }
            Motif::Triangle => match &sq {
                Some(sq) => a.as_slice().iter().zip(sq).map(|(x, y)| x * y).sum::<f64>() / 6.0,
                None => triangle_sum(&a),
            },
            Motif::FourCycle => {
                let sq = sq.as_ref().expect("built for 4-cycles");
                let tr4: f64 = sq.iter().map(|x| x * x).sum();
                let deg2: f64 = row_sq.iter().map(|x| x * x).sum();
                let quart: f64 = a.as_slice().iter().map(|x| x.powi(4)).sum();
                (tr4 - 2.0 * deg2 + quart) / 8.0
            }
            Motif::Other => {
                let c = cache.get_or_insert_with(|| EntryCache::new(m));
                p.shape.enumerate(c) / p.aut() as f64
            }
        };
        out.push(distinct / p.labelings(n).sqrt());
    }
    Ok(out)
}

/// The generic path for any pattern: ordered injections divided by `|Aut|`.
pub fn chi_theta_generic(m: &SymMatrix, pattern: &GraphPattern) -> Result<f64> {
    let mut cache = EntryCache::new(m);
    pattern.shape.psi_generic(&mut cache)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sample, NullSpec, Spec};

    fn random(n: usize, seed: u64) -> SymMatrix {
        sample(&Spec::Null(NullSpec::GaussWigner { n }), 1, seed)
            .unwrap()
            .matrix(0)
            .unwrap()
            .clone()
    }

    #[test]
    fn automorphisms_of_motifs() {
        assert_eq!(GraphPattern::edge().aut(), 2);
        assert_eq!(GraphPattern::triangle().aut(), 6);
        assert_eq!(GraphPattern::two_path().aut(), 2);
        assert_eq!(GraphPattern::four_cycle().aut(), 8);
        assert_eq!(make_pattern(&[(2, 1), (1, 0)]).unwrap().motif(), Motif::TwoPath);
    }

    #[test]
    fn closed_forms_match_generic() {
        let star = make_pattern(&[(0, 1), (0, 2), (0, 3)]).unwrap();
        let pats = [
            GraphPattern::edge(),
            GraphPattern::two_path(),
            GraphPattern::triangle(),
            GraphPattern::four_cycle(),
            star,
        ];
        for n in [4usize, 7, 12] {
            let m = random(n, n as u64);
            let fast = chi_many(&m, &pats).unwrap();
            for (p, f) in pats.iter().zip(&fast) {
                let g = chi_theta_generic(&m, p).unwrap();
                assert!((f - g).abs() < 1e-10 * g.abs().max(1.0), "{p} n={n}: {f} vs {g}");
            }
        }
    }

    #[test]
    fn edge_statistic_formula() {
        let m = random(9, 1);
        let mut s = 0.0;
        for i in 0..9 {
            for j in i + 1..9 {
                s += m.get(i, j);
            }
        }
        let expected = s / 36f64.sqrt();
        assert!((chi_theta(&m, &GraphPattern::edge()).unwrap() - expected).abs() < 1e-12);
        assert_eq!(chi_theta(&SymMatrix::zeros(5), &GraphPattern::triangle()).unwrap(), 0.0);
    }

    #[test]
    fn too_small_n_rejected() {
        assert!(chi_theta(&SymMatrix::zeros(3), &GraphPattern::four_cycle()).is_err());
    }

    #[test]
    fn edge_list_parsing() {
        let p = parse_edge_list("# triangle\n0 1\n1 2\n\n2 0\n").unwrap();
        assert_eq!(p.motif(), Motif::Triangle);
        assert!(parse_edge_list("0 1\n2 3\n").is_err());
        assert!(parse_edge_list("0 x\n").is_err());
        assert!(parse_edge_list("").is_err());
    }

    #[test]
    fn relabeling_invariance() {
        let m = random(10, 5);
        let perm = [3usize, 7, 0, 9, 1, 4, 8, 2, 6, 5];
        let pm = m.permuted(&perm);
        let pats = [GraphPattern::edge(), GraphPattern::two_path(), GraphPattern::triangle(), GraphPattern::four_cycle()];
        let a = chi_many(&m, &pats).unwrap();
        let b = chi_many(&pm, &pats).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-11 * x.abs().max(1.0));
        }
    }
}
