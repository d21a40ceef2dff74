use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::models::SymMatrix;
use crate::orthopoly::hermite;

/// Largest vertex count accepted; automorphisms are found by brute force.
pub const MAX_VERTICES: usize = 8;

/// A connected multigraph without loops: each edge `(a, b, m)` carries a
/// Hermite degree `m >= 1`. Simple patterns have every `m = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    v: usize,
    edges: Vec<(usize, usize, usize)>,
    aut: u64,
}

impl Shape {
    pub fn new(v: usize, edges: &[(usize, usize, usize)]) -> Result<Self> {
        if v < 2 || v > MAX_VERTICES {
            return Err(Error::InvalidPattern(format!(
                "vertex count {v} outside 2..={MAX_VERTICES}"
            )));
        }
        let mut norm = Vec::with_capacity(edges.len());
        let mut seen = BTreeSet::new();
        for &(a, b, m) in edges {
            if a == b || a >= v || b >= v || m == 0 {
                return Err(Error::InvalidPattern(format!("bad edge ({a}, {b}, {m})")));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(Error::InvalidPattern(format!(
                    "repeated edge {key:?}; use a multiplicity instead"
                )));
            }
            norm.push((key.0, key.1, m));
        }
        norm.sort_unstable();
        if !connected(v, &norm) {
            return Err(Error::InvalidPattern("pattern must be connected without isolated vertices".into()));
        }
        let aut = automorphisms(v, &norm);
        Ok(Shape { v, edges: norm, aut })
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn edges(&self) -> &[(usize, usize, usize)] {
        &self.edges
    }

    /// Number of distinct edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Total Hermite degree `sum m_e`.
    pub fn degree(&self) -> usize {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub fn is_simple(&self) -> bool {
        self.edges.iter().all(|e| e.2 == 1)
    }

    pub fn aut(&self) -> u64 {
        self.aut
    }

    /// `|L| = n! / ((n - v)! |Aut|)`, the number of distinct labeled copies.
    pub fn labelings(&self, n: usize) -> f64 {
        if n < self.v {
            return 0.0;
        }
        let falling: f64 = (0..self.v).map(|i| (n - i) as f64).product();
        falling / self.aut as f64
    }

    /// Relabeling-invariant edge list.
    pub fn canonical_key(&self) -> Vec<(usize, usize, usize)> {
        canonical(self.v, &self.edges)
    }

    /// 64-bit FNV-1a hash of the canonical form.
    pub fn hash64(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: usize| {
            for b in (x as u64).to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.v);
        for (a, b, m) in self.canonical_key() {
            eat(a);
            eat(b);
            eat(m);
        }
        h
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .edges
            .iter()
            .map(|&(a, b, m)| if m == 1 { format!("{a}-{b}") } else { format!("{a}-{b}^{m}") })
            .collect();
        format!("v{}[{}]", self.v, parts.join(" "))
    }

    /// Rough operation count for one evaluation at size `n`.
    pub fn cost(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self.closed_form() {
            Some(ClosedForm::Edge(_)) | Some(ClosedForm::Path(..)) => nf * nf,
            Some(ClosedForm::Triangle(..)) => nf * nf * nf,
            None => nf.powi(self.v as i32),
        }
    }

    pub(crate) fn closed_form(&self) -> Option<ClosedForm> {
        match (self.v, self.edges.as_slice()) {
            (2, [(_, _, m)]) => Some(ClosedForm::Edge(*m)),
            (3, [e, f]) => Some(ClosedForm::Path(e.2, f.2)),
            (3, [e, f, g]) => Some(ClosedForm::Triangle(e.2, f.2, g.2)),
            _ => None,
        }
    }

    /// `sum over ordered injective maps phi of prod_e h_{m_e}(M_{phi(e)})`.
    pub fn ordered_sum(&self, cache: &mut EntryCache) -> f64 {
        match self.closed_form() {
            Some(ClosedForm::Edge(m)) => {
                let b = cache.get(m);
                let n = b.n();
                let mut s = 0.0;
                for i in 0..n {
                    s += b.row(i)[i + 1..].iter().sum::<f64>();
                }
                2.0 * s
            }
            Some(ClosedForm::Path(a, b)) => {
                let ba = cache.get(a).clone();
                let bb = cache.get(b);
                let n = ba.n();
                let mut s = 0.0;
                for c in 0..n {
                    let ra: f64 = ba.row(c).iter().sum();
                    let rb: f64 = bb.row(c).iter().sum();
                    let overlap: f64 = ba.row(c).iter().zip(bb.row(c)).map(|(x, y)| x * y).sum();
                    s += ra * rb - overlap;
                }
                s
            }
            Some(ClosedForm::Triangle(1, 1, 1)) => 6.0 * triangle_sum(cache.get(1)),
            Some(ClosedForm::Triangle(a, b, c)) => {
                // edges (0,1)=a, (0,2)=b, (1,2)=c; sum_{x,y,z} B_a[x,y] B_c[y,z] B_b[x,z]
                let ba = cache.get(a).clone();
                let bc = cache.get(c).clone();
                let bb = cache.get(b);
                let prod = ba.matmul(&bc);
                prod.iter().zip(bb.as_slice()).map(|(p, q)| p * q).sum()
            }
            None => self.enumerate(cache),
        }
    }

    /// Generic ordered-injection enumeration, used for every shape and as
    /// the oracle for the closed forms.
    pub fn enumerate(&self, cache: &mut EntryCache) -> f64 {
        let plan = self.plan();
        for links in &plan {
            for &(_, m) in links {
                cache.get(m);
            }
        }
        let cache = &*cache;
        let plan: Vec<Vec<(usize, &SymMatrix)>> = plan
            .iter()
            .map(|links| links.iter().map(|&(e, m)| (e, cache.peek(m))).collect())
            .collect();
        let n = cache.n();
        let mut labels = vec![usize::MAX; self.v];
        let mut used = vec![false; n];
        enumerate_from(0, 1.0, &plan, &mut labels, &mut used)
    }

    /// Vertices relabeled in BFS order; entry `d` lists `(earlier, m)` for
    /// edges from vertex `d` back to already placed vertices.
    pub(crate) fn plan(&self) -> Vec<Vec<(usize, usize)>> {
        let order = self.bfs_order();
        let mut pos = vec![0; self.v];
        for (i, &x) in order.iter().enumerate() {
            pos[x] = i;
        }
        let mut plan = vec![Vec::new(); self.v];
        for &(a, b, m) in &self.edges {
            let (pa, pb) = (pos[a], pos[b]);
            let (early, late) = (pa.min(pb), pa.max(pb));
            plan[late].push((early, m));
        }
        plan
    }

    /// Vertex ids in BFS order from vertex 0.
    pub(crate) fn bfs_order(&self) -> Vec<usize> {
        let mut order = vec![0usize];
        let mut seen = vec![false; self.v];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &(a, b, _) in &self.edges {
                let y = if a == x { b } else if b == x { a } else { continue };
                if !seen[y] {
                    seen[y] = true;
                    order.push(y);
                }
            }
        }
        order
    }

    /// Normalized symmetric basis function `psi = ordered_sum / (|Aut| sqrt|L|)`.
    pub fn psi(&self, cache: &mut EntryCache) -> Result<f64> {
        let n = cache.n();
        if n < self.v {
            return Err(Error::InvalidPattern(format!(
                "n = {n} is smaller than the pattern ({} vertices)",
                self.v
            )));
        }
        Ok(self.ordered_sum(cache) / (self.aut as f64 * self.labelings(n).sqrt()))
    }

    /// Same normalization as [`Shape::psi`] but always via enumeration.
    pub fn psi_generic(&self, cache: &mut EntryCache) -> Result<f64> {
        let n = cache.n();
        if n < self.v {
            return Err(Error::InvalidPattern(format!(
                "n = {n} is smaller than the pattern ({} vertices)",
                self.v
            )));
        }
        Ok(self.enumerate(cache) / (self.aut as f64 * self.labelings(n).sqrt()))
    }

    /// Grows every shape with one more unit of Hermite degree.
    fn children(&self) -> Vec<Shape> {
        let mut out = Vec::new();
        for i in 0..self.edges.len() {
            let mut e = self.edges.clone();
            e[i].2 += 1;
            out.extend(Shape::new(self.v, &e));
        }
        for a in 0..self.v {
            for b in a + 1..self.v {
                if self.edges.iter().any(|e| e.0 == a && e.1 == b) {
                    continue;
                }
                let mut e = self.edges.clone();
                e.push((a, b, 1));
                out.extend(Shape::new(self.v, &e));
            }
        }
        if self.v < MAX_VERTICES {
            for a in 0..self.v {
                let mut e = self.edges.clone();
                e.push((a, self.v, 1));
                out.extend(Shape::new(self.v + 1, &e));
            }
        }
        out
    }
}

fn enumerate_from(
    depth: usize,
    acc: f64,
    plan: &[Vec<(usize, &SymMatrix)>],
    labels: &mut [usize],
    used: &mut [bool],
) -> f64 {
    if depth == plan.len() {
        return acc;
    }
    let mut total = 0.0;
    for x in 0..used.len() {
        if used[x] {
            continue;
        }
        let mut p = acc;
        for &(earlier, mat) in &plan[depth] {
            p *= mat.get(labels[earlier], x);
            if p == 0.0 {
                break;
            }
        }
        if p == 0.0 {
            continue;
        }
        used[x] = true;
        labels[depth] = x;
        total += enumerate_from(depth + 1, p, plan, labels, used);
        used[x] = false;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ClosedForm {
    Edge(usize),
    Path(usize, usize),
    Triangle(usize, usize, usize),
}

/// All connected multigraph shapes with total Hermite degree `1..=max_degree`,
/// one representative per isomorphism class, ordered by degree.
pub fn connected_shapes(max_degree: usize) -> Vec<Shape> {
    let mut levels: Vec<Vec<Shape>> = Vec::new();
    if max_degree == 0 {
        return Vec::new();
    }
    let edge = Shape::new(2, &[(0, 1, 1)]).expect("edge");
    levels.push(vec![edge]);
    for _ in 1..max_degree {
        let mut next = Vec::new();
        let mut keys = BTreeSet::new();
        for s in levels.last().expect("non-empty") {
            for c in s.children() {
                let key = (c.v, c.canonical_key());
                if keys.insert(key) {
                    next.push(c);
                }
            }
        }
        let mut canon: Vec<Shape> = next
            .into_iter()
            .map(|s| Shape::new(s.v, &s.canonical_key()).expect("relabeling preserves validity"))
            .collect();
        canon.sort();
        levels.push(canon);
    }
    levels.into_iter().flatten().collect()
}

/// Entrywise Hermite transforms `B_m = h_m(M)` with zero diagonal, built
/// on demand.
#[derive(Debug, Clone)]
pub struct EntryCache {
    base: SymMatrix,
    mats: Vec<Option<SymMatrix>>,
}

impl EntryCache {
    pub fn new(m: &SymMatrix) -> Self {
        EntryCache {
            base: m.off_diagonal(),
            mats: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// An already built transform; panics if `get(m)` was never called.
    pub fn peek(&self, m: usize) -> &SymMatrix {
        if m == 1 {
            &self.base
        } else {
            self.mats[m].as_ref().expect("transform built")
        }
    }

    pub fn get(&mut self, m: usize) -> &SymMatrix {
        if m == 1 {
            return &self.base;
        }
        if self.mats.len() <= m {
            self.mats.resize(m + 1, None);
        }
        if self.mats[m].is_none() {
            let b = self.base.map(|x| hermite(m, x)).off_diagonal();
            self.mats[m] = Some(b);
        }
        self.mats[m].as_ref().expect("just built")
    }
}

/// `sum_{i<j<k} A_ij A_jk A_ik` using row dot products over `k > j`.
pub(crate) fn triangle_sum(a: &SymMatrix) -> f64 {
    let n = a.n();
    let mut total = 0.0;
    for i in 0..n {
        let ri = a.row(i);
        for j in i + 1..n {
            let aij = ri[j];
            if aij == 0.0 {
                continue;
            }
            let rj = a.row(j);
            let dot: f64 = ri[j + 1..].iter().zip(&rj[j + 1..]).map(|(x, y)| x * y).sum();
            total += aij * dot;
        }
    }
    total
}

fn connected(v: usize, edges: &[(usize, usize, usize)]) -> bool {
    let mut seen = vec![false; v];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &(a, b, _) in edges {
            let y = if a == x { b } else if b == x { a } else { continue };
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn permutations(v: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..v).collect();
    fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, p, out);
            if k % 2 == 0 {
                p.swap(i, k - 1);
            } else {
                p.swap(0, k - 1);
            }
        }
    }
    heap(v, &mut p, &mut out);
    out
}

fn relabel(edges: &[(usize, usize, usize)], perm: &[usize]) -> Vec<(usize, usize, usize)> {
    let mut e: Vec<_> = edges
        .iter()
        .map(|&(a, b, m)| {
            let (x, y) = (perm[a], perm[b]);
            (x.min(y), x.max(y), m)
        })
        .collect();
    e.sort_unstable();
    e
}

fn automorphisms(v: usize, edges: &[(usize, usize, usize)]) -> u64 {
    permutations(v)
        .iter()
        .filter(|p| relabel(edges, p) == edges)
        .count() as u64
}

fn canonical(v: usize, edges: &[(usize, usize, usize)]) -> Vec<(usize, usize, usize)> {
    permutations(v)
        .iter()
        .map(|p| relabel(edges, p))
        .min()
        .expect("at least one permutation")
}
