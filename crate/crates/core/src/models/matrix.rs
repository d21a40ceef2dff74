/// Dense symmetric matrix with full row-major storage.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from the upper triangle (diagonal included) in row-major order.
    pub fn from_upper(n: usize, upper: &[f64]) -> Option<Self> {
        if upper.len() != n * (n + 1) / 2 {
            return None;
        }
        let mut m = SymMatrix::zeros(n);
        let mut it = upper.iter();
        for i in 0..n {
            for j in i..n {
                m.set(i, j, *it.next()?);
            }
        }
        Some(m)
    }

    /// Builds from a full row-major array, symmetrizing `(A + A^T) / 2`.
    pub fn from_full(n: usize, full: &[f64]) -> Option<Self> {
        if full.len() != n * n {
            return None;
        }
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, 0.5 * (full[i * n + j] + full[j * n + i]));
            }
        }
        Some(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn upper(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n + 1) / 2);
        for i in 0..self.n {
            out.extend_from_slice(&self.row(i)[i..]);
        }
        out
    }

    /// `P A P^T` for the permutation `i -> perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                m.set(perm[i], perm[j], self.get(i, j));
            }
        }
        m
    }

    /// Copy with the diagonal set to zero.
    pub fn off_diagonal(&self) -> SymMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] = 0.0;
        }
        m
    }

    /// Entrywise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn matmul(&self, other: &SymMatrix) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for (o, b) in row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}
