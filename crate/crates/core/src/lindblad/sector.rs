use faer::{c64, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorKind {
    Full,
    Even,
    Odd,
}

/// A set of column-stacked Liouville-space indices left invariant by the
/// generator.
#[derive(Debug, Clone)]
pub struct Sector {
    kind: SectorKind,
    dim: usize,
    indices: Vec<usize>,
}

impl Sector {
    pub fn full(dim: usize) -> Self {
        Self { kind: SectorKind::Full, dim, indices: (0..dim * dim).collect() }
    }

    fn by_sign(signs: &[i8], want: i8, kind: SectorKind) -> Self {
        let d = signs.len();
        let indices = (0..d * d).filter(|&k| signs[k % d] * signs[k / d] == want).collect();
        Self { kind, dim: d, indices }
    }

    pub fn even(signs: &[i8]) -> Self {
        Self::by_sign(signs, 1, SectorKind::Even)
    }

    pub fn odd(signs: &[i8]) -> Self {
        Self::by_sign(signs, -1, SectorKind::Odd)
    }

    pub fn kind(&self) -> SectorKind {
        self.kind
    }

    /// Hilbert-space dimension `d`.
    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Matrix entries of `x` on this sector, as a column.
    pub fn gather(&self, x: &Mat<c64>) -> Mat<c64> {
        let d = self.dim;
        Mat::from_fn(self.len(), 1, |r, _| {
            let k = self.indices[r];
            x[(k % d, k / d)]
        })
    }

    /// Inverse of [`Sector::gather`]; entries outside the sector are zero.
    pub fn scatter(&self, v: &[c64]) -> Mat<c64> {
        let d = self.dim;
        let mut x = Mat::zeros(d, d);
        for (r, &k) in self.indices.iter().enumerate() {
            x[(k % d, k / d)] = v[r];
        }
        x
    }

    pub fn scatter_col(&self, v: &Mat<c64>) -> Mat<c64> {
        let vals: Vec<c64> = (0..v.nrows()).map(|r| v[(r, 0)]).collect();
        self.scatter(&vals)
    }

    /// Row vector `c` with `c . gather(X) = Tr[A X]`.
    pub fn trace_functional(&self, a: &Mat<c64>) -> Vec<c64> {
        let d = self.dim;
        self.indices.iter().map(|&k| a[(k / d, k % d)]).collect()
    }

    /// Position of the diagonal entry `(i, i)` inside the sector.
    pub fn position_of_diagonal(&self, i: usize) -> Option<usize> {
        let k = i + i * self.dim;
        self.indices.binary_search(&k).ok()
    }
}
