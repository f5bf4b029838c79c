//! Truncated bosonic and spin operators and their tensor products.
//!
//! Fock levels are indexed `0..N`; the spin basis is ordered `(|down>, |up>)`
//! so that index 0 is the ground level in both factors.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex square matrix acting on a truncated Hilbert space.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix {
    mat: Mat<c64>,
    label: String,
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperatorMatrix({}, dim={})", self.label, self.dim())
    }
}

impl OperatorMatrix {
    pub fn from_mat(mat: Mat<c64>, label: impl Into<String>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator matrices are square");
        Self { mat, label: label.into() }
    }

    pub fn from_fn(dim: usize, label: impl Into<String>, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self::from_mat(Mat::from_fn(dim, dim, f), label)
    }

    /// Build from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[c64], label: impl Into<String>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        Ok(Self::from_fn(dim, label, |i, j| entries[i * dim + j]))
    }

    pub fn zeros(dim: usize, label: impl Into<String>) -> Self {
        Self::from_mat(Mat::zeros(dim, dim), label)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_mat(Mat::identity(dim, dim), "1")
    }

    pub fn diagonal(values: &[c64], label: impl Into<String>) -> Self {
        let n = values.len();
        Self::from_fn(n, label, |i, j| if i == j { values[i] } else { c64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn mat(&self) -> &Mat<c64> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.mat[(i, j)]
    }

    pub fn entries_row_major(&self) -> Vec<c64> {
        let d = self.dim();
        (0..d * d).map(|k| self.mat[(k / d, k % d)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_mat(self.mat.adjoint().to_owned(), format!("{}^dag", self.label))
    }

    pub fn transpose(&self) -> Self {
        Self::from_mat(self.mat.transpose().to_owned(), format!("{}^T", self.label))
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn scale(&self, s: c64) -> Self {
        Self::from_mat(Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * s), self.label.clone())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    /// `max |M - M^dag|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs() == 0.0
    }

    pub fn commutator(&self, other: &Self) -> Self {
        (self * other) - (other * self)
    }

    /// Copy of the upper-left `n x n` block.
    pub fn block(&self, n: usize) -> Self {
        Self::from_fn(n, self.label.clone(), |i, j| self.mat[(i, j)])
    }

    pub fn expect(&self, rho: &OperatorMatrix) -> c64 {
        let d = self.dim();
        let mut acc = c64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += self.mat[(i, k)] * rho.mat[(k, i)];
            }
        }
        acc
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::from_mat(&self.mat + &rhs.mat, format!("({}+{})", self.label, rhs.label))
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: OperatorMatrix) -> OperatorMatrix {
        &self + &rhs
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::from_mat(&self.mat - &rhs.mat, format!("({}-{})", self.label, rhs.label))
    }
}

impl Sub for OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: OperatorMatrix) -> OperatorMatrix {
        &self - &rhs
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::from_mat(&self.mat * &rhs.mat, format!("{}{}", self.label, rhs.label))
    }
}

impl Mul for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: OperatorMatrix) -> OperatorMatrix {
        &self * &rhs
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, s: f64) -> OperatorMatrix {
        self.scale(c64::new(s, 0.0))
    }
}

impl Mul<f64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, s: f64) -> OperatorMatrix {
        self.scale(c64::new(s, 0.0))
    }
}

impl Mul<c64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, s: c64) -> OperatorMatrix {
        self.scale(s)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale(c64::new(-1.0, 0.0))
    }
}

/// Which factor comes first in composite operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TensorOrdering {
    #[default]
    ResonatorSpin,
    SpinResonator,
}

/// Shape of the composite Hilbert space.
///
/// `spin_dim` is 2 for the full spin-resonator model. The resonator-only
/// layout (`spin_dim == 1`) is used for bare-resonator studies where the spin
/// factor carries no dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertLayout {
    pub n_fock: usize,
    pub spin_dim: usize,
    pub ordering: TensorOrdering,
}

impl HilbertLayout {
    pub fn new(n_fock: usize) -> Result<Self> {
        if n_fock < 2 {
            return Err(Error::InvalidTruncation(n_fock));
        }
        Ok(Self { n_fock, spin_dim: 2, ordering: TensorOrdering::ResonatorSpin })
    }

    pub fn resonator_only(n_fock: usize) -> Result<Self> {
        Ok(Self { spin_dim: 1, ..Self::new(n_fock)? })
    }

    pub fn with_ordering(mut self, ordering: TensorOrdering) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn has_spin(&self) -> bool {
        self.spin_dim == 2
    }

    pub fn dim(&self) -> usize {
        self.n_fock * self.spin_dim
    }

    /// Lift a resonator operator to the composite space.
    pub fn embed_resonator(&self, op: &OperatorMatrix) -> OperatorMatrix {
        debug_assert_eq!(op.dim(), self.n_fock);
        if !self.has_spin() {
            return op.clone();
        }
        let id = OperatorMatrix::identity(2);
        match self.ordering {
            TensorOrdering::ResonatorSpin => tensor(op, &id),
            TensorOrdering::SpinResonator => tensor(&id, op),
        }
        .with_label(op.label().to_string())
    }

    /// Lift a spin operator to the composite space.
    pub fn embed_spin(&self, op: &OperatorMatrix) -> Result<OperatorMatrix> {
        if !self.has_spin() {
            return Err(Error::Unsupported("spin operator requested in a resonator-only layout".into()));
        }
        let id = OperatorMatrix::identity(self.n_fock);
        Ok(match self.ordering {
            TensorOrdering::ResonatorSpin => tensor(&id, op),
            TensorOrdering::SpinResonator => tensor(op, &id),
        }
        .with_label(op.label().to_string()))
    }

    /// Product of a resonator and a spin operator in layout order.
    pub fn product(&self, res: &OperatorMatrix, spin: &OperatorMatrix) -> Result<OperatorMatrix> {
        if !self.has_spin() {
            return Err(Error::Unsupported("spin operator requested in a resonator-only layout".into()));
        }
        let label = format!("{}{}", res.label(), spin.label());
        Ok(match self.ordering {
            TensorOrdering::ResonatorSpin => tensor(res, spin),
            TensorOrdering::SpinResonator => tensor(spin, res),
        }
        .with_label(label))
    }

    /// Diagonal of the excitation-parity operator `(-1)^n (x) sigma_z` (or
    /// `(-1)^n` without spin), as +1/-1 signs.
    pub fn parity_signs(&self) -> Vec<i8> {
        let fock = |n: usize| if n % 2 == 0 { 1i8 } else { -1 };
        // sigma_z is -1 on the ground level, +1 on the excited level
        let spin = |s: usize| if s == 0 { -1i8 } else { 1 };
        let d = self.dim();
        (0..d)
            .map(|k| {
                if !self.has_spin() {
                    return fock(k);
                }
                let (n, s) = match self.ordering {
                    TensorOrdering::ResonatorSpin => (k / 2, k % 2),
                    TensorOrdering::SpinResonator => (k % self.n_fock, k / self.n_fock),
                };
                fock(n) * spin(s)
            })
            .collect()
    }
}

/// Truncated annihilation and creation operators on `n_fock` levels.
pub fn fock_ladder(n_fock: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if n_fock < 2 {
        return Err(Error::InvalidTruncation(n_fock));
    }
    let a = OperatorMatrix::from_fn(n_fock, "a", |i, j| {
        if j == i + 1 {
            c64::new((j as f64).sqrt(), 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let a_dag = OperatorMatrix::from_fn(n_fock, "a^dag", |i, j| {
        if i == j + 1 {
            c64::new((i as f64).sqrt(), 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    Ok((a, a_dag))
}

/// `a^dag a` with its diagonal filled in exactly.
pub fn number_operator(n_fock: usize) -> Result<OperatorMatrix> {
    if n_fock < 2 {
        return Err(Error::InvalidTruncation(n_fock));
    }
    let diag: Vec<c64> = (0..n_fock).map(|k| c64::new(k as f64, 0.0)).collect();
    Ok(OperatorMatrix::diagonal(&diag, "n"))
}

/// Two-level operators in the `(|down>, |up>)` basis.
#[derive(Debug, Clone)]
pub struct PauliSet {
    pub sx: OperatorMatrix,
    pub sz: OperatorMatrix,
    pub sp: OperatorMatrix,
    pub sm: OperatorMatrix,
}

pub fn pauli_set() -> PauliSet {
    let z = c64::new(0.0, 0.0);
    let o = c64::new(1.0, 0.0);
    let m = |e: [c64; 4], l: &str| OperatorMatrix::from_row_major(2, &e, l).expect("2x2");
    PauliSet {
        sx: m([z, o, o, z], "sx"),
        sz: m([-o, z, z, o], "sz"),
        sp: m([z, z, o, z], "s+"),
        sm: m([z, o, z, z], "s-"),
    }
}

/// Kronecker product `A (x) B`.
pub fn tensor(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let (da, db) = (a.dim(), b.dim());
    OperatorMatrix::from_fn(da * db, format!("{}(x){}", a.label(), b.label()), |i, j| {
        a.get(i / db, j / db) * b.get(i % db, j % db)
    })
}

/// `gamma = a cosh r - a^dag sinh r` and its adjoint.
pub fn bogoliubov_pair(a: &OperatorMatrix, a_dag: &OperatorMatrix, r: f64) -> (OperatorMatrix, OperatorMatrix) {
    let (c, s) = (r.cosh(), r.sinh());
    let g = (a * c) - (a_dag * s);
    let gd = (a_dag * c) - (a * s);
    (g.with_label("gamma"), gd.with_label("gamma^dag"))
}
