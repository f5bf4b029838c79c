//! Lindblad generator, steady state, propagation, two-time correlators and
//! spectra.
//!
//! Density operators are column-stacked: `vec(X)[i + j d] = X[i, j]`. The
//! generator is kept in factored form (Hamiltonian, collapse list and the
//! effective non-Hermitian `K = -iH - 1/2 sum L^dag L`) so that it can be
//! applied matrix-free or assembled densely, either over the full Liouville
//! space or over one excitation-parity sector.

mod gmres;
mod krylov;
mod propagate;
mod sector;
mod steady;

pub use gmres::{GmresOptions, GmresReport, SylvesterPreconditioner};
pub use krylov::{transform_on_points, KrylovOptions, ResolventEvaluator, RitzPole};
pub use propagate::{
    default_tau_grid, power_spectrum, propagate, two_time_correlation, CorrelationSeries, Propagator, PropagatorKind,
};
pub(crate) use propagate::expm;
pub use sector::{Sector, SectorKind};
pub use steady::{steady_state, DensityOperator, SteadySolver, DENSE_SECTOR_LIMIT};

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;

/// Superoperator generator of the master equation.
#[derive(Clone)]
pub struct Liouvillian {
    dim: usize,
    h: OperatorMatrix,
    collapse: Vec<OperatorMatrix>,
    k: Mat<c64>,
    parity: Option<Vec<i8>>,
}

impl std::fmt::Debug for Liouvillian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Liouvillian")
            .field("dim", &self.dim)
            .field("collapse", &self.collapse.len())
            .field("parity", &self.parity.is_some())
            .finish()
    }
}

/// Build the generator of `drho/dt = -i[H, rho] + sum_L (L rho L^dag - 1/2 {L^dag L, rho})`.
pub fn liouvillian(h: &OperatorMatrix, ls: &[OperatorMatrix]) -> Result<Liouvillian> {
    let d = h.dim();
    for l in ls {
        if l.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: l.dim() });
        }
    }
    let mut k = Mat::from_fn(d, d, |i, j| h.get(i, j) * c64::new(0.0, -1.0));
    for l in ls {
        let ldl = l.mat().adjoint() * l.mat();
        for j in 0..d {
            for i in 0..d {
                k[(i, j)] -= ldl[(i, j)] * 0.5;
            }
        }
    }
    Ok(Liouvillian { dim: d, h: h.clone(), collapse: ls.to_vec(), k, parity: None })
}

/// Parity class of an operator under a diagonal sign pattern.
fn operator_parity(op: &Mat<c64>, signs: &[i8]) -> Option<i8> {
    let mut class = None;
    for j in 0..op.ncols() {
        for i in 0..op.nrows() {
            if op[(i, j)] != c64::new(0.0, 0.0) {
                let s = signs[i] * signs[j];
                match class {
                    None => class = Some(s),
                    Some(c) if c != s => return None,
                    _ => {}
                }
            }
        }
    }
    Some(class.unwrap_or(1))
}

impl Liouvillian {
    /// Attach a candidate diagonal parity pattern. It is kept only if the
    /// Hamiltonian is parity-even and every collapse operator has a definite
    /// parity, which makes the generator block-diagonal in the two sectors.
    pub fn with_parity(mut self, signs: &[i8]) -> Self {
        if signs.len() != self.dim {
            return self;
        }
        let ok = operator_parity(self.h.mat(), signs) == Some(1)
            && self.collapse.iter().all(|l| operator_parity(l.mat(), signs).is_some());
        self.parity = ok.then(|| signs.to_vec());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.h
    }

    pub fn collapse_ops(&self) -> &[OperatorMatrix] {
        &self.collapse
    }

    pub fn effective(&self) -> &Mat<c64> {
        &self.k
    }

    pub fn parity(&self) -> Option<&[i8]> {
        self.parity.as_deref()
    }

    /// Apply the generator to a `d x d` matrix.
    pub fn apply(&self, x: &Mat<c64>) -> Mat<c64> {
        let mut out = &self.k * x + x * self.k.adjoint();
        for l in &self.collapse {
            let t = l.mat() * x;
            out += &t * l.mat().adjoint();
        }
        out
    }

    pub fn apply_op(&self, x: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::from_mat(self.apply(x.mat()), format!("L[{}]", x.label()))
    }

    /// Frobenius norm of the dense generator, computed from its factors
    /// without assembling it.
    pub fn norm(&self) -> f64 {
        // |L|_F^2 = |K (x) 1 + 1 (x) K* + sum L (x) L*|_F^2, expanded as an
        // inner product of the d^2 x d^2 pieces.
        let d = self.dim;
        let mut terms: Vec<(Mat<c64>, Mat<c64>)> = Vec::new();
        let id = Mat::<c64>::identity(d, d);
        terms.push((self.k.clone(), id.clone()));
        terms.push((id, self.k.conjugate().to_owned()));
        for l in &self.collapse {
            terms.push((l.mat().clone(), l.mat().conjugate().to_owned()));
        }
        let hs = |a: &Mat<c64>, b: &Mat<c64>| -> c64 {
            let mut s = c64::new(0.0, 0.0);
            for j in 0..d {
                for i in 0..d {
                    s += a[(i, j)].conj() * b[(i, j)];
                }
            }
            s
        };
        let mut total = c64::new(0.0, 0.0);
        for (a1, b1) in &terms {
            for (a2, b2) in &terms {
                total += hs(a1, a2) * hs(b1, b2);
            }
        }
        total.re.max(0.0).sqrt()
    }

    /// Sectors of Liouville space that the generator leaves invariant.
    pub fn sectors(&self) -> Vec<Sector> {
        match &self.parity {
            Some(p) => vec![Sector::even(p), Sector::odd(p)],
            None => vec![Sector::full(self.dim)],
        }
    }

    /// Sector holding the steady state (the even one when parity is present).
    pub fn steady_sector(&self) -> Sector {
        match &self.parity {
            Some(p) => Sector::even(p),
            None => Sector::full(self.dim),
        }
    }

    /// The invariant sector supporting `x`, or the full space when `x` mixes
    /// sectors.
    pub fn sector_of(&self, x: &Mat<c64>) -> Sector {
        let Some(p) = &self.parity else { return Sector::full(self.dim) };
        match operator_parity(x, p) {
            Some(1) => Sector::even(p),
            Some(_) => Sector::odd(p),
            None => Sector::full(self.dim),
        }
    }

    /// Dense generator restricted to a sector (rows and columns ordered as
    /// `sector.indices()`).
    pub fn sector_matrix(&self, sector: &Sector) -> Mat<c64> {
        let d = self.dim;
        let idx = sector.indices();
        let m = idx.len();
        let jumps: Vec<&Mat<c64>> = self.collapse.iter().map(|l| l.mat()).collect();
        let k = &self.k;
        Mat::from_fn(m, m, |row, col| {
            let (i, j) = (idx[row] % d, idx[row] / d);
            let (kk, ll) = (idx[col] % d, idx[col] / d);
            let mut v = c64::new(0.0, 0.0);
            if j == ll {
                v += k[(i, kk)];
            }
            if i == kk {
                v += k[(j, ll)].conj();
            }
            for l in &jumps {
                v += l[(i, kk)] * l[(j, ll)].conj();
            }
            v
        })
    }

    /// Fully assembled `d^2 x d^2` generator.
    pub fn matrix(&self) -> Mat<c64> {
        self.sector_matrix(&Sector::full(self.dim))
    }
}

pub(crate) fn trace_mat(x: &Mat<c64>) -> c64 {
    (0..x.nrows()).map(|i| x[(i, i)]).sum()
}

/// `Tr[A X]` without forming the product.
pub(crate) fn trace_product(a: &Mat<c64>, x: &Mat<c64>) -> c64 {
    let d = a.nrows();
    let mut s = c64::new(0.0, 0.0);
    for j in 0..d {
        for i in 0..d {
            s += a[(j, i)] * x[(i, j)];
        }
    }
    s
}
