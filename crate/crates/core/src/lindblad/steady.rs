use faer::linalg::solvers::PartialPivLu;
use faer::prelude::Solve;
use faer::{c64, Mat, Side};

use super::gmres::{from_vec, gmres, to_vec, GmresOptions, GmresReport, SylvesterPreconditioner};
use super::{trace_mat, Liouvillian, Sector};
use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;

/// Sectors up to this many Liouville-space entries are factored densely;
/// larger ones go through preconditioned GMRES.
pub const DENSE_SECTOR_LIMIT: usize = 5200;

/// Pivots below this fraction of the largest one mark a kernel of dimension > 1.
const DEGENERATE_PIVOT: f64 = 1e-12;

/// Unit-trace Hermitian density operator.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    op: OperatorMatrix,
}

impl DensityOperator {
    /// Hermitize and normalize a raw kernel vector.
    pub fn from_raw(x: &Mat<c64>) -> Result<Self> {
        let tr = trace_mat(x);
        if tr.norm() == 0.0 || !tr.re.is_finite() {
            return Err(Error::Convergence("steady-state candidate has zero trace".into()));
        }
        let d = x.nrows();
        let m = Mat::from_fn(d, d, |i, j| 0.5 * (x[(i, j)] + x[(j, i)].conj()) / tr);
        let tr2 = trace_mat(&m).re;
        let m = Mat::from_fn(d, d, |i, j| m[(i, j)] / tr2);
        Ok(Self { op: OperatorMatrix::from_mat(m, "rho") })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &OperatorMatrix {
        &self.op
    }

    pub fn mat(&self) -> &Mat<c64> {
        self.op.mat()
    }

    pub fn trace(&self) -> c64 {
        self.op.trace()
    }

    pub fn expect(&self, a: &OperatorMatrix) -> c64 {
        a.expect(&self.op)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.op.hermiticity_defect()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let vals = self
            .op
            .mat()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Convergence(format!("density eigenvalues: {e:?}")))?;
        Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
    }
}

enum Backend {
    Dense { lu: PartialPivLu<c64>, trace_row: usize },
    Iterative { pre: SylvesterPreconditioner, opts: GmresOptions },
}

/// Factored steady-state problem, reusable for solves of `L(Y) = X` with
/// traceless `X`.
pub struct SteadySolver<'a> {
    liou: &'a Liouvillian,
    sector: Sector,
    backend: Backend,
    norm: f64,
}

impl<'a> SteadySolver<'a> {
    pub fn new(liou: &'a Liouvillian) -> Result<Self> {
        Self::with_limit(liou, DENSE_SECTOR_LIMIT)
    }

    /// Like [`SteadySolver::new`] with an explicit dense/iterative threshold.
    pub fn with_limit(liou: &'a Liouvillian, dense_limit: usize) -> Result<Self> {
        let sector = liou.steady_sector();
        let norm = liou.norm();
        let backend = if sector.len() <= dense_limit {
            let a = sector_matrix_with_trace_row(liou, &sector)?;
            let trace_row = sector.position_of_diagonal(0).expect("diagonal entries are parity-even");
            let lu = a.partial_piv_lu();
            let u = lu.U();
            let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
            let big = diag.iter().cloned().fold(0.0, f64::max);
            let small = diag.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(small > DEGENERATE_PIVOT * big) {
                return Err(Error::DegenerateSteadyState { pivot: small / big });
            }
            Backend::Dense { lu, trace_row }
        } else {
            let kappa_scale = liou
                .collapse_ops()
                .iter()
                .map(|l| l.mat().norm_l2().powi(2) / l.dim() as f64)
                .sum::<f64>()
                .max(1e-12);
            let pre = SylvesterPreconditioner::new(liou.effective(), 1e-2 * kappa_scale)?;
            Backend::Iterative { pre, opts: GmresOptions::default() }
        };
        Ok(Self { liou, sector, backend, norm })
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.backend, Backend::Dense { .. })
    }

    /// Solve `L(Y) + Tr(Y) |0><0| = rhs` on the steady sector.
    fn solve_bordered(&self, rhs: &Mat<c64>) -> Result<(Mat<c64>, Option<GmresReport>)> {
        match &self.backend {
            Backend::Dense { lu, trace_row } => {
                let mut b = self.sector.gather(rhs);
                b[(*trace_row, 0)] = trace_mat(rhs);
                let y = lu.solve(&b);
                Ok((self.sector.scatter_col(&y), None))
            }
            Backend::Iterative { pre, opts } => {
                let d = self.liou.dim();
                let apply = |v: &[c64]| {
                    let x = from_vec(v, d);
                    let mut out = self.liou.apply(&x);
                    out[(0, 0)] += trace_mat(&x);
                    to_vec(&out)
                };
                let precondition = |v: &[c64]| to_vec(&pre.solve(&from_vec(v, d)));
                let (y, rep) = gmres(apply, precondition, &to_vec(rhs), opts)?;
                Ok((from_vec(&y, d), Some(rep)))
            }
        }
    }

    pub fn steady_state(&self) -> Result<DensityOperator> {
        let d = self.liou.dim();
        let mut p = Mat::<c64>::zeros(d, d);
        p[(0, 0)] = c64::new(1.0, 0.0);
        let (x, _) = self.solve_bordered(&p)?;
        let rho = DensityOperator::from_raw(&x)?;
        let res = self.liou.apply(rho.mat()).norm_l2();
        if res > 1e-8 * self.norm {
            return Err(Error::Convergence(format!(
                "steady-state residual {res:.3e} exceeds 1e-8 of the generator norm {:.3e}",
                self.norm
            )));
        }
        Ok(rho)
    }

    /// `Y` with `L(Y) = X` and `Tr Y = 0`, for traceless `X` on the steady
    /// sector; `-Y` is the time integral of `exp(L t) X`.
    pub fn solve_traceless(&self, x: &Mat<c64>) -> Result<Mat<c64>> {
        let tr = trace_mat(x);
        if tr.norm() > 1e-10 * x.norm_l2().max(1e-300) {
            return Err(Error::InvalidParameter { name: "x", reason: format!("source must be traceless, trace {tr}") });
        }
        Ok(self.solve_bordered(x)?.0)
    }

    /// Relative residual of the steady state in the generator norm.
    pub fn relative_residual(&self, rho: &DensityOperator) -> f64 {
        self.liou.apply(rho.mat()).norm_l2() / self.norm
    }
}

fn sector_matrix_with_trace_row(liou: &Liouvillian, sector: &Sector) -> Result<Mat<c64>> {
    let mut a = liou.sector_matrix(sector);
    let row = sector.position_of_diagonal(0).ok_or_else(|| Error::Unsupported("steady sector lacks diagonal".into()))?;
    let d = liou.dim();
    for c in 0..a.ncols() {
        a[(row, c)] = c64::new(0.0, 0.0);
    }
    for i in 0..d {
        if let Some(c) = sector.position_of_diagonal(i) {
            a[(row, c)] = c64::new(1.0, 0.0);
        }
    }
    Ok(a)
}

/// Unique steady state of the generator.
pub fn steady_state(liou: &Liouvillian) -> Result<DensityOperator> {
    SteadySolver::new(liou)?.steady_state()
}
