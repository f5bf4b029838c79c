use faer::prelude::Solve;
use faer::{c64, Mat};

use super::{Liouvillian, Sector};
use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;
use crate::spectra::{Spectrum, SpectrumTarget};

/// Eigenvector matrices worse conditioned than this switch propagation to
/// the matrix exponential.
const MAX_EIGVEC_COND: f64 = 1e12;

/// Samples of a two-time correlator `<A(tau) B(0)>`.
#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    pub tau: Vec<f64>,
    pub values: Vec<c64>,
    pub a_label: String,
    pub b_label: String,
}

impl CorrelationSeries {
    pub fn new(tau: Vec<f64>, values: Vec<c64>, a_label: impl Into<String>, b_label: impl Into<String>) -> Result<Self> {
        if tau.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: tau.len(), got: values.len() });
        }
        if tau.first().is_some_and(|&t| t != 0.0) || tau.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter { name: "tau", reason: "grid must start at 0 and increase strictly".into() });
        }
        Ok(Self { tau, values, a_label: a_label.into(), b_label: b_label.into() })
    }

    /// Trapezoid estimate of `2 Re int_0^tau_max C(tau) dtau`.
    pub fn integral(&self) -> f64 {
        let mut acc = c64::new(0.0, 0.0);
        for k in 1..self.tau.len() {
            acc += (self.values[k] + self.values[k - 1]) * (0.5 * (self.tau[k] - self.tau[k - 1]));
        }
        2.0 * acc.re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorKind {
    Eigen,
    Exponential,
}

/// `exp(L tau)` restricted to one invariant sector, either through a reusable
/// eigendecomposition or, for defective generators, the matrix exponential.
pub struct Propagator {
    sector: Sector,
    generator: Mat<c64>,
    eig: Option<(Vec<c64>, Mat<c64>, Mat<c64>)>,
    cond: f64,
}

impl Propagator {
    pub fn new(liou: &Liouvillian, sector: Sector) -> Result<Self> {
        let generator = liou.sector_matrix(&sector);
        let n = generator.nrows();
        let eig = generator.eigen().map_err(|e| Error::Convergence(format!("Liouvillian eigendecomposition: {e:?}")))?;
        let v = eig.U().to_owned();
        let vals: Vec<c64> = (0..n).map(|k| eig.S().column_vector()[k]).collect();
        let vinv = v.partial_piv_lu().solve(&Mat::<c64>::identity(n, n));
        let cond = v.norm_l2() * vinv.norm_l2();
        let eig = (cond.is_finite() && cond <= MAX_EIGVEC_COND).then_some((vals, v, vinv));
        Ok(Self { sector, generator, eig, cond })
    }

    /// Propagator on the sector supporting `x`.
    pub fn for_operator(liou: &Liouvillian, x: &Mat<c64>) -> Result<Self> {
        Self::new(liou, liou.sector_of(x))
    }

    /// Force the matrix-exponential path regardless of conditioning.
    pub fn exponential_only(mut self) -> Self {
        self.eig = None;
        self
    }

    pub fn kind(&self) -> PropagatorKind {
        if self.eig.is_some() {
            PropagatorKind::Eigen
        } else {
            PropagatorKind::Exponential
        }
    }

    pub fn eigvec_condition(&self) -> f64 {
        self.cond
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    /// Eigenvalues of the sector generator (empty on the exponential path).
    pub fn eigenvalues(&self) -> Vec<c64> {
        self.eig.as_ref().map(|e| e.0.clone()).unwrap_or_default()
    }

    /// Modes `(eigenvalue, amplitude)` of `tau -> Tr[A exp(L tau) X]`.
    pub fn modes(&self, a: &Mat<c64>, x: &Mat<c64>) -> Option<Vec<(c64, c64)>> {
        let (vals, v, vinv) = self.eig.as_ref()?;
        let xs = self.sector.gather(x);
        let c = self.sector.trace_functional(a);
        let alpha = vinv * &xs;
        let n = vals.len();
        Some(
            (0..n)
                .map(|k| {
                    let beta: c64 = (0..n).map(|i| c[i] * v[(i, k)]).sum();
                    (vals[k], beta * alpha[(k, 0)])
                })
                .collect(),
        )
    }

    pub fn apply(&self, x: &Mat<c64>, tau: f64) -> Mat<c64> {
        let xs = self.sector.gather(x);
        let out = match &self.eig {
            Some((vals, v, vinv)) => {
                let mut alpha = vinv * &xs;
                for (k, l) in vals.iter().enumerate() {
                    alpha[(k, 0)] *= (l * tau).exp();
                }
                v * alpha
            }
            None => expm(&self.generator, tau) * &xs,
        };
        self.sector.scatter_col(&out)
    }

    /// `Tr[A exp(L tau_k) X]` on a grid.
    pub fn correlation(&self, a: &Mat<c64>, x: &Mat<c64>, tau: &[f64]) -> Vec<c64> {
        if let Some(modes) = self.modes(a, x) {
            return tau.iter().map(|&t| modes.iter().map(|(l, amp)| amp * (l * t).exp()).sum()).collect();
        }
        let c = self.sector.trace_functional(a);
        let dot = |v: &Mat<c64>| -> c64 { (0..v.nrows()).map(|i| c[i] * v[(i, 0)]).sum() };
        let mut cur = self.sector.gather(x);
        let mut out = Vec::with_capacity(tau.len());
        let mut step: Option<(f64, Mat<c64>)> = None;
        let mut prev = 0.0;
        for &t in tau {
            let dt = t - prev;
            if dt != 0.0 {
                let reuse = step.as_ref().is_some_and(|(h, _)| (h - dt).abs() <= 1e-9 * dt.abs());
                if !reuse {
                    step = Some((dt, expm(&self.generator, dt)));
                }
                cur = &step.as_ref().expect("step set above").1 * &cur;
            }
            prev = t;
            out.push(dot(&cur));
        }
        out
    }
}

/// Scaling-and-squaring exponential of `a t` with the degree-13 Padé
/// approximant.
pub(crate) fn expm(a: &Mat<c64>, t: f64) -> Mat<c64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm1 = (0..n).map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max) * t.abs();
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = t / 2f64.powi(s);
    let a1 = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let id = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let inner_u = Mat::from_fn(n, n, |i, j| a6[(i, j)] * B[13] + a4[(i, j)] * B[11] + a2[(i, j)] * B[9]);
    let inner_v = Mat::from_fn(n, n, |i, j| a6[(i, j)] * B[12] + a4[(i, j)] * B[10] + a2[(i, j)] * B[8]);
    let pu = &a6 * &inner_u;
    let pv = &a6 * &inner_v;
    let u_arg = Mat::from_fn(n, n, |i, j| {
        pu[(i, j)] + a6[(i, j)] * B[7] + a4[(i, j)] * B[5] + a2[(i, j)] * B[3] + c64::new(B[1] * id(i, j), 0.0)
    });
    let u = &a1 * &u_arg;
    let v = Mat::from_fn(n, n, |i, j| {
        pv[(i, j)] + a6[(i, j)] * B[6] + a4[(i, j)] * B[4] + a2[(i, j)] * B[2] + c64::new(B[0] * id(i, j), 0.0)
    });
    let num = &v + &u;
    let den = &v - &u;
    let mut r = den.partial_piv_lu().solve(&num);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `exp(L tau)` applied to `X`.
pub fn propagate(liou: &Liouvillian, x: &OperatorMatrix, tau: f64) -> Result<OperatorMatrix> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter { name: "tau", reason: format!("must be >= 0, got {tau}") });
    }
    let prop = Propagator::for_operator(liou, x.mat())?;
    Ok(OperatorMatrix::from_mat(prop.apply(x.mat(), tau), format!("exp(L {tau})[{}]", x.label())))
}

/// `<A(tau) B(0)> = Tr[A exp(L tau)(B rho)]` on a grid.
pub fn two_time_correlation(
    liou: &Liouvillian,
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    rho: &super::DensityOperator,
    tau: &[f64],
) -> Result<CorrelationSeries> {
    let x = b.mat() * rho.mat();
    let prop = Propagator::for_operator(liou, &x)?;
    let values = prop.correlation(a.mat(), &x, tau);
    CorrelationSeries::new(tau.to_vec(), values, a.label(), b.label())
}

/// Uniform grid reaching `16 / kappa_eff`, where `kappa_eff` is the slowest
/// nonzero decay rate among the modes that contribute to the correlator.
pub fn default_tau_grid(modes: &[(c64, c64)], points: usize) -> Result<Vec<f64>> {
    let total: f64 = modes.iter().map(|m| m.1.norm()).sum();
    let scale = modes.iter().map(|m| m.0.norm()).fold(0.0, f64::max).max(1e-300);
    let slowest = modes
        .iter()
        .filter(|(l, amp)| amp.norm() > 1e-10 * total && l.norm() > 1e-10 * scale)
        .map(|(l, _)| -l.re)
        .fold(f64::INFINITY, f64::min);
    if !(slowest.is_finite() && slowest > 0.0) {
        return Err(Error::Convergence("no decaying mode contributes to the correlator".into()));
    }
    let tau_max = 16.0 / slowest;
    let n = points.max(2);
    Ok((0..n).map(|k| tau_max * k as f64 / (n - 1) as f64).collect())
}

/// `S(omega) = 2 Re int_0^inf C(tau) exp(-i omega tau) dtau` by the trapezoid rule.
pub fn power_spectrum(series: &CorrelationSeries, omega: &[f64]) -> Result<Spectrum> {
    let n = series.tau.len();
    if n < 2 {
        return Err(Error::InvalidParameter { name: "tau", reason: "need at least two samples".into() });
    }
    let c0 = series.values[0].norm();
    let cend = series.values[n - 1].norm();
    let tau_max = series.tau[n - 1];
    if c0 > 0.0 && cend > 1e-6 * c0 {
        let ratio = cend / c0;
        let suggested = if ratio < 1.0 { tau_max * (1e-6f64).ln() / ratio.ln() * 1.2 } else { 4.0 * tau_max };
        return Err(Error::GridTooShort { ratio, suggested_tau_max: suggested });
    }
    let values = omega
        .iter()
        .map(|&w| {
            let mut acc = c64::new(0.0, 0.0);
            for k in 0..n {
                let wk = if k == 0 {
                    0.5 * (series.tau[1] - series.tau[0])
                } else if k == n - 1 {
                    0.5 * (series.tau[k] - series.tau[k - 1])
                } else {
                    0.5 * (series.tau[k + 1] - series.tau[k - 1])
                };
                acc += series.values[k] * c64::from_polar(wk, -w * series.tau[k]);
            }
            2.0 * acc.re
        })
        .collect();
    Spectrum::new(omega.to_vec(), values, SpectrumTarget::Custom(format!("{}(t){}(0)", series.a_label, series.b_label)))
}
