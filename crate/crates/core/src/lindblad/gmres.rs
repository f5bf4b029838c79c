//! Matrix-free restarted GMRES for Liouvillian systems that are too large to
//! factor densely.
//!
//! Right preconditioning uses the no-jump part of the generator,
//! `X -> K X + X K^dag`, which is a Sylvester operator solved exactly through
//! one complex Schur factorization `K = Q T Q^dag`.

use faer::{c64, Mat};
use nalgebra::{DMatrix, Schur};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_restarts: usize,
    pub tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { restart: 120, max_restarts: 40, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Exact inverse of `X -> K X + X K^dag - damping X`.
pub struct SylvesterPreconditioner {
    q: Mat<c64>,
    t: Mat<c64>,
    damping: f64,
}

impl SylvesterPreconditioner {
    pub fn new(k: &Mat<c64>, damping: f64) -> Result<Self> {
        let d = k.nrows();
        let km = DMatrix::from_fn(d, d, |i, j| k[(i, j)]);
        let schur = Schur::try_new(km, 1e-14, 10_000)
            .ok_or_else(|| Error::Convergence("complex Schur decomposition did not converge".into()))?;
        let (q, t) = schur.unpack();
        Ok(Self {
            q: Mat::from_fn(d, d, |i, j| q[(i, j)]),
            t: Mat::from_fn(d, d, |i, j| if i <= j { t[(i, j)] } else { c64::new(0.0, 0.0) }),
            damping,
        })
    }

    pub fn solve(&self, y: &Mat<c64>) -> Mat<c64> {
        let d = self.t.nrows();
        let yh = self.q.adjoint() * y * &self.q;
        let t = &self.t;
        let mut xh = Mat::<c64>::zeros(d, d);
        for j in (0..d).rev() {
            let mut rhs: Vec<c64> = (0..d).map(|i| yh[(i, j)]).collect();
            for k in j + 1..d {
                let c = t[(j, k)].conj();
                if c != c64::new(0.0, 0.0) {
                    for i in 0..d {
                        rhs[i] -= xh[(i, k)] * c;
                    }
                }
            }
            let diag_shift = t[(j, j)].conj() - self.damping;
            for i in (0..d).rev() {
                let mut acc = rhs[i];
                for k in i + 1..d {
                    acc -= t[(i, k)] * xh[(k, j)];
                }
                xh[(i, j)] = acc / (t[(i, i)] + diag_shift);
            }
        }
        &self.q * xh * self.q.adjoint()
    }
}

fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[c64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve `A x = b` with right preconditioner `M^{-1}`, starting from zero.
pub fn gmres(
    apply: impl Fn(&[c64]) -> Vec<c64>,
    precondition: impl Fn(&[c64]) -> Vec<c64>,
    b: &[c64],
    opts: &GmresOptions,
) -> Result<(Vec<c64>, GmresReport)> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![c64::new(0.0, 0.0); n];
    if bnorm == 0.0 {
        return Ok((x, GmresReport { iterations: 0, relative_residual: 0.0 }));
    }
    let mut iterations = 0;
    let mut rel;
    for _ in 0..opts.max_restarts {
        let ax = apply(&x);
        let r: Vec<c64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= opts.tol {
            break;
        }
        let m = opts.restart;
        let mut v: Vec<Vec<c64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![c64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![c64::new(0.0, 0.0); m];
        let mut sn = vec![c64::new(0.0, 0.0); m];
        let mut g = vec![c64::new(0.0, 0.0); m + 1];
        g[0] = c64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..m {
            let z = precondition(&v[j]);
            let mut w = apply(&z);
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let c = dot(vi, &w);
                    h[i][j] += c;
                    for (wk, vk) in w.iter_mut().zip(vi) {
                        *wk -= c * vk;
                    }
                }
            }
            let wn = norm(&w);
            h[j + 1][j] = c64::new(wn, 0.0);
            for i in 0..j {
                let t = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (a, bb) = (h[j][j], h[j + 1][j]);
            let den = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if den == 0.0 {
                used = j;
                break;
            }
            cs[j] = a / den;
            sn[j] = bb / den;
            h[j][j] = c64::new(den, 0.0);
            h[j + 1][j] = c64::new(0.0, 0.0);
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j].conj() * g[j];
            iterations += 1;
            used = j + 1;
            rel = g[j + 1].norm() / bnorm;
            if rel <= opts.tol || wn == 0.0 {
                break;
            }
            v.push(w.iter().map(|z| z / wn).collect());
        }
        let mut y = vec![c64::new(0.0, 0.0); used];
        for i in (0..used).rev() {
            let mut acc = g[i];
            for k in i + 1..used {
                acc -= h[i][k] * y[k];
            }
            y[i] = acc / h[i][i];
        }
        let mut update = vec![c64::new(0.0, 0.0); n];
        for (yi, vi) in y.iter().zip(&v) {
            for (u, vk) in update.iter_mut().zip(vi) {
                *u += yi * vk;
            }
        }
        let dz = precondition(&update);
        for (xi, d) in x.iter_mut().zip(dz) {
            *xi += d;
        }
    }
    let ax = apply(&x);
    let true_rel = norm(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>()) / bnorm;
    if true_rel > opts.tol.max(1e-10) * 10.0 {
        return Err(Error::Convergence(format!(
            "GMRES stalled at relative residual {true_rel:.2e} after {iterations} iterations"
        )));
    }
    Ok((x, GmresReport { iterations, relative_residual: true_rel }))
}

pub(crate) fn to_vec(x: &Mat<c64>) -> Vec<c64> {
    let d = x.nrows();
    (0..d * x.ncols()).map(|k| x[(k % d, k / d)]).collect()
}

pub(crate) fn from_vec(v: &[c64], d: usize) -> Mat<c64> {
    Mat::from_fn(d, v.len() / d, |i, j| v[i + j * d])
}
