//! One-sided Laplace transforms `F(s) = c^T (s - L)^{-1} x` by shift-invert
//! Arnoldi.
//!
//! With `T = (L - sigma)^{-1}` and `w = T x`, the Arnoldi relation
//! `T V = V H + h v e^T` gives, for `mu = s - sigma`,
//! `(s - L)^{-1} x ~ -beta V (I - mu H)^{-1} e1`. One factorization of
//! `L - sigma` therefore serves every frequency near `sigma`, and each
//! evaluation is a small Hessenberg solve. The Ritz values `sigma + 1/theta`
//! approximate the generator eigenvalues closest to the shift.

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::Solve;
use faer::{c64, Mat};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub initial_dim: usize,
    pub max_dim: usize,
    /// Target relative residual of the shifted linear systems.
    pub tol: f64,
    /// How many times a frequency window may be bisected when one shift does
    /// not converge across it.
    pub max_splits: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { initial_dim: 40, max_dim: 240, tol: 1e-9, max_splits: 6 }
    }
}

/// A pole of the transform: `F(s) ~ sum residue / (s - eigenvalue)`.
#[derive(Debug, Clone, Copy)]
pub struct RitzPole {
    pub eigenvalue: c64,
    pub residue: c64,
}

impl RitzPole {
    /// Height of `2 Re F` at the pole frequency.
    pub fn peak_height(&self) -> f64 {
        2.0 * self.residue.re / self.eigenvalue.re.abs().max(f64::MIN_POSITIVE)
    }
}

/// Shift-invert Arnoldi state for a fixed generator, source and functional.
pub struct ResolventEvaluator<'a> {
    lu: PartialPivLu<c64>,
    shift: c64,
    source: &'a Mat<c64>,
    functional: &'a [c64],
    beta: f64,
    basis: Vec<Mat<c64>>,
    hess: Vec<Vec<c64>>,
    proj: Vec<c64>,
    breakdown: bool,
}

impl<'a> ResolventEvaluator<'a> {
    /// Factor `L - shift` and start the Krylov space from `(L - shift)^{-1} x`.
    pub fn new(generator: &Mat<c64>, source: &'a Mat<c64>, functional: &'a [c64], shift: c64) -> Result<Self> {
        let n = generator.nrows();
        if source.nrows() != n || functional.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: source.nrows().min(functional.len()) });
        }
        let mut shifted = generator.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let lu = shifted.partial_piv_lu();
        let w = lu.solve(source);
        let beta = w.norm_l2();
        let mut ev = Self {
            lu,
            shift,
            source,
            functional,
            beta,
            basis: Vec::new(),
            hess: Vec::new(),
            proj: Vec::new(),
            breakdown: beta == 0.0,
        };
        if beta > 0.0 {
            ev.push_basis(&w * faer::Scale(c64::new(1.0 / beta, 0.0)));
        }
        Ok(ev)
    }

    pub fn shift(&self) -> c64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.hess.len()
    }

    fn push_basis(&mut self, v: Mat<c64>) {
        let p: c64 = (0..v.nrows()).map(|i| self.functional[i] * v[(i, 0)]).sum();
        self.proj.push(p);
        self.basis.push(v);
    }

    /// Grow the Arnoldi factorization to dimension `m`.
    pub fn extend_to(&mut self, m: usize) {
        let n = self.source.nrows();
        let m = m.min(n);
        while !self.breakdown && self.hess.len() < m {
            let j = self.hess.len();
            let mut u = self.lu.solve(&self.basis[j]);
            let mut h = vec![c64::new(0.0, 0.0); j + 2];
            // classical Gram-Schmidt, applied twice
            for _ in 0..2 {
                for (k, v) in self.basis.iter().enumerate() {
                    let mut dot = c64::new(0.0, 0.0);
                    for i in 0..n {
                        dot += v[(i, 0)].conj() * u[(i, 0)];
                    }
                    h[k] += dot;
                    for i in 0..n {
                        let vi = v[(i, 0)];
                        u[(i, 0)] -= vi * dot;
                    }
                }
            }
            let norm = u.norm_l2();
            h[j + 1] = c64::new(norm, 0.0);
            self.hess.push(h);
            if norm <= 1e-14 * self.beta.max(1.0) {
                self.breakdown = true;
            } else {
                self.push_basis(&u * faer::Scale(c64::new(1.0 / norm, 0.0)));
            }
        }
    }

    fn h_entry(&self, i: usize, j: usize) -> c64 {
        self.hess[j].get(i).copied().unwrap_or(c64::new(0.0, 0.0))
    }

    /// `F(s)` and the relative residual estimate of the underlying solve.
    pub fn eval(&self, s: c64) -> (c64, f64) {
        let m = self.hess.len();
        if m == 0 {
            return (c64::new(0.0, 0.0), 0.0);
        }
        let mu = s - self.shift;
        // (I - mu H_m) y = e1, upper Hessenberg elimination with row pivoting
        let mut a: Vec<Vec<c64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let d = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
                        d - mu * self.h_entry(i, j)
                    })
                    .collect()
            })
            .collect();
        let mut rhs = vec![c64::new(0.0, 0.0); m];
        rhs[0] = c64::new(1.0, 0.0);
        for k in 0..m.saturating_sub(1) {
            if a[k + 1][k].norm() > a[k][k].norm() {
                a.swap(k, k + 1);
                rhs.swap(k, k + 1);
            }
            if a[k][k].norm() == 0.0 {
                continue;
            }
            let f = a[k + 1][k] / a[k][k];
            if f.norm() != 0.0 {
                for j in k..m {
                    let t = a[k][j];
                    a[k + 1][j] -= f * t;
                }
                let t = rhs[k];
                rhs[k + 1] -= f * t;
            }
        }
        let mut y = vec![c64::new(0.0, 0.0); m];
        for i in (0..m).rev() {
            let mut acc = rhs[i];
            for j in i + 1..m {
                acc -= a[i][j] * y[j];
            }
            y[i] = acc / a[i][i];
        }
        let val: c64 = (0..m).map(|k| self.proj[k] * y[k]).sum::<c64>() * (-self.beta);
        let res = if self.breakdown { 0.0 } else { mu.norm() * self.h_entry(m, m - 1).norm() * y[m - 1].norm() };
        (val, res)
    }

    /// Ritz approximations of the generator eigenvalues nearest the shift,
    /// with their residues in the transform.
    pub fn poles(&self) -> Result<Vec<RitzPole>> {
        let m = self.hess.len();
        if m == 0 {
            return Ok(Vec::new());
        }
        let hm = Mat::from_fn(m, m, |i, j| self.h_entry(i, j));
        let eig = hm.eigen().map_err(|e| Error::Convergence(format!("Ritz eigenproblem: {e:?}")))?;
        let u = eig.U().to_owned();
        let theta: Vec<c64> = (0..m).map(|k| eig.S().column_vector()[k]).collect();
        let e1 = Mat::from_fn(m, 1, |i, _| if i == 0 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
        let left = u.partial_piv_lu().solve(&e1);
        let mut out = Vec::with_capacity(m);
        for k in 0..m {
            if theta[k].norm() == 0.0 {
                continue;
            }
            let gu: c64 = (0..m).map(|i| self.proj[i] * u[(i, k)]).sum();
            out.push(RitzPole {
                eigenvalue: self.shift + theta[k].inv(),
                residue: gu * left[(k, 0)] * self.beta / theta[k],
            });
        }
        Ok(out)
    }
}

/// Evaluate `F(s_k)` on a list of points near the imaginary axis, adding
/// Krylov vectors until every point meets the residual target and bisecting
/// the list with fresh shifts when one shift is not enough.
pub fn transform_on_points(
    generator: &Mat<c64>,
    source: &Mat<c64>,
    functional: &[c64],
    points: &[c64],
    opts: &KrylovOptions,
) -> Result<Vec<c64>> {
    let mut out = vec![c64::new(0.0, 0.0); points.len()];
    fill_segment(generator, source, functional, points, &mut out, opts, opts.max_splits)?;
    Ok(out)
}

fn fill_segment(
    generator: &Mat<c64>,
    source: &Mat<c64>,
    functional: &[c64],
    points: &[c64],
    out: &mut [c64],
    opts: &KrylovOptions,
    splits_left: usize,
) -> Result<()> {
    if points.is_empty() {
        return Ok(());
    }
    let lo = points.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.im).fold(f64::NEG_INFINITY, f64::max);
    let shift = c64::new(0.0, 0.5 * (lo + hi));
    let mut ev = ResolventEvaluator::new(generator, source, functional, shift)?;
    let mut m = opts.initial_dim.min(generator.nrows());
    loop {
        ev.extend_to(m);
        let vals: Vec<(c64, f64)> = points.iter().map(|&s| ev.eval(s)).collect();
        let worst = vals.iter().map(|v| v.1).fold(0.0, f64::max);
        if worst <= opts.tol || ev.breakdown {
            for (o, v) in out.iter_mut().zip(vals) {
                *o = v.0;
            }
            return Ok(());
        }
        if m >= opts.max_dim.min(generator.nrows()) {
            if splits_left == 0 || points.len() < 2 {
                return Err(Error::Convergence(format!(
                    "Krylov resolvent residual {worst:.2e} above {:.1e} at dimension {m}",
                    opts.tol
                )));
            }
            let mid = points.len() / 2;
            let (p1, p2) = points.split_at(mid);
            let (o1, o2) = out.split_at_mut(mid);
            fill_segment(generator, source, functional, p1, o1, opts, splits_left - 1)?;
            return fill_segment(generator, source, functional, p2, o2, opts, splits_left - 1);
        }
        m = (2 * m).min(opts.max_dim.min(generator.nrows()));
    }
}
