//! Closed-form side: moment equations of the bare squeezed resonator, their
//! steady states and regression-theorem correlators, integrated photon noise
//! and the analytic spin rates.

use faer::prelude::Solve;
use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{expm, CorrelationSeries};
use crate::model::{squeezed_frame_params, BathSpec, ModelParams};

const MAX_EIGVEC_COND: f64 = 1e12;

/// Normal-ordered resonator moments used as basis labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MomentLabel {
    N,
    A,
    Ad,
    A2,
    Ad2,
    Ad2A2,
    Ad3A,
    AdA3,
    A4,
    Ad4,
    Identity,
}

impl MomentLabel {
    pub fn name(self) -> &'static str {
        match self {
            MomentLabel::N => "n",
            MomentLabel::A => "a",
            MomentLabel::Ad => "a_dag",
            MomentLabel::A2 => "a^2",
            MomentLabel::Ad2 => "a_dag^2",
            MomentLabel::Ad2A2 => "a_dag^2 a^2",
            MomentLabel::Ad3A => "a_dag^3 a",
            MomentLabel::AdA3 => "a_dag a^3",
            MomentLabel::A4 => "a^4",
            MomentLabel::Ad4 => "a_dag^4",
            MomentLabel::Identity => "1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentOrder {
    Quadratic4,
    Quartic9,
}

/// Linear equations of motion `d<O_i>/dt = sum_j G_ij <O_j>` over a fixed basis.
#[derive(Debug, Clone)]
pub struct MomentSystem {
    basis: Vec<MomentLabel>,
    generator: Mat<c64>,
    params: ModelParams,
    bath: BathSpec,
    order: MomentOrder,
}

const QUARTIC_BASIS: [MomentLabel; 9] = [
    MomentLabel::N,
    MomentLabel::A2,
    MomentLabel::Ad2,
    MomentLabel::Ad2A2,
    MomentLabel::Ad3A,
    MomentLabel::AdA3,
    MomentLabel::A4,
    MomentLabel::Ad4,
    MomentLabel::Identity,
];

impl MomentSystem {
    pub fn basis(&self) -> &[MomentLabel] {
        &self.basis
    }

    pub fn generator(&self) -> &Mat<c64> {
        &self.generator
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn order(&self) -> MomentOrder {
        self.order
    }

    pub fn index_of(&self, label: MomentLabel) -> Option<usize> {
        self.basis.iter().position(|&l| l == label)
    }

    /// Generator restricted to the non-identity moments.
    fn dynamic_block(&self) -> (Mat<c64>, Vec<c64>) {
        let m = self.basis.len() - 1;
        let g = Mat::from_fn(m, m, |i, j| self.generator[(i, j)]);
        let drive = (0..m).map(|i| self.generator[(i, m)]).collect();
        (g, drive)
    }
}

fn from_rows(rows: &[&[c64]]) -> Mat<c64> {
    Mat::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
}

/// Moment generator of the bare resonator (`G` over `(n, a^2, a^dag^2, 1)`,
/// `(n, a, a^dag, 1)` for the coherent drive, or `M` over the quartic basis).
pub fn moment_generator(p: &ModelParams, bath: &BathSpec, order: MomentOrder) -> Result<MomentSystem> {
    if p.g != 0.0 {
        return Err(Error::Unsupported("moment closure holds only for the uncoupled resonator (g = 0)".into()));
    }
    p.validate()?;
    bath.validate()?;
    let (w, l, k) = (p.omega_r_t, p.lambda, p.kappa);
    let z = c64::new(0.0, 0.0);
    let re = |x: f64| c64::new(x, 0.0);
    let im = |x: f64| c64::new(0.0, x);
    let (basis, generator) = match (order, bath) {
        (MomentOrder::Quadratic4, BathSpec::Vacuum | BathSpec::Thermal { .. }) => {
            let source = match bath {
                BathSpec::Thermal { n_bar } => re(k * n_bar),
                _ => z,
            };
            let g = from_rows(&[
                &[re(-k), im(-l), im(l), source],
                &[im(2.0 * l), c64::new(-k, -2.0 * w), z, im(l)],
                &[im(-2.0 * l), z, c64::new(-k, 2.0 * w), im(-l)],
                &[z, z, z, z],
            ]);
            (vec![MomentLabel::N, MomentLabel::A2, MomentLabel::Ad2, MomentLabel::Identity], g)
        }
        (MomentOrder::Quadratic4, BathSpec::CoherentDrive { alpha }) => {
            let alpha = *alpha;
            let g = from_rows(&[
                &[re(-k), alpha.conj() * (0.5 * k), alpha * (0.5 * k), z],
                &[z, re(-0.5 * k), z, alpha * (0.5 * k)],
                &[z, z, re(-0.5 * k), alpha.conj() * (0.5 * k)],
                &[z, z, z, z],
            ]);
            (vec![MomentLabel::N, MomentLabel::A, MomentLabel::Ad, MomentLabel::Identity], g)
        }
        (MomentOrder::Quartic9, BathSpec::Vacuum) => {
            let g = from_rows(&[
                &[re(-k), im(-l), im(l), z, z, z, z, z, z],
                &[im(2.0 * l), c64::new(-k, -2.0 * w), z, z, z, z, z, z, im(l)],
                &[im(-2.0 * l), z, c64::new(-k, 2.0 * w), z, z, z, z, z, im(-l)],
                &[z, im(-l), im(l), re(-2.0 * k), im(2.0 * l), im(-2.0 * l), z, z, z],
                &[im(-3.0 * l), z, z, im(-3.0 * l), c64::new(-2.0 * k, 2.0 * w), z, z, im(l), z],
                &[im(3.0 * l), z, z, im(3.0 * l), z, c64::new(-2.0 * k, -2.0 * w), im(-l), z, z],
                &[z, im(6.0 * l), z, z, z, im(4.0 * l), c64::new(-2.0 * k, -4.0 * w), z, z],
                &[z, z, im(-6.0 * l), z, im(-4.0 * l), z, z, c64::new(-2.0 * k, 4.0 * w), z],
                &[z, z, z, z, z, z, z, z, z],
            ]);
            (QUARTIC_BASIS.to_vec(), g)
        }
        (order, bath) => {
            return Err(Error::Unsupported(format!("no {order:?} moment system for the {} bath", bath.name())));
        }
    };
    Ok(MomentSystem { basis, generator, params: *p, bath: *bath, order })
}

/// Steady expectation values over the basis, with `<1> = 1`.
pub fn steady_moments(sys: &MomentSystem) -> Result<Vec<c64>> {
    let (g, drive) = sys.dynamic_block();
    let m = g.nrows();
    let lu = g.partial_piv_lu();
    let u = lu.U();
    let pivots: Vec<f64> = (0..m).map(|i| u[(i, i)].norm()).collect();
    let big = pivots.iter().cloned().fold(0.0, f64::max);
    let small = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(small > 1e-13 * big) {
        return Err(Error::MomentInstability);
    }
    let rhs = Mat::from_fn(m, 1, |i, _| -drive[i]);
    let x = lu.solve(&rhs);
    let mut out: Vec<c64> = (0..m).map(|i| x[(i, 0)]).collect();
    out.push(c64::new(1.0, 0.0));
    Ok(out)
}

/// Quartic steady moments in the order of the quartic basis.
fn quartic_moments(p: &ModelParams, bath: &BathSpec) -> Result<[c64; 9]> {
    let p0 = ModelParams { g: 0.0, ..*p };
    let v = match *bath {
        BathSpec::Vacuum => steady_moments(&moment_generator(&p0, bath, MomentOrder::Quartic9)?)?,
        BathSpec::Thermal { n_bar } if p.lambda == 0.0 => {
            let mut v = vec![c64::new(0.0, 0.0); 9];
            v[0] = c64::new(n_bar, 0.0);
            v[3] = c64::new(2.0 * n_bar * n_bar, 0.0);
            v[8] = c64::new(1.0, 0.0);
            v
        }
        _ => return Err(Error::Unsupported(format!("quartic moments for the {} bath with lambda = {}", bath.name(), p.lambda))),
    };
    Ok(v.try_into().expect("nine moments"))
}

/// `<O_i O_k>` for `O = (n, a^2, a^dag^2)`, rewritten in normal order.
fn product_table(q: &[c64; 9]) -> [[c64; 3]; 3] {
    let [n, a2, ad2, n22, n31, n13, a4, ad4, _] = *q;
    let two = c64::new(2.0, 0.0);
    [
        [n22 + n, n13, n31 + two * ad2],
        [n13 + two * a2, a4, n22 + n * 4.0 + two],
        [n31, n22, ad4],
    ]
}

/// `tau -> <O_i(tau) seed(0)>` from the regression theorem,
/// `x(tau) = x_inf + exp(G tau)(x(0) - x_inf)`.
#[derive(Debug, Clone)]
pub struct QrtCorrelator {
    labels: Vec<MomentLabel>,
    seed: MomentLabel,
    block: Mat<c64>,
    x0: Vec<c64>,
    x_inf: Vec<c64>,
    eig: Option<(Vec<c64>, Mat<c64>, Vec<c64>)>,
}

impl QrtCorrelator {
    pub fn labels(&self) -> &[MomentLabel] {
        &self.labels
    }

    pub fn seed(&self) -> MomentLabel {
        self.seed
    }

    pub fn initial(&self) -> &[c64] {
        &self.x0
    }

    pub fn asymptote(&self) -> &[c64] {
        &self.x_inf
    }

    pub fn is_diagonalized(&self) -> bool {
        self.eig.is_some()
    }

    pub fn eval(&self, tau: f64) -> Vec<c64> {
        let m = self.x0.len();
        match &self.eig {
            Some((vals, v, coef)) => (0..m)
                .map(|i| self.x_inf[i] + (0..m).map(|k| v[(i, k)] * coef[k] * (vals[k] * tau).exp()).sum::<c64>())
                .collect(),
            None => {
                let e = expm(&self.block, tau);
                (0..m).map(|i| self.x_inf[i] + (0..m).map(|k| e[(i, k)] * (self.x0[k] - self.x_inf[k])).sum::<c64>()).collect()
            }
        }
    }

    /// Time derivative predicted by the generator, `G (x - x_inf)`.
    pub fn derivative(&self, x: &[c64]) -> Vec<c64> {
        let m = x.len();
        (0..m).map(|i| (0..m).map(|k| self.block[(i, k)] * (x[k] - self.x_inf[k])).sum()).collect()
    }

    fn position(&self, label: MomentLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| Error::Unsupported(format!("{} is not in the correlator basis", label.name())))
    }

    pub fn series(&self, label: MomentLabel, tau: &[f64]) -> Result<CorrelationSeries> {
        let i = self.position(label)?;
        let values = tau.iter().map(|&t| self.eval(t)[i]).collect();
        CorrelationSeries::new(tau.to_vec(), values, label.name(), self.seed.name())
    }

    /// `int_0^inf (x(tau) - x_inf) dtau = -G^{-1}(x(0) - x_inf)` for every component.
    pub fn fluctuation_integrals(&self) -> Vec<c64> {
        let m = self.x0.len();
        let rhs = Mat::from_fn(m, 1, |i, _| self.x_inf[i] - self.x0[i]);
        let y = self.block.partial_piv_lu().solve(&rhs);
        (0..m).map(|i| y[(i, 0)]).collect()
    }
}

/// Regression-theorem correlators `<O_i(tau) seed(0)>` for a quadratic
/// moment system; the seed must be one of its non-identity moments.
pub fn qrt_correlation_closed(sys: &MomentSystem, seed: MomentLabel) -> Result<QrtCorrelator> {
    if sys.order != MomentOrder::Quadratic4 {
        return Err(Error::Unsupported("regression correlators use the quadratic system".into()));
    }
    let mean = steady_moments(sys)?;
    let m = sys.basis.len() - 1;
    let labels = sys.basis[..m].to_vec();
    let k = labels
        .iter()
        .position(|&l| l == seed)
        .ok_or_else(|| Error::Unsupported(format!("seed {} is not in the basis", seed.name())))?;
    let x0: Vec<c64> = match sys.bath {
        BathSpec::CoherentDrive { alpha } => {
            if seed != MomentLabel::N {
                return Err(Error::Unsupported("coherent correlators are seeded by n".into()));
            }
            let n = alpha.norm_sqr();
            vec![c64::new(n * n + n, 0.0), alpha * (n + 1.0), alpha.conj() * n]
        }
        _ => {
            let table = product_table(&quartic_moments(&sys.params, &sys.bath)?);
            (0..m).map(|i| table[i][k]).collect()
        }
    };
    let x_inf: Vec<c64> = (0..m).map(|i| mean[i] * mean[k]).collect();
    let (block, _) = sys.dynamic_block();

    let eig = block.eigen().ok().and_then(|e| {
        let v = e.U().to_owned();
        let vals: Vec<c64> = (0..m).map(|j| e.S().column_vector()[j]).collect();
        let vinv = v.partial_piv_lu().solve(&Mat::<c64>::identity(m, m));
        let cond = v.norm_l2() * vinv.norm_l2();
        if !(cond.is_finite() && cond <= MAX_EIGVEC_COND) {
            return None;
        }
        let d = Mat::from_fn(m, 1, |i, _| x0[i] - x_inf[i]);
        let c = &vinv * &d;
        Some((vals, v, (0..m).map(|j| c[(j, 0)]).collect()))
    });
    Ok(QrtCorrelator { labels, seed, block, x0, x_inf, eig })
}

/// Weights of `(n, a^2, a^dag^2)` in the effective occupation that shifts the
/// spin frequency.
pub fn effective_occupation_weights(p: &ModelParams) -> Result<[f64; 3]> {
    let sq = squeezed_frame_params(p)?;
    let den = p.omega_s_t + sq.omega_r;
    Ok([(p.omega_s_t + p.omega_r_t) / den, -0.5 * p.lambda / den, -0.5 * p.lambda / den])
}

/// Integrated fluctuation spectra at zero frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseIntegrals {
    /// `int <dn(tau) dn(0)> dtau` over the whole real line.
    pub eta: f64,
    /// Same for the effective occupation.
    pub eta_tilde: f64,
}

fn bracket(p: &ModelParams, omega_r: f64) -> f64 {
    let (w, ws, k) = (p.omega_r_t, p.omega_s_t, p.kappa);
    let q = 4.0 * omega_r * omega_r + k * k;
    (2.0 * omega_r * omega_r + k * k) / q
        + 4.0 * w * ws * (4.0 * omega_r * omega_r + 3.0 * k * k) / (q * q)
        + 2.0 * ws * ws * (4.0 * w * w + k * k) * (4.0 * omega_r * omega_r + 5.0 * k * k) / (q * q * q)
}

/// Closed-form noise integrals for the bare resonator.
pub fn integrated_noise(p: &ModelParams, bath: &BathSpec) -> Result<NoiseIntegrals> {
    if !(p.kappa > 0.0) {
        return Err(Error::DivergentNoise);
    }
    let p = ModelParams { g: 0.0, ..*p };
    p.validate()?;
    bath.validate()?;
    let k = p.kappa;
    let unsqueezed = |what: &str| -> Result<()> {
        if p.lambda != 0.0 {
            return Err(Error::Unsupported(format!("{what} noise integral needs lambda = 0")));
        }
        Ok(())
    };
    match *bath {
        BathSpec::Vacuum => {
            let (w, l) = (p.omega_r_t, p.lambda);
            let sq = squeezed_frame_params(&p)?;
            let d = 4.0 * w * w + k * k - 4.0 * l * l;
            let eta = 2.0 * l * l * (4.0 * w * w + k * k) * (4.0 * w * w + 5.0 * k * k - 4.0 * l * l) / (k * d.powi(3));
            let eta_tilde = l * l / (k * (sq.omega_r + p.omega_s_t).powi(2)) * bracket(&p, sq.omega_r);
            Ok(NoiseIntegrals { eta, eta_tilde })
        }
        BathSpec::Thermal { n_bar } => {
            unsqueezed("thermal")?;
            let eta = 2.0 * (n_bar * n_bar + n_bar) / k;
            Ok(NoiseIntegrals { eta, eta_tilde: eta })
        }
        BathSpec::CoherentDrive { alpha } => {
            unsqueezed("coherent")?;
            let eta = 4.0 * alpha.norm_sqr() / k;
            Ok(NoiseIntegrals { eta, eta_tilde: eta })
        }
        BathSpec::SqueezedVacuumReference => Err(Error::Unsupported("no noise integral for the reference bath".into())),
    }
}

/// The three regression correlators seeded by `n`, `a^2` and `a^dag^2`.
fn seeded_correlators(p: &ModelParams, bath: &BathSpec) -> Result<Vec<QrtCorrelator>> {
    let sys = moment_generator(&ModelParams { g: 0.0, ..*p }, bath, MomentOrder::Quadratic4)?;
    [MomentLabel::N, MomentLabel::A2, MomentLabel::Ad2].iter().map(|&s| qrt_correlation_closed(&sys, s)).collect()
}

/// `<d n_eff(tau) d n_eff(0)>` on a grid, built from the regression correlators.
pub fn effective_occupation_correlation(p: &ModelParams, tau: &[f64]) -> Result<CorrelationSeries> {
    let c = effective_occupation_weights(p)?;
    let corr = seeded_correlators(p, &BathSpec::Vacuum)?;
    let values = tau
        .iter()
        .map(|&t| {
            corr.iter()
                .zip(c)
                .map(|(q, ck)| {
                    let x = q.eval(t);
                    let xi = q.asymptote();
                    (0..3).map(|i| (x[i] - xi[i]) * c[i]).sum::<c64>() * ck
                })
                .sum()
        })
        .collect();
    CorrelationSeries::new(tau.to_vec(), values, "n_eff", "n_eff")
}

/// `eta_tilde` from exact integration of the regression correlators.
pub fn eta_tilde_from_correlators(p: &ModelParams) -> Result<f64> {
    let c = effective_occupation_weights(p)?;
    let corr = seeded_correlators(p, &BathSpec::Vacuum)?;
    let total: c64 = corr
        .iter()
        .zip(c)
        .map(|(q, ck)| q.fluctuation_integrals().iter().zip(c).map(|(y, ci)| y * ci).sum::<c64>() * ck)
        .sum();
    Ok(2.0 * total.re)
}

/// `<dn(tau) dn(0)>` on a grid from the regression theorem.
pub fn photon_fluctuation_correlation(p: &ModelParams, bath: &BathSpec, tau: &[f64]) -> Result<CorrelationSeries> {
    let sys = moment_generator(&ModelParams { g: 0.0, ..*p }, bath, MomentOrder::Quadratic4)?;
    let q = qrt_correlation_closed(&sys, MomentLabel::N)?;
    let values = tau.iter().map(|&t| q.eval(t)[0] - q.asymptote()[0]).collect();
    CorrelationSeries::new(tau.to_vec(), values, "dn", "dn")
}

/// Dispersive-regime rates of the spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticRates {
    pub delta: f64,
    pub chi_r: f64,
    pub chi_0: f64,
    pub c1: f64,
    pub c2: f64,
    pub dispersive_shift: f64,
    pub gamma_purcell: f64,
    pub gamma_phi_photon: f64,
    pub gamma_total: f64,
    /// `|Delta| >= g`; otherwise the perturbative expansion is unreliable.
    pub reliable: bool,
}

/// Rates for the vacuum-driven squeezed resonator.
pub fn analytic_rates(p: &ModelParams) -> Result<AnalyticRates> {
    p.validate()?;
    let sq = squeezed_frame_params(p)?;
    let (ws, w, l, k, g) = (p.omega_s_t, p.omega_r_t, p.lambda, p.kappa, p.g);
    let delta = ws - sq.omega_r;
    if delta == 0.0 {
        return Err(Error::ResonanceDivergence);
    }
    let chi_r = g * g / delta;
    let chi_0 = g * g / (ws - w);
    let c1 = g / delta * (ws + w) / (ws + sq.omega_r);
    let c2 = g / delta * l / (ws + sq.omega_r);
    let om2 = sq.omega_r * sq.omega_r;
    let dispersive_shift = g * g / (ws * ws - om2) * (4.0 * l * l * ws / (4.0 * om2 + k * k) + w + ws);
    let gamma_purcell = k * (c1 * c1 + c2 * c2);
    let gamma_phi_photon = 2.0 * chi_r * chi_r * integrated_noise(p, &BathSpec::Vacuum)?.eta_tilde;
    Ok(AnalyticRates {
        delta,
        chi_r,
        chi_0,
        c1,
        c2,
        dispersive_shift,
        gamma_purcell,
        gamma_phi_photon,
        gamma_total: 0.5 * gamma_purcell + gamma_phi_photon,
        reliable: delta.abs() >= g,
    })
}

/// Photon-noise dephasing `4 chi^2 (n^2 + n) / kappa` from a thermal bath.
pub fn thermal_dephasing(chi: f64, n_bar: f64, kappa: f64) -> f64 {
    4.0 * chi * chi * (n_bar * n_bar + n_bar) / kappa
}

/// Photon-noise dephasing `8 chi^2 n / kappa` from a coherent drive.
pub fn coherent_dephasing(chi: f64, n_bar: f64, kappa: f64) -> f64 {
    8.0 * chi * chi * n_bar / kappa
}

/// [`analytic_rates`] with the dephasing term taken for the given bath.
pub fn analytic_rates_for_bath(p: &ModelParams, bath: &BathSpec) -> Result<AnalyticRates> {
    let mut rates = analytic_rates(p)?;
    rates.gamma_phi_photon = match *bath {
        BathSpec::Vacuum => rates.gamma_phi_photon,
        BathSpec::Thermal { n_bar } if p.lambda == 0.0 => thermal_dephasing(rates.chi_0, n_bar, p.kappa),
        BathSpec::CoherentDrive { alpha } if p.lambda == 0.0 => coherent_dephasing(rates.chi_0, alpha.norm_sqr(), p.kappa),
        _ => return Err(Error::Unsupported(format!("analytic rates for the {} bath with lambda = {}", bath.name(), p.lambda))),
    };
    rates.gamma_total = 0.5 * rates.gamma_purcell + rates.gamma_phi_photon;
    Ok(rates)
}
