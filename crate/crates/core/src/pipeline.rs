//! Per-point studies: steady state plus spectra for one parameter set, and
//! the rows produced by the sweep commands.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use faer::c64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{
    liouvillian, power_spectrum, transform_on_points, two_time_correlation, CorrelationSeries, DensityOperator,
    trace_product, KrylovOptions, Liouvillian, Propagator, ResolventEvaluator, RitzPole, SteadySolver,
};
use crate::model::{
    build_system, photon_number, resonator_annihilation, spin_sx, squeezed_frame_params, BathSpec, Frame, ModelParams,
};
use crate::moments::{analytic_rates, integrated_noise, moment_generator, qrt_correlation_closed, MomentLabel, MomentOrder};
use crate::operators::{HilbertLayout, OperatorMatrix};
use crate::spectra::{anticrossing_features, find_peaks, find_rc_analytic, find_rc_spectral, linewidth, Spectrum, SpectrumTarget};

/// Largest rotating-frame truncation the truncation study will attempt.
pub const ROTATING_FRAME_MAX_FOCK: usize = 200;

/// A solved parameter point: generator plus steady state.
pub struct Session {
    params: ModelParams,
    bath: BathSpec,
    layout: HilbertLayout,
    liou: Liouvillian,
    rho: DensityOperator,
}

impl Session {
    /// Spin and resonator.
    pub fn new(p: &ModelParams, bath: &BathSpec) -> Result<Self> {
        Self::with_layout(p, bath, p.layout()?)
    }

    /// Bare resonator (requires `g = 0`).
    pub fn resonator_only(p: &ModelParams, bath: &BathSpec) -> Result<Self> {
        Self::with_layout(p, bath, p.resonator_layout()?)
    }

    pub fn with_layout(p: &ModelParams, bath: &BathSpec, layout: HilbertLayout) -> Result<Self> {
        let (h, ls) = build_system(p, bath, &layout)?;
        let liou = liouvillian(&h, &ls)?.with_parity(&layout.parity_signs());
        let rho = SteadySolver::new(&liou)?.steady_state()?;
        Ok(Self { params: *p, bath: *bath, layout, liou, rho })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn liouvillian(&self) -> &Liouvillian {
        &self.liou
    }

    pub fn steady(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn photon_number(&self) -> Result<f64> {
        Ok(self.rho.expect(&photon_number(&self.params, &self.layout)?).re)
    }

    fn resonator_ops(&self) -> Result<(OperatorMatrix, OperatorMatrix)> {
        let a = resonator_annihilation(&self.params, &self.layout)?;
        Ok((a.adjoint(), a))
    }

    /// `F(s) = int_0^inf <A(tau) B(0)> e^{-s tau} dtau` at each point.
    pub fn transform(&self, a: &OperatorMatrix, b: &OperatorMatrix, points: &[c64]) -> Result<Vec<c64>> {
        let x = b.mat() * self.rho.mat();
        let sector = self.liou.sector_of(&x);
        let gen = self.liou.sector_matrix(&sector);
        let src = sector.gather(&x);
        let fun = sector.trace_functional(a.mat());
        transform_on_points(&gen, &src, &fun, points, &KrylovOptions::default())
    }

    /// `S_r(w) = 2 Re int_0^inf <a^dag(tau) a(0)> e^{-i w tau} dtau`.
    pub fn resonator_spectrum(&self, omega: &[f64]) -> Result<Spectrum> {
        let (ad, a) = self.resonator_ops()?;
        let pts: Vec<c64> = omega.iter().map(|&w| c64::new(0.0, w)).collect();
        let f = self.transform(&ad, &a, &pts)?;
        Spectrum::new(omega.to_vec(), f.iter().map(|v| 2.0 * v.re).collect(), SpectrumTarget::Resonator)
    }

    /// Spin spectrum from `<sigma_x(tau) sigma_x(0)>`, transformed with
    /// `e^{+i w tau}` so that the spin line sits at `+omega_s`.
    pub fn spin_spectrum(&self, omega: &[f64]) -> Result<Spectrum> {
        let sx = spin_sx(&self.layout)?;
        let pts: Vec<c64> = omega.iter().map(|&w| c64::new(0.0, -w)).collect();
        let f = self.transform(&sx, &sx, &pts)?;
        Spectrum::new(omega.to_vec(), f.iter().map(|v| 2.0 * v.re).collect(), SpectrumTarget::Spin)
    }

    /// Dominant pole of the spin correlator near `omega_s`.
    pub fn spin_line(&self) -> Result<RitzPole> {
        let sx = spin_sx(&self.layout)?;
        let x = sx.mat() * self.rho.mat();
        let sector = self.liou.sector_of(&x);
        let gen = self.liou.sector_matrix(&sector);
        let src = sector.gather(&x);
        let fun = sector.trace_functional(sx.mat());
        let ws = self.params.omega_s_t;
        let mut ev = ResolventEvaluator::new(&gen, &src, &fun, c64::new(0.0, -ws))?;
        ev.extend_to(40);
        ev.poles()?
            .into_iter()
            .filter(|p| p.eigenvalue.re < 0.0 && (p.eigenvalue.im + ws).abs() < 0.5 * ws)
            .max_by(|a, b| a.peak_height().abs().total_cmp(&b.peak_height().abs()))
            .ok_or(Error::NoPeaks)
    }

    /// Spin spectrum on the window `line +- 20 half-widths`.
    pub fn spin_spectrum_auto(&self, points: usize) -> Result<Spectrum> {
        let pole = self.spin_line()?;
        let center = -pole.eigenvalue.im;
        let half = 20.0 * pole.eigenvalue.re.abs();
        self.spin_spectrum(&linspace(center - half, center + half, points))
    }

    /// `<A(tau) B(0)>` by propagation of `B rho`.
    pub fn correlation(&self, a: &OperatorMatrix, b: &OperatorMatrix, tau: &[f64]) -> Result<CorrelationSeries> {
        two_time_correlation(&self.liou, a, b, &self.rho, tau)
    }

    /// Resonator spectrum by time-domain quadrature of the propagated
    /// correlator; used to cross-check the resolvent path.
    pub fn resonator_spectrum_time_domain(&self, tau: &[f64], omega: &[f64]) -> Result<Spectrum> {
        let (ad, a) = self.resonator_ops()?;
        let series = self.correlation(&ad, &a, tau)?;
        let s = power_spectrum(&series, omega)?;
        Spectrum::new(s.omega, s.values, SpectrumTarget::Resonator)
    }

    /// Photon-number noise `int_{-inf}^{inf} <dn(tau) dn(0)> dtau` from one
    /// linear solve, `-2 Re Tr[n L^{-1} (n - <n>) rho]`.
    pub fn eta_exact(&self) -> Result<f64> {
        let n = photon_number(&self.params, &self.layout)?;
        let nbar = self.rho.expect(&n);
        let x = n.mat() * self.rho.mat() - self.rho.mat() * faer::Scale(nbar);
        let y = SteadySolver::new(&self.liou)?.solve_traceless(&x)?;
        let tr = trace_product(n.mat(), &y);
        Ok(-2.0 * tr.re)
    }

    /// Trapezoid integral of the propagated `<dn(tau) dn(0)>`.
    pub fn eta_time_domain(&self, tau: &[f64]) -> Result<f64> {
        let n = photon_number(&self.params, &self.layout)?;
        let nbar = self.rho.expect(&n);
        let x = n.mat() * self.rho.mat() - self.rho.mat() * faer::Scale(nbar);
        let prop = Propagator::for_operator(&self.liou, &x)?;
        let values = prop.correlation(n.mat(), &x, tau);
        CorrelationSeries::new(tau.to_vec(), values, "dn", "dn").map(|s| s.integral())
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Union of a broad window and a fine window around the spin frequency.
pub fn anticrossing_grid(p: &ModelParams, points: usize) -> Result<Vec<f64>> {
    let r = squeezed_frame_params(p)?.r;
    let ws = p.omega_s_t;
    let broad = (3.0 * p.kappa + 10.0 * p.g).min(0.9 * ws);
    let fine = (10.0 * p.g * r.cosh()).min(broad);
    let mut grid = linspace(ws - broad, ws + broad, points);
    grid.extend(linspace(ws - fine, ws + fine, points));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    Ok(grid)
}

/// Spin frequency that puts the squeezed mode on resonance at squeezing `r`.
pub fn resonant_spin_frequency(omega_r_t: f64, r: f64) -> f64 {
    omega_r_t / (2.0 * r).cosh()
}

#[derive(Debug, Clone, Serialize)]
pub struct AnticrossRow {
    pub r: f64,
    pub omega_s: f64,
    pub peak1: Option<f64>,
    pub peak2: Option<f64>,
    pub chi: Option<f64>,
    pub contrast: Option<f64>,
    pub n_photons: f64,
    pub note: Option<String>,
}

/// Resonator-spectrum features at one point.
pub fn anticross_point(p: &ModelParams, bath: &BathSpec, points: usize) -> Result<AnticrossRow> {
    let session = Session::new(p, bath)?;
    let s = session.resonator_spectrum(&anticrossing_grid(p, points)?)?;
    let f = anticrossing_features(&s)?;
    Ok(AnticrossRow {
        r: squeezed_frame_params(p)?.r,
        omega_s: p.omega_s_t,
        peak1: f.peak_positions.first().copied(),
        peak2: f.peak_positions.get(1).copied(),
        chi: f.chi,
        contrast: f.contrast,
        n_photons: session.photon_number()?,
        note: f.note,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftWidthRow {
    pub r: f64,
    pub shift_numeric: f64,
    pub shift_analytic: f64,
    /// Half width at half maximum of the spin line, the coherence decay rate.
    pub width_numeric: f64,
    pub gamma_total_analytic: f64,
    pub reliable: bool,
    pub resolution_limited: bool,
}

/// Spin-line shift and width from the spin spectrum next to the analytic rates.
pub fn shift_width_point(p: &ModelParams, points: usize) -> Result<ShiftWidthRow> {
    let rates = analytic_rates(p)?;
    let session = Session::new(p, &BathSpec::Vacuum)?;
    let s = session.spin_spectrum_auto(points)?;
    let peaks = find_peaks(&s)?;
    let top = peaks.first().ok_or(Error::NoPeaks)?;
    let lw = linewidth(&s)?;
    Ok(ShiftWidthRow {
        r: squeezed_frame_params(p)?.r,
        shift_numeric: top.omega - p.omega_s_t,
        shift_analytic: rates.dispersive_shift,
        width_numeric: 0.5 * lw.fwhm,
        gamma_total_analytic: rates.gamma_total,
        reliable: rates.reliable,
        resolution_limited: lw.resolution_limited,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub r: f64,
    pub kappa: f64,
    pub ratio_numeric: f64,
    pub ratio_analytic: f64,
    pub reliable: bool,
}

/// Shift-to-decoherence ratio from both pipelines.
pub fn ratio_point(p: &ModelParams, points: usize) -> Result<RatioRow> {
    let row = shift_width_point(p, points)?;
    Ok(RatioRow {
        r: row.r,
        kappa: p.kappa,
        ratio_numeric: row.shift_numeric / row.width_numeric,
        ratio_analytic: row.shift_analytic / row.gamma_total_analytic,
        reliable: row.reliable,
    })
}

/// Analytic shift-to-decoherence ratio.
pub fn ratio_analytic(p: &ModelParams) -> Result<f64> {
    let a = analytic_rates(p)?;
    Ok(a.dispersive_shift / a.gamma_total)
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationRow {
    pub r: f64,
    pub n_fock: usize,
    pub frame: Frame,
    pub eta_numeric: f64,
    pub eta_closed_form: f64,
}

/// Photon-number noise of the bare resonator at one truncation and frame.
pub fn truncation_point(p: &ModelParams) -> Result<TruncationRow> {
    if p.frame == Frame::Rotating && p.n_fock > ROTATING_FRAME_MAX_FOCK {
        return Err(Error::ResourceGuard(format!(
            "rotating frame with N = {} exceeds the limit of {ROTATING_FRAME_MAX_FOCK}; use the squeezed frame, which converges by N = 30",
            p.n_fock
        )));
    }
    let p0 = ModelParams { g: 0.0, ..*p };
    let closed = integrated_noise(&p0, &BathSpec::Vacuum)?.eta;
    let eta_numeric = if p0.lambda == 0.0 { 0.0 } else { Session::resonator_only(&p0, &BathSpec::Vacuum)?.eta_exact()? };
    Ok(TruncationRow {
        r: squeezed_frame_params(&p0)?.r,
        n_fock: p.n_fock,
        frame: p.frame,
        eta_numeric,
        eta_closed_form: closed,
    })
}

/// Spin spectra under the physical decay and under decay of the squeezed
/// mode, on the same grid, plus fingerprints of the two Hamiltonians.
pub struct FrameComparison {
    pub physical: Spectrum,
    pub reference: Spectrum,
    pub hamiltonian_hashes: (u64, u64),
}

pub fn frame_compare(p: &ModelParams, omega: &[f64]) -> Result<FrameComparison> {
    if p.frame != Frame::Squeezed {
        return Err(Error::Unsupported("frame comparison runs in the squeezed frame".into()));
    }
    let phys = Session::new(p, &BathSpec::Vacuum)?;
    let refr = Session::new(p, &BathSpec::SqueezedVacuumReference)?;
    Ok(FrameComparison {
        physical: phys.spin_spectrum(omega)?,
        reference: refr.spin_spectrum(omega)?,
        hamiltonian_hashes: (
            operator_fingerprint(phys.liouvillian().hamiltonian()),
            operator_fingerprint(refr.liouvillian().hamiltonian()),
        ),
    })
}

/// Hash of the exact bit patterns of an operator's entries.
pub fn operator_fingerprint(op: &OperatorMatrix) -> u64 {
    let mut h = DefaultHasher::new();
    op.dim().hash(&mut h);
    for z in op.entries_row_major() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

#[derive(Debug, Clone, Serialize)]
pub struct PhotonCorrelationRow {
    pub tau: f64,
    pub re_corr: f64,
    pub im_corr: f64,
    pub closed_form: f64,
}

/// `<n(tau) n(0)>` of the bare resonator from the master equation and from
/// the closed-form regression correlator.
pub fn photon_correlation(p: &ModelParams, bath: &BathSpec, tau: &[f64]) -> Result<Vec<PhotonCorrelationRow>> {
    let p0 = ModelParams { g: 0.0, ..*p };
    let session = Session::resonator_only(&p0, bath)?;
    let n = photon_number(&p0, session.layout())?;
    let numeric = session.correlation(&n, &n, tau)?;
    let sys = moment_generator(&p0, bath, MomentOrder::Quadratic4)?;
    let q = qrt_correlation_closed(&sys, MomentLabel::N)?;
    Ok(tau
        .iter()
        .zip(&numeric.values)
        .map(|(&t, v)| PhotonCorrelationRow { tau: t, re_corr: v.re, im_corr: v.im, closed_form: q.eval(t)[0].re })
        .collect())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RcEstimate {
    pub analytic: f64,
    pub spectral: Option<f64>,
}

/// Resonance squeezing from the closed form and from a scan of resonator
/// spectra over `r_grid`.
pub fn find_rc(p: &ModelParams, r_grid: &[f64], points: usize) -> Result<RcEstimate> {
    let analytic = find_rc_analytic(p)?;
    let spectral = if r_grid.is_empty() {
        None
    } else {
        let ws = p.omega_s_t;
        let half = (3.0 * p.kappa + 10.0 * p.g).min(0.9 * ws);
        let omega = linspace(ws - half, ws + half, points);
        Some(find_rc_spectral(r_grid, |r| {
            let q = p.with_r(r);
            Session::new(&q, &BathSpec::Vacuum)?.resonator_spectrum(&omega)
        })?)
    };
    Ok(RcEstimate { analytic, spectral })
}
