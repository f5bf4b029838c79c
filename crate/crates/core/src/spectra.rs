//! Spectral feature extraction: peaks, anticrossing gap and contrast,
//! Lorentzian linewidths and the resonance squeezing `r_c`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Which correlator a spectrum was computed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SpectrumTarget {
    /// `<a^dag(tau) a(0)>`.
    Resonator,
    /// `<sigma_x(tau) sigma_x(0)>`, reported at positive frequency.
    Spin,
    Custom(String),
}

impl SpectrumTarget {
    pub fn name(&self) -> &str {
        match self {
            SpectrumTarget::Resonator => "resonator",
            SpectrumTarget::Spin => "spin",
            SpectrumTarget::Custom(s) => s,
        }
    }
}

/// Real spectral density on an increasing frequency grid.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub target: SpectrumTarget,
}

impl Spectrum {
    pub fn new(omega: Vec<f64>, values: Vec<f64>, target: SpectrumTarget) -> Result<Self> {
        if omega.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: omega.len(), got: values.len() });
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter { name: "omega", reason: "grid must increase strictly".into() });
        }
        Ok(Self { omega, values, target })
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `-min/max`, the depth of negative lobes relative to the maximum.
    pub fn negativity(&self) -> f64 {
        let max = self.max_value();
        let min = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if max <= 0.0 {
            return 0.0;
        }
        (-min / max).max(0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * factor).collect(), ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub omega: f64,
    pub height: f64,
    /// Grid index of the sampled maximum.
    pub index: usize,
    pub prominence: f64,
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a == 0.0 || !a.is_finite() {
        return None;
    }
    let b = d1 - a * (x[0] + x[1]);
    let xv = -b / (2.0 * a);
    let yv = y[0] + (xv - x[0]) * (d1 + a * (xv - x[1]));
    (xv.is_finite() && yv.is_finite()).then_some((xv, yv))
}

fn refine(s: &Spectrum, i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= s.values.len() {
        return (s.omega[i], s.values[i]);
    }
    let x = [s.omega[i - 1], s.omega[i], s.omega[i + 1]];
    let y = [s.values[i - 1], s.values[i], s.values[i + 1]];
    match parabola_vertex(x, y) {
        Some((xv, yv)) if xv >= x[0] && xv <= x[2] => (xv, yv.max(y[1])),
        _ => (x[1], y[1]),
    }
}

fn prominence(v: &[f64], i: usize) -> f64 {
    let h = v[i];
    let mut left_min = h;
    for k in (0..i).rev() {
        if v[k] > h {
            break;
        }
        left_min = left_min.min(v[k]);
    }
    let mut right_min = h;
    for &x in &v[i + 1..] {
        if x > h {
            break;
        }
        right_min = right_min.min(x);
    }
    h - left_min.max(right_min)
}

/// Local maxima whose prominence exceeds `rel_threshold` times the global
/// maximum, refined by three-point quadratic interpolation and sorted by
/// height, highest first.
pub fn find_peaks_with(s: &Spectrum, rel_threshold: f64) -> Result<Vec<Peak>> {
    let v = &s.values;
    if v.len() < 64 {
        return Err(Error::InvalidParameter { name: "spectrum", reason: format!("need at least 64 samples, got {}", v.len()) });
    }
    let max = s.max_value();
    if !(max > 0.0) {
        return Ok(Vec::new());
    }
    let mut peaks = Vec::new();
    for i in 1..v.len() - 1 {
        if v[i] > v[i - 1] && v[i] >= v[i + 1] {
            let prom = prominence(v, i);
            if prom >= rel_threshold * max {
                let (omega, height) = refine(s, i);
                peaks.push(Peak { omega, height, index: i, prominence: prom });
            }
        }
    }
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
    Ok(peaks)
}

/// [`find_peaks_with`] at the default 1% prominence threshold.
pub fn find_peaks(s: &Spectrum) -> Result<Vec<Peak>> {
    find_peaks_with(s, 0.01)
}

/// Extracted features of one spectrum.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SpectrumFeatures {
    pub peak_positions: Vec<f64>,
    pub peak_heights: Vec<f64>,
    pub chi: Option<f64>,
    pub contrast: Option<f64>,
    pub linewidth: Option<f64>,
    pub shift: Option<f64>,
    /// Why a feature is absent, e.g. "unresolved".
    pub note: Option<String>,
}

/// Gap `chi` between the global maximum and the minimum between the two
/// dominant peaks, and contrast `1 - S_min/S_max`.
pub fn anticrossing_features(s: &Spectrum) -> Result<SpectrumFeatures> {
    let peaks = find_peaks(s)?;
    let mut out = SpectrumFeatures {
        peak_positions: peaks.iter().map(|p| p.omega).collect(),
        peak_heights: peaks.iter().map(|p| p.height).collect(),
        ..Default::default()
    };
    if peaks.len() < 2 {
        out.note = Some("unresolved".into());
        return Ok(out);
    }
    let (p1, p2) = (peaks[0], peaks[1]);
    let (lo, hi) = if p1.index < p2.index { (p1.index, p2.index) } else { (p2.index, p1.index) };
    let jmin = (lo..=hi).min_by(|&a, &b| s.values[a].total_cmp(&s.values[b])).expect("non-empty range");
    let (w_min, s_min) = {
        let (w, v) = refine_min(s, jmin);
        (w, v.max(0.0))
    };
    out.chi = Some((p1.omega - w_min).abs());
    out.contrast = Some((1.0 - s_min / p1.height).clamp(0.0, 1.0));
    Ok(out)
}

fn refine_min(s: &Spectrum, i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= s.values.len() {
        return (s.omega[i], s.values[i]);
    }
    let x = [s.omega[i - 1], s.omega[i], s.omega[i + 1]];
    let y = [s.values[i - 1], s.values[i], s.values[i + 1]];
    match parabola_vertex(x, y) {
        Some((xv, yv)) if xv >= x[0] && xv <= x[2] => (xv, yv.min(y[1])),
        _ => (x[1], y[1]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LinewidthMethod {
    LorentzianFit,
    HalfMaximum,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Linewidth {
    pub fwhm: f64,
    pub center: f64,
    pub height: f64,
    pub method: LinewidthMethod,
    /// RMS fit residual relative to the peak height.
    pub residual: f64,
    /// The line is narrower than three grid steps.
    pub resolution_limited: bool,
}

fn half_max_crossings(s: &Spectrum, i: usize, level: f64) -> (Option<f64>, Option<f64>) {
    let v = &s.values;
    let w = &s.omega;
    let mut left = None;
    for k in (0..i).rev() {
        if v[k] <= level {
            let t = (level - v[k]) / (v[k + 1] - v[k]);
            left = Some(w[k] + t * (w[k + 1] - w[k]));
            break;
        }
    }
    let mut right = None;
    for k in i + 1..v.len() {
        if v[k] <= level {
            let t = (v[k - 1] - level) / (v[k - 1] - v[k]);
            right = Some(w[k - 1] + t * (w[k] - w[k - 1]));
            break;
        }
    }
    (left, right)
}

fn lorentz(p: &[f64; 4], w: f64) -> f64 {
    let u = (w - p[1]) / p[2];
    p[0] / (1.0 + u * u) + p[3]
}

fn jac(p: &[f64; 4], w: f64) -> [f64; 4] {
    let u = (w - p[1]) / p[2];
    let den = 1.0 + u * u;
    [1.0 / den, 2.0 * p[0] * u / (p[2] * den * den), 2.0 * p[0] * u * u / (p[2] * den * den), 1.0]
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for c in 0..4 {
        let piv = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c] == 0.0 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let mut acc = b[r];
        for k in r + 1..4 {
            acc -= a[r][k] * x[k];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

/// Levenberg-Marquardt fit of `A / (1 + ((w - w0)/g)^2) + B`.
fn fit_lorentzian(w: &[f64], y: &[f64], init: [f64; 4]) -> ([f64; 4], f64) {
    let cost = |p: &[f64; 4]| w.iter().zip(y).map(|(&wi, &yi)| (lorentz(p, wi) - yi).powi(2)).sum::<f64>();
    let mut p = init;
    let mut c = cost(&p);
    let mut mu = 1e-3;
    for _ in 0..200 {
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (&wi, &yi) in w.iter().zip(y) {
            let j = jac(&p, wi);
            let r = yi - lorentz(&p, wi);
            for a in 0..4 {
                jtr[a] += j[a] * r;
                for b in 0..4 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut m = jtj;
            for a in 0..4 {
                m[a][a] += mu * jtj[a][a].max(1e-300);
            }
            let Some(dp) = solve4(m, jtr) else { break };
            let trial = [p[0] + dp[0], p[1] + dp[1], (p[2] + dp[2]).abs(), p[3] + dp[3]];
            let ct = cost(&trial);
            if ct.is_finite() && ct < c {
                let rel = (c - ct) / c.max(1e-300);
                p = trial;
                c = ct;
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                if rel < 1e-14 {
                    return (p, c);
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (p, c)
}

/// FWHM of the dominant peak from a Lorentzian least-squares fit over the
/// peak +- 3 half-widths, with the half-maximum crossing distance as the
/// fallback when the fit residual exceeds 5%.
pub fn linewidth(s: &Spectrum) -> Result<Linewidth> {
    let peaks = find_peaks(s)?;
    let n = s.values.len();
    let (imax, _) = s.values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).ok_or(Error::NoPeaks)?;
    if imax == 0 || imax + 1 == n {
        return Err(Error::PeakAtEdge);
    }
    let peak = peaks.into_iter().find(|p| p.index == imax).ok_or(Error::NoPeaks)?;
    let (left, right) = half_max_crossings(s, imax, 0.5 * s.values[imax]);
    let (Some(left), Some(right)) = (left, right) else {
        return Err(Error::PeakAtEdge);
    };
    let direct = right - left;
    let step = (s.omega[imax + 1] - s.omega[imax - 1]) / 2.0;
    let resolution_limited = direct < 3.0 * step;

    let half = 0.5 * direct;
    let (lo, hi) = (peak.omega - 3.0 * half, peak.omega + 3.0 * half);
    let idx: Vec<usize> = (0..n).filter(|&k| s.omega[k] >= lo && s.omega[k] <= hi).collect();
    let half_max_result = |residual: f64| Linewidth {
        fwhm: direct,
        center: peak.omega,
        height: peak.height,
        method: LinewidthMethod::HalfMaximum,
        residual,
        resolution_limited,
    };
    if idx.len() < 7 {
        return Ok(half_max_result(f64::NAN));
    }
    let w: Vec<f64> = idx.iter().map(|&k| s.omega[k]).collect();
    let y: Vec<f64> = idx.iter().map(|&k| s.values[k]).collect();
    let (p, cost) = fit_lorentzian(&w, &y, [peak.height, peak.omega, half, 0.0]);
    let residual = (cost / w.len() as f64).sqrt() / p[0].abs().max(f64::MIN_POSITIVE);
    if !(residual <= 0.05) || !(p[2] > 0.0) || p[1] < lo || p[1] > hi {
        return Ok(half_max_result(residual));
    }
    Ok(Linewidth {
        fwhm: 2.0 * p[2],
        center: p[1],
        height: p[0] + p[3],
        method: LinewidthMethod::LorentzianFit,
        residual,
        resolution_limited,
    })
}

/// Analytic resonance point `cosh(2 r_c) = omega_r / omega_s`.
pub fn find_rc_analytic(p: &ModelParams) -> Result<f64> {
    if !(p.omega_s_t < p.omega_r_t) || p.omega_s_t <= 0.0 {
        return Err(Error::NoCrossing { omega_s: p.omega_s_t, omega_r: p.omega_r_t });
    }
    Ok(0.5 * (p.omega_r_t / p.omega_s_t).acosh())
}

/// Spectral resonance point: the squeezing that minimises the splitting of
/// the two dominant peaks, refined by a parabola through the best three
/// samples. Points where fewer than two peaks are resolved are skipped.
pub fn find_rc_spectral(r_grid: &[f64], mut spectrum_at: impl FnMut(f64) -> Result<Spectrum>) -> Result<f64> {
    let mut gaps: Vec<(f64, f64)> = Vec::new();
    for &r in r_grid {
        let s = spectrum_at(r)?;
        let peaks = find_peaks(&s)?;
        if peaks.len() >= 2 {
            gaps.push((r, (peaks[0].omega - peaks[1].omega).abs()));
        }
    }
    let best = (0..gaps.len())
        .min_by(|&a, &b| gaps[a].1.total_cmp(&gaps[b].1))
        .ok_or_else(|| Error::Unresolved("no scan point shows two peaks".into()))?;
    if best == 0 || best + 1 == gaps.len() {
        return Ok(gaps[best].0);
    }
    let x = [gaps[best - 1].0, gaps[best].0, gaps[best + 1].0];
    let y = [gaps[best - 1].1, gaps[best].1, gaps[best + 1].1];
    Ok(match parabola_vertex(x, y) {
        Some((xv, _)) if xv >= x[0] && xv <= x[2] => xv,
        _ => x[1],
    })
}
