//! One function per subcommand. Each writes its files under the configured
//! output directory and reports how many sweep points failed.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use squeezespin::model::squeezed_frame_params;
use squeezespin::moments::analytic_rates_for_bath;
use squeezespin::pipeline::{
    anticross_point, anticrossing_grid, frame_compare, linspace, photon_correlation, ratio_point, shift_width_point,
    truncation_point, Session,
};
use squeezespin::spectra::{anticrossing_features, linewidth, Spectrum, SpectrumFeatures};
use squeezespin::{Frame, ModelParams};

use crate::config::{apply_axis, Axis, RunConfig, Sweep};
use crate::output::{header, write_file, Cell, Table};

/// Fatal failure of a whole command, reported as JSON by the binary.
#[derive(Debug)]
pub enum CommandError {
    Config(String),
    Compute(squeezespin::Error),
    Io(std::io::Error),
}

impl CommandError {
    pub fn kind(&self) -> String {
        match self {
            CommandError::Config(_) => "Config".into(),
            CommandError::Io(_) => "Io".into(),
            CommandError::Compute(e) => {
                let dbg = format!("{e:?}");
                dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Compute").to_string()
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Config(m) => write!(f, "{m}"),
            CommandError::Compute(e) => write!(f, "{e}"),
            CommandError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CommandError {}

impl From<squeezespin::Error> for CommandError {
    fn from(e: squeezespin::Error) -> Self {
        CommandError::Compute(e)
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Io(e)
    }
}

impl From<crate::config::ConfigError> for CommandError {
    fn from(e: crate::config::ConfigError) -> Self {
        CommandError::Config(e.0)
    }
}

#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub failures: usize,
    /// Printed on stdout by the binary.
    pub stdout: Option<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.failures == 0 { 0 } else { 2 }
    }
}

/// Worker pool for sweep points. `jobs == 0` uses every core.
pub fn pool(jobs: usize) -> Result<rayon::ThreadPool, CommandError> {
    // Sweep points are the unit of parallelism; dense kernels run sequentially.
    faer::set_global_parallelism(faer::Par::Seq);
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CommandError::Config(format!("worker pool: {e}")))
}

/// Evaluate `f` on every item in parallel; results come back in input order.
fn par_map<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>, CommandError> {
    Ok(pool(jobs)?.install(|| items.par_iter().map(f).collect()))
}

fn status<T>(r: &squeezespin::Result<T>) -> Cell {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("error: {e}").into(),
    }
}

fn spectrum_table(s: &Spectrum) -> Table {
    let mut t = Table::new(vec!["omega", "S"]);
    for (w, v) in s.omega.iter().zip(&s.values) {
        t.push(vec![(*w).into(), (*v).into()]);
    }
    t
}

fn r_of(p: &ModelParams) -> f64 {
    squeezed_frame_params(p).map(|s| s.r).unwrap_or(f64::NAN)
}

fn require_sweep(cfg: &RunConfig, allowed: &[Axis], cmd: &str) -> Result<Sweep, CommandError> {
    match cfg.sweep {
        Some(s) if allowed.contains(&s.axis) => Ok(s),
        Some(s) => Err(CommandError::Config(format!("{cmd} cannot sweep over {}", s.axis.name()))),
        None => Err(CommandError::Config(format!("{cmd} needs sweep.axis, sweep.start, sweep.stop and sweep.points"))),
    }
}

#[derive(Serialize)]
struct SpectrumSidecar {
    target: String,
    r: f64,
    features: SpectrumFeatures,
    linewidth_method: Option<String>,
    linewidth_resolution_limited: Option<bool>,
    linewidth_error: Option<String>,
}

/// Spectrum at one parameter point plus a JSON sidecar of its features.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Report, CommandError> {
    let p = &cfg.params;
    let spin = match cfg.target.as_str() {
        "resonator" => false,
        "spin" => true,
        other => return Err(CommandError::Config(format!("target must be resonator or spin, got '{other}'"))),
    };
    let session = if p.g == 0.0 && !spin {
        Session::resonator_only(p, &cfg.bath)?
    } else {
        Session::new(p, &cfg.bath)?
    };
    let s = match (spin, cfg.grid_window) {
        (_, Some((a, b))) => {
            let w = linspace(a, b, cfg.grid_points);
            if spin { session.spin_spectrum(&w)? } else { session.resonator_spectrum(&w)? }
        }
        (true, None) => session.spin_spectrum_auto(cfg.grid_points)?,
        (false, None) => session.resonator_spectrum(&anticrossing_grid(p, cfg.grid_points)?)?,
    };

    let mut features = anticrossing_features(&s)?;
    let (mut method, mut limited, mut lw_err) = (None, None, None);
    match linewidth(&s) {
        Ok(lw) => {
            features.linewidth = Some(lw.fwhm);
            method = Some(format!("{:?}", lw.method));
            limited = Some(lw.resolution_limited);
        }
        Err(e) => lw_err = Some(e.to_string()),
    }
    if spin {
        features.shift = features.peak_positions.first().map(|w| w - p.omega_s_t);
    }

    let name = if spin { "spin" } else { "resonator" };
    let csv = spectrum_table(&s).to_csv(&header(cfg, &format!("spectrum {name}")));
    let sidecar = SpectrumSidecar {
        target: name.into(),
        r: r_of(p),
        features,
        linewidth_method: method,
        linewidth_resolution_limited: limited,
        linewidth_error: lw_err,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("features serialize") + "\n";
    Ok(Report {
        files: vec![
            write_file(&cfg.out_dir, &format!("spectrum_{name}.csv"), &csv)?,
            write_file(&cfg.out_dir, &format!("spectrum_{name}.features.json"), &json)?,
        ],
        rows: s.omega.len(),
        ..Default::default()
    })
}

fn finish(cfg: &RunConfig, command: &str, file: &str, table: Table, failures: usize) -> Result<Report, CommandError> {
    let rows = table.rows.len();
    let csv = table.to_csv(&header(cfg, command));
    Ok(Report { files: vec![write_file(&cfg.out_dir, file, &csv)?], rows, failures, stdout: None })
}

/// Resonator-spectrum features and photon number along the sweep.
pub fn cmd_anticross(cfg: &RunConfig, jobs: usize) -> Result<Report, CommandError> {
    let sw = require_sweep(cfg, &[Axis::R, Axis::Rc, Axis::Kappa, Axis::OmegaS], "anticross")?;
    let points: Vec<ModelParams> = sw.values().iter().map(|&v| sw.apply(&cfg.params, v)).collect();
    let results = par_map(jobs, &points, |q| anticross_point(q, &cfg.bath, cfg.grid_points))?;
    let mut t = Table::new(vec!["r", "omega_s", "peak1", "peak2", "chi", "contrast", "n_photons", "note", "status"]);
    let mut failures = 0;
    for (q, res) in points.iter().zip(&results) {
        let st = status(res);
        match res {
            Ok(row) => t.push(vec![
                row.r.into(),
                row.omega_s.into(),
                row.peak1.into(),
                row.peak2.into(),
                row.chi.into(),
                row.contrast.into(),
                row.n_photons.into(),
                row.note.clone().map_or(Cell::Missing, Cell::Text),
                st,
            ]),
            Err(_) => {
                failures += 1;
                let mut row = vec![Cell::Num(r_of(q)), q.omega_s_t.into()];
                row.extend(std::iter::repeat(Cell::Missing).take(6));
                row.push(st);
                t.push(row);
            }
        }
    }
    finish(cfg, "anticross", "anticross.csv", t, failures)
}

/// Spin-line shift and width, numeric and analytic, along the sweep.
pub fn cmd_shift_width(cfg: &RunConfig, jobs: usize) -> Result<Report, CommandError> {
    let sw = require_sweep(cfg, &[Axis::R, Axis::Rc, Axis::Kappa, Axis::OmegaS], "shift-width")?;
    let points: Vec<ModelParams> = sw.values().iter().map(|&v| sw.apply(&cfg.params, v)).collect();
    let results = par_map(jobs, &points, |q| shift_width_point(q, cfg.grid_points))?;
    let mut t = Table::new(vec![
        "r",
        "shift_numeric",
        "shift_analytic",
        "width_numeric",
        "gamma_total_analytic",
        "reliability_flag",
        "resolution_limited",
        "status",
    ]);
    let mut failures = 0;
    for (q, res) in points.iter().zip(&results) {
        let st = status(res);
        match res {
            Ok(row) => t.push(vec![
                row.r.into(),
                row.shift_numeric.into(),
                row.shift_analytic.into(),
                row.width_numeric.into(),
                row.gamma_total_analytic.into(),
                (!row.reliable).into(),
                row.resolution_limited.into(),
                st,
            ]),
            Err(_) => {
                failures += 1;
                let mut row = vec![Cell::Num(r_of(q))];
                row.extend(std::iter::repeat(Cell::Missing).take(6));
                row.push(st);
                t.push(row);
            }
        }
    }
    finish(cfg, "shift-width", "shift_width.csv", t, failures)
}

/// Shift-to-decoherence ratio over a two-axis grid; without `sweep2` the
/// second axis is the configured kappa alone.
pub fn cmd_ratio_map(cfg: &RunConfig, jobs: usize) -> Result<Report, CommandError> {
    let outer = require_sweep(cfg, &[Axis::R, Axis::Rc, Axis::Kappa, Axis::OmegaS], "ratio-map")?;
    let inner = cfg.sweep2.unwrap_or(Sweep { axis: Axis::Kappa, start: cfg.params.kappa, stop: cfg.params.kappa, points: 1 });
    if inner.axis == Axis::Tau {
        return Err(CommandError::Config("ratio-map cannot sweep over tau".into()));
    }
    let mut points = Vec::new();
    for &u in &outer.values() {
        for &v in &inner.values() {
            points.push(apply_axis(inner.axis, &outer.apply(&cfg.params, u), v));
        }
    }
    let results = par_map(jobs, &points, |q| ratio_point(q, cfg.grid_points))?;
    let mut t = Table::new(vec!["r", "kappa", "ratio_numeric", "ratio_analytic", "reliability_flag", "status"]);
    let mut failures = 0;
    for (q, res) in points.iter().zip(&results) {
        let st = status(res);
        match res {
            Ok(row) => {
                t.push(vec![row.r.into(), row.kappa.into(), row.ratio_numeric.into(), row.ratio_analytic.into(), (!row.reliable).into(), st])
            }
            Err(_) => {
                failures += 1;
                t.push(vec![r_of(q).into(), q.kappa.into(), Cell::Missing, Cell::Missing, Cell::Missing, st]);
            }
        }
    }
    finish(cfg, "ratio-map", "ratio_map.csv", t, failures)
}

/// Integrated photon-number noise against its closed form for every
/// combination of squeezing, frame and truncation.
pub fn cmd_truncation(cfg: &RunConfig, jobs: usize) -> Result<Report, CommandError> {
    let sw = require_sweep(cfg, &[Axis::R], "truncation")?;
    let frames = if cfg.frames.is_empty() { vec![cfg.params.frame] } else { cfg.frames.clone() };
    let ns = if cfg.n_values.is_empty() { vec![cfg.params.n_fock] } else { cfg.n_values.clone() };
    let mut points = Vec::new();
    for &r in &sw.values() {
        for &f in &frames {
            for &n in &ns {
                points.push(cfg.params.with_r(r).with_frame(f, n));
            }
        }
    }
    let results = par_map(jobs, &points, truncation_point)?;
    let mut t = Table::new(vec!["r", "N", "frame", "eta_numeric", "eta_closed_form", "relative_error", "status"]);
    let mut failures = 0;
    for (q, res) in points.iter().zip(&results) {
        let st = status(res);
        match res {
            Ok(row) => {
                let rel = if row.eta_closed_form == 0.0 {
                    row.eta_numeric.abs()
                } else {
                    (row.eta_numeric / row.eta_closed_form - 1.0).abs()
                };
                t.push(vec![row.r.into(), row.n_fock.into(), row.frame.name().into(), row.eta_numeric.into(), row.eta_closed_form.into(), rel.into(), st])
            }
            Err(_) => {
                failures += 1;
                t.push(vec![r_of(q).into(), q.n_fock.into(), q.frame.name().into(), Cell::Missing, Cell::Missing, Cell::Missing, st]);
            }
        }
    }
    finish(cfg, "truncation", "truncation.csv", t, failures)
}

/// Spin spectra with physical and squeezed-mode decay at the same point.
pub fn cmd_frame_compare(cfg: &RunConfig) -> Result<Report, CommandError> {
    let p = &cfg.params;
    if p.frame != Frame::Squeezed {
        return Err(CommandError::Config("frame-compare runs in the squeezed frame".into()));
    }
    let omega = match cfg.grid_window {
        Some((a, b)) => linspace(a, b, cfg.grid_points),
        None => anticrossing_grid(p, cfg.grid_points)?,
    };
    let cmp = frame_compare(p, &omega)?;
    let fp = anticrossing_features(&cmp.physical)?;
    let fr = anticrossing_features(&cmp.reference)?;
    let mut files = Vec::new();
    for (name, s) in [("physical", &cmp.physical), ("reference", &cmp.reference)] {
        let csv = spectrum_table(s).to_csv(&header(cfg, &format!("frame-compare {name}")));
        files.push(write_file(&cfg.out_dir, &format!("frame_compare_{name}.csv"), &csv)?);
    }
    let summary = json!({
        "r": r_of(p),
        "physical": fp,
        "reference": fr,
        "hamiltonian_fingerprints": [format!("{:016x}", cmp.hamiltonian_hashes.0), format!("{:016x}", cmp.hamiltonian_hashes.1)],
        "hamiltonians_identical": cmp.hamiltonian_hashes.0 == cmp.hamiltonian_hashes.1,
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    files.push(write_file(&cfg.out_dir, "frame_compare.json", &text)?);
    Ok(Report { files, rows: omega.len(), ..Default::default() })
}

/// `<n(tau) n(0)>` from the master equation and the closed form, for each
/// configured squeezing. Without a tau sweep, 201 points over `[0, 8/kappa]`.
pub fn cmd_photon_corr(cfg: &RunConfig, jobs: usize) -> Result<Report, CommandError> {
    let tau = match cfg.sweep {
        Some(s) if s.axis == Axis::Tau => s.values(),
        Some(s) => return Err(CommandError::Config(format!("photon-corr sweeps tau, not {}", s.axis.name()))),
        None => linspace(0.0, 8.0 / cfg.params.kappa, 201),
    };
    if tau.iter().any(|t| !(*t >= 0.0)) {
        return Err(CommandError::Config("tau values must be non-negative".into()));
    }
    let rs = if cfg.r_values.is_empty() { vec![r_of(&cfg.params)] } else { cfg.r_values.clone() };
    let points: Vec<ModelParams> = rs.iter().map(|&r| cfg.params.with_r(r)).collect();
    let results = par_map(jobs, &points, |q| photon_correlation(q, &cfg.bath, &tau))?;
    let mut t = Table::new(vec!["r", "tau", "re_corr", "im_corr", "closed_form", "status"]);
    let mut failures = 0;
    for (&r, res) in rs.iter().zip(&results) {
        match res {
            Ok(rows) => {
                for row in rows {
                    t.push(vec![r.into(), row.tau.into(), row.re_corr.into(), row.im_corr.into(), row.closed_form.into(), "ok".into()]);
                }
            }
            Err(e) => {
                failures += 1;
                for &tv in &tau {
                    t.push(vec![r.into(), tv.into(), Cell::Missing, Cell::Missing, Cell::Missing, format!("error: {e}").into()]);
                }
            }
        }
    }
    finish(cfg, "photon-corr", "photon_corr.csv", t, failures)
}

/// Analytic rates as JSON on stdout.
pub fn cmd_rates(cfg: &RunConfig) -> Result<Report, CommandError> {
    let p = &cfg.params;
    let rates = analytic_rates_for_bath(p, &cfg.bath)?;
    let sq = squeezed_frame_params(p)?;
    let v = json!({
        "r": sq.r,
        "omega_r_squeezed": sq.omega_r,
        "bath": cfg.bath.name(),
        "rates": rates,
    });
    Ok(Report { stdout: Some(serde_json::to_string_pretty(&v).expect("rates serialize")), rows: 1, ..Default::default() })
}
