//! Flat `key = value` run configuration.
//!
//! Files hold one assignment per line; `#` starts a comment. Values from
//! `--set` flags are applied after the file, so they win.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use squeezespin::model::squeezed_frame_params;
use squeezespin::{BathSpec, Frame, ModelParams};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Squeezing parameter at fixed spin frequency.
    R,
    /// Squeezing parameter with the spin frequency kept on resonance.
    Rc,
    Kappa,
    OmegaS,
    Tau,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "r" => Axis::R,
            "rc" | "r_c" => Axis::Rc,
            "kappa" => Axis::Kappa,
            "omega_s" => Axis::OmegaS,
            "tau" => Axis::Tau,
            other => return err(format!("unknown sweep axis '{other}' (expected r, rc, kappa, omega_s or tau)")),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::R => "r",
            Axis::Rc => "rc",
            Axis::Kappa => "kappa",
            Axis::OmegaS => "omega_s",
            Axis::Tau => "tau",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        squeezespin::pipeline::linspace(self.start, self.stop, self.points)
    }

    /// Parameters at one sweep value. `Tau` leaves the model untouched.
    pub fn apply(&self, base: &ModelParams, v: f64) -> ModelParams {
        apply_axis(self.axis, base, v)
    }
}

pub fn apply_axis(axis: Axis, base: &ModelParams, v: f64) -> ModelParams {
    match axis {
        Axis::R => base.with_r(v),
        Axis::Rc => ModelParams {
            omega_s_t: squeezespin::pipeline::resonant_spin_frequency(base.omega_r_t, v),
            ..*base
        }
        .with_r(v),
        Axis::Kappa => ModelParams { kappa: v, ..*base },
        Axis::OmegaS => ModelParams { omega_s_t: v, ..*base },
        Axis::Tau => *base,
    }
}

/// Everything a subcommand needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub bath: BathSpec,
    pub sweep: Option<Sweep>,
    /// Second axis of the ratio map.
    pub sweep2: Option<Sweep>,
    pub out_dir: PathBuf,
    /// Frequency samples per spectrum.
    pub grid_points: usize,
    /// Explicit spectrum window; otherwise chosen around the spin frequency.
    pub grid_window: Option<(f64, f64)>,
    pub target: String,
    /// Squeezing values for the photon correlation study.
    pub r_values: Vec<f64>,
    /// Truncations for the truncation study.
    pub n_values: Vec<usize>,
    pub frames: Vec<Frame>,
    /// Raw assignments after overrides, echoed into output headers.
    pub raw: BTreeMap<String, String>,
}

const KNOWN: &[&str] = &[
    "omega_r", "omega_s", "g", "kappa", "r", "lambda", "n_fock", "frame",
    "bath.kind", "bath.nbar", "bath.alpha_re", "bath.alpha_im",
    "sweep.axis", "sweep.start", "sweep.stop", "sweep.points",
    "sweep2.axis", "sweep2.start", "sweep2.stop", "sweep2.points",
    "out_dir", "grid.points", "grid.start", "grid.stop", "target", "r_values", "n_values", "frames",
];

/// Parse `key = value` lines into an ordered map.
pub fn parse_assignments(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = parse_assignment(line).map_err(|e| ConfigError(format!("line {}: {}", lineno + 1, e.0)))?;
        map.insert(k, v);
    }
    Ok(map)
}

pub fn parse_assignment(s: &str) -> Result<(String, String), ConfigError> {
    let Some((k, v)) = s.split_once('=') else {
        return err(format!("expected key=value, got '{s}'"));
    };
    let k = k.trim().to_string();
    let v = v.trim().trim_matches('"').to_string();
    if !KNOWN.contains(&k.as_str()) {
        return err(format!("unknown key '{k}'"));
    }
    Ok((k, v))
}

fn num(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<f64>()
            .map(Some)
            .map_err(|_| ConfigError(format!("{key}: '{v}' is not a number"))),
    }
}

fn count(map: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<usize>()
            .map(Some)
            .map_err(|_| ConfigError(format!("{key}: '{v}' is not a non-negative integer"))),
    }
}

fn list<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
    let Some(v) = map.get(key) else { return Ok(None) };
    v.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| ConfigError(format!("{key}: cannot parse '{x}'"))))
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn frame(s: &str) -> Result<Frame, ConfigError> {
    match s {
        "squeezed" => Ok(Frame::Squeezed),
        "rotating" => Ok(Frame::Rotating),
        other => err(format!("unknown frame '{other}'")),
    }
}

fn sweep(map: &BTreeMap<String, String>, prefix: &str) -> Result<Option<Sweep>, ConfigError> {
    let key = |s: &str| format!("{prefix}.{s}");
    let Some(axis) = map.get(&key("axis")) else {
        if map.keys().any(|k| k.starts_with(&format!("{prefix}."))) {
            return err(format!("{prefix}.axis is required when other {prefix}.* keys are given"));
        }
        return Ok(None);
    };
    let axis = Axis::parse(axis)?;
    let start = num(map, &key("start"))?.ok_or_else(|| ConfigError(format!("{prefix}.start missing")))?;
    let stop = num(map, &key("stop"))?.ok_or_else(|| ConfigError(format!("{prefix}.stop missing")))?;
    let points = count(map, &key("points"))?.unwrap_or(11);
    if points == 0 {
        return err(format!("{prefix}.points must be positive"));
    }
    Ok(Some(Sweep { axis, start, stop, points }))
}

impl RunConfig {
    pub fn from_map(raw: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut p = ModelParams::default();
        if let Some(v) = num(&raw, "omega_r")? {
            p.omega_r_t = v;
        }
        if let Some(v) = num(&raw, "omega_s")? {
            p.omega_s_t = v;
        }
        if let Some(v) = num(&raw, "g")? {
            p.g = v;
        }
        if let Some(v) = num(&raw, "kappa")? {
            p.kappa = v;
        }
        if let Some(v) = count(&raw, "n_fock")? {
            p.n_fock = v;
        }
        if let Some(v) = raw.get("frame") {
            p.frame = frame(v)?;
        }
        match (num(&raw, "r")?, num(&raw, "lambda")?) {
            (Some(_), Some(_)) => return err("give either r or lambda, not both"),
            (Some(r), None) => p = p.with_r(r),
            (None, Some(l)) => p.lambda = l,
            (None, None) => {}
        }

        let bath = match raw.get("bath.kind").map(String::as_str).unwrap_or("vacuum") {
            "vacuum" => BathSpec::Vacuum,
            "thermal" => BathSpec::Thermal { n_bar: num(&raw, "bath.nbar")?.unwrap_or(0.0) },
            "coherent" => BathSpec::CoherentDrive {
                alpha: Complex64::new(
                    num(&raw, "bath.alpha_re")?.unwrap_or(0.0),
                    num(&raw, "bath.alpha_im")?.unwrap_or(0.0),
                ),
            },
            "squeezed_reference" => BathSpec::SqueezedVacuumReference,
            other => return err(format!("unknown bath.kind '{other}'")),
        };

        let grid_window = match (num(&raw, "grid.start")?, num(&raw, "grid.stop")?) {
            (Some(a), Some(b)) if b > a => Some((a, b)),
            (Some(_), Some(_)) => return err("grid.stop must exceed grid.start"),
            (None, None) => None,
            _ => return err("grid.start and grid.stop go together"),
        };

        let cfg = RunConfig {
            params: p,
            bath,
            sweep: sweep(&raw, "sweep")?,
            sweep2: sweep(&raw, "sweep2")?,
            out_dir: PathBuf::from(raw.get("out_dir").map(String::as_str).unwrap_or(".")),
            grid_points: count(&raw, "grid.points")?.unwrap_or(2001),
            grid_window,
            target: raw.get("target").cloned().unwrap_or_else(|| "resonator".into()),
            r_values: list(&raw, "r_values")?.unwrap_or_default(),
            n_values: list(&raw, "n_values")?.unwrap_or_default(),
            frames: list::<String>(&raw, "frames")?
                .unwrap_or_default()
                .iter()
                .map(|s| frame(s))
                .collect::<Result<_, _>>()?,
            raw,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut map = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?;
                parse_assignments(&text)?
            }
            None => BTreeMap::new(),
        };
        for o in overrides {
            let (k, v) = parse_assignment(o)?;
            // r and lambda are two spellings of one quantity
            match k.as_str() {
                "r" => map.remove("lambda"),
                "lambda" => map.remove("r"),
                _ => None,
            };
            map.insert(k, v);
        }
        Self::from_map(map)
    }

    /// Reject sweeps that would leave the stable region.
    fn validate(&self) -> Result<(), ConfigError> {
        self.bath.validate().map_err(|e| ConfigError(e.to_string()))?;
        if self.grid_points < 64 {
            return err("grid.points must be at least 64");
        }
        for s in [self.sweep, self.sweep2].into_iter().flatten() {
            for v in s.values() {
                let q = s.apply(&self.params, v);
                if let Err(e) = squeezed_frame_params(&q) {
                    return err(format!("sweep point {}={v} is outside the stable region: {e}", s.axis.name()));
                }
                if !(q.kappa > 0.0) {
                    return err(format!("sweep point {}={v} has non-positive kappa", s.axis.name()));
                }
            }
        }
        Ok(())
    }

    /// The primary sweep, or a one-point sweep at the configured parameters.
    pub fn sweep_or_point(&self) -> Sweep {
        self.sweep.unwrap_or(Sweep { axis: Axis::Tau, start: 0.0, stop: 0.0, points: 1 })
    }
}
