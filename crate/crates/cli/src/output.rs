//! CSV and JSON emission.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Shortest round-trip representation in scientific notation.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

fn render(c: &Cell) -> String {
    match c {
        Cell::Num(v) => fmt_num(*v),
        Cell::Int(i) => i.to_string(),
        // keep the file splittable on commas
        Cell::Text(s) => s.replace([',', '\n', '\r'], ";"),
        Cell::Missing => String::new(),
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Header comment block, column line and rows, LF-terminated.
    pub fn to_csv(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in header {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parameter echo for the top of every CSV.
pub fn header(cfg: &RunConfig, command: &str) -> Vec<(String, String)> {
    let p = &cfg.params;
    let mut h = vec![
        ("squeezespin".to_string(), VERSION.to_string()),
        ("command".into(), command.into()),
        ("omega_r".into(), fmt_num(p.omega_r_t)),
        ("omega_s".into(), fmt_num(p.omega_s_t)),
        ("g".into(), fmt_num(p.g)),
        ("kappa".into(), fmt_num(p.kappa)),
        ("lambda".into(), fmt_num(p.lambda)),
        ("n_fock".into(), p.n_fock.to_string()),
        ("frame".into(), p.frame.name().into()),
        ("bath".into(), cfg.bath.name().into()),
    ];
    for (k, v) in &cfg.raw {
        h.push((format!("config.{k}"), v.clone()));
    }
    h
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, -6.25e-5, 1.0 / 3.0, 41.2010558386739, f64::MIN_POSITIVE] {
            let s = fmt_num(v);
            assert!(s.contains('e'), "{s}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["x", "y", "status"]);
        t.push(vec![1.5.into(), None.into(), "error: a, b".into()]);
        let s = t.to_csv(&[("k".into(), "v".into())]);
        assert_eq!(s, "# k = v\nx,y,status\n1.5e0,,error: a; b\n");
    }
}
