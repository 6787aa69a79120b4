//! Evaluation grids for density curves and the tabulated fields built on them.
//!
//! A [`Grid`] is a uniform sampling of a one-parameter cut through the model's
//! configuration space: a Cartesian segment, a radial ray, or a directed cut
//! through a 2D potential (the diagonal `dir = [1, 1]` gives `x = y = t`).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform one-parameter evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    /// Cartesian segment for 1D models; parameter is the coordinate `x`.
    Line { start: f64, stop: f64, n: usize },
    /// Radial ray for circular/spherical models; parameter is `r >= 0`.
    Radial { start: f64, stop: f64, n: usize },
    /// Straight cut `(x, y) = t * dir` through a 2D potential.
    Cut2d { dir: [f64; 2], start: f64, stop: f64, n: usize },
}

impl Grid {
    pub fn line(start: f64, stop: f64, n: usize) -> Self {
        Grid::Line { start, stop, n }
    }

    pub fn radial(start: f64, stop: f64, n: usize) -> Self {
        Grid::Radial { start, stop, n }
    }

    pub fn cut2d(dir: [f64; 2], start: f64, stop: f64, n: usize) -> Self {
        Grid::Cut2d { dir, start, stop, n }
    }

    pub fn len(&self) -> usize {
        match *self {
            Grid::Line { n, .. } | Grid::Radial { n, .. } | Grid::Cut2d { n, .. } => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> f64 {
        match *self {
            Grid::Line { start, .. } | Grid::Radial { start, .. } | Grid::Cut2d { start, .. } => {
                start
            }
        }
    }

    pub fn stop(&self) -> f64 {
        match *self {
            Grid::Line { stop, .. } | Grid::Radial { stop, .. } | Grid::Cut2d { stop, .. } => stop,
        }
    }

    /// Grid spacing between consecutive parameter values.
    pub fn step(&self) -> f64 {
        (self.stop() - self.start()) / (self.len() - 1) as f64
    }

    /// Rejects degenerate ranges, too few points, and zero cut directions.
    pub fn validate(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points, got {}",
                self.len()
            )));
        }
        if !(self.stop() > self.start()) {
            return Err(Error::Domain(format!(
                "grid range [{}, {}] is empty or reversed",
                self.start(),
                self.stop()
            )));
        }
        match *self {
            Grid::Radial { start, .. } if start < 0.0 => Err(Error::Domain(format!(
                "radial grid starts at r = {start} < 0"
            ))),
            Grid::Cut2d { dir, .. } if dir[0] == 0.0 && dir[1] == 0.0 => {
                Err(Error::Domain("cut direction must be nonzero".into()))
            }
            _ => Ok(()),
        }
    }

    /// Name of the parameter column: `x`, `r`, or `t`.
    pub fn axis_name(&self) -> &'static str {
        match self {
            Grid::Line { .. } => "x",
            Grid::Radial { .. } => "r",
            Grid::Cut2d { .. } => "t",
        }
    }

    /// Parameter value at index `i`.
    pub fn param(&self, i: usize) -> f64 {
        debug_assert!(i < self.len());
        self.start() + self.step() * i as f64
    }

    /// All parameter values in order.
    pub fn params(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.param(i)).collect()
    }

    /// Maps a parameter value to model-space coordinates (before any radial padding).
    pub fn embed(&self, t: f64) -> Vec<f64> {
        match *self {
            Grid::Line { .. } | Grid::Radial { .. } => vec![t],
            Grid::Cut2d { dir, .. } => vec![t * dir[0], t * dir[1]],
        }
    }

    /// Coordinate column names written alongside the value column.
    pub fn coord_names(&self) -> Vec<&'static str> {
        match self {
            Grid::Line { .. } => vec!["x"],
            Grid::Radial { .. } => vec!["r"],
            Grid::Cut2d { .. } => vec!["x", "y"],
        }
    }
}

/// A scalar quantity tabulated on a [`Grid`], with free-form metadata that is
/// carried into the CSV header line.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: Grid,
    /// Column name of the tabulated quantity, e.g. `rho` or `tau`.
    pub name: String,
    pub values: Vec<f64>,
    pub meta: BTreeMap<String, String>,
}

impl DensityField {
    pub fn new(grid: Grid, name: impl Into<String>, values: Vec<f64>) -> Self {
        assert_eq!(
            grid.len(),
            values.len(),
            "value count {} does not match grid size {}",
            values.len(),
            grid.len()
        );
        DensityField {
            grid,
            name: name.into(),
            values,
            meta: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Applies `f(param, value) -> value` pointwise, keeping grid and metadata.
    pub fn map(&self, name: impl Into<String>, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.param(i), v))
            .collect();
        DensityField {
            grid: self.grid.clone(),
            name: name.into(),
            values,
            meta: self.meta.clone(),
        }
    }

    /// Renders the field as CSV: one `# key=value ...` metadata line, a column
    /// header, then one row per grid point with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push('#');
        for (k, v) in &self.meta {
            let _ = write!(out, " {k}={v}");
        }
        out.push('\n');
        let coords = self.grid.coord_names();
        out.push_str(&coords.join(","));
        let _ = writeln!(out, ",{}", self.name);
        for (i, v) in self.values.iter().enumerate() {
            let t = self.grid.param(i);
            for c in self.grid.embed(t) {
                let _ = write!(out, "{c:.16e},");
            }
            let _ = writeln!(out, "{v:.16e}");
        }
        out
    }
}

/// Parsed form of a CSV produced by [`DensityField::to_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Parses CSV text in the exact format written by [`DensityField::to_csv`].
pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines();
    let meta_line = lines
        .next()
        .ok_or_else(|| Error::Config("empty CSV".into()))?;
    let rest = meta_line
        .strip_prefix('#')
        .ok_or_else(|| Error::Config("CSV must start with a # metadata line".into()))?;
    let mut meta = BTreeMap::new();
    for item in rest.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("bad metadata entry {item:?}")))?;
        meta.insert(k.to_string(), v.to_string());
    }
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("CSV missing column header".into()))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut columns: Vec<(String, Vec<f64>)> =
        names.into_iter().map(|n| (n, Vec::new())).collect();
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::Config(format!(
                "row {} has {} fields, expected {}",
                row + 1,
                fields.len(),
                columns.len()
            )));
        }
        for (col, field) in columns.iter_mut().zip(fields) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad float {field:?} in row {}", row + 1)))?;
            col.1.push(v);
        }
    }
    Ok(CsvTable { meta, columns })
}
