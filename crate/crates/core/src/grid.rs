//! Uniformly sampled real functions and their two-column CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("non-finite sample at index {index} (t = {t})")]
    NonFinite { index: usize, t: f64 },
    #[error("grids differ: {0}")]
    Mismatch(String),
    #[error("table does not cover t = {0}")]
    OutOfRange(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Uniform sampling of `[t0, t0 + (len-1)·dt]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl GridSpec {
    pub fn new(t0: f64, dt: f64, len: usize) -> Result<Self, GridError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(GridError::BadStep(dt));
        }
        if len < 2 {
            return Err(GridError::TooShort(len));
        }
        Ok(Self { t0, dt, len })
    }

    /// Grid with step `dt` whose last node is the first one at or beyond
    /// `horizon - dt/2`.
    pub fn covering(t0: f64, horizon: f64, dt: f64) -> Result<Self, GridError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(GridError::BadStep(dt));
        }
        let intervals = ((horizon - t0) / dt).round().max(1.0) as usize;
        Self::new(t0, dt, intervals + 1)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.time(i))
    }

    /// Same `t0` and `dt` (to 1e-12 relative); lengths may differ.
    pub fn compatible(&self, other: &GridSpec) -> bool {
        let scale = self.dt.abs().max(other.dt.abs());
        (self.t0 - other.t0).abs() <= 1e-12 * scale.max(1.0)
            && (self.dt - other.dt).abs() <= 1e-12 * scale
    }

    pub fn truncated(&self, len: usize) -> Result<Self, GridError> {
        Self::new(self.t0, self.dt, len.min(self.len))
    }

    /// Index range of nodes with `start <= t <= end`.
    pub fn window_indices(&self, start: f64, end: f64) -> std::ops::Range<usize> {
        let slack = 1e-9 * self.dt;
        let lo = ((start - self.t0 - slack) / self.dt).ceil().max(0.0) as usize;
        let hi = ((end - self.t0 + slack) / self.dt).floor();
        let hi = if hi < 0.0 { 0 } else { (hi as usize + 1).min(self.len) };
        lo.min(hi)..hi
    }
}

/// Real samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self, GridError> {
        let spec = GridSpec::new(t0, dt, values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite { index, t: spec.time(index) });
        }
        Ok(Self { spec, values })
    }

    pub fn from_spec(spec: GridSpec, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != spec.len {
            return Err(GridError::Mismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                spec.len
            )));
        }
        Self::new(spec.t0, spec.dt, values)
    }

    pub fn sample(spec: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        Self::new(spec.t0, spec.dt, spec.times().map(f).collect())
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self { spec, values: vec![0.0; spec.len] }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn t0(&self) -> f64 {
        self.spec.t0
    }

    pub fn dt(&self) -> f64 {
        self.spec.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self, i: usize) -> f64 {
        self.spec.time(i)
    }

    pub fn end(&self) -> f64 {
        self.spec.end()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.time(i), v))
    }

    /// Errors unless both functions live on the same nodes.
    pub fn check_same_grid(&self, other: &GridFunction) -> Result<(), GridError> {
        if !self.spec.compatible(&other.spec) || self.len() != other.len() {
            return Err(GridError::Mismatch(format!(
                "(t0={}, dt={}, n={}) vs (t0={}, dt={}, n={})",
                self.t0(),
                self.dt(),
                self.len(),
                other.t0(),
                other.dt(),
                other.len()
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self, GridError> {
        Self::new(
            self.t0(),
            self.dt(),
            self.iter().map(|(t, v)| f(t, v)).collect(),
        )
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.t0(), self.dt(), values)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `self + factor · other`.
    pub fn axpy(&self, factor: f64, other: &GridFunction) -> Result<Self, GridError> {
        self.zip_with(other, |a, b| a + factor * b)
    }

    /// First `len` samples.
    pub fn truncated(&self, len: usize) -> Result<Self, GridError> {
        let len = len.min(self.len());
        Self::new(self.t0(), self.dt(), self.values[..len].to_vec())
    }

    /// Drop the first `offset` samples and re-origin the grid at `new_t0`.
    pub fn shifted(&self, offset: usize, new_t0: f64, len: usize) -> Result<Self, GridError> {
        let end = (offset + len).min(self.len());
        Self::new(new_t0, self.dt(), self.values[offset.min(end)..end].to_vec())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64, GridError> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Piecewise-linear interpolation; errors outside the sampled interval.
    pub fn interpolate(&self, t: f64) -> Result<f64, GridError> {
        let x = (t - self.t0()) / self.dt();
        let last = (self.len() - 1) as f64;
        if !(x >= -1e-9 && x <= last + 1e-9) {
            return Err(GridError::OutOfRange(t));
        }
        let x = x.clamp(0.0, last);
        let i = (x.floor() as usize).min(self.len() - 2);
        let frac = x - i as f64;
        Ok(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac)
    }

    /// Resample an arbitrary (possibly non-uniform) table onto `spec` by
    /// linear interpolation. `table` must be sorted by `t` and cover `spec`.
    pub fn from_table(table: &[(f64, f64)], spec: GridSpec) -> Result<Self, GridError> {
        if table.len() < 2 {
            return Err(GridError::TooShort(table.len()));
        }
        let mut values = Vec::with_capacity(spec.len);
        let mut j = 0;
        for t in spec.times() {
            let slack = 1e-9 * spec.dt;
            if t < table[0].0 - slack || t > table[table.len() - 1].0 + slack {
                return Err(GridError::OutOfRange(t));
            }
            while j + 2 < table.len() && table[j + 1].0 < t {
                j += 1;
            }
            let (ta, va) = table[j];
            let (tb, vb) = table[j + 1];
            let frac = if tb > ta { ((t - ta) / (tb - ta)).clamp(0.0, 1.0) } else { 0.0 };
            values.push(va + frac * (vb - va));
        }
        Self::from_spec(spec, values)
    }

    /// Two-column CSV: header `t,<label>`, LF line endings.
    pub fn write_csv<W: Write>(&self, writer: W, label: &str) -> Result<(), GridError> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        out.write_record(["t", label])?;
        for (t, v) in self.iter() {
            out.write_record([format_number(t), format_number(v)])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Read the first two columns of a headed CSV as `(t, value)` pairs.
    pub fn read_table<R: Read>(reader: R) -> Result<Vec<(f64, f64)>, GridError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64, GridError> {
                record
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| GridError::Mismatch(format!("unparsable row {:?}", record)))
            };
            rows.push((parse(0)?, parse(1)?));
        }
        Ok(rows)
    }

    /// Read a two-column CSV written on a uniform grid.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, GridError> {
        let rows = Self::read_table(reader)?;
        if rows.len() < 2 {
            return Err(GridError::TooShort(rows.len()));
        }
        let t0 = rows[0].0;
        let dt = (rows[rows.len() - 1].0 - t0) / (rows.len() - 1) as f64;
        Self::new(t0, dt, rows.into_iter().map(|(_, v)| v).collect())
    }
}

/// Shortest decimal representation that round-trips.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:?}")
    }
}
