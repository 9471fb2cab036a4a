//! Uniform-grid function tables with linear or monotone-cubic interpolation,
//! plus the CSV + JSON-sidecar serialization the CLI exposes.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpOrder {
    Linear,
    CubicMonotone,
}

/// Grid + values + interpolation rule. Immutable after construction;
/// evaluation outside the covered interval is an error.
#[derive(Debug, Clone)]
pub struct TabulatedFunction {
    grid_start: f64,
    step: f64,
    values: Vec<f64>,
    interp: InterpOrder,
    /// Fritsch-Carlson tangents, present iff interp is CubicMonotone.
    tangents: Vec<f64>,
}

impl TabulatedFunction {
    pub fn new(grid_start: f64, step: f64, values: Vec<f64>, interp: InterpOrder) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Tabulation("empty value list".into()));
        }
        if !(step > 0.0) || !step.is_finite() || !grid_start.is_finite() {
            return Err(Error::Tabulation(format!(
                "bad grid (start {grid_start}, step {step})"
            )));
        }
        let tangents = match interp {
            InterpOrder::Linear => Vec::new(),
            InterpOrder::CubicMonotone => monotone_tangents(&values, step),
        };
        Ok(TabulatedFunction { grid_start, step, values, interp, tangents })
    }

    pub fn grid_start(&self) -> f64 {
        self.grid_start
    }

    pub fn step(&self) -> f64 {
        self.step
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

    pub fn interp(&self) -> InterpOrder {
        self.interp
    }

    /// Largest representable argument.
    pub fn max_arg(&self) -> f64 {
        self.grid_start + self.step * (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.grid_start + self.step * i as f64
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let slack = 1e-9 * self.step;
        if x < self.grid_start - slack || x > self.max_arg() + slack {
            return Err(Error::Tabulation(format!(
                "argument {x} outside table domain [{}, {}]",
                self.grid_start,
                self.max_arg()
            )));
        }
        if self.values.len() == 1 {
            return Ok(self.values[0]);
        }
        let t = ((x - self.grid_start) / self.step).clamp(0.0, (self.values.len() - 1) as f64);
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let u = t - i as f64;
        match self.interp {
            InterpOrder::Linear => Ok(self.values[i] * (1.0 - u) + self.values[i + 1] * u),
            InterpOrder::CubicMonotone => {
                let h = self.step;
                let (y0, y1) = (self.values[i], self.values[i + 1]);
                let (m0, m1) = (self.tangents[i], self.tangents[i + 1]);
                let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
                let h10 = u * (1.0 - u) * (1.0 - u);
                let h01 = u * u * (3.0 - 2.0 * u);
                let h11 = u * u * (u - 1.0);
                Ok(h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1)
            }
        }
    }

    /// Writes `path` as CSV (header `s,value`, 17 significant digits) and the
    /// metadata sidecar `<path>.meta.json`.
    pub fn write_csv_with_meta(&self, path: &Path, meta: &TableMeta) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "s,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.node(i), v)?;
        }
        out.flush()?;
        let meta_path = meta_sidecar_path(path);
        std::fs::write(&meta_path, serde_json::to_string_pretty(meta).map_err(to_parse)?)?;
        Ok(())
    }

    /// Reads a table written by [`write_csv_with_meta`].
    pub fn read_csv_with_meta(path: &Path) -> Result<(Self, TableMeta)> {
        let meta: TableMeta = serde_json::from_str(
            &std::fs::read_to_string(meta_sidecar_path(path))?,
        )
        .map_err(to_parse)?;
        let text = std::fs::read_to_string(path)?;
        let mut values = Vec::new();
        let mut grid_start = None;
        for (ln, line) in text.lines().enumerate() {
            if ln == 0 {
                if line.trim() != "s,value" {
                    return Err(Error::Parse(format!("bad CSV header: {line}")));
                }
                continue;
            }
            let mut it = line.split(',');
            let s: f64 = it
                .next()
                .ok_or_else(|| Error::Parse("missing s column".into()))?
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {ln}: {e}")))?;
            let v: f64 = it
                .next()
                .ok_or_else(|| Error::Parse("missing value column".into()))?
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {ln}: {e}")))?;
            if grid_start.is_none() {
                grid_start = Some(s);
            }
            values.push(v);
        }
        let table = TabulatedFunction::new(
            grid_start.ok_or_else(|| Error::Parse("empty table".into()))?,
            meta.step,
            values,
            meta.interp,
        )?;
        Ok((table, meta))
    }
}

fn to_parse(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn meta_sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    std::path::PathBuf::from(os)
}

/// JSON sidecar describing a table dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableMeta {
    pub alpha: f64,
    pub theta: f64,
    pub step: f64,
    pub method: String,
    pub interp: InterpOrder,
}

/// Fritsch-Carlson tangents: monotone data stays monotone under the
/// interpolant.
fn monotone_tangents(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    if n == 1 {
        return vec![0.0];
    }
    let secants: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut m = vec![0.0; n];
    m[0] = secants[0];
    m[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        if secants[i - 1] * secants[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            m[i] = 0.5 * (secants[i - 1] + secants[i]);
        }
    }
    for i in 0..n - 1 {
        if secants[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
        } else {
            let a = m[i] / secants[i];
            let b = m[i + 1] / secants[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[i] = tau * a * secants[i];
                m[i + 1] = tau * b * secants[i];
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_interpolation() {
        let t = TabulatedFunction::new(0.0, 0.5, vec![0.0, 1.0, 4.0], InterpOrder::Linear).unwrap();
        assert_eq!(t.eval(0.25).unwrap(), 0.5);
        assert_eq!(t.eval(0.75).unwrap(), 2.5);
        assert_eq!(t.eval(1.0).unwrap(), 4.0);
    }

    #[test]
    fn out_of_domain_is_error() {
        let t = TabulatedFunction::new(0.0, 0.5, vec![0.0, 1.0], InterpOrder::Linear).unwrap();
        assert!(t.eval(-0.1).is_err());
        assert!(t.eval(0.51).is_err());
    }

    #[test]
    fn empty_rejected() {
        assert!(TabulatedFunction::new(0.0, 0.5, vec![], InterpOrder::Linear).is_err());
        assert!(TabulatedFunction::new(0.0, -1.0, vec![1.0], InterpOrder::Linear).is_err());
    }

    #[test]
    fn cubic_preserves_monotone_data() {
        // non-increasing samples of e^-x stay non-increasing between nodes
        let h = 0.1;
        let values: Vec<f64> = (0..100).map(|i| (-(i as f64) * h).exp()).collect();
        let t = TabulatedFunction::new(0.0, h, values, InterpOrder::CubicMonotone).unwrap();
        let mut prev = f64::INFINITY;
        let mut x = 0.0;
        while x <= t.max_arg() {
            let v = t.eval(x).unwrap();
            assert!(v <= prev + 1e-14, "uptick at {x}");
            assert!((v - (-x).exp()).abs() < 1.1e-3);
            prev = v;
            x += 0.01;
        }
    }

    #[test]
    fn cubic_flat_region_stays_flat() {
        let mut values = vec![1.0; 10];
        values.extend([0.9, 0.7, 0.4, 0.2, 0.1]);
        let t = TabulatedFunction::new(0.0, 1.0, values, InterpOrder::CubicMonotone).unwrap();
        assert_eq!(t.eval(4.5).unwrap(), 1.0);
        assert!(t.eval(9.5).unwrap() <= 1.0);
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join("pd_core_tab_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("table.csv");
        let t = TabulatedFunction::new(0.0, 0.125, vec![1.0, 0.9, 0.5, 0.25], InterpOrder::CubicMonotone).unwrap();
        let meta = TableMeta {
            alpha: 0.5,
            theta: 0.5,
            step: 0.125,
            method: "volterra".into(),
            interp: InterpOrder::CubicMonotone,
        };
        t.write_csv_with_meta(&path, &meta).unwrap();
        let (u, m2) = TabulatedFunction::read_csv_with_meta(&path).unwrap();
        assert_eq!(u.len(), 4);
        assert_eq!(u.values(), t.values());
        assert_eq!(m2.method, "volterra");
        assert_eq!(u.step(), t.step());
    }
}
