//! Row-major multivariate time series and their CSV persistence.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::num::Real;

/// A sequence of `len` steps, each a vector of `dim` components.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> Series<T> {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "series dimension must be positive");
        Self { dim, data: Vec::new() }
    }

    pub fn with_capacity(dim: usize, steps: usize) -> Self {
        assert!(dim > 0, "series dimension must be positive");
        Self { dim, data: Vec::with_capacity(dim * steps) }
    }

    pub fn from_flat(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return arg(format!("flat buffer of length {} is not a multiple of dimension {dim}", data.len()));
        }
        Ok(Self { dim, data })
    }

    /// One-dimensional series from scalar samples.
    pub fn from_scalars(values: &[T]) -> Self {
        Self { dim: 1, data: values.to_vec() }
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(1);
        let mut s = Self::with_capacity(dim.max(1), rows.len());
        for r in rows {
            s.push(r.as_ref())?;
        }
        Ok(s)
    }

    pub fn zeros(dim: usize, steps: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * steps] }
    }

    pub fn push(&mut self, row: &[T]) -> Result<()> {
        if row.len() != self.dim {
            return arg(format!("row of length {} pushed into {}-dim series", row.len(), self.dim));
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[T] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, k: usize) -> &mut [T] {
        &mut self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    /// Copies steps `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len(), "slice {start}..{end} out of range");
        Self { dim: self.dim, data: self.data[start * self.dim..end * self.dim].to_vec() }
    }

    /// Copies the given components (columns) of every step.
    pub fn columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::with_capacity(cols.len().max(1), self.len());
        for r in self.rows() {
            out.data.extend(cols.iter().map(|&c| r[c]));
        }
        out
    }

    /// One component as a scalar vector.
    pub fn column(&self, c: usize) -> Vec<T> {
        self.rows().map(|r| r[c]).collect()
    }

    /// Per-component sample standard deviation (population normalization).
    pub fn std_per_component(&self) -> Vec<T> {
        let n = T::from_usize_lossy(self.len());
        let mut mean = vec![T::zero(); self.dim];
        for r in self.rows() {
            for (m, &x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![T::zero(); self.dim];
        for r in self.rows() {
            for ((v, &x), &m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        var.into_iter().map(|v| (v / n).sqrt()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Writes one CSV row per step under the given header.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &[String]) -> Result<()> {
        if header.len() != self.dim {
            return arg(format!("header has {} names for {} columns", header.len(), self.dim));
        }
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for r in self.rows() {
            line.clear();
            for (i, x) in r.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{}", x.as_f64()));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Reads a CSV written by [`Series::write_csv`]; returns the header and data.
    pub fn read_csv<R: BufRead>(r: R) -> Result<(Vec<String>, Self)> {
        let mut lines = r.lines();
        let header: Vec<String> = match lines.next() {
            Some(h) => h?.split(',').map(|s| s.trim().to_owned()).collect(),
            None => return arg("empty CSV"),
        };
        let mut s = Self::new(header.len());
        let mut row = Vec::with_capacity(header.len());
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            row.clear();
            for cell in line.split(',') {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::Argument(format!("line {}: cannot parse {cell:?}", n + 2)))?;
                row.push(T::lit(v));
            }
            s.push(&row)?;
        }
        Ok((header, s))
    }

    /// Persists the series as `<stem>.csv` plus a `<stem>.json` sidecar with `meta`.
    pub fn save_with_sidecar<M: Serialize>(&self, dir: &Path, stem: &str, header: &[String], meta: &M) -> Result<()> {
        let csv = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
        self.write_csv(std::io::BufWriter::new(csv), header)?;
        let sidecar = serde_json::json!({
            "steps": self.len(),
            "dim": self.dim,
            "columns": header,
            "meta": meta,
        });
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }
}

impl<T: Real> Series<T> {
    /// Maps every value, keeping the shape.
    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| f(x)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_preserves_values() {
        let s = Series::<f64>::from_rows(&[[0.1, -2.5e-9], [3.0, 1.0 / 3.0]]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, &["a".into(), "b".into()]).unwrap();
        let (h, back) = Series::<f64>::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(back, s);
    }

    #[test]
    fn ragged_row_is_rejected() {
        let mut s = Series::<f64>::new(2);
        assert!(s.push(&[1.0]).is_err());
    }

    #[test]
    fn std_of_constant_component_is_zero() {
        let s = Series::<f64>::from_rows(&[[1.0, 0.0], [1.0, 2.0]]).unwrap();
        let sd = s.std_per_component();
        assert_eq!(sd[0], 0.0);
        assert!((sd[1] - 1.0).abs() < 1e-15);
    }
}
