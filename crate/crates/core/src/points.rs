//! Row-major storage for samples of fixed-dimension points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    data: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be positive"));
        }
        if data.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "buffer of length {} is not a multiple of dimension {}",
                data.len(),
                dim
            )));
        }
        Ok(PointSet { dim, data })
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        assert!(dim > 0);
        PointSet { dim, data: vec![0.0; n * dim] }
    }

    pub fn with_capacity(n: usize, dim: usize) -> Self {
        assert!(dim > 0);
        PointSet { dim, data: Vec::with_capacity(n * dim) }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::invalid("no rows"))?;
        let mut out = PointSet::new(dim, Vec::with_capacity(rows.len() * dim))?;
        for r in rows {
            out.push(r.as_ref())?;
        }
        Ok(out)
    }

    pub fn from_fn(n: usize, dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * dim);
        for i in 0..n {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        PointSet { dim, data }
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
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::invalid(format!(
                "row of length {} pushed into set of dimension {}",
                row.len(),
                self.dim
            )));
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    /// Column-wise concatenation `[self | other]`.
    pub fn hconcat(&self, other: &PointSet) -> Result<PointSet> {
        if self.len() != other.len() {
            return Err(Error::invalid("hconcat of sets with different sizes"));
        }
        let dim = self.dim + other.dim;
        let mut data = Vec::with_capacity(self.len() * dim);
        for (a, b) in self.rows().zip(other.rows()) {
            data.extend_from_slice(a);
            data.extend_from_slice(b);
        }
        Ok(PointSet { dim, data })
    }

    /// Row-wise concatenation.
    pub fn vconcat(&self, other: &PointSet) -> Result<PointSet> {
        if self.dim != other.dim {
            return Err(Error::invalid("vconcat of sets with different dimensions"));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(PointSet { dim: self.dim, data })
    }

    /// Columns `[start, start + width)` as a new set.
    pub fn columns(&self, start: usize, width: usize) -> PointSet {
        assert!(start + width <= self.dim && width > 0);
        let mut data = Vec::with_capacity(self.len() * width);
        for r in self.rows() {
            data.extend_from_slice(&r[start..start + width]);
        }
        PointSet { dim: width, data }
    }

    pub fn select(&self, idx: &[usize]) -> PointSet {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        PointSet { dim: self.dim, data }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Read paired rows from a CSV file whose header names the `X` columns
/// `x0, x1, ...` and the `Y` columns `y0, y1, ...`. Other columns are ignored.
pub fn read_paired_csv(path: &std::path::Path) -> Result<(PointSet, PointSet)> {
    let parse_err = |row: usize, msg: String| Error::Parse { path: path.into(), row, msg };
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let cols = |prefix: char| -> Vec<usize> {
        let mut found: Vec<(usize, usize)> = headers
            .iter()
            .enumerate()
            .filter_map(|(i, h)| {
                let h = h.trim();
                h.strip_prefix(prefix).and_then(|k| k.parse::<usize>().ok()).map(|k| (k, i))
            })
            .collect();
        found.sort_unstable();
        found.into_iter().map(|(_, i)| i).collect()
    };
    let (xc, yc) = (cols('x'), cols('y'));
    if xc.is_empty() || yc.is_empty() {
        return Err(parse_err(1, "header needs columns x0.. and y0..".into()));
    }
    let mut x = PointSet::with_capacity(0, xc.len());
    let mut y = PointSet::with_capacity(0, yc.len());
    let mut buf = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| parse_err(row, e.to_string()))?;
        for (cols, target) in [(&xc, &mut x), (&yc, &mut y)] {
            buf.clear();
            for &c in cols {
                let cell = rec.get(c).unwrap_or("").trim();
                let v: f64 = cell.parse().map_err(|_| parse_err(row, format!("'{cell}' is not a number")))?;
                if !v.is_finite() {
                    return Err(parse_err(row, format!("'{cell}' is not finite")));
                }
                buf.push(v);
            }
            target.push(&buf)?;
        }
    }
    Ok((x, y))
}
