use serde::{Deserialize, Serialize};

use super::KernelFamily;
use crate::error::{Error, Result};
use crate::points::PointSet;

/// Positive, nondecreasing bandwidths `σ₁ ≤ … ≤ σ_L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandwidthGrid(Vec<f64>);

impl BandwidthGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empty bandwidth grid"));
        }
        if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("bandwidths must be positive and finite"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("bandwidth grid must be nondecreasing"));
        }
        Ok(BandwidthGrid(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Linear-interpolation quantile of a sample (the "type 7" rule).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    quantile_in_place(&mut v, q)
}

fn quantile_in_place(v: &mut [f64], q: f64) -> f64 {
    assert!(!v.is_empty());
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let (_, &mut a, rest) = v.select_nth_unstable_by(lo, f64::total_cmp);
    if frac == 0.0 || rest.is_empty() {
        return a;
    }
    let b = rest.iter().copied().fold(f64::INFINITY, f64::min);
    a + frac * (b - a)
}

/// Pairwise distances `i < j` within a set, in the family's bandwidth scale.
pub fn family_distances(points: &PointSet, family: KernelFamily) -> Vec<f64> {
    let n = points.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        let a = points.row(i);
        for j in i + 1..n {
            out.push(family.distance(a, points.row(j)));
        }
    }
    out
}

fn smallest_positive(d: &[f64]) -> Option<f64> {
    d.iter().copied().filter(|&v| v > 0.0).min_by(f64::total_cmp)
}

/// `L` values spaced linearly from half the 5% quantile to twice the 95%
/// quantile. A zero lower end is replaced by the smallest positive distance.
pub fn bandwidth_grid_from_distances(distances: &[f64], l: usize) -> Result<BandwidthGrid> {
    if distances.is_empty() {
        return Err(Error::invalid("no distances"));
    }
    if l < 2 {
        return Err(Error::invalid("grid needs at least two bandwidths"));
    }
    if distances.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::invalid("distances must be finite and nonnegative"));
    }
    let min_pos = smallest_positive(distances)
        .ok_or_else(|| Error::degenerate("all pairwise distances are zero"))?;
    let mut v = distances.to_vec();
    let mut lo = 0.5 * quantile_in_place(&mut v, 0.05);
    let hi_raw = 2.0 * quantile_in_place(&mut v, 0.95);
    if lo == 0.0 {
        lo = min_pos;
    }
    let hi = hi_raw.max(lo);
    let values = (0..l)
        .map(|k| if k + 1 == l { hi } else { lo + (hi - lo) * k as f64 / (l - 1) as f64 })
        .collect();
    BandwidthGrid::new(values)
}

/// Median distance, falling back to the smallest positive distance.
pub fn median_bandwidth(distances: &[f64]) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::invalid("no distances"));
    }
    let min_pos = smallest_positive(distances)
        .ok_or_else(|| Error::degenerate("all pairwise distances are zero"))?;
    let m = quantile(distances, 0.5);
    Ok(if m > 0.0 { m } else { min_pos })
}

/// Silverman's rule per column: `(4/(q+2))^{1/(q+4)} n^{−1/(q+4)} sd_j`,
/// floored at `1e-8`.
pub fn silverman_bandwidths(m: &PointSet) -> Result<Vec<f64>> {
    let n = m.len();
    if n < 2 {
        return Err(Error::invalid("Silverman's rule needs n >= 2"));
    }
    let q = m.dim();
    let qf = q as f64;
    let factor = (4.0 / (qf + 2.0)).powf(1.0 / (qf + 4.0)) * (n as f64).powf(-1.0 / (qf + 4.0));
    let mut out = Vec::with_capacity(q);
    for j in 0..q {
        let mean = m.rows().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = m.rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        out.push((factor * var.sqrt()).max(1e-8));
    }
    Ok(out)
}
