use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{check_simplex, BandwidthGrid, Estimator, KernelFamily, KernelFunction, StatisticKind};
use crate::error::{Error, Result};
use crate::points::PointSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticValue {
    pub value: f64,
    /// Per-kernel MMD² components, in kernel order.
    pub per_bandwidth: Option<Vec<f64>>,
}

/// Pairwise (tree) summation. The split points depend only on the length, so
/// the result is a fixed function of the input order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        let mut s = 0.0;
        for x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// `Σ exp(−rate · tⱼ)` with four interleaved accumulators.
#[inline]
fn exp_sum(t: &[f64], rate: f64) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = t.chunks_exact(4);
    let rem = chunks.remainder();
    for c in chunks {
        acc[0] += (-rate * c[0]).exp();
        acc[1] += (-rate * c[1]).exp();
        acc[2] += (-rate * c[2]).exp();
        acc[3] += (-rate * c[3]).exp();
    }
    for (k, &x) in rem.iter().enumerate() {
        acc[k] += (-rate * x).exp();
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// Per-kernel sums of `k(zᵢ, zⱼ)` over the unordered pairs `i < j` of one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSums {
    pub n: usize,
    pub sums: Vec<f64>,
}

/// A statistic with its kernels fixed, ready to be evaluated many times.
#[derive(Clone, Debug)]
pub struct PreparedStatistic {
    kind: StatisticKind,
    estimator: Estimator,
    kernels: Vec<KernelFunction>,
    omega: Option<f64>,
    groups: Vec<(KernelFamily, Vec<usize>)>,
}

impl PreparedStatistic {
    pub fn new(
        kind: StatisticKind,
        estimator: Estimator,
        kernels: Vec<KernelFunction>,
        omega: Option<f64>,
    ) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::invalid("no kernels"));
        }
        if let Some(w) = omega {
            if !(w > 0.0) {
                return Err(Error::invalid("omega must be positive"));
            }
        }
        let mut groups: Vec<(KernelFamily, Vec<usize>)> = Vec::new();
        for (i, k) in kernels.iter().enumerate() {
            match groups.iter_mut().find(|(f, _)| *f == k.family) {
                Some((_, v)) => v.push(i),
                None => groups.push((k.family, vec![i])),
            }
        }
        Ok(PreparedStatistic { kind, estimator, kernels, omega, groups })
    }

    pub fn single(kernel: KernelFunction, estimator: Estimator) -> Self {
        Self::new(StatisticKind::Mmd, estimator, vec![kernel], None).expect("one kernel")
    }

    pub fn kernels(&self) -> &[KernelFunction] {
        &self.kernels
    }

    pub fn kind(&self) -> StatisticKind {
        self.kind
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    fn uses_simplex(&self) -> bool {
        self.groups.iter().any(|(f, _)| *f == KernelFamily::InformationDiffusion)
    }

    /// Row-major accumulation: each row is summed sequentially, rows are then
    /// combined with [`pairwise_sum`].
    fn accumulate(&self, a: &PointSet, b: Option<&PointSet>) -> Vec<f64> {
        let n = a.len();
        let nk = self.kernels.len();
        let mut row_sums = vec![0.0; nk * n];
        let mut buf = Vec::with_capacity(b.map_or(n, |b| b.len()));
        let rates: Vec<f64> = self.kernels.iter().map(|k| k.rate()).collect();
        for (fam, idx) in &self.groups {
            for i in 0..n {
                let ai = a.row(i);
                buf.clear();
                match b {
                    None => buf.extend((i + 1..n).map(|j| fam.transform(ai, a.row(j)))),
                    Some(b) => buf.extend(b.rows().map(|bj| fam.transform(ai, bj))),
                }
                for &k in idx {
                    row_sums[k * n + i] = exp_sum(&buf, rates[k]);
                }
            }
        }
        let dim = a.dim();
        (0..nk)
            .map(|k| pairwise_sum(&row_sums[k * n..(k + 1) * n]) * self.kernels[k].diagonal(dim))
            .collect()
    }

    pub fn within(&self, z: &PointSet) -> BlockSums {
        BlockSums { n: z.len(), sums: self.accumulate(z, None) }
    }

    /// Per-kernel `Σᵢⱼ k(aᵢ, bⱼ)`.
    pub fn cross(&self, a: &PointSet, b: &PointSet) -> Vec<f64> {
        self.accumulate(a, Some(b))
    }

    /// Per-kernel MMD² from block sums.
    pub fn components_from_sums(&self, wz: &BlockSums, wzp: &BlockSums, cross: &[f64], dim: usize) -> Vec<f64> {
        let m = wz.n as f64;
        let n = wzp.n as f64;
        (0..self.kernels.len())
            .map(|k| match self.estimator {
                Estimator::U => {
                    2.0 * wz.sums[k] / (m * (m - 1.0)) + 2.0 * wzp.sums[k] / (n * (n - 1.0))
                        - 2.0 * cross[k] / (m * n)
                }
                Estimator::V => {
                    let kappa = self.kernels[k].diagonal(dim);
                    let v = (2.0 * wz.sums[k] + m * kappa) / (m * m)
                        + (2.0 * wzp.sums[k] + n * kappa) / (n * n)
                        - 2.0 * cross[k] / (m * n);
                    v.max(0.0)
                }
            })
            .collect()
    }

    /// Combine per-kernel components into the statistic value.
    pub fn aggregate(&self, comps: &[f64], n: usize) -> f64 {
        match self.kind {
            StatisticKind::Mmd if comps.len() == 1 => comps[0],
            StatisticKind::Sk | StatisticKind::Mmd => comps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            StatisticKind::Fuse => {
                let nf = n as f64;
                let omega = self.omega.unwrap_or_else(|| (nf * (nf - 1.0)).sqrt().max(1.0));
                log_mean_exp(comps, omega)
            }
        }
    }

    pub fn evaluate_cached(&self, z: &PointSet, wz: &BlockSums, zp: &PointSet, wzp: &BlockSums) -> StatisticValue {
        let cross = self.cross(z, zp);
        let comps = self.components_from_sums(wz, wzp, &cross, z.dim());
        let value = self.aggregate(&comps, z.len());
        StatisticValue { value, per_bandwidth: Some(comps) }
    }

    /// Like [`evaluate_cached`](Self::evaluate_cached) but returns only the value.
    pub fn value_cached(&self, z: &PointSet, wz: &BlockSums, zp: &PointSet, wzp: &BlockSums) -> f64 {
        self.evaluate_cached(z, wz, zp, wzp).value
    }

    pub fn evaluate(&self, z: &PointSet, zp: &PointSet) -> Result<StatisticValue> {
        if z.dim() != zp.dim() {
            return Err(Error::invalid("samples of different dimensions"));
        }
        if z.is_empty() || zp.is_empty() {
            return Err(Error::invalid("empty sample"));
        }
        if self.estimator == Estimator::U && (z.len() < 2 || zp.len() < 2) {
            return Err(Error::invalid("U-statistic needs at least two points per sample"));
        }
        if self.uses_simplex() {
            for r in z.rows().chain(zp.rows()) {
                check_simplex(r)?;
            }
        }
        let wz = self.within(z);
        let wzp = self.within(zp);
        Ok(self.evaluate_cached(z, &wz, zp, &wzp))
    }
}

/// `(1/ω) log((1/L) Σ exp(ω mₗ))`, shifted by the maximum.
pub(crate) fn log_mean_exp(m: &[f64], omega: f64) -> f64 {
    let mx = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = m.iter().map(|&v| (omega * (v - mx)).exp()).sum();
    mx + (s / m.len() as f64).ln() / omega
}

fn check_pair(z: &PointSet, zp: &PointSet, min_n: usize) -> Result<()> {
    if z.len() != zp.len() {
        return Err(Error::invalid(format!("sample sizes differ ({} vs {})", z.len(), zp.len())));
    }
    if z.len() < min_n {
        return Err(Error::invalid(format!("need at least {min_n} points per sample")));
    }
    Ok(())
}

pub fn mmd2_u(z: &PointSet, zp: &PointSet, k: &KernelFunction) -> Result<f64> {
    check_pair(z, zp, 2)?;
    Ok(PreparedStatistic::single(*k, Estimator::U).evaluate(z, zp)?.value)
}

pub fn mmd2_v(z: &PointSet, zp: &PointSet, k: &KernelFunction) -> Result<f64> {
    check_pair(z, zp, 1)?;
    Ok(PreparedStatistic::single(*k, Estimator::V).evaluate(z, zp)?.value)
}

fn grid_kernels(grid: &BandwidthGrid, families: &[KernelFamily]) -> Result<Vec<KernelFunction>> {
    if families.is_empty() || grid.is_empty() {
        return Err(Error::invalid("empty bandwidth grid or family list"));
    }
    let mut out = Vec::new();
    for &f in families {
        for &s in grid.values() {
            out.push(KernelFunction::new(f, s)?);
        }
    }
    Ok(out)
}

/// FUSE aggregation of U-statistic components over `families × grid`.
pub fn fuse_statistic(
    z: &PointSet,
    zp: &PointSet,
    grid: &BandwidthGrid,
    families: &[KernelFamily],
    omega: f64,
) -> Result<StatisticValue> {
    check_pair(z, zp, 2)?;
    let p = PreparedStatistic::new(StatisticKind::Fuse, Estimator::U, grid_kernels(grid, families)?, Some(omega))?;
    p.evaluate(z, zp)
}

/// Maximum of the U-statistic components over `families × grid`.
pub fn sk_statistic(
    z: &PointSet,
    zp: &PointSet,
    grid: &BandwidthGrid,
    families: &[KernelFamily],
) -> Result<StatisticValue> {
    check_pair(z, zp, 2)?;
    let p = PreparedStatistic::new(StatisticKind::Sk, Estimator::U, grid_kernels(grid, families)?, None)?;
    p.evaluate(z, zp)
}

pub fn gram_matrix(k: &KernelFunction, z: &PointSet) -> DMatrix<f64> {
    let n = z.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = k.eval_unchecked(z.row(i), z.row(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}
