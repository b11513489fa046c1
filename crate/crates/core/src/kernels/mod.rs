//! Kernels, MMD² estimators and the FUSE / supremum aggregations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod bandwidth;
mod mmd;

pub use bandwidth::{
    bandwidth_grid_from_distances, family_distances, median_bandwidth, quantile,
    silverman_bandwidths, BandwidthGrid,
};
pub use mmd::{
    fuse_statistic, gram_matrix, mmd2_u, mmd2_v, pairwise_sum, sk_statistic, BlockSums,
    PreparedStatistic, StatisticValue,
};

/// Simplex membership tolerance for the information diffusion kernel.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian,
    Laplace,
    InformationDiffusion,
}

impl KernelFamily {
    /// The pairwise quantity `t(z, z')` such that `k(z, z') = c(σ) exp(−t · rate(σ))`.
    #[inline]
    pub(crate) fn transform(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelFamily::Gaussian => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            KernelFamily::Laplace => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            KernelFamily::InformationDiffusion => {
                let s: f64 = a.iter().zip(b).map(|(x, y)| (x * y).sqrt()).sum();
                let t = s.clamp(-1.0, 1.0).acos();
                t * t
            }
        }
    }

    /// The distance whose scale matches the bandwidth: `‖·‖₂`, `‖·‖₁` and
    /// `arccos²(Σ√(zz'))` respectively.
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelFamily::Gaussian => self.transform(a, b).sqrt(),
            _ => self.transform(a, b),
        }
    }

    fn rate(self, sigma: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => 1.0 / (2.0 * sigma * sigma),
            KernelFamily::Laplace | KernelFamily::InformationDiffusion => 1.0 / sigma,
        }
    }

    fn scale(self, sigma: f64, dim: usize) -> f64 {
        match self {
            KernelFamily::InformationDiffusion => {
                (4.0 * std::f64::consts::PI * sigma).powf(-(dim as f64 + 1.0) / 2.0)
            }
            _ => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelFunction {
    pub family: KernelFamily,
    pub bandwidth: f64,
}

impl KernelFunction {
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::invalid(format!("bandwidth {bandwidth} must be positive and finite")));
        }
        Ok(KernelFunction { family, bandwidth })
    }

    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, bandwidth)
    }

    pub fn laplace(bandwidth: f64) -> Result<Self> {
        Self::new(KernelFamily::Laplace, bandwidth)
    }

    /// `k(z, z)` for points of dimension `dim`.
    pub fn diagonal(&self, dim: usize) -> f64 {
        self.family.scale(self.bandwidth, dim)
    }

    #[inline]
    pub(crate) fn rate(&self) -> f64 {
        self.family.rate(self.bandwidth)
    }

    /// Evaluates without input validation.
    #[inline]
    pub fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        self.diagonal(a.len()) * (-self.family.transform(a, b) * self.rate()).exp()
    }
}

pub(crate) fn check_simplex(z: &[f64]) -> Result<()> {
    let sum: f64 = z.iter().sum();
    if z.iter().any(|&v| v < -SIMPLEX_TOL) || (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::invalid("point is not on the probability simplex"));
    }
    Ok(())
}

pub fn eval_kernel(k: &KernelFunction, z: &[f64], zp: &[f64]) -> Result<f64> {
    if !(k.bandwidth > 0.0) {
        return Err(Error::invalid("bandwidth must be positive"));
    }
    if z.len() != zp.len() {
        return Err(Error::invalid("points of different dimensions"));
    }
    if k.family == KernelFamily::InformationDiffusion {
        check_simplex(z)?;
        check_simplex(zp)?;
    }
    Ok(k.eval_unchecked(z, zp))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    U,
    V,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Single kernel per family; the bandwidth is the median distance unless fixed.
    Mmd,
    #[default]
    Fuse,
    Sk,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "values")]
pub enum BandwidthRule {
    /// Median distance for [`StatisticKind::Mmd`], quantile grid otherwise,
    /// computed from the conditioning set.
    #[default]
    Adaptive,
    Fixed(Vec<f64>),
}

/// Which statistic to compute and how its kernels are configured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestStatisticSpec {
    pub kind: StatisticKind,
    pub estimator: Estimator,
    pub families: Vec<KernelFamily>,
    /// Bandwidths per family for FUSE and SK.
    pub grid_size: usize,
    pub bandwidths: BandwidthRule,
    /// FUSE temperature; `None` means `√(n(n−1))`.
    pub omega: Option<f64>,
}

impl Default for TestStatisticSpec {
    fn default() -> Self {
        TestStatisticSpec {
            kind: StatisticKind::Fuse,
            estimator: Estimator::U,
            families: vec![KernelFamily::Gaussian, KernelFamily::Laplace],
            grid_size: 10,
            bandwidths: BandwidthRule::Adaptive,
            omega: None,
        }
    }
}

impl TestStatisticSpec {
    pub fn mmd_gaussian() -> Self {
        TestStatisticSpec {
            kind: StatisticKind::Mmd,
            families: vec![KernelFamily::Gaussian],
            ..Default::default()
        }
    }

    pub fn fuse() -> Self {
        Self::default()
    }

    pub fn sk() -> Self {
        TestStatisticSpec { kind: StatisticKind::Sk, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::invalid("statistic needs at least one kernel family"));
        }
        if self.kind != StatisticKind::Mmd && self.grid_size < 1 {
            return Err(Error::invalid("bandwidth grid must be nonempty"));
        }
        if let Some(w) = self.omega {
            if !(w > 0.0) {
                return Err(Error::invalid("omega must be positive"));
            }
        }
        if let BandwidthRule::Fixed(v) = &self.bandwidths {
            if v.is_empty() || v.iter().any(|&s| !(s > 0.0)) {
                return Err(Error::invalid("fixed bandwidths must be positive"));
            }
        }
        Ok(())
    }

    /// Resolve bandwidths from the conditioning set and freeze the kernel list.
    pub fn prepare(&self, conditioning: &crate::points::PointSet) -> Result<PreparedStatistic> {
        self.validate()?;
        let mut kernels = Vec::new();
        for &fam in &self.families {
            let sigmas: Vec<f64> = match &self.bandwidths {
                BandwidthRule::Fixed(v) => v.clone(),
                BandwidthRule::Adaptive => {
                    let d = family_distances(conditioning, fam);
                    match self.kind {
                        StatisticKind::Mmd => vec![median_bandwidth(&d)?],
                        _ if self.grid_size == 1 => vec![median_bandwidth(&d)?],
                        _ => bandwidth_grid_from_distances(&d, self.grid_size)?.values().to_vec(),
                    }
                }
            };
            for s in sigmas {
                kernels.push(KernelFunction::new(fam, s)?);
            }
        }
        PreparedStatistic::new(self.kind, self.estimator, kernels, self.omega)
    }
}
