//! Test procedures: the marginal invariance test, the conditional
//! randomization test for equivariance / conditional invariance with its
//! samplers, and the pooled two-sample permutation baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod baseline;
mod dataset;
mod procedures;
mod sampler;

pub use baseline::{baseline_permutation_test, baseline_with_randomizer};
pub use dataset::{PairedDataset, ROUND_TRIP_TOL};
pub use procedures::{
    crt_symmetry_test, crt_with_randomizer, marginal_invariance_test, statistic_input,
};
pub use sampler::{
    exact_randomize_equivariant, exact_randomize_transitive, ApproxRandomizer, ConditioningVariant,
    EquivariantRandomizer, GammaOracle, InvariantTransport, Randomized, Randomizer, SamplerKind,
    TransitiveRandomizer, VariantTag,
};

/// Which data enter the statistic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataScope {
    /// `Zᵢ = (Xᵢ, Yᵢ)`.
    Pair,
    /// `Zᵢ = Yᵢ`; requires a non-trivial action on `Y`.
    #[default]
    YOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestConfig {
    /// Number of randomizations.
    pub b: usize,
    pub alpha: f64,
    /// Reuse one comparison set `Z'` for every `b`.
    pub reuse: bool,
    pub scope: DataScope,
    pub seed: u64,
    /// Use the comparison set `Z'` as `Z⁽⁰⁾` instead of a fresh draw.
    /// Only meaningful with `reuse`.
    pub z0_is_comparison: bool,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig { b: 100, alpha: 0.05, reuse: false, scope: DataScope::YOnly, seed: 0, z0_is_comparison: false }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b < 1 {
            return Err(Error::invalid("B must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub p_value: f64,
    pub observed_stat: f64,
    pub null_stats: Vec<f64>,
    pub decision: bool,
    pub seed: u64,
}

impl TestResult {
    pub(crate) fn from_stats(observed: f64, null_stats: Vec<f64>, alpha: f64, seed: u64) -> Result<Self> {
        let p_value = compute_p_value(observed, &null_stats)?;
        Ok(TestResult { p_value, observed_stat: observed, null_stats, decision: p_value <= alpha, seed })
    }
}

/// `(1 + #{b : T⁽ᵇ⁾ ≥ T⁽⁰⁾}) / (B + 1)`.
pub fn compute_p_value(observed: f64, null_stats: &[f64]) -> Result<f64> {
    if null_stats.is_empty() {
        return Err(Error::invalid("empty null distribution"));
    }
    let ge = null_stats.iter().filter(|&&t| t >= observed).count();
    Ok((1 + ge) as f64 / (null_stats.len() + 1) as f64)
}
