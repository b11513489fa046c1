use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::kernels::TestStatisticSpec;
use crate::physics::{ColumnSchema, FeatureMode, JetSurrogate};
use crate::randomization::{ConditioningVariant, DataScope, SamplerKind, TestConfig};
use crate::synth::SynthDesign;

/// Where the data of each replication come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// Fresh draws from a synthetic design.
    Synth { design: SynthDesign },
    /// Fresh draws from the synthetic leading-pair stand-in.
    JetSurrogate {
        #[serde(default)]
        surrogate: JetSurrogate,
    },
    /// Subsamples without replacement of leading pairs read from a CSV file.
    Csv {
        path: PathBuf,
        #[serde(default)]
        schema: ColumnSchema,
        #[serde(default)]
        mode: FeatureMode,
    },
}

impl DataSource {
    fn param_target(&self) -> Option<&'static str> {
        match self {
            DataSource::Synth { .. } => Some("design"),
            DataSource::JetSurrogate { .. } => Some("surrogate"),
            DataSource::Csv { .. } => None,
        }
    }

    /// Copy of the source with the named fields overridden.
    pub fn with_params(&self, params: &BTreeMap<String, Value>) -> Result<DataSource> {
        if params.is_empty() {
            return Ok(self.clone());
        }
        let target = self
            .param_target()
            .ok_or_else(|| Error::Config("grid parameters are not supported for CSV sources".into()))?;
        let mut v = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        let obj = v
            .get_mut(target)
            .and_then(Value::as_object_mut)
            .ok_or_else(|| Error::Config(format!("source has no '{target}' object")))?;
        for (k, val) in params {
            if k == "design" || k == "kind" {
                return Err(Error::Config(format!("grid parameter '{k}' cannot be overridden")));
            }
            obj.insert(k.clone(), val.clone());
        }
        serde_json::from_value(v).map_err(|e| Error::Config(format!("grid parameters {params:?}: {e}")))
    }

    /// Dimension of one `X` row.
    pub fn x_dim(&self) -> usize {
        match self {
            DataSource::Synth { design } => design.dim(),
            DataSource::JetSurrogate { .. } => 2,
            DataSource::Csv { mode, .. } => mode.dim(),
        }
    }

    pub fn has_response(&self) -> bool {
        !matches!(self, DataSource::Synth { design: SynthDesign::Rot2dInvariance { .. } })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSpec {
    /// `SO(d)` acting on `X` and `Y` alike.
    SpecialOrthogonal,
    /// `Sym(d)` permuting coordinates of `X` and `Y`.
    Symmetric,
    /// The same planar rotation on both halves of `(X, Y)`.
    PairedRotations,
    /// Independent planar rotations on the two halves of `(X, Y)`.
    ProductRotations,
    /// `SO⁺(1,3)` on four-momenta.
    Lorentz,
    /// `SO(d)` on `X`, trivial on `Y`.
    ConditionalSpecialOrthogonal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    #[default]
    Crt,
    Baseline,
    Marginal,
}

/// Sample fed to the marginal test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalInput {
    #[default]
    X,
    /// The concatenated rows `(X, Y)`.
    Pair,
}

/// Sample sizes crossed with lists of source parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    pub n: Vec<usize>,
    pub params: BTreeMap<String, Vec<Value>>,
}

/// One grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSpec {
    pub index: usize,
    pub n: usize,
    pub params: BTreeMap<String, Value>,
    pub source: DataSource,
}

impl Grid {
    /// Cartesian product in a fixed order: `n` outermost, then parameters by
    /// name, each in the listed order.
    pub fn cells(&self, source: &DataSource) -> Result<Vec<CellSpec>> {
        let mut combos: Vec<BTreeMap<String, Value>> = vec![BTreeMap::new()];
        for (name, values) in &self.params {
            if values.is_empty() {
                return Err(Error::Config(format!("grid parameter '{name}' has no values")));
            }
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |v| {
                        let mut c = c.clone();
                        c.insert(name.clone(), v.clone());
                        c
                    })
                })
                .collect();
        }
        let mut out = Vec::new();
        for &n in &self.n {
            for params in &combos {
                out.push(CellSpec { index: out.len(), n, params: params.clone(), source: source.with_params(params)? });
            }
        }
        Ok(out)
    }
}

fn default_replications() -> usize {
    1000
}

fn default_b() -> usize {
    100
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub source: DataSource,
    pub group: GroupSpec,
    #[serde(default)]
    pub test: TestKind,
    #[serde(default)]
    pub variant: ConditioningVariant,
    /// Draw `Γ` from the design's exact conditional sampler (chi design only).
    #[serde(default)]
    pub exact_oracle: bool,
    #[serde(default)]
    pub statistic: TestStatisticSpec,
    pub grid: Grid,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_b")]
    pub b: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub reuse: bool,
    #[serde(default)]
    pub z0_is_comparison: bool,
    #[serde(default)]
    pub scope: DataScope,
    #[serde(default)]
    pub marginal_input: MarginalInput,
    /// Permute `Y` across rows before testing.
    #[serde(default)]
    pub shuffle: bool,
    #[serde(default)]
    pub seed: u64,
    /// Include per-cell wall time; off by default so reports are reproducible byte for byte.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::from_json_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn test_config(&self, seed: u64) -> TestConfig {
        TestConfig {
            b: self.b,
            alpha: self.alpha,
            reuse: self.reuse,
            scope: self.scope,
            seed,
            z0_is_comparison: self.z0_is_comparison,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Error::Config(m);
        if self.replications < 1 {
            return Err(cfg_err("replications must be at least 1".into()));
        }
        if self.grid.n.is_empty() {
            return Err(cfg_err("the grid needs at least one sample size".into()));
        }
        if self.grid.n.contains(&0) {
            return Err(cfg_err("sample sizes must be positive".into()));
        }
        self.test_config(0).validate().map_err(|e| cfg_err(e.to_string()))?;
        self.statistic.validate().map_err(|e| cfg_err(e.to_string()))?;
        let cells = self.grid.cells(&self.source)?;
        for c in &cells {
            self.check_source(&c.source)?;
        }
        Ok(())
    }

    fn check_source(&self, source: &DataSource) -> Result<()> {
        let cfg_err = |m: &str| Err(Error::Config(m.into()));
        let needs_y = self.test != TestKind::Marginal || self.marginal_input == MarginalInput::Pair;
        if needs_y && !source.has_response() {
            return cfg_err("this test needs a response Y but the source has none");
        }
        if self.shuffle && !source.has_response() {
            return cfg_err("shuffle needs a response Y");
        }
        let d = source.x_dim();
        match self.group {
            GroupSpec::PairedRotations | GroupSpec::ProductRotations => {
                if d != 2 || self.test != TestKind::Marginal || self.marginal_input != MarginalInput::Pair {
                    return cfg_err("planar pair groups act on concatenated 2-d (X, Y) rows in the marginal test");
                }
            }
            GroupSpec::Lorentz => {
                if d != 4 {
                    return cfg_err("the Lorentz group needs four-momenta");
                }
                if self.test == TestKind::Marginal {
                    return cfg_err("the Lorentz group is not compact; no marginal test");
                }
            }
            GroupSpec::SpecialOrthogonal | GroupSpec::Symmetric | GroupSpec::ConditionalSpecialOrthogonal => {
                if self.test == TestKind::Marginal && self.marginal_input == MarginalInput::Pair {
                    return cfg_err("use paired_rotations or product_rotations for the (X, Y) marginal test");
                }
            }
        }
        if self.exact_oracle {
            let chi = matches!(source, DataSource::Synth { design: SynthDesign::ChiExact { .. } });
            if !chi || self.group != GroupSpec::SpecialOrthogonal || self.test == TestKind::Marginal {
                return cfg_err("the exact oracle exists only for the chi design under SO(d) conditional tests");
            }
            if self.variant.sampler != SamplerKind::ApproxKernelWeighted {
                return cfg_err("the exact oracle replaces the kernel-weighted Gamma draw");
            }
        }
        if self.variant.sampler == SamplerKind::ExactEquivariant {
            return cfg_err("the equivariant sampler is only available through the library");
        }
        Ok(())
    }
}
