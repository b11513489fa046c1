use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{close, PairedDataset};
use crate::error::{Error, Result};
use crate::groups::GroupAction;
use crate::kernels::silverman_bandwidths;
use crate::points::PointSet;
use crate::rng::SimRng;

/// Which part of the observed data is held fixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariantTag {
    /// Keep `Ỹ`, resample `Γ` given `ρ(X)`.
    #[default]
    #[serde(rename = "r1")]
    R1ResampleGamma,
    /// Keep `Γ̃`, resample `Ỹ` given `ρ(X)`.
    #[serde(rename = "r2")]
    R2ResampleYTilde,
    /// Resample both given `ρ(X)`.
    #[serde(rename = "r3")]
    R3ResampleBoth,
}

impl VariantTag {
    pub fn resamples_gamma(self) -> bool {
        matches!(self, VariantTag::R1ResampleGamma | VariantTag::R3ResampleBoth)
    }

    pub fn resamples_y_tilde(self) -> bool {
        matches!(self, VariantTag::R2ResampleYTilde | VariantTag::R3ResampleBoth)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Kernel-weighted borrowing from rows with nearby maximal invariants.
    #[default]
    ApproxKernelWeighted,
    /// Permutation of the fixed draws; valid when the group-orbit law does not
    /// depend on the orbit (e.g. a transitive action).
    ExactTransitive,
    /// Permutation with a correction from a transitive group on the
    /// invariants. Needs an [`InvariantTransport`].
    ExactEquivariant,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct ConditioningVariant {
    pub tag: VariantTag,
    pub sampler: SamplerKind,
    /// Permute only within rows that share the same maximal invariant.
    pub stratify: bool,
}

impl ConditioningVariant {
    pub fn new(tag: VariantTag, sampler: SamplerKind) -> Self {
        ConditioningVariant { tag, sampler, stratify: false }
    }

    /// Build the randomizer for a data set. The equivariant sampler has to be
    /// constructed directly with [`EquivariantRandomizer::new`].
    pub fn build<A: GroupAction + 'static>(&self, ds: &PairedDataset<A>) -> Result<Box<dyn Randomizer<A>>> {
        match self.sampler {
            SamplerKind::ApproxKernelWeighted => Ok(Box::new(ApproxRandomizer::new(ds, self.tag)?)),
            SamplerKind::ExactTransitive => Ok(Box::new(TransitiveRandomizer::new(ds, self.tag, self.stratify))),
            SamplerKind::ExactEquivariant => Err(Error::invalid(
                "the equivariant sampler needs a transport on the maximal invariants",
            )),
        }
    }
}

/// One randomized copy `(X', Y')` of a data set.
#[derive(Clone, Debug)]
pub struct Randomized {
    pub x: PointSet,
    pub y: PointSet,
}

/// Draws randomized copies of a data set conditionally on its `S₁..ₙ`.
pub trait Randomizer<A: GroupAction>: Send + Sync {
    fn randomize(&self, action: &A, ds: &PairedDataset<A>, rng: &mut SimRng) -> Result<Randomized>;

    /// Whether every row keeps its maximal invariant exactly.
    fn preserves_invariants(&self) -> bool;
}

fn assemble<A: GroupAction>(
    action: &A,
    ds: &PairedDataset<A>,
    mut gamma: impl FnMut(usize, &mut SimRng) -> Result<A::Element>,
    mut y_tilde: impl FnMut(usize, &mut SimRng) -> usize,
    rng: &mut SimRng,
) -> Result<Randomized> {
    let n = ds.len();
    let mut x = PointSet::zeros(n, ds.x().dim());
    let mut y = PointSet::zeros(n, ds.y().dim());
    for i in 0..n {
        let g = gamma(i, rng)?;
        let l = y_tilde(i, rng);
        action.act_x(&g, ds.rep().row(i), x.row_mut(i));
        action.act_y(&g, ds.y_tilde().row(l), y.row_mut(i));
    }
    Ok(Randomized { x, y })
}

/// Draws `Γ` given the representative `ρ(Xᵢ)` from a known conditional law.
pub type GammaOracle<A> = Arc<dyn Fn(&[f64], &mut SimRng) -> Result<<A as GroupAction>::Element> + Send + Sync>;

/// Kernel-weighted conditional randomization.
///
/// Row `i` borrows from row `j` with probability proportional to a Gaussian
/// kernel in the maximal invariant, with Silverman bandwidths per coordinate.
pub struct ApproxRandomizer<A: GroupAction> {
    tag: VariantTag,
    /// Row-major `n × n` cumulative weights.
    cumulative: Vec<f64>,
    n: usize,
    oracle: Option<GammaOracle<A>>,
}

impl<A: GroupAction> ApproxRandomizer<A> {
    pub fn new(ds: &PairedDataset<A>, tag: VariantTag) -> Result<Self> {
        let n = ds.len();
        if n == 0 {
            return Err(Error::invalid("empty data set"));
        }
        let h = if n >= 2 { silverman_bandwidths(ds.minv())? } else { vec![1.0; ds.minv().dim()] };
        let m = ds.minv();
        let mut cumulative = Vec::with_capacity(n * n);
        for i in 0..n {
            let mi = m.row(i);
            let start = cumulative.len();
            let mut acc = 0.0;
            for j in 0..n {
                let q: f64 = mi.iter().zip(m.row(j)).zip(&h).map(|((a, b), h)| ((a - b) / h).powi(2)).sum();
                acc += (-0.5 * q).exp();
                cumulative.push(acc);
            }
            if !(acc > 0.0 && acc.is_finite()) {
                log::warn!("kernel weights for row {i} underflowed; using uniform weights");
                for (k, c) in cumulative[start..].iter_mut().enumerate() {
                    *c = (k + 1) as f64;
                }
            }
        }
        Ok(ApproxRandomizer { tag, cumulative, n, oracle: None })
    }

    /// Draw `Γ` from `oracle` instead of borrowing an inversion at a nearby row.
    pub fn with_gamma_oracle(ds: &PairedDataset<A>, tag: VariantTag, oracle: GammaOracle<A>) -> Result<Self> {
        let mut r = Self::new(ds, tag)?;
        r.oracle = Some(oracle);
        Ok(r)
    }

    /// Sample an index with probability proportional to the weights of row `i`.
    pub fn sample_index(&self, i: usize, rng: &mut SimRng) -> usize {
        let row = &self.cumulative[i * self.n..(i + 1) * self.n];
        let u = rng.random::<f64>() * row[self.n - 1];
        row.partition_point(|&c| c <= u).min(self.n - 1)
    }

    /// Normalized weights of row `i`.
    pub fn weights(&self, i: usize) -> Vec<f64> {
        let row = &self.cumulative[i * self.n..(i + 1) * self.n];
        let total = row[self.n - 1];
        let mut prev = 0.0;
        row.iter()
            .map(|&c| {
                let w = (c - prev) / total;
                prev = c;
                w
            })
            .collect()
    }
}

impl<A: GroupAction> Randomizer<A> for ApproxRandomizer<A> {
    fn randomize(&self, action: &A, ds: &PairedDataset<A>, rng: &mut SimRng) -> Result<Randomized> {
        let tag = self.tag;
        assemble(
            action,
            ds,
            |i, rng| {
                if !tag.resamples_gamma() {
                    return Ok(ds.gamma_tilde()[i].clone());
                }
                match &self.oracle {
                    Some(o) => o(ds.rep().row(i), rng),
                    None => {
                        let j = self.sample_index(i, rng);
                        action.sample_inversion(ds.x().row(j), rng)
                    }
                }
            },
            |i, rng| if tag.resamples_y_tilde() { self.sample_index(i, rng) } else { i },
            rng,
        )
    }

    fn preserves_invariants(&self) -> bool {
        !self.tag.resamples_gamma() || self.oracle.is_some()
    }
}

/// Permutation of the fixed `Γ̃` and/or `Ỹ`, optionally within strata of
/// rows sharing a maximal invariant.
#[derive(Clone, Debug)]
pub struct TransitiveRandomizer {
    tag: VariantTag,
    strata: Vec<Vec<usize>>,
}

fn strata_of(minv: &PointSet) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..minv.len()).collect();
    let key = |i: usize| minv.row(i).iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    order.sort_by_key(|&i| key(i));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match out.last_mut() {
            Some(s) if key(s[0]) == key(i) => s.push(i),
            _ => out.push(vec![i]),
        }
    }
    for s in out.iter_mut() {
        s.sort_unstable();
    }
    out.sort();
    out
}

impl TransitiveRandomizer {
    pub fn new<A: GroupAction>(ds: &PairedDataset<A>, tag: VariantTag, stratify: bool) -> Self {
        let strata = if stratify { strata_of(ds.minv()) } else { vec![(0..ds.len()).collect()] };
        TransitiveRandomizer { tag, strata }
    }

    /// `π` as a vector with `π[i]` the source row for row `i`.
    pub fn sample_permutation(&self, n: usize, rng: &mut SimRng) -> Vec<usize> {
        let mut pi: Vec<usize> = (0..n).collect();
        for s in &self.strata {
            let mut src = s.clone();
            src.shuffle(rng);
            for (&dst, &from) in s.iter().zip(&src) {
                pi[dst] = from;
            }
        }
        pi
    }
}

impl<A: GroupAction> Randomizer<A> for TransitiveRandomizer {
    fn randomize(&self, action: &A, ds: &PairedDataset<A>, rng: &mut SimRng) -> Result<Randomized> {
        let n = ds.len();
        let id: Vec<usize> = (0..n).collect();
        let pg = if self.tag.resamples_gamma() { self.sample_permutation(n, rng) } else { id.clone() };
        let py = if self.tag.resamples_y_tilde() { self.sample_permutation(n, rng) } else { id };
        assemble(action, ds, |i, _| Ok(ds.gamma_tilde()[pg[i]].clone()), |i, _| py[i], rng)
    }

    fn preserves_invariants(&self) -> bool {
        true
    }
}

/// Permute `Γ̃` uniformly and return the randomized data set with its caches.
pub fn exact_randomize_transitive<A: GroupAction>(
    ds: &PairedDataset<A>,
    action: &A,
    rng: &mut SimRng,
) -> PairedDataset<A> {
    let r = TransitiveRandomizer::new(ds, VariantTag::R1ResampleGamma, false);
    let pi = r.sample_permutation(ds.len(), rng);
    permuted_dataset(ds, action, &pi, |_, _| None).expect("no correction")
}

fn permuted_dataset<A: GroupAction>(
    ds: &PairedDataset<A>,
    action: &A,
    pi: &[usize],
    mut correction: impl FnMut(usize, usize) -> Option<A::Element>,
) -> Result<PairedDataset<A>> {
    let n = ds.len();
    let mut x = PointSet::zeros(n, ds.x().dim());
    let mut y = PointSet::zeros(n, ds.y().dim());
    let mut gammas = Vec::with_capacity(n);
    for i in 0..n {
        let base = &ds.gamma_tilde()[pi[i]];
        let g = match correction(i, pi[i]) {
            Some(c) => action.compose(&c, base),
            None => base.clone(),
        };
        action.act_x(&g, ds.rep().row(i), x.row_mut(i));
        action.act_y(&g, ds.y_tilde().row(i), y.row_mut(i));
        gammas.push(g);
    }
    Ok(PairedDataset::from_parts(x, y, ds.rep().clone(), ds.minv().clone(), gammas, ds.y_tilde().clone()))
}

/// A group `H` acting transitively on the maximal invariants together with a
/// homomorphism `φ: H → G`.
pub trait InvariantTransport<A: GroupAction>: Send + Sync {
    type H: Clone;

    /// Draw `h` with `h · m_from = m_to`.
    fn sample_h(&self, m_from: &[f64], m_to: &[f64], rng: &mut SimRng) -> Result<Self::H>;

    fn act_m(&self, h: &Self::H, m: &[f64]) -> Vec<f64>;

    fn phi(&self, h: &Self::H) -> A::Element;
}

/// Permutation of `Γ̃` followed by the correction `φ(h̃)⁻¹`.
pub struct EquivariantRandomizer<T> {
    transport: T,
}

impl<T> EquivariantRandomizer<T> {
    pub fn new(transport: T) -> Self {
        EquivariantRandomizer { transport }
    }
}

impl<T> EquivariantRandomizer<T> {
    fn corrections<A: GroupAction>(&self, action: &A, ds: &PairedDataset<A>, pi: &[usize], rng: &mut SimRng) -> Result<Vec<A::Element>>
    where
        T: InvariantTransport<A>,
    {
        let m = ds.minv();
        let mut out = Vec::with_capacity(pi.len());
        for (i, &src) in pi.iter().enumerate() {
            let h = self.transport.sample_h(m.row(src), m.row(i), rng)?;
            let moved = self.transport.act_m(&h, m.row(src));
            if !close(&moved, m.row(i), 1e-6) {
                return Err(Error::ContractViolation(format!(
                    "transported invariant for row {i} misses its target"
                )));
            }
            out.push(action.invert(&self.transport.phi(&h)));
        }
        Ok(out)
    }

    /// One randomized data set with its caches, per the permute-and-correct recipe.
    pub fn randomize_dataset<A: GroupAction>(&self, action: &A, ds: &PairedDataset<A>, rng: &mut SimRng) -> Result<PairedDataset<A>>
    where
        T: InvariantTransport<A>,
    {
        let n = ds.len();
        let mut pi: Vec<usize> = (0..n).collect();
        pi.shuffle(rng);
        let corr = self.corrections(action, ds, &pi, rng)?;
        let out = permuted_dataset(ds, action, &pi, |i, _| Some(corr[i].clone()))?;
        let mut m = vec![0.0; action.invariant_dim()];
        for i in 0..n {
            action.max_invariant(out.x().row(i), &mut m)?;
            if !close(&m, ds.minv().row(i), 1e-6) {
                return Err(Error::ContractViolation(format!("row {i} left its orbit after correction")));
            }
        }
        Ok(out)
    }
}

impl<A: GroupAction, T: InvariantTransport<A>> Randomizer<A> for EquivariantRandomizer<T> {
    fn randomize(&self, action: &A, ds: &PairedDataset<A>, rng: &mut SimRng) -> Result<Randomized> {
        let out = self.randomize_dataset(action, ds, rng)?;
        Ok(Randomized { x: out.x().clone(), y: out.y().clone() })
    }

    fn preserves_invariants(&self) -> bool {
        true
    }
}

/// Free-function form of the permute-and-correct sampler.
pub fn exact_randomize_equivariant<A: GroupAction, T: InvariantTransport<A>>(
    ds: &PairedDataset<A>,
    action: &A,
    transport: T,
    rng: &mut SimRng,
) -> Result<PairedDataset<A>> {
    EquivariantRandomizer::new(transport).randomize_dataset(action, ds, rng)
}
