use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::procedures::{bandwidth_points, statistic_input};
use super::sampler::{ConditioningVariant, Randomizer};
use super::{DataScope, PairedDataset, TestConfig, TestResult};
use crate::error::{Error, Result};
use crate::groups::GroupAction;
use crate::kernels::{BlockSums, PreparedStatistic, TestStatisticSpec};
use crate::points::PointSet;
use crate::rng::stream;

const S_Z0: u64 = 0;
const S_PERM: u64 = 5;

/// Dense Gram matrices of the pooled sample, one per kernel.
struct PooledGram {
    m: usize,
    grams: Vec<Vec<f64>>,
    totals: Vec<f64>,
}

impl PooledGram {
    fn new(stat: &PreparedStatistic, pooled: &PointSet) -> Self {
        let m = pooled.len();
        let grams: Vec<Vec<f64>> = stat
            .kernels()
            .par_iter()
            .map(|k| {
                let mut g = vec![0.0; m * m];
                for i in 0..m {
                    for j in (i + 1)..m {
                        let v = k.eval_unchecked(pooled.row(i), pooled.row(j));
                        g[i * m + j] = v;
                        g[j * m + i] = v;
                    }
                }
                g
            })
            .collect();
        let totals = grams.iter().map(|g| g.iter().sum::<f64>() / 2.0).collect();
        PooledGram { m, grams, totals }
    }

    /// Statistic for the split where `mask[i] == 1.0` marks the first sample.
    fn value(&self, stat: &PreparedStatistic, mask: &[f64], n_first: usize, dim: usize) -> f64 {
        let nk = self.grams.len();
        let mut wa = vec![0.0; nk];
        let mut cr = vec![0.0; nk];
        for (k, g) in self.grams.iter().enumerate() {
            let (mut w, mut c) = (0.0, 0.0);
            for i in 0..self.m {
                let r: f64 = g[i * self.m..(i + 1) * self.m].iter().zip(mask).map(|(a, b)| a * b).sum();
                if mask[i] == 1.0 {
                    w += r;
                } else {
                    c += r;
                }
            }
            wa[k] = w / 2.0;
            cr[k] = c;
        }
        let wb: Vec<f64> = (0..nk).map(|k| self.totals[k] - wa[k] - cr[k]).collect();
        let a = BlockSums { n: n_first, sums: wa };
        let b = BlockSums { n: self.m - n_first, sums: wb };
        let comps = stat.components_from_sums(&a, &b, &cr, dim);
        stat.aggregate(&comps, n_first)
    }
}

/// Two-sample permutation baseline with an explicit randomizer.
///
/// One randomized copy `Z⁽⁰⁾` is pooled with `Z`, and the statistic is
/// recomputed under `B` uniformly random relabellings of the `2n` points.
pub fn baseline_with_randomizer<A: GroupAction>(
    action: &A,
    ds: &PairedDataset<A>,
    randomizer: &dyn Randomizer<A>,
    stat: &TestStatisticSpec,
    cfg: &TestConfig,
) -> Result<TestResult> {
    cfg.validate()?;
    if cfg.scope == DataScope::YOnly && action.acts_trivially_on_y() {
        return Err(Error::invalid(format!(
            "{} acts trivially on Y; a Y-only statistic cannot detect anything",
            action.name()
        )));
    }
    let n = ds.len();
    if n < 2 {
        return Err(Error::invalid("the baseline test needs n >= 2"));
    }
    let prepared = stat.prepare(&bandwidth_points(ds, cfg.scope)?)?;
    let z = statistic_input(cfg.scope, ds.x(), ds.y())?;
    let r = randomizer.randomize(action, ds, &mut stream(cfg.seed, &[S_Z0, 0]))?;
    let z0 = statistic_input(cfg.scope, &r.x, &r.y)?;
    let pooled = z.vconcat(&z0)?;
    let dim = pooled.dim();
    let gram = PooledGram::new(&prepared, &pooled);

    let mask: Vec<f64> = (0..2 * n).map(|i| if i < n { 1.0 } else { 0.0 }).collect();
    let observed = gram.value(&prepared, &mask, n, dim);
    let nulls = (1..=cfg.b as u64)
        .into_par_iter()
        .map(|b| {
            let mut m = mask.clone();
            m.shuffle(&mut stream(cfg.seed, &[S_PERM, b]));
            gram.value(&prepared, &m, n, dim)
        })
        .collect::<Vec<f64>>();
    TestResult::from_stats(observed, nulls, cfg.alpha, cfg.seed)
}

/// Baseline permutation test with the randomizer built from `variant`.
pub fn baseline_permutation_test<A: GroupAction + 'static>(
    action: &A,
    ds: &PairedDataset<A>,
    variant: &ConditioningVariant,
    stat: &TestStatisticSpec,
    cfg: &TestConfig,
) -> Result<TestResult> {
    let r = variant.build(ds)?;
    baseline_with_randomizer(action, ds, r.as_ref(), stat, cfg)
}
