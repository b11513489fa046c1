use rayon::prelude::*;

use super::sampler::{ConditioningVariant, Randomizer};
use super::{DataScope, PairedDataset, TestConfig, TestResult};
use crate::error::{Error, Result};
use crate::groups::GroupAction;
use crate::kernels::{Estimator, PreparedStatistic, TestStatisticSpec};
use crate::points::PointSet;
use crate::rng::{stream, SimRng};

// stream labels inside one test
const S_Z0: u64 = 0;
const S_ZB: u64 = 1;
const S_ZP: u64 = 2;
const S_ZP_B: u64 = 3;
const S_PILOT: u64 = 4;

/// The points `Zᵢ` that enter the statistic for a given scope.
pub fn statistic_input(scope: DataScope, x: &PointSet, y: &PointSet) -> Result<PointSet> {
    match scope {
        DataScope::Pair => x.hconcat(y),
        DataScope::YOnly => Ok(y.clone()),
    }
}

fn check_scope<A: GroupAction>(action: &A, scope: DataScope) -> Result<()> {
    if scope == DataScope::YOnly && action.acts_trivially_on_y() {
        return Err(Error::invalid(format!(
            "{} acts trivially on Y; a Y-only statistic cannot detect anything",
            action.name()
        )));
    }
    Ok(())
}

/// Shared skeleton: `T⁽⁰⁾ = T(Z, Z⁽⁰⁾)` and `T⁽ᵇ⁾ = T(Z⁽ᵇ⁾, Z')` with `Z'`
/// either reused or redrawn per `b`.
fn randomization_loop(
    prepared: &PreparedStatistic,
    z: &PointSet,
    cfg: &TestConfig,
    draw: &(dyn Fn(&mut SimRng) -> Result<PointSet> + Sync),
) -> Result<TestResult> {
    let rng_for = |label: u64, b: u64| stream(cfg.seed, &[label, b]);
    let wz = prepared.within(z);
    let comparison = if cfg.reuse {
        let zp = draw(&mut rng_for(S_ZP, 0))?;
        let w = prepared.within(&zp);
        Some((zp, w))
    } else {
        None
    };
    let t0 = match (&comparison, cfg.z0_is_comparison) {
        (Some((zp, wzp)), true) => prepared.value_cached(z, &wz, zp, wzp),
        _ => {
            let z0 = draw(&mut rng_for(S_Z0, 0))?;
            let w0 = prepared.within(&z0);
            prepared.value_cached(z, &wz, &z0, &w0)
        }
    };
    let nulls = (1..=cfg.b as u64)
        .into_par_iter()
        .map(|b| {
            let zb = draw(&mut rng_for(S_ZB, b))?;
            let wb = prepared.within(&zb);
            Ok(match &comparison {
                Some((zp, wzp)) => prepared.value_cached(&zb, &wb, zp, wzp),
                None => {
                    let zp = draw(&mut rng_for(S_ZP_B, b))?;
                    let wzp = prepared.within(&zp);
                    prepared.value_cached(&zb, &wb, &zp, &wzp)
                }
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    TestResult::from_stats(t0, nulls, cfg.alpha, cfg.seed)
}

/// Points whose pairwise distances set the kernel bandwidths: the
/// conditioning set `Ỹ` (or `(ρ(X), Ỹ)` for the pair scope).
pub(crate) fn bandwidth_points<A: GroupAction>(ds: &PairedDataset<A>, scope: DataScope) -> Result<PointSet> {
    match scope {
        DataScope::YOnly => Ok(ds.y_tilde().clone()),
        DataScope::Pair => ds.rep().hconcat(ds.y_tilde()),
    }
}

/// Conditional randomization test with an explicit randomizer.
pub fn crt_with_randomizer<A: GroupAction>(
    action: &A,
    ds: &PairedDataset<A>,
    randomizer: &dyn Randomizer<A>,
    stat: &TestStatisticSpec,
    cfg: &TestConfig,
) -> Result<TestResult> {
    cfg.validate()?;
    check_scope(action, cfg.scope)?;
    if ds.len() < 2 {
        return Err(Error::invalid("the conditional test needs n >= 2"));
    }
    let prepared = stat.prepare(&bandwidth_points(ds, cfg.scope)?)?;
    let z = statistic_input(cfg.scope, ds.x(), ds.y())?;
    let draw = |rng: &mut SimRng| {
        let r = randomizer.randomize(action, ds, rng)?;
        statistic_input(cfg.scope, &r.x, &r.y)
    };
    randomization_loop(&prepared, &z, cfg, &draw)
}

/// Conditional randomization test for `G`-equivariance of `P(Y|X)` (or
/// conditional invariance when the action is trivial on `Y`).
pub fn crt_symmetry_test<A: GroupAction + 'static>(
    action: &A,
    ds: &PairedDataset<A>,
    variant: &ConditioningVariant,
    stat: &TestStatisticSpec,
    cfg: &TestConfig,
) -> Result<TestResult> {
    check_scope(action, cfg.scope)?;
    let r = variant.build(ds)?;
    crt_with_randomizer(action, ds, r.as_ref(), stat, cfg)
}

fn haar_randomize<A: GroupAction>(action: &A, x: &PointSet, rng: &mut SimRng) -> Result<PointSet> {
    let mut out = PointSet::zeros(x.len(), x.dim());
    for i in 0..x.len() {
        let g = action.sample_haar(rng)?;
        action.act_x(&g, x.row(i), out.row_mut(i));
    }
    Ok(out)
}

/// Randomization test of `G`-invariance of the law of `X`.
///
/// Each statistic compares one sample with an independently randomized copy
/// (`Xᵢ⁽ᵇ⁾ = Gᵢ⁽ᵇ⁾Xᵢ`, `G` Haar), with the same branch structure as the
/// conditional test. Bandwidths come from two pooled pilot randomizations,
/// which depend on the data only through the orbits. With `reuse` set, the
/// observed statistic is also taken against the shared comparison set, so
/// the `B + 1` statistics stay exchangeable under the null.
pub fn marginal_invariance_test<A: GroupAction>(
    x: &PointSet,
    action: &A,
    stat: &TestStatisticSpec,
    cfg: &TestConfig,
) -> Result<TestResult> {
    cfg.validate()?;
    if !action.is_compact() {
        return Err(Error::Unsupported(format!("{} is not compact; no Haar randomization", action.name())));
    }
    if x.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    if x.dim() != action.x_dim() {
        return Err(Error::invalid("sample dimension does not match the action"));
    }
    let pilot = haar_randomize(action, x, &mut stream(cfg.seed, &[S_PILOT, 0]))?
        .vconcat(&haar_randomize(action, x, &mut stream(cfg.seed, &[S_PILOT, 1]))?)?;
    let mut spec = stat.clone();
    if x.len() < 2 && spec.estimator == Estimator::U {
        log::warn!("n = 1: the U-statistic is undefined, using the V-statistic");
        spec.estimator = Estimator::V;
    }
    let prepared = spec.prepare(&pilot)?;
    let draw = |rng: &mut SimRng| haar_randomize(action, x, rng);
    let cfg = TestConfig { z0_is_comparison: cfg.reuse, ..*cfg };
    randomization_loop(&prepared, x, &cfg, &draw)
}
