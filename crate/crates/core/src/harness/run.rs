use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::index::sample;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{CellSpec, DataSource, ExperimentConfig, GroupSpec, MarginalInput, TestKind};
use super::report::{CellReport, RejectionRateReport};
use crate::error::{Error, Result};
use crate::groups::{
    ConditionalInvariance, GroupAction, PairedRotations, ProductRotations, RestrictedLorentz, SpecialOrthogonal,
    Symmetric,
};
use crate::physics::{leading_pairs, load_constituents, shuffle_responses, LeadingPairs};
use crate::points::PointSet;
use crate::randomization::{
    baseline_with_randomizer, crt_with_randomizer, marginal_invariance_test, ApproxRandomizer, GammaOracle,
    PairedDataset, Randomizer, TestResult,
};
use crate::rng::{derive_seed, stream, SimRng};
use crate::synth::{gen_chi_exact, SynthDesign};

const S_DATA: u64 = 0;
const S_TEST: u64 = 1;
const S_INVERSION: u64 = 2;
const S_SHUFFLE: u64 = 3;

struct Sample {
    x: PointSet,
    y: Option<PointSet>,
    oracle: Option<GammaOracle<SpecialOrthogonal>>,
}

fn draw_sample(
    cfg: &ExperimentConfig,
    cell: &CellSpec,
    loaded: Option<&LeadingPairs>,
    rng: &mut SimRng,
) -> Result<Sample> {
    let n = cell.n;
    match &cell.source {
        DataSource::Synth { design: SynthDesign::ChiExact { d, p } } => {
            let (s, sampler) = gen_chi_exact(n, *d, *p, rng)?;
            let oracle: Option<GammaOracle<SpecialOrthogonal>> = cfg.exact_oracle.then_some(sampler);
            Ok(Sample { x: s.x, y: s.y, oracle })
        }
        DataSource::Synth { design } => {
            let s = design.generate(n, rng)?;
            Ok(Sample { x: s.x, y: s.y, oracle: None })
        }
        DataSource::JetSurrogate { surrogate } => {
            let s = surrogate.generate(n, rng)?;
            Ok(Sample { x: s.x, y: Some(s.y), oracle: None })
        }
        DataSource::Csv { .. } => {
            let all = loaded.expect("CSV sources are loaded before the run");
            if n > all.len() {
                return Err(Error::invalid(format!("n = {n} exceeds the {} available events", all.len())));
            }
            let mut idx = sample(rng, all.len(), n).into_vec();
            idx.sort_unstable();
            Ok(Sample { x: all.x.select(&idx), y: Some(all.y.select(&idx)), oracle: None })
        }
    }
}

fn run_with_action<A: GroupAction + 'static>(
    action: &A,
    cfg: &ExperimentConfig,
    sample: Sample,
    oracle: Option<GammaOracle<A>>,
    seeds: (u64, u64),
) -> Result<TestResult> {
    let (test_seed, inversion_seed) = seeds;
    let tc = cfg.test_config(test_seed);
    match cfg.test {
        TestKind::Marginal => {
            let input = match (cfg.marginal_input, &sample.y) {
                (MarginalInput::X, _) => sample.x,
                (MarginalInput::Pair, Some(y)) => sample.x.hconcat(y)?,
                (MarginalInput::Pair, None) => return Err(Error::Config("no response to pair with".into())),
            };
            marginal_invariance_test(&input, action, &cfg.statistic, &tc)
        }
        TestKind::Crt | TestKind::Baseline => {
            let y = sample.y.ok_or_else(|| Error::Config("the test needs a response".into()))?;
            let ds = PairedDataset::new(action, sample.x, y, &mut crate::rng::rng_from_seed(inversion_seed))?;
            let randomizer: Box<dyn Randomizer<A>> = match oracle {
                Some(o) => Box::new(ApproxRandomizer::with_gamma_oracle(&ds, cfg.variant.tag, o)?),
                None => cfg.variant.build(&ds)?,
            };
            if cfg.test == TestKind::Crt {
                crt_with_randomizer(action, &ds, randomizer.as_ref(), &cfg.statistic, &tc)
            } else {
                baseline_with_randomizer(action, &ds, randomizer.as_ref(), &cfg.statistic, &tc)
            }
        }
    }
}

/// One replication of one cell. Data, the fixed inversion draws and the test
/// use separate streams derived from `(seed, cell, replication)`.
pub fn run_replication(
    cfg: &ExperimentConfig,
    cell: &CellSpec,
    rep: usize,
    loaded: Option<&LeadingPairs>,
) -> Result<TestResult> {
    let base = [cell.index as u64, rep as u64];
    let path = |s: u64| [base[0], base[1], s];
    let mut rng = stream(cfg.seed, &path(S_DATA));
    let mut sample = draw_sample(cfg, cell, loaded, &mut rng)?;
    if cfg.shuffle {
        let y = sample.y.take().ok_or_else(|| Error::Config("shuffle needs a response".into()))?;
        let lp = LeadingPairs {
            x: sample.x.clone(),
            y,
            mode: Default::default(),
            event_ids: Vec::new(),
            skipped_events: 0,
            dropped_spacelike: 0,
        };
        sample.y = Some(shuffle_responses(&lp, &mut stream(cfg.seed, &path(S_SHUFFLE))).y);
    }
    let seeds = (derive_seed(cfg.seed, &path(S_TEST)), derive_seed(cfg.seed, &path(S_INVERSION)));
    let d = sample.x.dim();
    let y_dim = sample.y.as_ref().map_or(d, |y| y.dim());
    match cfg.group {
        GroupSpec::SpecialOrthogonal => {
            let oracle = sample.oracle.take();
            run_with_action(&SpecialOrthogonal::new(d)?, cfg, sample, oracle, seeds)
        }
        GroupSpec::Symmetric => run_with_action(&Symmetric::new(d)?, cfg, sample, None, seeds),
        GroupSpec::PairedRotations => run_with_action(&PairedRotations, cfg, sample, None, seeds),
        GroupSpec::ProductRotations => run_with_action(&ProductRotations, cfg, sample, None, seeds),
        GroupSpec::Lorentz => run_with_action(&RestrictedLorentz, cfg, sample, None, seeds),
        GroupSpec::ConditionalSpecialOrthogonal => {
            let action = ConditionalInvariance::new(SpecialOrthogonal::new(d)?, y_dim)?;
            run_with_action(&action, cfg, sample, None, seeds)
        }
    }
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".into()
    }
}

fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let canonical = serde_json::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn load_source(cfg: &ExperimentConfig) -> Result<Option<LeadingPairs>> {
    match &cfg.source {
        DataSource::Csv { path, schema, mode } => {
            let records = load_constituents(path, schema)?;
            let pairs = leading_pairs(&records, *mode)?;
            log::info!(
                "{}: {} events ({} skipped, {} dropped)",
                path.display(),
                pairs.len(),
                pairs.skipped_events,
                pairs.dropped_spacelike
            );
            Ok(Some(pairs))
        }
        _ => Ok(None),
    }
}

/// Run every grid cell. Replications of a cell run in parallel on the current
/// rayon pool; errors and panics are recorded per replication.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RejectionRateReport> {
    cfg.validate()?;
    let loaded = load_source(cfg)?;
    let cells = cfg.grid.cells(&cfg.source)?;
    let mut reports = Vec::with_capacity(cells.len());
    for cell in &cells {
        let start = Instant::now();
        let outcomes: Vec<std::result::Result<f64, String>> = (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                match catch_unwind(AssertUnwindSafe(|| run_replication(cfg, cell, rep, loaded.as_ref()))) {
                    Ok(Ok(r)) => Ok(r.p_value),
                    Ok(Err(e)) => Err(format!("replication {rep}: {e}")),
                    Err(p) => Err(format!("replication {rep} panicked: {}", panic_message(p))),
                }
            })
            .collect();
        let mut p_values = Vec::with_capacity(outcomes.len());
        let mut failures = Vec::new();
        for o in outcomes {
            match o {
                Ok(p) => p_values.push(p),
                Err(m) => failures.push(m),
            }
        }
        if !failures.is_empty() {
            log::warn!("cell {}: {} failed replications, first: {}", cell.index, failures.len(), failures[0]);
        }
        let mut report = CellReport::from_p_values(
            cell.index,
            cell.n,
            cell.params.clone(),
            cfg.replications,
            p_values,
            cfg.alpha,
            failures,
        );
        if cfg.record_wall_time {
            report.wall_time_s = Some(start.elapsed().as_secs_f64());
        }
        log::info!("cell {} (n = {}, {:?}): rate {:.3}", cell.index, cell.n, cell.params, report.rate);
        reports.push(report);
    }
    Ok(RejectionRateReport { config: cfg.clone(), config_hash: config_hash(cfg)?, seed: cfg.seed, cells: reports })
}
