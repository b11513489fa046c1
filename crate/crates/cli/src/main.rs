use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use condsym::groups::{ConditionalInvariance, GroupAction, RestrictedLorentz, SpecialOrthogonal, Symmetric};
use condsym::harness::{
    emit_report, p_value_histogram, run_experiment, ExperimentConfig, ReportFormat, RejectionRateReport,
};
use condsym::kernels::TestStatisticSpec;
use condsym::physics::{leading_pairs, load_constituents, ColumnSchema, FeatureMode};
use condsym::points::{read_paired_csv, PointSet};
use condsym::power::{power_bound_report, PowerBoundInputs};
use condsym::randomization::{
    baseline_permutation_test, crt_symmetry_test, marginal_invariance_test, ConditioningVariant, DataScope,
    PairedDataset, SamplerKind, TestConfig, TestResult, VariantTag,
};
use condsym::rng::{derive_seed, rng_from_seed};

#[derive(Parser, Debug)]
#[command(name = "condsym", version, about = "Randomization tests for group symmetry")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CONDSYM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one test on a data file and print its p-value.
    Test(TestArgs),
    /// Run an experiment grid and write a rejection-rate report.
    Experiment(ExperimentArgs),
    /// Evaluate the finite-sample power lower bound.
    Powerbound(PowerArgs),
    /// Run an experiment grid and write p-value histograms.
    Pvals(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GroupArg {
    So,
    Sym,
    Lorentz,
    ConditionalSo,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum TestArg {
    Crt,
    Baseline,
    Marginal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    R1,
    R2,
    R3,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SamplerArg {
    Approx,
    Transitive,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StatArg {
    Fuse,
    Mmd,
    Sk,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScopeArg {
    YOnly,
    Pair,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Transverse2d,
    FourMomentum,
}

#[derive(Args, Debug)]
struct TestArgs {
    /// CSV with columns x0.., y0.. (or constituent records with --schema).
    #[arg(long)]
    data: PathBuf,
    /// JSON column map; switches to constituent records and leading pairs.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "transverse2d")]
    mode: ModeArg,
    /// JSON test statistic specification (overrides --statistic).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "so")]
    group: GroupArg,
    #[arg(long, value_enum, default_value = "crt")]
    test: TestArg,
    #[arg(long, value_enum, default_value = "r1")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "approx")]
    sampler: SamplerArg,
    #[arg(long, value_enum, default_value = "fuse")]
    statistic: StatArg,
    #[arg(long, value_enum, default_value = "y-only")]
    scope: ScopeArg,
    #[arg(long, default_value_t = 100)]
    b: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Compare every randomization with one shared comparison set.
    #[arg(long)]
    reuse: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the full result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; `.csv` selects CSV, anything else JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the replication count.
    #[arg(long)]
    replications: Option<usize>,
}

#[derive(Args, Debug)]
struct PowerArgs {
    /// JSON file with the inputs; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Number of kernels for the adaptive bound.
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes with their exit codes.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn from_lib(e: condsym::Error) -> Self {
        match e {
            condsym::Error::Config(_) | condsym::Error::Parse { .. } | condsym::Error::Io { .. } => {
                Failure::Config(e.into())
            }
            other => Failure::Runtime(other.into()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(config_err(anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Runtime(e.into()))?;
    }
    match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Experiment(a) => cmd_experiment(a, false),
        Command::Pvals(a) => cmd_experiment(a, true),
        Command::Powerbound(a) => cmd_powerbound(a),
    }
}

fn load_pairs(a: &TestArgs) -> CliResult<(PointSet, PointSet)> {
    match &a.schema {
        None => read_paired_csv(&a.data).map_err(Failure::from_lib),
        Some(schema_path) => {
            let schema = ColumnSchema::from_json_file(schema_path).map_err(Failure::from_lib)?;
            let records = load_constituents(&a.data, &schema).map_err(Failure::from_lib)?;
            let mode = match a.mode {
                ModeArg::Transverse2d => FeatureMode::Transverse2d,
                ModeArg::FourMomentum => FeatureMode::FourMomentum,
            };
            let lp = leading_pairs(&records, mode).map_err(Failure::from_lib)?;
            eprintln!("{} events ({} skipped, {} dropped)", lp.len(), lp.skipped_events, lp.dropped_spacelike);
            Ok((lp.x, lp.y))
        }
    }
}

fn statistic(a: &TestArgs) -> CliResult<TestStatisticSpec> {
    let spec = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| p.display().to_string()).map_err(config_err)?;
            serde_json::from_str::<TestStatisticSpec>(&text)
                .with_context(|| format!("{}: not a statistic specification", p.display()))
                .map_err(config_err)?
        }
        None => match a.statistic {
            StatArg::Fuse => TestStatisticSpec::fuse(),
            StatArg::Mmd => TestStatisticSpec::mmd_gaussian(),
            StatArg::Sk => TestStatisticSpec::sk(),
        },
    };
    spec.validate().map_err(|e| config_err(anyhow!(e.to_string())))?;
    Ok(spec)
}

fn run_single<A: GroupAction + 'static>(
    action: &A,
    a: &TestArgs,
    x: PointSet,
    y: PointSet,
    stat: &TestStatisticSpec,
    cfg: &TestConfig,
) -> condsym::Result<TestResult> {
    if a.test == TestArg::Marginal {
        return marginal_invariance_test(&x, action, stat, cfg);
    }
    let ds = PairedDataset::new(action, x, y, &mut rng_from_seed(derive_seed(cfg.seed, &[u64::MAX])))?;
    let tag = match a.variant {
        VariantArg::R1 => VariantTag::R1ResampleGamma,
        VariantArg::R2 => VariantTag::R2ResampleYTilde,
        VariantArg::R3 => VariantTag::R3ResampleBoth,
    };
    let sampler = match a.sampler {
        SamplerArg::Approx => SamplerKind::ApproxKernelWeighted,
        SamplerArg::Transitive => SamplerKind::ExactTransitive,
    };
    let variant = ConditioningVariant::new(tag, sampler);
    match a.test {
        TestArg::Crt => crt_symmetry_test(action, &ds, &variant, stat, cfg),
        _ => baseline_permutation_test(action, &ds, &variant, stat, cfg),
    }
}

fn cmd_test(a: TestArgs) -> CliResult<()> {
    let (x, y) = load_pairs(&a)?;
    let stat = statistic(&a)?;
    let cfg = TestConfig {
        b: a.b,
        alpha: a.alpha,
        reuse: a.reuse,
        scope: match a.scope {
            ScopeArg::YOnly => DataScope::YOnly,
            ScopeArg::Pair => DataScope::Pair,
        },
        seed: a.seed,
        z0_is_comparison: false,
    };
    cfg.validate().map_err(|e| config_err(anyhow!(e.to_string())))?;
    let d = x.dim();
    let y_dim = y.dim();
    let lib = |e: condsym::Error| match e {
        condsym::Error::InvalidArgument(_) => config_err(anyhow!(e.to_string())),
        other => Failure::from_lib(other),
    };
    let res = match a.group {
        GroupArg::So => run_single(&SpecialOrthogonal::new(d).map_err(lib)?, &a, x, y, &stat, &cfg),
        GroupArg::Sym => run_single(&Symmetric::new(d).map_err(lib)?, &a, x, y, &stat, &cfg),
        GroupArg::Lorentz => run_single(&RestrictedLorentz, &a, x, y, &stat, &cfg),
        GroupArg::ConditionalSo => {
            let action = ConditionalInvariance::new(SpecialOrthogonal::new(d).map_err(lib)?, y_dim).map_err(lib)?;
            run_single(&action, &a, x, y, &stat, &cfg)
        }
    }
    .map_err(lib)?;
    println!("p_value {}", res.p_value);
    println!("statistic {}", res.observed_stat);
    println!("reject {}", res.decision);
    if let Some(out) = &a.out {
        let text = serde_json::to_string_pretty(&res).map_err(|e| Failure::Runtime(e.into()))?;
        write_text(out, &text)?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(Failure::Runtime)
}

fn load_experiment(a: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_json_file(&a.config).map_err(config_err)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.replications {
        cfg.replications = r;
    }
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn histogram_csv(report: &RejectionRateReport) -> String {
    let names: Vec<&String> = report.config.grid.params.keys().collect();
    let mut out = String::from("cell,n");
    for k in &names {
        out.push(',');
        out.push_str(k);
    }
    out.push_str(",p_value,count\n");
    let b = report.config.b;
    for c in &report.cells {
        let params: Vec<String> = names.iter().map(|k| c.params.get(*k).map(|v| v.to_string()).unwrap_or_default()).collect();
        for (k, count) in p_value_histogram(&c.p_values, b).iter().enumerate() {
            let mut row = format!("{},{}", c.index, c.n);
            for p in &params {
                row.push(',');
                row.push_str(p);
            }
            row.push_str(&format!(",{},{}\n", (k + 1) as f64 / (b + 1) as f64, count));
            out.push_str(&row);
        }
    }
    out
}

fn cmd_experiment(a: ExperimentArgs, histograms: bool) -> CliResult<()> {
    let cfg = load_experiment(&a)?;
    let report = run_experiment(&cfg).map_err(Failure::from_lib)?;
    let out = a.out.clone().or_else(|| cfg.output.clone());
    if histograms {
        let text = histogram_csv(&report);
        match out {
            Some(p) => write_text(&p, &text)?,
            None => print!("{text}"),
        }
        return Ok(());
    }
    for c in &report.cells {
        println!(
            "cell {} n={} {} rate={:.4} [{:.4}, {:.4}] failures={}",
            c.index,
            c.n,
            serde_json::to_string(&c.params).unwrap_or_default(),
            c.rate,
            c.ci_low,
            c.ci_high,
            c.failures
        );
    }
    if let Some(p) = out {
        emit_report(&report, ReportFormat::from_path(&p), &p).map_err(Failure::from_lib)?;
    }
    Ok(())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerFile {
    n: Option<usize>,
    b: Option<usize>,
    alpha: Option<f64>,
    nu: Option<f64>,
    eta: Option<f64>,
    delta: Option<f64>,
    l: Option<usize>,
}

fn cmd_powerbound(a: PowerArgs) -> CliResult<()> {
    let file = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| p.display().to_string()).map_err(config_err)?;
            serde_json::from_str::<PowerFile>(&text).with_context(|| p.display().to_string()).map_err(config_err)?
        }
        None => PowerFile::default(),
    };
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| config_err(anyhow!("missing --{name}")));
    let inputs = PowerBoundInputs {
        n: a.n.or(file.n).ok_or_else(|| config_err(anyhow!("missing --n")))?,
        b: a.b.or(file.b).unwrap_or(100),
        alpha: a.alpha.or(file.alpha).unwrap_or(0.05),
        nu: a.nu.or(file.nu).unwrap_or(1.0),
        eta: need(a.eta.or(file.eta), "eta")?,
        delta: need(a.delta.or(file.delta), "delta")?,
        l: a.l.or(file.l),
    };
    let report = power_bound_report(&inputs).map_err(|e| config_err(anyhow!(e.to_string())))?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.into()))?;
    println!("{text}");
    if let Some(p) = &a.out {
        write_text(p, &text)?;
    }
    Ok(())
}
