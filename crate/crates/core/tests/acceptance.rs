//! Acceptance suite. Runs every criterion in sequence, prints one
//! `PASS`/`FAIL` line each and exits non-zero if any failed.
//!
//! Run alone with `cargo test --release -p condsym --test acceptance`.
//! Set `CONDSYM_DIJET_CSV` / `CONDSYM_TOPQUARK_CSV` to add the optional
//! checks on real leading-constituent files. `CONDSYM_ACCEPTANCE_ONLY=1,7`
//! restricts the run to the listed criteria.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use condsym::diagnostics::{energy_test, ks_discrete_uniform};
use condsym::groups::*;
use condsym::harness::{run_experiment, ExperimentConfig, RejectionRateReport};
use condsym::kernels::*;
use condsym::points::PointSet;
use condsym::power::*;
use condsym::randomization::*;
use condsym::rng::{derive_seed, stream, SimRng};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde_json::{json, Value};

use common::{binomial_se, max_abs_diff, normal_points, normal_vec, random_timelike};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn run(cfg: Value) -> RejectionRateReport {
    let cfg = ExperimentConfig::from_json_str(&cfg.to_string()).expect("valid config");
    let report = run_experiment(&cfg).expect("experiment runs");
    for c in &report.cells {
        assert_eq!(c.failures, 0, "cell {} failed: {:?}", c.index, c.failure_messages);
    }
    report
}

fn rates(r: &RejectionRateReport) -> Vec<f64> {
    r.cells.iter().map(|c| c.rate).collect()
}

fn fmt_rates(v: &[f64]) -> String {
    v.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
}

fn mmd() -> Value {
    json!({"kind": "mmd", "families": ["gaussian"]})
}

// 1. Exact-null discrete uniformity.
fn crit_exact_null() -> Outcome {
    let (n, b, reps) = (50usize, 19usize, 10_000u64);
    let so3 = SpecialOrthogonal::new(3).unwrap();
    let stat = TestStatisticSpec::mmd_gaussian();
    let variant = ConditioningVariant::new(VariantTag::R1ResampleGamma, SamplerKind::ExactTransitive);
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let ps: Vec<f64> = pool.install(|| {
        (0..reps)
            .map(|rep| {
                let mut g = stream(101, &[rep, 0]);
                // X uniform on the unit sphere: SO(3) is transitive on the support.
                let raw = normal_points(&mut g, n, 3);
                let x = PointSet::from_fn(n, 3, |i, j| {
                    raw.row(i)[j] / raw.row(i).iter().map(|v| v * v).sum::<f64>().sqrt()
                });
                let noise = normal_points(&mut g, n, 3);
                let y = PointSet::from_fn(n, 3, |i, j| 2.0 * x.row(i)[j] + noise.row(i)[j]);
                let ds = PairedDataset::new(&so3, x, y, &mut g).unwrap();
                let cfg = TestConfig { b, reuse: false, seed: derive_seed(101, &[rep, 1]), ..TestConfig::default() };
                crt_symmetry_test(&so3, &ds, &variant, &stat, &cfg).unwrap().p_value
            })
            .collect()
    });
    let secs = start.elapsed().as_secs_f64();
    let mut pass = secs <= 600.0;
    let mut parts = Vec::new();
    for alpha in [0.05, 0.1, 0.25] {
        let target = (alpha * (b + 1) as f64 + 1e-12).floor() / (b + 1) as f64;
        let rate = ps.iter().filter(|&&p| p <= alpha).count() as f64 / reps as f64;
        let se = binomial_se(target, reps as usize);
        pass &= (rate - target).abs() <= 3.0 * se;
        parts.push(format!("alpha={alpha}: {rate:.4} vs {target:.4} (3SE {:.4})", 3.0 * se));
    }
    Outcome::new(pass, format!("{}; {secs:.0}s single-threaded", parts.join("; ")))
}

// 2 and 3. Marginal invariance test on the planar design.
fn crit_marginal() -> (Outcome, Outcome) {
    let angles = [PI / 2.0, PI, 3.0 * PI / 2.0, 2.0 * PI];
    let start = Instant::now();
    let r = run(json!({
        "source": {"kind": "synth", "design": {"design": "rot2d_invariance", "p_angle": 2.0 * PI}},
        "group": "special_orthogonal",
        "test": "marginal",
        "grid": {"n": [100], "params": {"p_angle": angles}},
        "replications": 1000,
        "b": 100,
        "seed": 202,
        "record_wall_time": true
    }));
    let v = rates(&r);
    let level_secs = r.cells[3].wall_time_s.unwrap();
    let level = v[3];
    let c2 = Outcome::new(
        (0.03..=0.07).contains(&level) && level_secs <= 1800.0,
        format!("p_angle=2pi rate {level:.3}, CI [{:.3}, {:.3}], {level_secs:.0}s", r.cells[3].ci_low, r.cells[3].ci_high),
    );
    let strictly = v.windows(2).all(|w| w[1] < w[0]);
    let c3 = Outcome::new(strictly, format!("rates over p_angle = pi/2, pi, 3pi/2, 2pi: {}; {:.0}s", fmt_rates(&v), start.elapsed().as_secs_f64()));
    (c2, c3)
}

// 4. CRT level and power on the equicorrelated Gaussian design, RN against BS.
fn crit_crt_level_power() -> Outcome {
    let base = |test: &str, n: usize, ps: Vec<f64>, reps: usize, seed: u64| {
        json!({
            "source": {"kind": "synth", "design": {"design": "gauss_cov", "d": 3, "p": 0.0}},
            "group": "special_orthogonal",
            "test": test,
            "grid": {"n": [n], "params": {"p": ps}},
            "replications": reps,
            "b": 100,
            "seed": seed
        })
    };
    let null = run(base("crt", 100, vec![0.0], 1000, 401)).cells[0].rate;
    let power = run(base("crt", 500, vec![0.8], 100, 402)).cells[0].rate;
    let rn = rates(&run(base("crt", 100, vec![0.4, 0.8], 200, 403)));
    let bs = rates(&run(base("baseline", 100, vec![0.4, 0.8], 200, 403)));
    let rn_mean = rn.iter().sum::<f64>() / rn.len() as f64;
    let bs_mean = bs.iter().sum::<f64>() / bs.len() as f64;
    let pass = (0.03..=0.07).contains(&null) && power > 0.9 && rn_mean >= bs_mean;
    Outcome::new(
        pass,
        format!(
            "p=0 n=100 rate {null:.3}; p=0.8 n=500 RN-FS rate {power:.3}; n=100 p=(0.4, 0.8) RN {} vs BS {} (means {rn_mean:.3} vs {bs_mean:.3})",
            fmt_rates(&rn),
            fmt_rates(&bs)
        ),
    )
}

// 5. Dimension effects.
fn crit_dimension() -> Outcome {
    let cell = |design: &str, seed: u64| {
        rates(&run(json!({
            "source": {"kind": "synth", "design": {"design": design, "d": 3, "p": 0.8}},
            "group": "special_orthogonal",
            "statistic": mmd(),
            "grid": {"n": [500], "params": {"d": [3, 4, 5]}},
            "replications": 500,
            "b": 50,
            "seed": seed
        })))
    };
    let all = cell("gauss_cov", 501);
    let pairwise = cell("gauss_pairwise_cov", 502);
    let up = all.windows(2).all(|w| w[1] >= w[0]);
    let down = pairwise.windows(2).all(|w| w[1] <= w[0]);
    Outcome::new(up && down, format!("d = 3, 4, 5: all-off-diagonal {}; pairwise {}", fmt_rates(&all), fmt_rates(&pairwise)))
}

// 6. Exact against kernel-weighted conditional sampling on the chi design.
fn crit_exact_vs_approx() -> Outcome {
    let cfg = |oracle: bool| {
        json!({
            "source": {"kind": "synth", "design": {"design": "chi_exact", "d": 3, "p": 0.0}},
            "group": "special_orthogonal",
            "exact_oracle": oracle,
            "statistic": mmd(),
            "grid": {"n": [100, 250], "params": {"p": [0.0, 0.4, 0.8]}},
            "replications": 1000,
            "b": 50,
            "seed": 606
        })
    };
    let approx = run(cfg(false));
    let exact = run(cfg(true));
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut ks = Vec::new();
    for (a, e) in approx.cells.iter().zip(&exact.cells) {
        worst = worst.max((a.rate - e.rate).abs());
        if a.params["p"].as_f64() == Some(0.0) {
            let (ka, ke) = (ks_discrete_uniform(&a.p_values, 50), ks_discrete_uniform(&e.p_values, 50));
            pass &= ka < 0.06 && ke < 0.06;
            ks.push(format!("n={}: KS approx {ka:.3} exact {ke:.3}", a.n));
        }
    }
    pass &= worst <= 0.05;
    Outcome::new(
        pass,
        format!(
            "approx {} / exact {}; max gap {worst:.3}; {}",
            fmt_rates(&rates(&approx)),
            fmt_rates(&rates(&exact)),
            ks.join("; ")
        ),
    )
}

/// Round trip, invariant and orbit-selector checks for one action; returns the
/// worst round-trip and invariant errors.
fn action_checks<A: GroupAction>(
    a: &A,
    checks: usize,
    seed: u64,
    draw_x: impl Fn(&mut SimRng) -> Vec<f64>,
    draw_g: impl Fn(&A, &mut SimRng) -> A::Element,
) -> (f64, f64) {
    let mut g = stream(seed, &[0]);
    let (mut trip, mut inv): (f64, f64) = (0.0, 0.0);
    for _ in 0..checks {
        let x = draw_x(&mut g);
        let t = a.sample_inversion(&x, &mut g).unwrap();
        let rep = a.orbit_rep_vec(&x).unwrap();
        trip = trip.max(max_abs_diff(&a.act_x_vec(&t, &rep), &x));
        let h = draw_g(a, &mut g);
        let hx = a.act_x_vec(&h, &x);
        inv = inv.max(max_abs_diff(&a.max_invariant_vec(&x).unwrap(), &a.max_invariant_vec(&hx).unwrap()));
        inv = inv.max(max_abs_diff(&rep, &a.orbit_rep_vec(&hx).unwrap()));
    }
    (trip, inv)
}

/// Energy test of `{gᵢxᵢ}` against `{h g'ᵢ xᵢ}` for Haar `g, g'` and a fixed `h`.
fn haar_pushforward<A: GroupAction>(a: &A, seed: u64, draw_x: impl Fn(&mut SimRng) -> Vec<f64>) -> f64 {
    let mut g = stream(seed, &[1]);
    let m = 200;
    let d = a.x_dim();
    let h = a.sample_haar(&mut g).unwrap();
    let (mut left, mut right) = (PointSet::zeros(m, d), PointSet::zeros(m, d));
    for i in 0..m {
        let x = draw_x(&mut g);
        let gi = a.sample_haar(&mut g).unwrap();
        a.act_x(&gi, &x, left.row_mut(i));
        let gj = a.sample_haar(&mut g).unwrap();
        a.act_x(&a.compose(&h, &gj), &x, right.row_mut(i));
    }
    energy_test(&left, &right, 199, &mut g).unwrap()
}

// 7. Group-action invariant suite.
fn crit_groups() -> Outcome {
    let start = Instant::now();
    let checks = 1000;
    let shifted = |d: usize| move |g: &mut SimRng| normal_vec(g, d).iter().map(|v| v + 1.0).collect::<Vec<f64>>();
    let mut lines = Vec::new();
    let mut pass = true;
    let mut record = |name: &str, (trip, inv): (f64, f64), p: Option<f64>| {
        let ok = trip <= 1e-6 && inv <= 1e-7 && p.is_none_or(|p| p > 0.01);
        pass &= ok;
        lines.push(match p {
            Some(p) => format!("{name} trip {trip:.1e} inv {inv:.1e} energy p {p:.2}"),
            None => format!("{name} trip {trip:.1e} inv {inv:.1e}"),
        });
    };
    for d in [2usize, 3, 5] {
        let a = SpecialOrthogonal::new(d).unwrap();
        let r = action_checks(&a, checks, 700 + d as u64, shifted(d), |a, g| a.sample_haar(g).unwrap());
        record(&format!("SO({d})"), r, Some(haar_pushforward(&a, 710 + d as u64, shifted(d))));
    }
    let sym = Symmetric::new(4).unwrap();
    let ties = |g: &mut SimRng| {
        let mut x = normal_vec(g, 4);
        if g.random::<f64>() < 0.3 {
            x[3] = x[1];
        }
        x
    };
    let r = action_checks(&sym, checks, 720, ties, |a, g| a.sample_haar(g).unwrap());
    record("Sym(4)", r, Some(haar_pushforward(&sym, 721, shifted(4))));
    let r = action_checks(&PairedRotations, checks, 730, shifted(4), |a, g| a.sample_haar(g).unwrap());
    record("paired SO(2)", r, Some(haar_pushforward(&PairedRotations, 731, shifted(4))));
    let r = action_checks(&ProductRotations, checks, 740, shifted(4), |a, g| a.sample_haar(g).unwrap());
    record("SO(2)xSO(2)", r, Some(haar_pushforward(&ProductRotations, 741, shifted(4))));
    let cond = ConditionalInvariance::new(SpecialOrthogonal::new(3).unwrap(), 2).unwrap();
    let r = action_checks(&cond, checks, 750, shifted(3), |a, g| a.sample_haar(g).unwrap());
    record("SO(3) on X only", r, Some(haar_pushforward(&cond, 751, shifted(3))));

    let lorentz_x = |g: &mut SimRng| random_timelike(g, 10.0).to_vec();
    let r = action_checks(&RestrictedLorentz, checks, 760, lorentz_x, |_, g| random_lorentz(g, 2.0));
    record("SO+(1,3)", r, None);
    let mut g = stream(770, &[0]);
    let mut q_err: f64 = 0.0;
    for _ in 0..checks {
        let x = FourMomentum::from_slice(&random_timelike(&mut g, 10.0));
        let lx = random_lorentz(&mut g, 2.0).apply_momentum(&x);
        q_err = q_err.max((minkowski_invariant(&x) - minkowski_invariant(&lx)).abs() / (lx.e * lx.e).max(1.0));
    }
    pass &= q_err <= 1e-9;
    lines.push(format!("Lorentz relative Q error {q_err:.1e}"));
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 60.0;
    Outcome::new(pass, format!("{checks} checks per group; {}; {secs:.1}s", lines.join("; ")))
}

fn naive_u(z: &PointSet, zp: &PointSet, k: &KernelFunction) -> f64 {
    let n = z.len();
    let (mut within, mut cross) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                within += k.eval_unchecked(z.row(i), z.row(j)) + k.eval_unchecked(zp.row(i), zp.row(j));
            }
            cross += k.eval_unchecked(z.row(i), zp.row(j));
        }
    }
    let nf = n as f64;
    within / (nf * (nf - 1.0)) - 2.0 * cross / (nf * nf)
}

fn naive_v(z: &PointSet, zp: &PointSet, k: &KernelFunction) -> f64 {
    let n = z.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += k.eval_unchecked(z.row(i), z.row(j)) + k.eval_unchecked(zp.row(i), zp.row(j))
                - 2.0 * k.eval_unchecked(z.row(i), zp.row(j));
        }
    }
    s / (n * n) as f64
}

// 8. Statistic oracle equivalence.
fn crit_statistics() -> Outcome {
    let mut g = stream(808, &[0]);
    let (mut worst, mut worst_l1): (f64, f64) = (0.0, 0.0);
    let families = [KernelFamily::Gaussian, KernelFamily::Laplace];
    for _ in 0..100 {
        let n = g.random_range(2..=40usize);
        let d = g.random_range(1..=5usize);
        let z = normal_points(&mut g, n, d);
        let zp = PointSet::from_fn(n, d, |_, _| 0.5 + 1.5 * g.random::<f64>());
        let l = g.random_range(1..=10usize);
        let mut sigmas: Vec<f64> = (0..l).map(|_| 0.2 + 3.0 * g.random::<f64>()).collect();
        sigmas.sort_by(f64::total_cmp);
        let grid = BandwidthGrid::new(sigmas).unwrap();
        let kernels: Vec<KernelFunction> = families
            .iter()
            .flat_map(|&f| grid.values().iter().map(move |&s| KernelFunction::new(f, s).unwrap()))
            .collect();
        let us: Vec<f64> = kernels.iter().map(|k| naive_u(&z, &zp, k)).collect();
        for (k, u) in kernels.iter().zip(&us) {
            worst = worst.max((mmd2_u(&z, &zp, k).unwrap() - u).abs());
            worst = worst.max((mmd2_v(&z, &zp, k).unwrap() - naive_v(&z, &zp, k)).abs());
        }
        let omega = ((n * (n - 1)) as f64).sqrt();
        let mx = us.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lme = mx + (us.iter().map(|u| (omega * (u - mx)).exp()).sum::<f64>() / us.len() as f64).ln() / omega;
        worst = worst.max((fuse_statistic(&z, &zp, &grid, &families, omega).unwrap().value - lme).abs());
        worst = worst.max((sk_statistic(&z, &zp, &grid, &families).unwrap().value - mx).abs());

        let one = BandwidthGrid::new(vec![grid.values()[0]]).unwrap();
        let fam = [families[g.random_range(0..2usize)]];
        let u = mmd2_u(&z, &zp, &KernelFunction::new(fam[0], one.values()[0]).unwrap()).unwrap();
        worst_l1 = worst_l1.max((fuse_statistic(&z, &zp, &one, &fam, omega).unwrap().value - u).abs());
        worst_l1 = worst_l1.max((sk_statistic(&z, &zp, &one, &fam).unwrap().value - u).abs());
    }
    Outcome::new(
        worst <= 1e-10 && worst_l1 <= 1e-12,
        format!("100 instances: max oracle gap {worst:.1e}; L=1 reductions {worst_l1:.1e}"),
    )
}

fn exact_cdf(k: i64, trials: u32, num: i64, den: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let p = BigRational::new(BigInt::from(num), BigInt::from(den));
    let q = BigRational::one() - &p;
    let mut sum = BigRational::zero();
    let mut choose = BigInt::one();
    for j in 0..=(k.min(trials as i64) as u32) {
        if j > 0 {
            choose = choose * BigInt::from(trials - j + 1) / BigInt::from(j);
        }
        sum += BigRational::from_integer(choose.clone())
            * num_traits::pow(p.clone(), j as usize)
            * num_traits::pow(q.clone(), (trials - j) as usize);
    }
    sum.to_f64().unwrap()
}

// 9. Power-bound calculator.
fn crit_power_bounds() -> Outcome {
    let mut cdf_err: f64 = 0.0;
    let probs = [(1, 2), (1, 3), (1, 10), (7, 10), (1, 97), (96, 97), (3, 64)];
    for trials in 1..=50u32 {
        for &(num, den) in &probs {
            for k in -1..=trials as i64 {
                let got = binomial_cdf(k, trials as usize, num as f64 / den as f64).unwrap();
                cdf_err = cdf_err.max((got - exact_cdf(k, trials, num, den)).abs());
            }
        }
    }
    let mut monotone = true;
    for (n, b, alpha) in [(50usize, 99usize, 0.05), (500, 199, 0.05), (2000, 999, 0.01)] {
        let mut prev = 0.0;
        for i in 0..=400 {
            let delta = 0.005 * i as f64;
            let bound = power_lower_bound(&PowerBoundInputs { n, b, alpha, nu: 1.0, eta: 1.0, delta, l: None }).unwrap();
            monotone &= bound >= prev;
            prev = bound;
        }
    }
    let mut trip_err: f64 = 0.0;
    let mut covered = true;
    for (b, alpha) in [(99usize, 0.05), (199, 0.05), (999, 0.01)] {
        let ba = b_alpha(b, alpha) as f64;
        for beta in [0.1, 0.5, 0.8] {
            if -2.0 * (1.0f64 - beta).ln() / ba >= 1.0 {
                continue;
            }
            for n in [100usize, 1000] {
                let t = delta_threshold(beta, b, alpha, n, 1.0, 1.0).unwrap();
                let eps = (-2.0 * (1.0f64 - beta).ln() / ba).sqrt();
                let p = success_prob(t, n, 1.0, 1.0).unwrap();
                trip_err = trip_err.max((b as f64 * p - ba * (1.0 - eps)).abs() / ba);
                let bound = power_lower_bound(&PowerBoundInputs { n, b, alpha, nu: 1.0, eta: 1.0, delta: t, l: None }).unwrap();
                covered &= bound >= beta;
            }
        }
    }
    Outcome::new(
        cdf_err <= 1e-12 && monotone && trip_err <= 1e-9 && covered,
        format!("CDF gap {cdf_err:.1e} over B <= 50; monotone in delta: {monotone}; threshold round trip {trip_err:.1e}, bound >= beta: {covered}"),
    )
}

// 10. Jet surrogate, original against shuffled.
fn crit_physics() -> Outcome {
    let cfg = |shuffle: bool| {
        json!({
            "source": {"kind": "jet_surrogate"},
            "group": "special_orthogonal",
            "shuffle": shuffle,
            "grid": {"n": [100]},
            "replications": 500,
            "b": 100,
            "seed": 1010
        })
    };
    let original = run(cfg(false)).cells[0].rate;
    let shuffled = run(cfg(true)).cells[0].rate;
    Outcome::new(original <= 0.07 && shuffled >= 0.8, format!("original {original:.3}, shuffled {shuffled:.3}"))
}

fn optional_csv(var: &str, group: &str, mode: &str, original_max: f64, shuffled_min: f64) -> Option<Outcome> {
    let path = std::env::var(var).ok()?;
    let cfg = |shuffle: bool| {
        json!({
            "source": {"kind": "csv", "path": path, "mode": mode},
            "group": group,
            "shuffle": shuffle,
            "grid": {"n": [100]},
            "replications": 200,
            "b": 100,
            "seed": 1111
        })
    };
    let original = run(cfg(false)).cells[0].rate;
    let shuffled = run(cfg(true)).cells[0].rate;
    Some(Outcome::new(
        original <= original_max && shuffled >= shuffled_min,
        format!("{path}: original {original:.3} (<= {original_max}), shuffled {shuffled:.3} (>= {shuffled_min})"),
    ))
}

// 11. Permutation-equivariance design.
fn crit_perm_shift() -> Outcome {
    let cfg = |d: usize, s: f64, params: Value, reps: usize, seed: u64| {
        json!({
            "source": {"kind": "synth", "design": {"design": "perm_shift", "d": d, "s": s}},
            "group": "symmetric",
            "statistic": mmd(),
            "grid": {"n": [250], "params": params},
            "replications": reps,
            "b": 100,
            "seed": seed
        })
    };
    let level = run(cfg(3, 0.0, json!({}), 1000, 1101)).cells[0].rate;
    let by_s = rates(&run(cfg(3, 0.0, json!({"s": [0.25, 0.5, 1.0, 2.0]}), 300, 1102)));
    let by_d = rates(&run(cfg(3, 1.0, json!({"d": [3, 4, 5]}), 300, 1103)));
    let pass = (0.03..=0.07).contains(&level)
        && by_s.windows(2).all(|w| w[1] > w[0])
        && by_d.windows(2).all(|w| w[1] < w[0]);
    Outcome::new(
        pass,
        format!("s=0 rate {level:.3}; d=3 s=(0.25, 0.5, 1, 2): {}; s=1 d=(3, 4, 5): {}", fmt_rates(&by_s), fmt_rates(&by_d)),
    )
}

fn selected() -> Option<Vec<u32>> {
    let v = std::env::var("CONDSYM_ACCEPTANCE_ONLY").ok()?;
    Some(v.split(',').filter_map(|t| t.trim().parse().ok()).collect())
}

fn main() {
    let only = selected();
    let want = |k: u32| only.as_ref().is_none_or(|v| v.contains(&k));
    let mut results: Vec<(String, Option<Outcome>)> = Vec::new();
    let mut report = |name: &str, o: Option<Outcome>| {
        match &o {
            Some(o) => println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail),
            None => println!("SKIP {name}"),
        }
        results.push((name.to_string(), o));
    };
    let total = Instant::now();
    report("criterion 1 exact-null discrete uniformity", want(1).then(crit_exact_null));
    if want(2) || want(3) {
        let (c2, c3) = crit_marginal();
        report("criterion 2 marginal test level", Some(c2));
        report("criterion 3 marginal test power trend", Some(c3));
    }
    report("criterion 4 CRT level and power", want(4).then(crit_crt_level_power));
    report("criterion 5 dimension effects", want(5).then(crit_dimension));
    report("criterion 6 exact vs approximate sampling", want(6).then(crit_exact_vs_approx));
    report("criterion 7 group-action invariants", want(7).then(crit_groups));
    report("criterion 8 statistic oracles", want(8).then(crit_statistics));
    report("criterion 9 power-bound calculator", want(9).then(crit_power_bounds));
    report("criterion 10 jet surrogate", want(10).then(crit_physics));
    report(
        "criterion 10 optional dijet CSV (CONDSYM_DIJET_CSV)",
        want(10).then(|| optional_csv("CONDSYM_DIJET_CSV", "special_orthogonal", "transverse2d", 0.01, 0.75)).flatten(),
    );
    report(
        "criterion 10 optional top-quark CSV (CONDSYM_TOPQUARK_CSV)",
        want(10).then(|| optional_csv("CONDSYM_TOPQUARK_CSV", "lorentz", "four_momentum", 0.02, 0.6)).flatten(),
    );
    report("criterion 11 permutation-equivariance design", want(11).then(crit_perm_shift));
    let failed: Vec<&String> = results.iter().filter(|(_, o)| o.as_ref().is_some_and(|o| !o.pass)).map(|(n, _)| n).collect();
    println!("acceptance: {} failed, {:.0}s total", failed.len(), total.elapsed().as_secs_f64());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
