//! Goodness-of-fit helpers used to check samplers and p-value distributions.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng::SimRng;

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// KS distance of p-values from the uniform law on the atoms
/// `{1/(B+1), 2/(B+1), …, 1}`, which is the exact null law of a randomization
/// p-value with `B` draws and no ties.
pub fn ks_discrete_uniform(p_values: &[f64], b: usize) -> f64 {
    let atoms = b + 1;
    let n = p_values.len() as f64;
    let mut counts = vec![0usize; atoms];
    for &p in p_values {
        let k = ((p * atoms as f64).round() as usize).clamp(1, atoms);
        counts[k - 1] += 1;
    }
    let mut cum = 0usize;
    let mut d: f64 = 0.0;
    for (k, c) in counts.iter().enumerate() {
        cum += c;
        let emp = cum as f64 / n;
        let theo = (k + 1) as f64 / atoms as f64;
        d = d.max((emp - theo).abs());
    }
    d
}

/// Pearson chi-square statistic against equal expected counts.
pub fn chi_square_uniform(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

fn mean_pair_distance(a: &PointSet, ia: &[usize], b: &PointSet, ib: &[usize], same: bool) -> f64 {
    let mut s = 0.0;
    let mut count = 0usize;
    for (p, &i) in ia.iter().enumerate() {
        let start = if same { p + 1 } else { 0 };
        for &j in &ib[start..] {
            let d2: f64 = a.row(i).iter().zip(b.row(j)).map(|(x, y)| (x - y) * (x - y)).sum();
            s += d2.sqrt();
            count += 1;
        }
    }
    s / count as f64
}

/// Energy distance `2E‖X−Y‖ − E‖X−X'‖ − E‖Y−Y'‖` between two samples.
pub fn energy_distance(x: &PointSet, y: &PointSet) -> f64 {
    let ix: Vec<usize> = (0..x.len()).collect();
    let iy: Vec<usize> = (0..y.len()).collect();
    let pooled = x.vconcat(y).expect("same dimension");
    let iy_p: Vec<usize> = (x.len()..pooled.len()).collect();
    2.0 * mean_pair_distance(x, &ix, y, &iy, false)
        - mean_pair_distance(&pooled, &ix, &pooled, &ix, true)
        - mean_pair_distance(&pooled, &iy_p, &pooled, &iy_p, true)
}

/// Permutation p-value of the energy distance two-sample test.
pub fn energy_test(x: &PointSet, y: &PointSet, permutations: usize, rng: &mut SimRng) -> Result<f64> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::invalid("energy test needs at least two points per sample"));
    }
    let pooled = x.vconcat(y)?;
    let n = pooled.len();
    let m = x.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d2: f64 = pooled.row(i).iter().zip(pooled.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            dist[i * n + j] = d2.sqrt();
            dist[j * n + i] = d2.sqrt();
        }
    }
    let stat = |lab: &[bool]| {
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let d = dist[i * n + j];
                match (lab[i], lab[j]) {
                    (true, true) => sxx += d,
                    (false, false) => syy += d,
                    _ => sxy += d,
                }
            }
        }
        let k = (n - m) as f64;
        let mf = m as f64;
        2.0 * sxy / (mf * k) - 2.0 * sxx / (mf * (mf - 1.0)) - 2.0 * syy / (k * (k - 1.0))
    };
    let mut labels: Vec<bool> = (0..n).map(|i| i < m).collect();
    let observed = stat(&labels);
    let mut ge = 0usize;
    for _ in 0..permutations {
        labels.shuffle(rng);
        if stat(&labels) >= observed {
            ge += 1;
        }
    }
    Ok((1 + ge) as f64 / (permutations + 1) as f64)
}
