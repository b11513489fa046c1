#![allow(dead_code)]

use condsym::points::PointSet;
use condsym::rng::{rng_from_seed, SimRng};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> SimRng {
    rng_from_seed(seed)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn normal_vec(rng: &mut SimRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn normal_points(rng: &mut SimRng, n: usize, d: usize) -> PointSet {
    PointSet::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Timelike four-momentum with mass in `[0, 2)` and momentum up to `scale`.
pub fn random_timelike(rng: &mut SimRng, scale: f64) -> [f64; 4] {
    let p: Vec<f64> = (0..3).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    let m: f64 = 2.0 * rng.random::<f64>();
    let e = (m * m + p.iter().map(|v| v * v).sum::<f64>()).sqrt();
    [e, p[0], p[1], p[2]]
}

/// Standard error of a binomial proportion.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
