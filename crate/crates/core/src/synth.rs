//! Seeded generators for the synthetic designs.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{rotation_2d, so_d_sample_inversion, RotationMatrix};
use crate::points::PointSet;
use crate::rng::SimRng;

/// Off-diagonal correlation of the `X` marginal.
pub const X_CORRELATION: f64 = 0.75;

/// Generated sample; `y` is absent for marginal designs.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSample {
    pub x: PointSet,
    pub y: Option<PointSet>,
}

/// Draws `Γ` from the exact conditional given the maximal invariant `‖X‖`.
pub type ExactGammaSampler = Arc<dyn Fn(&[f64], &mut SimRng) -> Result<RotationMatrix> + Send + Sync>;

/// Multivariate normal with a fixed covariance, sampled through its Cholesky factor.
#[derive(Clone, Debug)]
pub struct MvNormal {
    chol: DMatrix<f64>,
}

impl MvNormal {
    pub fn new(cov: DMatrix<f64>) -> Result<Self> {
        if !cov.is_square() || cov.nrows() == 0 {
            return Err(Error::invalid("covariance must be square and nonempty"));
        }
        let chol = Cholesky::new(cov).ok_or_else(|| Error::invalid("covariance is not positive definite"))?;
        Ok(MvNormal { chol: chol.l() })
    }

    pub fn dim(&self) -> usize {
        self.chol.nrows()
    }

    /// `out = mean + L z`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, mean: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        for i in 0..d {
            let mut s = mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                s += self.chol[(i, j)] * zj;
            }
            out[i] = s;
        }
    }
}

/// Unit diagonal, constant off-diagonal `c`.
pub fn equicorrelation(d: usize, c: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { c })
}

/// Unit diagonal with `p` only at entries (0,1) and (1,0).
pub fn pairwise_correlation(d: usize, p: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else if (i, j) == (0, 1) || (i, j) == (1, 0) {
            p
        } else {
            0.0
        }
    })
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid("dimension must be at least 2"));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("n must be at least 1"));
    }
    Ok(())
}

/// `Xᵢ = R_{θᵢ} Zᵢ` with `Zᵢ ~ N((1,0), I₂)` and `θᵢ ~ Unif[0, p_angle)`.
pub fn gen_rot2d_invariance<R: Rng + ?Sized>(n: usize, p_angle: f64, rng: &mut R) -> Result<PointSet> {
    check_n(n)?;
    if !(p_angle > 0.0 && p_angle <= TAU) {
        return Err(Error::invalid("angle range must lie in (0, 2 pi]"));
    }
    let mut x = PointSet::zeros(n, 2);
    for i in 0..n {
        let z = [1.0 + rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)];
        let theta = rng.random::<f64>() * p_angle;
        rotation_2d(theta)?.apply(&z, x.row_mut(i));
    }
    Ok(x)
}

fn gaussian_pairs<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    y_cov: DMatrix<f64>,
    rng: &mut R,
    shift: impl Fn(&[f64]) -> Option<Vec<f64>>,
) -> Result<SynthSample> {
    check_n(n)?;
    check_d(d)?;
    let px = MvNormal::new(equicorrelation(d, X_CORRELATION))?;
    let py = MvNormal::new(y_cov)?;
    let zero = vec![0.0; d];
    let mut x = PointSet::zeros(n, d);
    let mut y = PointSet::zeros(n, d);
    for i in 0..n {
        px.sample_into(rng, &zero, x.row_mut(i));
        let mean = shift(x.row(i)).unwrap_or_else(|| x.row(i).to_vec());
        py.sample_into(rng, &mean, y.row_mut(i));
    }
    Ok(SynthSample { x, y: Some(y) })
}

/// `X ~ N(0, Σ_X)`, `Y | X ~ N(X, Σ_Y(p))` with `p` on every off-diagonal.
pub fn gen_gauss_cov<R: Rng + ?Sized>(n: usize, d: usize, p: f64, rng: &mut R) -> Result<SynthSample> {
    gaussian_pairs(n, d, equicorrelation(d, p), rng, |_| None)
}

/// As [`gen_gauss_cov`] with `p` only between the first two coordinates.
pub fn gen_gauss_pairwise_cov<R: Rng + ?Sized>(n: usize, d: usize, p: f64, rng: &mut R) -> Result<SynthSample> {
    if !(p.abs() < 1.0) {
        return Err(Error::invalid("|p| must be below 1"));
    }
    gaussian_pairs(n, d, pairwise_correlation(d, p), rng, |_| None)
}

/// Mean shift `s·1` when the planar angle of `(X₁, X₂)` is below `p·π`.
pub fn gen_mean_shift<R: Rng + ?Sized>(n: usize, d: usize, p: f64, s: f64, rng: &mut R) -> Result<SynthSample> {
    if d < 3 {
        return Err(Error::invalid("the mean-shift design needs d >= 3"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p must lie in [0, 1]"));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid("s must be nonnegative"));
    }
    let threshold = p * PI;
    gaussian_pairs(n, d, DMatrix::identity(d, d), rng, |x| {
        let r = x[0].hypot(x[1]);
        let angle = if r > 0.0 { (x[0] / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
        (r > 0.0 && angle < threshold).then(|| x.iter().map(|v| v + s).collect())
    })
}

/// Shift `s·e₁` when `X₁` is strictly the largest coordinate.
pub fn gen_perm_shift<R: Rng + ?Sized>(n: usize, d: usize, s: f64, rng: &mut R) -> Result<SynthSample> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid("s must be nonnegative"));
    }
    gaussian_pairs(n, d, DMatrix::identity(d, d), rng, |x| {
        x[1..].iter().all(|&v| x[0] > v).then(|| {
            let mut m = x.to_vec();
            m[0] += s;
            m
        })
    })
}

/// `Γ` given `Z`: an inversion draw at `Z·1 + ε`.
fn chi_gamma<R: Rng + ?Sized>(z: f64, d: usize, rng: &mut R) -> Result<RotationMatrix> {
    loop {
        let w: Vec<f64> = (0..d).map(|_| z + rng.sample::<f64, _>(StandardNormal)).collect();
        if w.iter().any(|v| *v != 0.0) {
            return so_d_sample_inversion(&w, rng);
        }
    }
}

/// `X = Z Γ e₁` with `Z ~ χ₁` and `Γ | Z` an inversion draw at `Z·1 + ε`;
/// `Y | X` as in [`gen_gauss_cov`]. Also returns the exact sampler of `Γ`
/// given the maximal invariant `‖X‖ = Z`.
pub fn gen_chi_exact<R: Rng + ?Sized>(n: usize, d: usize, p: f64, rng: &mut R) -> Result<(SynthSample, ExactGammaSampler)> {
    check_n(n)?;
    check_d(d)?;
    let py = MvNormal::new(equicorrelation(d, p))?;
    let mut x = PointSet::zeros(n, d);
    let mut y = PointSet::zeros(n, d);
    let mut e1 = vec![0.0; d];
    for i in 0..n {
        let z = rng.sample::<f64, _>(StandardNormal).abs();
        let g = chi_gamma(z, d, rng)?;
        e1.fill(0.0);
        e1[0] = z;
        g.apply(&e1, x.row_mut(i));
        let mean = x.row(i).to_vec();
        py.sample_into(rng, &mean, y.row_mut(i));
    }
    let sampler: ExactGammaSampler = Arc::new(move |m: &[f64], rng: &mut SimRng| chi_gamma(m[0], d, rng));
    Ok((SynthSample { x, y: Some(y) }, sampler))
}

/// A named synthetic design with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case", deny_unknown_fields)]
pub enum SynthDesign {
    Rot2dInvariance { p_angle: f64 },
    GaussCov { d: usize, p: f64 },
    GaussPairwiseCov { d: usize, p: f64 },
    ChiExact { d: usize, p: f64 },
    MeanShift { d: usize, p: f64, s: f64 },
    PermShift { d: usize, s: f64 },
}

impl SynthDesign {
    pub fn name(&self) -> &'static str {
        match self {
            SynthDesign::Rot2dInvariance { .. } => "rot2d_invariance",
            SynthDesign::GaussCov { .. } => "gauss_cov",
            SynthDesign::GaussPairwiseCov { .. } => "gauss_pairwise_cov",
            SynthDesign::ChiExact { .. } => "chi_exact",
            SynthDesign::MeanShift { .. } => "mean_shift",
            SynthDesign::PermShift { .. } => "perm_shift",
        }
    }

    /// Dimension of `X` (and of `Y` when present).
    pub fn dim(&self) -> usize {
        match *self {
            SynthDesign::Rot2dInvariance { .. } => 2,
            SynthDesign::GaussCov { d, .. }
            | SynthDesign::GaussPairwiseCov { d, .. }
            | SynthDesign::ChiExact { d, .. }
            | SynthDesign::MeanShift { d, .. }
            | SynthDesign::PermShift { d, .. } => d,
        }
    }

    pub fn generate(&self, n: usize, rng: &mut SimRng) -> Result<SynthSample> {
        match *self {
            SynthDesign::Rot2dInvariance { p_angle } => {
                Ok(SynthSample { x: gen_rot2d_invariance(n, p_angle, rng)?, y: None })
            }
            SynthDesign::GaussCov { d, p } => gen_gauss_cov(n, d, p, rng),
            SynthDesign::GaussPairwiseCov { d, p } => gen_gauss_pairwise_cov(n, d, p, rng),
            SynthDesign::ChiExact { d, p } => Ok(gen_chi_exact(n, d, p, rng)?.0),
            SynthDesign::MeanShift { d, p, s } => gen_mean_shift(n, d, p, s, rng),
            SynthDesign::PermShift { d, s } => gen_perm_shift(n, d, s, rng),
        }
    }
}
