use nalgebra::{DMatrix, Matrix4, Vector4};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rotation::{sample_haar_rotation, so_d_representative_inversion, RotationMatrix};
use super::{check_finite, GroupAction};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Slack allowed on `Q(x) ≥ 0` before a four-momentum counts as spacelike.
pub const LIGHTLIKE_FLOOR: f64 = 1e-6;

const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourMomentum {
    pub e: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl FourMomentum {
    pub fn new(e: f64, p1: f64, p2: f64, p3: f64) -> Self {
        FourMomentum { e, p1, p2, p3 }
    }

    pub fn from_slice(x: &[f64]) -> Self {
        FourMomentum { e: x[0], p1: x[1], p2: x[2], p3: x[3] }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.e, self.p1, self.p2, self.p3]
    }

    pub fn spatial_norm(&self) -> f64 {
        (self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3).sqrt()
    }
}

pub fn minkowski_invariant(x: &FourMomentum) -> f64 {
    x.e * x.e - x.p1 * x.p1 - x.p2 * x.p2 - x.p3 * x.p3
}

/// An element of the restricted Lorentz group acting on `(E, p₁, p₂, p₃)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzTransform(Matrix4<f64>);

impl LorentzTransform {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let eta = Matrix4::from_diagonal(&Vector4::from(ETA));
        let dev = (m.transpose() * eta * m - eta).amax();
        // entries grow like γ, rounding in ΛᵀηΛ like γ²
        let scale = m.amax().max(1.0);
        if !(dev <= 1e-9 * scale * scale) {
            return Err(Error::invalid(format!("matrix does not preserve the Minkowski form ({dev:e})")));
        }
        if !(m[(0, 0)] >= 1.0 - 1e-12) {
            return Err(Error::invalid("matrix reverses the time orientation"));
        }
        if m.determinant() < 0.0 {
            return Err(Error::invalid("matrix reverses the space orientation"));
        }
        Ok(LorentzTransform(m))
    }

    pub fn identity() -> Self {
        LorentzTransform(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let v = self.0 * Vector4::new(x[0], x[1], x[2], x[3]);
        out[..4].copy_from_slice(v.as_slice());
    }

    pub fn apply_momentum(&self, x: &FourMomentum) -> FourMomentum {
        let mut out = [0.0; 4];
        self.apply(&x.to_array(), &mut out);
        FourMomentum::from_slice(&out)
    }

    pub fn compose(&self, other: &LorentzTransform) -> LorentzTransform {
        LorentzTransform(self.0 * other.0)
    }

    /// Exact inverse `η Λᵀ η`.
    pub fn inverse(&self) -> LorentzTransform {
        let mut m = self.0.transpose();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] *= ETA[i] * ETA[j];
            }
        }
        LorentzTransform(m)
    }
}

fn boost_from_gamma(gamma: f64, gamma_beta: f64) -> LorentzTransform {
    let mut m = Matrix4::identity();
    m[(0, 0)] = gamma;
    m[(0, 1)] = -gamma_beta;
    m[(1, 0)] = -gamma_beta;
    m[(1, 1)] = gamma;
    LorentzTransform(m)
}

/// Boost along the first spatial axis: `E' = γ(E − βp₁)`, `p₁' = γ(p₁ − βE)`.
pub fn lorentz_boost(beta: f64) -> Result<LorentzTransform> {
    if !(beta.abs() < 1.0) {
        return Err(Error::invalid(format!("boost velocity {beta} outside (-1, 1)")));
    }
    let gamma = 1.0 / ((1.0 - beta) * (1.0 + beta)).sqrt();
    Ok(boost_from_gamma(gamma, gamma * beta))
}

/// Spatial rotation embedded as a Lorentz transformation.
pub fn lorentz_rotation(r: &RotationMatrix) -> Result<LorentzTransform> {
    if r.dim() != 3 {
        return Err(Error::invalid("Lorentz rotation needs a 3x3 rotation"));
    }
    let checked = RotationMatrix::new(r.matrix().clone())?;
    Ok(embed_rotation(&checked))
}

fn embed_rotation(r: &RotationMatrix) -> LorentzTransform {
    let mut m = Matrix4::identity();
    let rm = r.matrix();
    for i in 0..3 {
        for j in 0..3 {
            m[(i + 1, j + 1)] = rm[(i, j)];
        }
    }
    LorentzTransform(m)
}

pub fn lorentz_orbit_rep(x: &FourMomentum) -> Result<FourMomentum> {
    let q = minkowski_invariant(x);
    if !(q + 1.0 >= 0.0) {
        return Err(Error::domain(format!("Q(x) = {q} has no representative")));
    }
    Ok(FourMomentum::new((q + 1.0).sqrt(), 1.0, 0.0, 0.0))
}

/// Draw `g_τ(p) g_R g_β` such that it maps `ρ(x)` to `x`.
///
/// `β = (E_ρ − E‖p‖)/(1 + E²)`. Algebraically this is the solution of
/// `γ(E_ρ − β) = E`, `γ(1 − βE_ρ) = ‖p‖`; `γ` is assembled from `1 ± β` written
/// without cancellation so that highly boosted lightlike momenta stay accurate.
pub fn lorentz_sample_inversion<R: Rng + ?Sized>(x: &FourMomentum, rng: &mut R) -> Result<LorentzTransform> {
    let p = x.spatial_norm();
    if p == 0.0 {
        return Err(Error::degenerate("four-momentum with zero spatial part"));
    }
    sample_inversion_impl(x, rng)
}

fn sample_inversion_impl<R: Rng + ?Sized>(x: &FourMomentum, rng: &mut R) -> Result<LorentzTransform> {
    check_finite(&x.to_array())?;
    let e = x.e;
    let p = x.spatial_norm();
    let q_raw = minkowski_invariant(x);
    let scale = (e * e).max(1.0);
    if q_raw < -LIGHTLIKE_FLOOR * scale {
        return Err(Error::domain(format!("spacelike four-momentum (Q = {q_raw})")));
    }
    if !(e > 0.0) {
        return Err(Error::domain("four-momentum must have positive energy"));
    }
    let q = q_raw.max(0.0);
    let e_rho = (q + 1.0).sqrt();
    let denom = 1.0 + e * e;
    // E - |p| = Q / (E + |p|), avoids cancellation for lightlike momenta
    let e_minus_p = q / (e + p);
    let one_plus = (1.0 + e_rho + e * e_minus_p) / denom;
    let one_minus = (1.0 + e * e - e_rho + e * p) / denom;
    let beta = (e_rho - e * p) / denom;
    let gamma = 1.0 / (one_plus * one_minus).sqrt();
    let boost = boost_from_gamma(gamma, gamma * beta);

    let spatial = [x.p1, x.p2, x.p3];
    let rot = if p == 0.0 {
        sample_haar_rotation(3, rng)?
    } else {
        let tau = so_d_representative_inversion(&spatial)?;
        let h = sample_haar_rotation(2, rng)?;
        let mut stab = DMatrix::<f64>::identity(3, 3);
        stab.view_mut((1, 1), (2, 2)).copy_from(h.matrix());
        tau.compose(&RotationMatrix::from_unchecked(stab))
    };
    Ok(embed_rotation(&rot).compose(&boost))
}

/// A random restricted Lorentz transformation `g_R₁ g_β g_R₂` with rapidity
/// uniform on `[-max_rapidity, max_rapidity]`.
pub fn random_lorentz<R: Rng + ?Sized>(rng: &mut R, max_rapidity: f64) -> LorentzTransform {
    let y: f64 = rng.random_range(-max_rapidity..=max_rapidity);
    let boost = boost_from_gamma(y.cosh(), y.sinh());
    let r1 = sample_haar_rotation(3, rng).expect("d = 3");
    let r2 = sample_haar_rotation(3, rng).expect("d = 3");
    embed_rotation(&r1).compose(&boost).compose(&embed_rotation(&r2))
}

/// `SO⁺(1,3)` acting on four-momenta `X` and `Y`, with `M(x) = Q(x)`.
#[derive(Clone, Debug, Default)]
pub struct RestrictedLorentz;

impl GroupAction for RestrictedLorentz {
    type Element = LorentzTransform;

    fn name(&self) -> String {
        "SO+(1,3)".into()
    }

    fn x_dim(&self) -> usize {
        4
    }

    fn invariant_dim(&self) -> usize {
        1
    }

    fn identity(&self) -> LorentzTransform {
        LorentzTransform::identity()
    }

    fn compose(&self, g: &LorentzTransform, h: &LorentzTransform) -> LorentzTransform {
        g.compose(h)
    }

    fn invert(&self, g: &LorentzTransform) -> LorentzTransform {
        g.inverse()
    }

    fn act_x(&self, g: &LorentzTransform, x: &[f64], out: &mut [f64]) {
        g.apply(x, out)
    }

    fn orbit_rep(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let r = lorentz_orbit_rep(&FourMomentum::from_slice(x))?;
        out.copy_from_slice(&r.to_array());
        Ok(())
    }

    fn max_invariant(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = minkowski_invariant(&FourMomentum::from_slice(x));
        Ok(())
    }

    /// A zero spatial part is served by a pure boost followed by a uniform
    /// rotation from the full stabilizer `SO(3)`.
    fn sample_inversion(&self, x: &[f64], rng: &mut SimRng) -> Result<LorentzTransform> {
        sample_inversion_impl(&FourMomentum::from_slice(x), rng)
    }

    fn is_compact(&self) -> bool {
        false
    }

    fn element_distance(&self, g: &LorentzTransform, h: &LorentzTransform) -> f64 {
        (g.matrix() - h.matrix()).amax()
    }
}
