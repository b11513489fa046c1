//! Group actions with orbit selectors, maximal invariants and inversion kernels.
//!
//! A [`GroupAction`] bundles one concrete group together with its action on
//! the `X` and `Y` spaces. The orbit selector `ρ` returns a canonical point on
//! the orbit of `x`; `M` is a maximal invariant; `sample_inversion` draws `Γ̃`
//! from the inversion kernel, so that `Γ̃ ρ(x) = x`.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::rng::SimRng;

mod lorentz;
mod permutation;
mod planar;
mod rotation;

pub use lorentz::{
    lorentz_boost, lorentz_orbit_rep, lorentz_rotation, lorentz_sample_inversion,
    minkowski_invariant, random_lorentz, FourMomentum, LorentzTransform, RestrictedLorentz, LIGHTLIKE_FLOOR,
};
pub use permutation::{sym_d_orbit_rep, sym_d_sample_inversion, Permutation, Symmetric};
pub use planar::{ConditionalInvariance, PairedRotations, ProductRotations, Trivial};
pub use rotation::{
    rotation_2d, sample_haar_rotation, so_d_orbit_rep, so_d_representative_inversion,
    so_d_sample_inversion, RotationMatrix, SpecialOrthogonal,
};

pub trait GroupAction: Send + Sync {
    type Element: Clone + Debug + Send + Sync;

    fn name(&self) -> String;

    /// Dimension of the space acted on by [`act_x`](Self::act_x).
    fn x_dim(&self) -> usize;

    fn y_dim(&self) -> usize {
        self.x_dim()
    }

    /// Length of the vector returned by [`max_invariant`](Self::max_invariant).
    fn invariant_dim(&self) -> usize;

    fn identity(&self) -> Self::Element;

    /// `g ∘ h`, i.e. first `h` then `g`.
    fn compose(&self, g: &Self::Element, h: &Self::Element) -> Self::Element;

    fn invert(&self, g: &Self::Element) -> Self::Element;

    fn act_x(&self, g: &Self::Element, x: &[f64], out: &mut [f64]);

    fn act_y(&self, g: &Self::Element, y: &[f64], out: &mut [f64]) {
        self.act_x(g, y, out)
    }

    fn acts_trivially_on_y(&self) -> bool {
        false
    }

    fn orbit_rep(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    fn max_invariant(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    fn sample_inversion(&self, x: &[f64], rng: &mut SimRng) -> Result<Self::Element>;

    fn is_compact(&self) -> bool {
        true
    }

    /// Draw from the normalized Haar measure. Only compact groups have one.
    fn sample_haar(&self, rng: &mut SimRng) -> Result<Self::Element> {
        let _ = rng;
        Err(Error::Unsupported(format!("{} has no normalized Haar measure", self.name())))
    }

    /// Largest absolute entrywise difference between two elements.
    fn element_distance(&self, g: &Self::Element, h: &Self::Element) -> f64;
}

/// Convenience wrappers returning owned vectors.
pub trait GroupActionExt: GroupAction {
    fn act_x_vec(&self, g: &Self::Element, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.act_x(g, x, &mut out);
        out
    }

    fn act_y_vec(&self, g: &Self::Element, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        self.act_y(g, y, &mut out);
        out
    }

    fn orbit_rep_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.orbit_rep(x, &mut out)?;
        Ok(out)
    }

    fn max_invariant_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.invariant_dim()];
        self.max_invariant(x, &mut out)?;
        Ok(out)
    }
}

impl<A: GroupAction + ?Sized> GroupActionExt for A {}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("non-finite coordinate"))
    }
}
