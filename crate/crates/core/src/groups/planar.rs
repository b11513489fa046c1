//! Actions assembled from the primitive groups: rotations of `ℝ² × ℝ²`, the
//! trivial group, and a wrapper that makes any action trivial on `Y`.

use rand::Rng;

use super::rotation::{rotation_2d, RotationMatrix};
use super::GroupAction;
use crate::error::{Error, Result};
use crate::rng::SimRng;

fn polar(a: &[f64]) -> (f64, f64) {
    (a[0].hypot(a[1]), a[1].atan2(a[0]))
}

fn uniform_angle(rng: &mut SimRng) -> f64 {
    rng.random_range(0.0..std::f64::consts::TAU)
}

fn rot(theta: f64) -> RotationMatrix {
    rotation_2d(theta).expect("finite angle")
}

/// One `SO(2)` rotation applied to both halves of `(a, b) ∈ ℝ² × ℝ²`.
///
/// `ρ(a, b) = (‖a‖, 0, R₋θₐ b)`; when `a = 0` the second half decides the angle.
#[derive(Clone, Debug, Default)]
pub struct PairedRotations;

impl PairedRotations {
    fn angle(x: &[f64]) -> Option<f64> {
        let (ra, ta) = polar(&x[..2]);
        if ra > 0.0 {
            return Some(ta);
        }
        let (rb, tb) = polar(&x[2..4]);
        (rb > 0.0).then_some(tb)
    }
}

impl GroupAction for PairedRotations {
    type Element = RotationMatrix;

    fn name(&self) -> String {
        "paired SO(2)".into()
    }

    fn x_dim(&self) -> usize {
        4
    }

    fn invariant_dim(&self) -> usize {
        3
    }

    fn identity(&self) -> RotationMatrix {
        RotationMatrix::identity(2)
    }

    fn compose(&self, g: &RotationMatrix, h: &RotationMatrix) -> RotationMatrix {
        g.compose(h)
    }

    fn invert(&self, g: &RotationMatrix) -> RotationMatrix {
        g.transpose()
    }

    fn act_x(&self, g: &RotationMatrix, x: &[f64], out: &mut [f64]) {
        g.apply(&x[..2], &mut out[..2]);
        g.apply(&x[2..4], &mut out[2..4]);
    }

    fn orbit_rep(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match Self::angle(x) {
            Some(t) => self.act_x(&rot(-t), x, out),
            None => out.fill(0.0),
        }
        Ok(())
    }

    fn max_invariant(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let mut r = [0.0; 4];
        self.orbit_rep(x, &mut r)?;
        out.copy_from_slice(&[r[0], r[2], r[3]]);
        Ok(())
    }

    fn sample_inversion(&self, x: &[f64], _rng: &mut SimRng) -> Result<RotationMatrix> {
        Ok(Self::angle(x).map(rot).unwrap_or_else(|| self.identity()))
    }

    fn sample_haar(&self, rng: &mut SimRng) -> Result<RotationMatrix> {
        Ok(rot(uniform_angle(rng)))
    }

    fn element_distance(&self, g: &RotationMatrix, h: &RotationMatrix) -> f64 {
        (g.matrix() - h.matrix()).amax()
    }
}

/// Independent `SO(2)` rotations of each half of `ℝ² × ℝ²`.
#[derive(Clone, Debug, Default)]
pub struct ProductRotations;

impl GroupAction for ProductRotations {
    type Element = (RotationMatrix, RotationMatrix);

    fn name(&self) -> String {
        "SO(2) x SO(2)".into()
    }

    fn x_dim(&self) -> usize {
        4
    }

    fn invariant_dim(&self) -> usize {
        2
    }

    fn identity(&self) -> Self::Element {
        (RotationMatrix::identity(2), RotationMatrix::identity(2))
    }

    fn compose(&self, g: &Self::Element, h: &Self::Element) -> Self::Element {
        (g.0.compose(&h.0), g.1.compose(&h.1))
    }

    fn invert(&self, g: &Self::Element) -> Self::Element {
        (g.0.transpose(), g.1.transpose())
    }

    fn act_x(&self, g: &Self::Element, x: &[f64], out: &mut [f64]) {
        g.0.apply(&x[..2], &mut out[..2]);
        g.1.apply(&x[2..4], &mut out[2..4]);
    }

    fn orbit_rep(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&[polar(&x[..2]).0, 0.0, polar(&x[2..4]).0, 0.0]);
        Ok(())
    }

    fn max_invariant(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&[polar(&x[..2]).0, polar(&x[2..4]).0]);
        Ok(())
    }

    fn sample_inversion(&self, x: &[f64], _rng: &mut SimRng) -> Result<Self::Element> {
        let half = |v: &[f64]| {
            let (r, t) = polar(v);
            if r > 0.0 {
                rot(t)
            } else {
                RotationMatrix::identity(2)
            }
        };
        Ok((half(&x[..2]), half(&x[2..4])))
    }

    fn sample_haar(&self, rng: &mut SimRng) -> Result<Self::Element> {
        Ok((rot(uniform_angle(rng)), rot(uniform_angle(rng))))
    }

    fn element_distance(&self, g: &Self::Element, h: &Self::Element) -> f64 {
        (g.0.matrix() - h.0.matrix()).amax().max((g.1.matrix() - h.1.matrix()).amax())
    }
}

/// The group with one element. Every point is its own orbit.
#[derive(Clone, Debug)]
pub struct Trivial {
    x_dim: usize,
    y_dim: usize,
}

impl Trivial {
    pub fn new(x_dim: usize, y_dim: usize) -> Result<Self> {
        if x_dim == 0 || y_dim == 0 {
            return Err(Error::invalid("dimensions must be positive"));
        }
        Ok(Trivial { x_dim, y_dim })
    }
}

impl GroupAction for Trivial {
    type Element = ();

    fn name(&self) -> String {
        "trivial".into()
    }

    fn x_dim(&self) -> usize {
        self.x_dim
    }

    fn y_dim(&self) -> usize {
        self.y_dim
    }

    fn invariant_dim(&self) -> usize {
        self.x_dim
    }

    fn identity(&self) {}

    fn compose(&self, _g: &(), _h: &()) {}

    fn invert(&self, _g: &()) {}

    fn act_x(&self, _g: &(), x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x)
    }

    fn acts_trivially_on_y(&self) -> bool {
        true
    }

    fn orbit_rep(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(x);
        Ok(())
    }

    fn max_invariant(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(x);
        Ok(())
    }

    fn sample_inversion(&self, _x: &[f64], _rng: &mut SimRng) -> Result<()> {
        Ok(())
    }

    fn sample_haar(&self, _rng: &mut SimRng) -> Result<()> {
        Ok(())
    }

    fn element_distance(&self, _g: &(), _h: &()) -> f64 {
        0.0
    }
}

/// Acts on `X` through the inner action and leaves `Y` fixed, which turns a
/// test of equivariance into a test of conditional invariance.
#[derive(Clone, Debug)]
pub struct ConditionalInvariance<A> {
    inner: A,
    y_dim: usize,
}

impl<A: GroupAction> ConditionalInvariance<A> {
    pub fn new(inner: A, y_dim: usize) -> Result<Self> {
        if y_dim == 0 {
            return Err(Error::invalid("y dimension must be positive"));
        }
        Ok(ConditionalInvariance { inner, y_dim })
    }

    pub fn inner(&self) -> &A {
        &self.inner
    }
}

impl<A: GroupAction> GroupAction for ConditionalInvariance<A> {
    type Element = A::Element;

    fn name(&self) -> String {
        format!("{} (invariant on Y)", self.inner.name())
    }

    fn x_dim(&self) -> usize {
        self.inner.x_dim()
    }

    fn y_dim(&self) -> usize {
        self.y_dim
    }

    fn invariant_dim(&self) -> usize {
        self.inner.invariant_dim()
    }

    fn identity(&self) -> A::Element {
        self.inner.identity()
    }

    fn compose(&self, g: &A::Element, h: &A::Element) -> A::Element {
        self.inner.compose(g, h)
    }

    fn invert(&self, g: &A::Element) -> A::Element {
        self.inner.invert(g)
    }

    fn act_x(&self, g: &A::Element, x: &[f64], out: &mut [f64]) {
        self.inner.act_x(g, x, out)
    }

    fn act_y(&self, _g: &A::Element, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(y)
    }

    fn acts_trivially_on_y(&self) -> bool {
        true
    }

    fn orbit_rep(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.inner.orbit_rep(x, out)
    }

    fn max_invariant(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.inner.max_invariant(x, out)
    }

    fn sample_inversion(&self, x: &[f64], rng: &mut SimRng) -> Result<A::Element> {
        self.inner.sample_inversion(x, rng)
    }

    fn is_compact(&self) -> bool {
        self.inner.is_compact()
    }

    fn sample_haar(&self, rng: &mut SimRng) -> Result<A::Element> {
        self.inner.sample_haar(rng)
    }

    fn element_distance(&self, g: &A::Element, h: &A::Element) -> f64 {
        self.inner.element_distance(g, h)
    }
}
