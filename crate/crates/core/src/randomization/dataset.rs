use crate::error::{Error, Result};
use crate::groups::GroupAction;
use crate::points::{norm, PointSet};
use crate::rng::SimRng;

/// Relative tolerance of the round trip `Γ̃ᵢ ρ(Xᵢ) = Xᵢ`.
pub const ROUND_TRIP_TOL: f64 = 1e-6;

/// Observations `(X, Y)₁..ₙ` with the per-row quantities every test needs:
/// `ρ(Xᵢ)`, `M(Xᵢ)`, a fixed inversion draw `Γ̃ᵢ` and `Ỹᵢ = Γ̃ᵢ⁻¹ Yᵢ`.
#[derive(Clone, Debug)]
pub struct PairedDataset<A: GroupAction> {
    x: PointSet,
    y: PointSet,
    rep: PointSet,
    minv: PointSet,
    gamma_tilde: Vec<A::Element>,
    y_tilde: PointSet,
}

pub(crate) fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = norm(b).max(1.0);
    a.iter().zip(b).all(|(u, v)| (u - v).abs() <= tol * scale)
}

impl<A: GroupAction> PairedDataset<A> {
    pub fn new(action: &A, x: PointSet, y: PointSet, rng: &mut SimRng) -> Result<Self> {
        let n = x.len();
        if y.len() != n {
            return Err(Error::invalid(format!("X has {n} rows but Y has {}", y.len())));
        }
        if x.dim() != action.x_dim() || y.dim() != action.y_dim() {
            return Err(Error::invalid(format!(
                "data dimensions ({}, {}) do not match {} acting on ({}, {})",
                x.dim(),
                y.dim(),
                action.name(),
                action.x_dim(),
                action.y_dim()
            )));
        }
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid("data contain non-finite values"));
        }
        let mut rep = PointSet::zeros(n, x.dim());
        let mut minv = PointSet::zeros(n, action.invariant_dim());
        let mut y_tilde = PointSet::zeros(n, y.dim());
        let mut gamma_tilde = Vec::with_capacity(n);
        let mut back = vec![0.0; x.dim()];
        for i in 0..n {
            action.orbit_rep(x.row(i), rep.row_mut(i))?;
            action.max_invariant(x.row(i), minv.row_mut(i))?;
            let g = action.sample_inversion(x.row(i), rng)?;
            action.act_x(&g, rep.row(i), &mut back);
            if !close(&back, x.row(i), ROUND_TRIP_TOL) {
                return Err(Error::ContractViolation(format!(
                    "inversion draw for row {i} does not map the representative back to X"
                )));
            }
            action.act_y(&action.invert(&g), y.row(i), y_tilde.row_mut(i));
            gamma_tilde.push(g);
        }
        Ok(PairedDataset { x, y, rep, minv, gamma_tilde, y_tilde })
    }

    pub(crate) fn from_parts(
        x: PointSet,
        y: PointSet,
        rep: PointSet,
        minv: PointSet,
        gamma_tilde: Vec<A::Element>,
        y_tilde: PointSet,
    ) -> Self {
        PairedDataset { x, y, rep, minv, gamma_tilde, y_tilde }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &PointSet {
        &self.x
    }

    pub fn y(&self) -> &PointSet {
        &self.y
    }

    pub fn rep(&self) -> &PointSet {
        &self.rep
    }

    pub fn minv(&self) -> &PointSet {
        &self.minv
    }

    pub fn gamma_tilde(&self) -> &[A::Element] {
        &self.gamma_tilde
    }

    pub fn y_tilde(&self) -> &PointSet {
        &self.y_tilde
    }
}
