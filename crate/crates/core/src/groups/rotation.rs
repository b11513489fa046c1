use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_finite, GroupAction};
use crate::error::{Error, Result};
use crate::points::norm;
use crate::rng::SimRng;

const ORTHO_TOL: f64 = 1e-9;

/// A proper rotation of `ℝᵈ`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationMatrix(DMatrix<f64>);

impl RotationMatrix {
    /// Validates orthogonality and unit determinant.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::invalid("rotation must be a non-empty square matrix"));
        }
        let d = m.nrows();
        let gram = m.transpose() * &m;
        let off = (&gram - DMatrix::<f64>::identity(d, d)).amax();
        if !(off <= ORTHO_TOL) {
            return Err(Error::invalid(format!("matrix is not orthogonal (deviation {off:e})")));
        }
        let det = m.determinant();
        if !((det - 1.0).abs() <= ORTHO_TOL) {
            return Err(Error::invalid(format!("determinant {det} is not +1")));
        }
        Ok(RotationMatrix(m))
    }

    pub(crate) fn from_unchecked(m: DMatrix<f64>) -> Self {
        RotationMatrix(m)
    }

    pub fn identity(d: usize) -> Self {
        RotationMatrix(DMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// `out = R v`.
    #[inline]
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let d = self.dim();
        debug_assert_eq!(v.len(), d);
        let m = self.0.as_slice();
        out.fill(0.0);
        for (j, &vj) in v.iter().enumerate() {
            let col = &m[j * d..(j + 1) * d];
            for (o, c) in out.iter_mut().zip(col) {
                *o += c * vj;
            }
        }
    }

    pub fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.apply(v, &mut out);
        out
    }

    pub fn compose(&self, other: &RotationMatrix) -> RotationMatrix {
        RotationMatrix(&self.0 * &other.0)
    }

    pub fn transpose(&self) -> RotationMatrix {
        RotationMatrix(self.0.transpose())
    }
}

pub fn rotation_2d(theta: f64) -> Result<RotationMatrix> {
    if !theta.is_finite() {
        return Err(Error::invalid("rotation angle must be finite"));
    }
    let (s, c) = theta.sin_cos();
    Ok(RotationMatrix(DMatrix::from_row_slice(2, 2, &[c, -s, s, c])))
}

/// Haar-distributed rotation via QR of a Gaussian matrix.
///
/// The columns of `Q` are sign-corrected so that `R` has a positive diagonal,
/// which makes `Q` Haar on `O(d)`; one column is negated when `det Q = -1`.
pub fn sample_haar_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<RotationMatrix> {
    if d < 2 {
        return Err(Error::invalid("Haar rotation needs d >= 2"));
    }
    Ok(haar_unchecked(d, rng))
}

fn haar_unchecked<R: Rng + ?Sized>(d: usize, rng: &mut R) -> RotationMatrix {
    if d == 1 {
        return RotationMatrix::identity(1);
    }
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    RotationMatrix(q)
}

pub fn so_d_orbit_rep(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    if !out.is_empty() {
        out[0] = norm(x);
    }
    out
}

/// The rotation `τ(x)` taking `‖x‖e₁` to `x` inside the plane spanned by `e₁` and `x`.
pub fn so_d_representative_inversion(x: &[f64]) -> Result<RotationMatrix> {
    check_finite(x)?;
    let d = x.len();
    if d < 2 {
        return Err(Error::invalid("dimension must be at least 2"));
    }
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::degenerate("representative inversion of the zero vector"));
    }
    let mut orth: Vec<f64> = x.iter().map(|v| v / r).collect();
    let c0 = orth[0];
    orth[0] = 0.0;
    let s = norm(&orth);
    let mut m = DMatrix::<f64>::identity(d, d);
    if s == 0.0 {
        if c0 < 0.0 {
            // antiparallel: half turn in the (e1, e2) plane
            m[(0, 0)] = -1.0;
            m[(1, 1)] = -1.0;
        }
        return Ok(RotationMatrix(m));
    }
    for v in orth.iter_mut() {
        *v /= s;
    }
    let theta = s.atan2(c0);
    let (sn, cs) = theta.sin_cos();
    // I - e1 e1' - u u' + [e1 u] R [e1 u]'  with u = orth
    m[(0, 0)] = cs;
    for i in 1..d {
        let ui = orth[i];
        m[(i, 0)] = sn * ui;
        m[(0, i)] = -sn * ui;
        for j in 1..d {
            m[(i, j)] += (cs - 1.0) * ui * orth[j];
        }
    }
    Ok(RotationMatrix(m))
}

/// `τ(x) H'` with `H'` a Haar rotation of the orthogonal complement of `e₁`.
pub fn so_d_sample_inversion<R: Rng + ?Sized>(x: &[f64], rng: &mut R) -> Result<RotationMatrix> {
    let tau = so_d_representative_inversion(x)?;
    let d = x.len();
    if d == 2 {
        return Ok(tau);
    }
    let h = haar_unchecked(d - 1, rng);
    Ok(tau.compose(&embed_stabilizer(&h)))
}

fn embed_stabilizer(h: &RotationMatrix) -> RotationMatrix {
    let k = h.dim();
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    m[(0, 0)] = 1.0;
    m.view_mut((1, 1), (k, k)).copy_from(h.matrix());
    RotationMatrix(m)
}

/// `SO(d)` acting on `ℝᵈ` by matrix multiplication, on `X` and `Y` alike.
#[derive(Clone, Debug)]
pub struct SpecialOrthogonal {
    d: usize,
}

impl SpecialOrthogonal {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid("SO(d) needs d >= 2"));
        }
        Ok(SpecialOrthogonal { d })
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

impl GroupAction for SpecialOrthogonal {
    type Element = RotationMatrix;

    fn name(&self) -> String {
        format!("SO({})", self.d)
    }

    fn x_dim(&self) -> usize {
        self.d
    }

    fn invariant_dim(&self) -> usize {
        1
    }

    fn identity(&self) -> RotationMatrix {
        RotationMatrix::identity(self.d)
    }

    fn compose(&self, g: &RotationMatrix, h: &RotationMatrix) -> RotationMatrix {
        g.compose(h)
    }

    fn invert(&self, g: &RotationMatrix) -> RotationMatrix {
        g.transpose()
    }

    fn act_x(&self, g: &RotationMatrix, x: &[f64], out: &mut [f64]) {
        g.apply(x, out)
    }

    fn orbit_rep(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        out[0] = norm(x);
        Ok(())
    }

    fn max_invariant(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = norm(x);
        Ok(())
    }

    fn sample_inversion(&self, x: &[f64], rng: &mut SimRng) -> Result<RotationMatrix> {
        if x.iter().all(|&v| v == 0.0) {
            return Ok(self.identity());
        }
        so_d_sample_inversion(x, rng)
    }

    fn sample_haar(&self, rng: &mut SimRng) -> Result<RotationMatrix> {
        Ok(haar_unchecked(self.d, rng))
    }

    fn element_distance(&self, g: &RotationMatrix, h: &RotationMatrix) -> f64 {
        (g.matrix() - h.matrix()).amax()
    }
}
