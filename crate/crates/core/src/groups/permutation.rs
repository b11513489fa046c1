use rand::seq::SliceRandom;
use rand::Rng;

use super::GroupAction;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// A bijection of `{0, …, d−1}`. Acting on a vector moves entry `i` to
/// position `image[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let d = image.len();
        let mut seen = vec![false; d];
        for &i in &image {
            if i >= d || seen[i] {
                return Err(Error::invalid("image is not a bijection"));
            }
            seen[i] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(d: usize) -> Self {
        Permutation { image: (0..d).collect() }
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, &t) in self.image.iter().enumerate() {
            out[t] = x[i];
        }
    }

    pub fn compose(&self, h: &Permutation) -> Permutation {
        Permutation { image: h.image.iter().map(|&i| self.image[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.image.len()];
        for (i, &t) in self.image.iter().enumerate() {
            inv[t] = i;
        }
        Permutation { image: inv }
    }

    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let mut image: Vec<usize> = (0..d).collect();
        image.shuffle(rng);
        Permutation { image }
    }
}

pub fn sym_d_orbit_rep(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Uniform draw from `{π : π·sorted(x) = x}`; ties are broken by a random key.
pub fn sym_d_sample_inversion<R: Rng + ?Sized>(x: &[f64], rng: &mut R) -> Permutation {
    let keys: Vec<u64> = (0..x.len()).map(|_| rng.random()).collect();
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(keys[a].cmp(&keys[b])));
    Permutation { image: order }
}

/// `Sym(d)` permuting coordinates of `X` and `Y` simultaneously.
#[derive(Clone, Debug)]
pub struct Symmetric {
    d: usize,
}

impl Symmetric {
    pub fn new(d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::invalid("Sym(d) needs d >= 1"));
        }
        Ok(Symmetric { d })
    }
}

impl GroupAction for Symmetric {
    type Element = Permutation;

    fn name(&self) -> String {
        format!("Sym({})", self.d)
    }

    fn x_dim(&self) -> usize {
        self.d
    }

    fn invariant_dim(&self) -> usize {
        self.d
    }

    fn identity(&self) -> Permutation {
        Permutation::identity(self.d)
    }

    fn compose(&self, g: &Permutation, h: &Permutation) -> Permutation {
        g.compose(h)
    }

    fn invert(&self, g: &Permutation) -> Permutation {
        g.inverse()
    }

    fn act_x(&self, g: &Permutation, x: &[f64], out: &mut [f64]) {
        g.apply(x, out)
    }

    fn orbit_rep(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(x);
        out.sort_by(f64::total_cmp);
        Ok(())
    }

    fn max_invariant(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.orbit_rep(x, out)
    }

    fn sample_inversion(&self, x: &[f64], rng: &mut SimRng) -> Result<Permutation> {
        Ok(sym_d_sample_inversion(x, rng))
    }

    fn sample_haar(&self, rng: &mut SimRng) -> Result<Permutation> {
        Ok(Permutation::random(self.d, rng))
    }

    fn element_distance(&self, g: &Permutation, h: &Permutation) -> f64 {
        if g == h {
            0.0
        } else {
            1.0
        }
    }
}
