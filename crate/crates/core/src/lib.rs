//! Randomization tests for marginal and conditional group symmetry.
//!
//! The crate is organised around a [`groups::GroupAction`] trait. Every test
//! procedure in [`randomization`] is generic over it, so the same code paths
//! serve rotations, Lorentz transformations and permutations.
//!
//! ```
//! use condsym::groups::SpecialOrthogonal;
//! use condsym::points::PointSet;
//! use condsym::randomization::{crt_symmetry_test, ConditioningVariant, PairedDataset, TestConfig};
//! use condsym::kernels::TestStatisticSpec;
//! use condsym::rng::rng_from_seed;
//!
//! let so3 = SpecialOrthogonal::new(3).unwrap();
//! let mut rng = rng_from_seed(7);
//! let x = PointSet::from_fn(30, 3, |i, j| ((i * 3 + j) as f64).sin() + 1.5);
//! let y = x.clone();
//! let data = PairedDataset::new(&so3, x, y, &mut rng).unwrap();
//! let cfg = TestConfig { b: 19, ..TestConfig::default() };
//! let res = crt_symmetry_test(&so3, &data, &ConditioningVariant::default(),
//!     &TestStatisticSpec::default(), &cfg).unwrap();
//! assert!(res.p_value > 0.0 && res.p_value <= 1.0);
//! ```

pub mod diagnostics;
pub mod error;
pub mod groups;
pub mod harness;
pub mod kernels;
pub mod physics;
pub mod points;
pub mod power;
pub mod randomization;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
