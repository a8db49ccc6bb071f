//! Numerical laboratory for positive operator semigroups on finite-dimensional
//! ordered vector spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`cone_geometry`]: cones, membership, distance to the cone, positive
//!   decompositions and a small dense LP solver;
//! * [`norms`]: norm evaluation, additivity on the cone, norm functionals and
//!   renormings by strictly positive functionals;
//! * [`semigroup`]: discrete and continuous matrix semigroups, Cesàro means,
//!   spectral projections and limit detection;
//! * [`domination`]: asymptotic domination between trajectories;
//! * [`lower_bounds`]: lower-bound certificates and the convergence pipelines
//!   built on them.
//!
//! Everything is generic over [`Scalar`] (implemented for `f64` and `f32`);
//! the `*64` aliases at the crate root fix the reference precision.


pub mod cone_geometry;
pub mod builders;
pub mod domination;
pub mod lower_bounds;

pub mod error;
pub mod linalg;

pub mod norms;
pub mod scalar;
pub mod semigroup;

pub use cone_geometry::{Cone, ConeSpec, Element, Functional};
pub use error::{LabError, Result};
pub use linalg::Matrix;
pub use norms::NormSpec;
pub use scalar::Scalar;
pub use semigroup::{Semigroup, SemigroupKind};

pub type Cone64 = Cone<f64>;
pub type Element64 = Element<f64>;
pub type NormSpec64 = NormSpec<f64>;
pub type Semigroup64 = Semigroup<f64>;
pub type Cone32 = Cone<f32>;
pub type Semigroup32 = Semigroup<f32>;
