//! Weighted tent-space norms on discretized upper half-spaces.
//!
//! Fields live on a torus `[0, side)^d` times a geometric scale grid. The crate
//! computes tent, Z and dyadic sequence norms, Littlewood-Paley extensions, and
//! real interpolation functionals, plus the experiment harness behind the CLI.

pub mod cube;
pub mod domain;
pub mod dyadic;
pub mod error;
pub mod exponent;
pub mod field;
pub mod harness;
pub mod interp;
pub mod io;
pub mod kernels;
pub mod quadrature;
pub mod scalar;
pub mod tent;

pub use cube::{CubeSequence, DyadicCube, SubsetFamily, WhitneyBox};
pub use domain::{Ball, Domain};
pub use error::{Error, Result};
pub use exponent::{Exponent, ExponentTuple};
pub use field::{BoundaryField, HalfSpaceField, Samples};
pub use quadrature::AverageSpec;
pub use scalar::Real;
pub use tent::{NormResult, NormVariant, WhitneyAverages};

pub type Field = HalfSpaceField<f64>;
pub type Field32 = HalfSpaceField<f32>;
pub type Boundary = BoundaryField<f64>;
pub type Boundary32 = BoundaryField<f32>;
