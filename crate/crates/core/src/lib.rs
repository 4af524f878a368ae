// negated float comparisons below are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical laboratory for quadratic Siegel disks.
//!
//! * [`rotation`]: continued fractions, Bruno sums and bounded-type approximants.
//! * [`linearization`]: linearizing power series, conformal radius estimates, curve sampling.
//! * [`curvegeom`]: pinching, quasicircle constants, curve distances, Hölder exponents.
//! * [`perturbation`]: searches for nearby rotation numbers whose invariant curves pinch.

pub mod bigcomplex;
pub mod curve;
pub mod curvegeom;
pub mod error;
pub mod hexfloat;
pub mod linearization;
pub mod perturbation;
pub mod rotation;

pub use curve::{CurveSource, SampledCurve};
pub use error::{Error, Result};
pub use linearization::{LinearizationSeries, LinearizeOptions};
pub use rotation::{ContinuedFraction, RotationNumber};
