#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Numerical sine-polarity calculus for origin-symmetric star bodies.

extern crate alloc;

pub mod body;
pub mod centroid;
mod cylinders;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod quadrature;
pub mod search;
pub mod sine_polar;

pub use body::{
    linear_image, polar, BodyDescriptor, BodyExt, BodyKind, BodyRef, Cylinder, LinearImage,
    PolarBody, StarBody,
};
pub use error::{Error, Result};
pub use linalg::LinearMap;
pub use quadrature::{build_rule, RuleKind, RuleSpec, SphericalRule};
